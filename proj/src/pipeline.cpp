#include "darkscan/pipeline.hpp"

#include "darkscan/error.hpp"
#include "darkscan/evaluation.hpp"
#include "darkscan/lexicon.hpp"
#include "darkscan/transformer.hpp"

#include <fmt/format.h>

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace darkscan {

BackendKind parse_backend_kind(std::string_view s) {
    if (s == "lexical") return BackendKind::Lexical;
    if (s == "lr") return BackendKind::LogisticRegression;
    if (s == "transformer") return BackendKind::Transformer;
    if (s == "remote") return BackendKind::Remote;
    throw InvalidArgument(fmt::format("unknown backend '{}' (expected lexical, lr, transformer or remote)", s));
}

BackendPtr make_backend(const BackendOptions& opts) {
    switch (opts.kind) {
        case BackendKind::Lexical:
            return std::make_shared<LexicalBackend>(opts.lexicon ? load_lexicon(*opts.lexicon) : default_lexicon());
        case BackendKind::LogisticRegression: {
            if (!opts.model) throw InvalidArgument("the lr backend needs --model <model-lr.json>");
            auto path = *opts.model;
            if (std::filesystem::is_directory(path)) path /= "model-lr.json";
            return std::make_shared<LRBackend>(load_lr_model(path));
        }
        case BackendKind::Transformer:
            if (!opts.model) throw InvalidArgument("the transformer backend needs --model <dir> or DARKSCAN_MODEL_DIR");
            return std::make_shared<TransformerBackend>(load_artifacts(*opts.model));
        case BackendKind::Remote:
            if (!opts.endpoint) throw InvalidArgument("the remote backend needs --endpoint <url>");
            return std::make_shared<RemoteBackend>(*opts.endpoint);
    }
    throw InvalidArgument("unknown backend");
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < jobs; ++t) {
        workers.emplace_back([&] {
            for (std::size_t k = next++; k < n && !failed; k = next++) {
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

SiteReport scan_site(const std::string& site_id, const std::vector<PageSource>& pages, const ClassifierBackend& backend,
                     const ScanOptions& opts) {
    std::vector<std::vector<DetectionResult>> per_page(pages.size());
    parallel_for(pages.size(), opts.jobs, [&](std::size_t k) {
        std::vector<TextSegment> segments;
        try {
            segments = extract_segments(pages[k], opts.rules);
        } catch (const ParseFailure&) {
            return;  // empty page
        }
        if (!segments.empty()) per_page[k] = detect_all(segments, backend, opts.thresholds);
    });
    std::vector<DetectionResult> all;
    std::vector<std::string> urls;
    for (std::size_t k = 0; k < pages.size(); ++k) {
        urls.push_back(pages[k].url);
        for (auto& r : per_page[k]) all.push_back(std::move(r));
    }
    return aggregate(all, opts.mode, site_id, std::move(urls));
}

std::vector<SiteReport> scan_corpus(const std::filesystem::path& root, const ClassifierBackend& backend,
                                    const ScanOptions& opts) {
    std::vector<SiteReport> reports;
    for (const auto& site : list_corpus(root)) {
        std::vector<PageSource> pages;
        for (const auto& p : site.pages) pages.push_back(load_page_file(p));
        reports.push_back(scan_site(site.site_id, pages, backend, opts));
    }
    return reports;
}

}  // namespace darkscan
