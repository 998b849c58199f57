#include "darkscan/error.hpp"
#include "darkscan/evaluation.hpp"
#include "darkscan/pipeline.hpp"
#include "darkscan/report.hpp"
#include "darkscan/service.hpp"
#include "darkscan/url.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

using namespace darkscan;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendFlags {
    std::string backend = "lexical";
    std::string model;
    std::string endpoint;
    std::string lexicon;

    void add(CLI::App* cmd, bool backend_required = false) {
        auto* opt = cmd->add_option("--backend", backend, "Classifier backend")
                        ->check(CLI::IsMember({"lexical", "lr", "transformer", "remote"}));
        if (backend_required) opt->required();
        else opt->capture_default_str();
        cmd->add_option("--model", model, "Model directory (transformer) or model-lr.json (lr); default $DARKSCAN_MODEL_DIR");
        cmd->add_option("--endpoint", endpoint, "Service base URL for the remote backend");
        cmd->add_option("--lexicon", lexicon, "Lexicon JSON for the lexical backend")->check(CLI::ExistingFile);
    }

    [[nodiscard]] BackendOptions options() const {
        BackendOptions o;
        o.kind = parse_backend_kind(backend);
        std::string m = model;
        if (m.empty() && o.kind == BackendKind::Transformer) {
            if (const char* env = std::getenv("DARKSCAN_MODEL_DIR")) m = env;
        }
        if (!m.empty()) o.model = m;
        if (!endpoint.empty()) o.endpoint = endpoint;
        if (!lexicon.empty()) o.lexicon = lexicon;
        if (o.kind == BackendKind::Transformer && !o.model) throw UsageError("--backend transformer needs --model <dir> or DARKSCAN_MODEL_DIR");
        if (o.kind == BackendKind::Remote && !o.endpoint) throw UsageError("--backend remote needs --endpoint <url>");
        return o;
    }

    [[nodiscard]] BackendPtr make() const {
        const auto o = options();
        if (o.kind == BackendKind::LogisticRegression && !o.model) throw UsageError("--backend lr needs --model <model-lr.json>");
        return make_backend(o);
    }
};

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw FileUnreadable("cannot write " + out_path);
    out << text;
    if (!out) throw FileUnreadable("cannot write " + out_path);
}

ThresholdConfig thresholds_or_default(const std::string& path) {
    return path.empty() ? ThresholdConfig{} : load_thresholds(path);
}

// For dataset commands: an lr backend without a saved model is trained on the split's training part.
BackendPtr backend_for_dataset(const BackendFlags& flags, const DataSplit& parts, std::uint64_t seed) {
    auto o = flags.options();
    if (o.kind == BackendKind::LogisticRegression && !o.model) {
        LRHyper hyper;
        hyper.seed = seed;
        auto model = train_lr_baseline(parts.train, parts.val, hyper);
        std::cerr << fmt::format("trained lr baseline on {} examples (val accuracy {})\n", parts.train.size(),
                                 format_decimal(model.val_accuracy));
        return std::make_shared<LRBackend>(std::move(model));
    }
    return make_backend(o);
}

std::vector<Category> predict_all(const ClassifierBackend& backend, const std::vector<LabeledExample>& data,
                                  std::vector<CategoryDistribution>* dists = nullptr) {
    std::vector<std::string> texts;
    for (const auto& e : data) texts.push_back(e.text);
    auto out = backend.classify_batch(texts);
    std::vector<Category> pred;
    for (const auto& d : out) pred.push_back(predict_category(d));
    if (dists) *dists = std::move(out);
    return pred;
}

std::vector<Category> gold_of(const std::vector<LabeledExample>& data) {
    std::vector<Category> gold;
    for (const auto& e : data) gold.push_back(e.label);
    return gold;
}

Dataset load_and_report(const std::string& path) {
    Dataset ds = load_dataset(path);
    for (const auto& r : ds.rejects) std::cerr << fmt::format("row {}: rejected ({}) label '{}'\n", r.row, r.reason, r.label);
    if (ds.examples.empty()) throw EmptyInput("dataset " + path + " has no usable rows");
    return ds;
}

volatile std::sig_atomic_t g_stop_requested = 0;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dark-pattern audit engine: extract page text, classify it, flag and report."};
    app.name("darkscan");
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    // scan
    auto* scan = app.add_subcommand("scan", "Scan pages and write a site report");
    std::vector<std::string> scan_urls, scan_files;
    std::string scan_corpus_dir, scan_thresholds, scan_mode = "argmax", scan_out, scan_format = "json", scan_site_id;
    std::size_t scan_jobs = std::max(1u, std::thread::hardware_concurrency());
    bool ignore_robots = false;
    BackendFlags scan_backend;
    auto* url_opt = scan->add_option("--url", scan_urls, "Page URL (repeatable)");
    auto* file_opt = scan->add_option("--file", scan_files, "HTML file (repeatable)")->check(CLI::ExistingFile);
    auto* corpus_opt = scan->add_option("--corpus", scan_corpus_dir, "Corpus directory laid out as <site>/<page>.html")
                           ->check(CLI::ExistingDirectory);
    url_opt->excludes(file_opt)->excludes(corpus_opt);
    file_opt->excludes(corpus_opt);
    scan_backend.add(scan);
    scan->add_option("--thresholds", scan_thresholds, "Threshold JSON file")->check(CLI::ExistingFile);
    scan->add_option("--mode", scan_mode, "Aggregation mode")->check(CLI::IsMember({"argmax", "mean"}))->capture_default_str();
    scan->add_option("--out", scan_out, "Write the report here instead of stdout");
    scan->add_option("--format", scan_format, "Report format")->check(CLI::IsMember({"json", "md"}))->capture_default_str();
    scan->add_option("--jobs", scan_jobs, "Pages processed concurrently")->check(CLI::PositiveNumber)->capture_default_str();
    scan->add_option("--site-id", scan_site_id, "Site id for --url/--file scans");
    scan->add_flag("--ignore-robots", ignore_robots, "Do not consult robots.txt");

    // classify
    auto* classify = app.add_subcommand("classify", "Classify one text");
    std::string classify_text, classify_thresholds, classify_format = "text";
    BackendFlags classify_backend;
    classify->add_option("--text", classify_text, "Text to classify")->required();
    classify_backend.add(classify);
    classify->add_option("--thresholds", classify_thresholds, "Threshold JSON file")->check(CLI::ExistingFile);
    classify->add_option("--format", classify_format, "Output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score a backend on a labeled dataset");
    std::string eval_dataset, eval_out, eval_on = "test";
    std::uint64_t eval_seed = 42;
    BackendFlags eval_backend;
    evaluate->add_option("--dataset", eval_dataset, "CSV with text,label columns")->required()->check(CLI::ExistingFile);
    eval_backend.add(evaluate);
    evaluate->add_option("--seed", eval_seed, "Split seed")->capture_default_str();
    evaluate->add_option("--on", eval_on, "Examples to score")->check(CLI::IsMember({"test", "all"}))->capture_default_str();
    evaluate->add_option("--out", eval_out, "Write metrics JSON here instead of stdout");

    // train-baseline
    auto* train = app.add_subcommand("train-baseline", "Train the TF-IDF logistic-regression baseline");
    std::string train_dataset, train_out = "model-lr.json";
    LRHyper hyper;
    train->add_option("--dataset", train_dataset, "CSV with text,label columns")->required()->check(CLI::ExistingFile);
    train->add_option("--seed", hyper.seed, "Split and shuffling seed")->capture_default_str();
    train->add_option("--epochs", hyper.epochs, "Training epochs")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--lr", hyper.learning_rate, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--l2", hyper.l2, "L2 penalty")->check(CLI::NonNegativeNumber)->capture_default_str();
    train->add_option("--batch-size", hyper.batch_size, "Mini-batch size")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--out", train_out, "Model file")->capture_default_str();

    // tune-thresholds
    auto* tune = app.add_subcommand("tune-thresholds", "Pick per-category thresholds on the validation split");
    std::string tune_dataset, tune_objective = "f1", tune_out;
    std::uint64_t tune_seed = 42;
    BackendFlags tune_backend;
    tune->add_option("--dataset", tune_dataset, "CSV with text,label columns")->required()->check(CLI::ExistingFile);
    tune_backend.add(tune, true);
    tune->add_option("--objective", tune_objective, "f1 or fbeta:<beta>")->capture_default_str();
    tune->add_option("--seed", tune_seed, "Split seed")->capture_default_str();
    tune->add_option("--out", tune_out, "Write thresholds JSON here instead of stdout");

    // compare
    auto* compare = app.add_subcommand("compare", "Compare site reports");
    std::vector<std::string> compare_files;
    std::string compare_format = "md", compare_out;
    compare->add_option("reports", compare_files, "Report JSON files")->required()->expected(2, -1)->check(CLI::ExistingFile);
    compare->add_option("--format", compare_format, "Output format")->check(CLI::IsMember({"json", "md"}))->capture_default_str();
    compare->add_option("--out", compare_out, "Write here instead of stdout");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the local HTTP service");
    std::string serve_bind = "127.0.0.1:8787", serve_thresholds, serve_mode = "argmax";
    std::vector<std::string> serve_origins;
    BackendFlags serve_backend;
    serve->add_option("--bind", serve_bind, "host:port to listen on")->capture_default_str();
    serve_backend.add(serve);
    serve->add_option("--thresholds", serve_thresholds, "Threshold JSON file")->check(CLI::ExistingFile);
    serve->add_option("--mode", serve_mode, "Aggregation mode for /v1/scan")->check(CLI::IsMember({"argmax", "mean"}))->capture_default_str();
    serve->add_option("--cors-origin", serve_origins, "Allowed CORS origin, '*' suffix wildcard (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*scan) {
            if (scan_urls.empty() && scan_files.empty() && scan_corpus_dir.empty())
                throw UsageError("scan needs one of --url, --file or --corpus");
            const auto backend = scan_backend.make();
            ScanOptions opts;
            opts.thresholds = thresholds_or_default(scan_thresholds);
            opts.mode = parse_mode(scan_mode);
            opts.jobs = scan_jobs;
            const ReportFormat format = parse_format(scan_format);
            if (!scan_corpus_dir.empty()) {
                write_output(render_reports(scan_corpus(scan_corpus_dir, *backend, opts), format), scan_out);
                return 0;
            }
            std::vector<PageSource> pages;
            std::string site = scan_site_id;
            if (!scan_urls.empty()) {
                FetchConfig fetch;
                fetch.respect_robots = !ignore_robots;
                for (const auto& u : scan_urls) pages.push_back(fetch_page(u, fetch));
                if (site.empty()) site = parse_http_url(scan_urls.front()).host;
            } else {
                for (const auto& f : scan_files) pages.push_back(load_page_file(f));
                if (site.empty()) site = std::filesystem::path(scan_files.front()).stem().string();
            }
            write_output(render_report(darkscan::scan_site(site, pages, *backend, opts), format), scan_out);
            return 0;
        }

        if (*classify) {
            const auto backend = classify_backend.make();
            const auto dist = backend->classify(classify_text);
            const auto flags = flag(dist, thresholds_or_default(classify_thresholds));
            if (classify_format == "json") {
                nlohmann::ordered_json doc;
                nlohmann::ordered_json probs = nlohmann::ordered_json::object();
                for (Category c : canonical_order()) probs[std::string(display_name(c))] = dist[c];
                doc["probabilities"] = probs;
                doc["predicted"] = std::string(display_name(predict_category(dist)));
                nlohmann::ordered_json fl = nlohmann::ordered_json::array();
                for (Category c : flagged_list(flags)) fl.push_back(std::string(display_name(c)));
                doc["flagged"] = fl;
                std::cout << dump_json(doc);
            } else {
                for (Category c : canonical_order()) std::cout << fmt::format("{:<17} {}\n", display_name(c), format_decimal(dist[c]));
                std::cout << fmt::format("Predicted: {}\n", display_name(predict_category(dist)));
                std::vector<std::string> names;
                for (Category c : flagged_list(flags)) names.emplace_back(display_name(c));
                std::cout << fmt::format("Flagged: {}\n", names.empty() ? "none" : fmt::format("{}", fmt::join(names, ", ")));
            }
            return 0;
        }

        if (*evaluate) {
            const Dataset ds = load_and_report(eval_dataset);
            const DataSplit parts = split(ds.examples, {}, eval_seed);
            const auto backend = backend_for_dataset(eval_backend, parts, eval_seed);
            const auto& scored = eval_on == "all" ? ds.examples : parts.test;
            const auto metrics = compute_metrics(predict_all(*backend, scored), gold_of(scored));
            write_output(dump_json(metrics_to_json(metrics)), eval_out);
            return 0;
        }

        if (*train) {
            const Dataset ds = load_and_report(train_dataset);
            const DataSplit parts = split(ds.examples, {}, hyper.seed);
            const LRModel model = train_lr_baseline(parts.train, parts.val, hyper);
            save_lr_model(model, train_out);
            const LRBackend backend(model);
            const auto metrics = compute_metrics(predict_all(backend, parts.test), gold_of(parts.test));
            nlohmann::ordered_json doc;
            doc["model"] = train_out;
            doc["train_size"] = parts.train.size();
            doc["val_size"] = parts.val.size();
            doc["test_size"] = parts.test.size();
            doc["vocabulary_size"] = model.vectorizer.size();
            doc["final_loss"] = model.loss_history.back();
            doc["val_accuracy"] = model.val_accuracy;
            doc["test"] = metrics_to_json(metrics);
            std::cout << dump_json(doc);
            return 0;
        }

        if (*tune) {
            const ThresholdObjective objective = ThresholdObjective::parse(tune_objective);
            const Dataset ds = load_and_report(tune_dataset);
            const DataSplit parts = split(ds.examples, {}, tune_seed);
            const auto backend = backend_for_dataset(tune_backend, parts, tune_seed);
            std::vector<CategoryDistribution> dists;
            (void)predict_all(*backend, parts.val, &dists);
            std::vector<ScoredExample> val;
            for (std::size_t k = 0; k < dists.size(); ++k) val.push_back({dists[k], parts.val[k].label});
            const auto tuned = tune_thresholds(val, objective);
            for (const auto& [name, note] : tuned.notes) std::cerr << fmt::format("{}: {}\n", name, note);
            nlohmann::ordered_json doc = nlohmann::ordered_json::object();
            for (Category c : dark_categories()) doc[std::string(display_name(c))] = tuned.thresholds[c];
            write_output(dump_json(doc), tune_out);
            return 0;
        }

        if (*compare) {
            std::vector<SiteReport> reports;
            for (const auto& f : compare_files) reports.push_back(load_report(f));
            write_output(render_comparison(compare_sites(reports), parse_format(compare_format)), compare_out);
            return 0;
        }

        if (*serve) {
            ServiceConfig cfg;
            parse_bind_address(serve_bind, cfg);
            cfg.mode = parse_mode(serve_mode);
            if (!serve_origins.empty()) cfg.cors_origins = serve_origins;
            const auto backend = serve_backend.make();

            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);

            Service service(backend, thresholds_or_default(serve_thresholds), cfg);
            service.bind();
            std::cout << fmt::format("listening on http://{}:{} (backend {})\n", cfg.host, service.port(), backend->name());
            std::cout.flush();
            std::thread waiter([&] {
                int sig = 0;
                sigwait(&signals, &sig);
                g_stop_requested = 1;
                service.stop();
            });
            service.listen();
            if (!g_stop_requested) pthread_kill(waiter.native_handle(), SIGTERM);
            waiter.join();
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "darkscan: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    } catch (const InvalidArgument& e) {
        std::cerr << "darkscan: " << e.what() << "\n";
        return kUsageError;
    } catch (const EmptySite& e) {
        std::cerr << "darkscan: EmptySite: " << e.what() << "\n";
        return kRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "darkscan: " << e.what() << "\n";
        return kRuntimeError;
    }
    return 0;
}
