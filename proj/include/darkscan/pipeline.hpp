#pragma once

#include "darkscan/backend.hpp"
#include "darkscan/detection.hpp"
#include "darkscan/ingest.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace darkscan {

enum class BackendKind { Lexical, LogisticRegression, Transformer, Remote };

/// "lexical" | "lr" | "transformer" | "remote". Throws InvalidArgument.
[[nodiscard]] BackendKind parse_backend_kind(std::string_view s);

struct BackendOptions {
    BackendKind kind = BackendKind::Lexical;
    std::optional<std::filesystem::path> model;  // artifacts dir (transformer) or model file (lr)
    std::optional<std::string> endpoint;  // remote
    std::optional<std::filesystem::path> lexicon;  // lexical override
};

/// Throws InvalidArgument when a required option is missing, plus whatever
/// loading the backend throws (ArtifactLoadError, ...).
[[nodiscard]] BackendPtr make_backend(const BackendOptions& opts);

struct ScanOptions {
    ThresholdConfig thresholds;
    AggregationMode mode = AggregationMode::ArgmaxFraction;
    SegmentationRules rules;
    std::size_t jobs = 1;  // pages processed concurrently
};

/// Segments, classifies and aggregates the pages of one site. Pages with
/// empty html contribute no segments. Throws EmptySite when no page yields
/// a segment.
[[nodiscard]] SiteReport scan_site(const std::string& site_id, const std::vector<PageSource>& pages,
                                   const ClassifierBackend& backend, const ScanOptions& opts);

/// One report per site of a corpus/<site>/<page>.html tree, sorted by site.
[[nodiscard]] std::vector<SiteReport> scan_corpus(const std::filesystem::path& root, const ClassifierBackend& backend,
                                                  const ScanOptions& opts);

/// Runs fn(0..n-1) on up to `jobs` threads; rethrows the first failure.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace darkscan
