#pragma once

#include "darkscan/backend.hpp"
#include "darkscan/distribution.hpp"
#include "darkscan/ingest.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace darkscan {

inline constexpr double kDefaultThreshold = 0.5;

/// Per-category flagging thresholds. The NotDarkPattern slot is unused.
class ThresholdConfig {
public:
    ThresholdConfig() { values_.fill(kDefaultThreshold); }
    [[nodiscard]] static ThresholdConfig uniform(double t);

    [[nodiscard]] double operator[](Category c) const noexcept { return values_[index_of(c)]; }
    /// Throws InvalidArgument for NotDarkPattern or a value outside [0, 1].
    void set(Category c, double t);

    friend bool operator==(const ThresholdConfig&, const ThresholdConfig&) = default;

private:
    std::array<double, kNumCategories> values_{};
};

/// {"<display name>": number, ...}; missing keys keep the default.
/// Throws InvalidArgument / UnknownLabel.
[[nodiscard]] ThresholdConfig thresholds_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json thresholds_to_json(const ThresholdConfig& t);
[[nodiscard]] ThresholdConfig load_thresholds(const std::filesystem::path& path);

/// Flag set as a canonical-order bitmap (only dark categories can be set).
using FlagSet = std::array<bool, kNumCategories>;

[[nodiscard]] std::vector<Category> flagged_list(const FlagSet& flags);

struct DetectionResult {
    TextSegment segment;
    CategoryDistribution distribution = CategoryDistribution::uniform();
    Category predicted = Category::ForcedAction;
    FlagSet flagged{};

    [[nodiscard]] bool any_flag() const noexcept;
};

enum class AggregationMode { ArgmaxFraction, MeanProbability };

[[nodiscard]] std::string_view mode_name(AggregationMode m) noexcept;  // "argmax" / "mean"
/// Throws InvalidArgument.
[[nodiscard]] AggregationMode parse_mode(std::string_view s);

using CategoryValues = std::array<double, kNumCategories>;

/// Evidence kept in a report for one flagged segment.
struct FlaggedSegment {
    TextSegment segment;
    CategoryValues probabilities{};
    FlagSet categories{};
};

struct SiteReport {
    std::string site_id;
    std::vector<std::string> page_urls;
    std::size_t n_segments = 0;
    AggregationMode mode = AggregationMode::ArgmaxFraction;
    // The headline values: argmax shares in ArgmaxFraction mode, mean
    // probabilities in MeanProbability mode.
    CategoryValues fractions{};
    CategoryValues mean_probabilities{};
    std::vector<FlaggedSegment> flagged;  // document order
};

[[nodiscard]] Category predict_category(const CategoryDistribution& dist) noexcept;

/// {c dark | dist[c] >= t[c]}.
[[nodiscard]] FlagSet flag(const CategoryDistribution& dist, const ThresholdConfig& t) noexcept;

[[nodiscard]] DetectionResult detect(TextSegment segment, const CategoryDistribution& dist, const ThresholdConfig& t);

/// Classifies the segments through `backend` and applies the thresholds.
[[nodiscard]] std::vector<DetectionResult> detect_all(const std::vector<TextSegment>& segments,
                                                      const ClassifierBackend& backend, const ThresholdConfig& t);

/// Builds a report from the results of all pages of one site.
/// Throws EmptySite when `results` is empty.
[[nodiscard]] SiteReport aggregate(const std::vector<DetectionResult>& results, AggregationMode mode,
                                   std::string site_id = {}, std::vector<std::string> page_urls = {});

struct CategoryComparison {
    Category category = Category::ForcedAction;
    std::vector<double> values;  // one per site, input order
    double delta = 0.0;  // max - min
    std::string better;  // site id, or "tie"
};

struct ComparisonReport {
    AggregationMode mode = AggregationMode::ArgmaxFraction;
    std::vector<std::string> sites;  // input order
    std::vector<std::string> ranking;  // cleanest first (by NotDarkPattern value, stable)
    std::string overall;  // site id, or "tie"
    std::vector<CategoryComparison> categories;  // canonical order
};

inline constexpr std::string_view kTie = "tie";

/// Throws InvalidArgument for fewer than two reports, ModeMismatch when the
/// reports were aggregated differently.
[[nodiscard]] ComparisonReport compare_sites(const std::vector<SiteReport>& reports);

}  // namespace darkscan
