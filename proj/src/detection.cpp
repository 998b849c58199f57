#include "darkscan/detection.hpp"

#include "darkscan/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace darkscan {

ThresholdConfig ThresholdConfig::uniform(double t) {
    ThresholdConfig cfg;
    for (Category c : dark_categories()) cfg.set(c, t);
    return cfg;
}

void ThresholdConfig::set(Category c, double t) {
    if (!is_dark(c)) throw InvalidArgument("Not Dark Pattern has no threshold");
    if (!std::isfinite(t) || t < 0.0 || t > 1.0)
        throw InvalidArgument(fmt::format("threshold {} for {} is outside [0, 1]", t, display_name(c)));
    values_[index_of(c)] = t;
}

ThresholdConfig thresholds_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw InvalidArgument("threshold file must be a JSON object");
    ThresholdConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        const Category c = parse_label(key);
        if (!value.is_number()) throw InvalidArgument("threshold for '" + key + "' is not a number");
        cfg.set(c, value.get<double>());
    }
    return cfg;
}

nlohmann::json thresholds_to_json(const ThresholdConfig& t) {
    nlohmann::json doc = nlohmann::json::object();
    for (Category c : dark_categories()) doc[std::string(display_name(c))] = t[c];
    return doc;
}

ThresholdConfig load_thresholds(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileUnreadable("cannot read thresholds " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(fmt::format("{}: {}", path.string(), e.what()));
    }
    return thresholds_from_json(doc);
}

std::vector<Category> flagged_list(const FlagSet& flags) {
    std::vector<Category> out;
    for (Category c : canonical_order()) {
        if (flags[index_of(c)]) out.push_back(c);
    }
    return out;
}

bool DetectionResult::any_flag() const noexcept {
    return std::any_of(flagged.begin(), flagged.end(), [](bool b) { return b; });
}

std::string_view mode_name(AggregationMode m) noexcept {
    return m == AggregationMode::ArgmaxFraction ? "argmax" : "mean";
}

AggregationMode parse_mode(std::string_view s) {
    if (s == "argmax") return AggregationMode::ArgmaxFraction;
    if (s == "mean") return AggregationMode::MeanProbability;
    throw InvalidArgument(fmt::format("unknown aggregation mode '{}' (expected argmax or mean)", s));
}

Category predict_category(const CategoryDistribution& dist) noexcept {
    return dist.argmax();
}

FlagSet flag(const CategoryDistribution& dist, const ThresholdConfig& t) noexcept {
    FlagSet out{};
    for (Category c : dark_categories()) out[index_of(c)] = dist[c] >= t[c];
    return out;
}

DetectionResult detect(TextSegment segment, const CategoryDistribution& dist, const ThresholdConfig& t) {
    return DetectionResult{std::move(segment), dist, predict_category(dist), flag(dist, t)};
}

std::vector<DetectionResult> detect_all(const std::vector<TextSegment>& segments, const ClassifierBackend& backend,
                                        const ThresholdConfig& t) {
    std::vector<std::string> texts;
    texts.reserve(segments.size());
    for (const auto& s : segments) texts.push_back(s.text);
    const auto dists = backend.classify_batch(texts);
    if (dists.size() != segments.size())
        throw ShapeMismatch(fmt::format("backend '{}' returned {} results for {} texts", backend.name(), dists.size(), texts.size()));
    std::vector<DetectionResult> out;
    out.reserve(segments.size());
    for (std::size_t k = 0; k < segments.size(); ++k) out.push_back(detect(segments[k], dists[k], t));
    return out;
}

SiteReport aggregate(const std::vector<DetectionResult>& results, AggregationMode mode, std::string site_id,
                     std::vector<std::string> page_urls) {
    if (results.empty()) throw EmptySite("site '" + site_id + "' produced no text segments");
    SiteReport r;
    r.site_id = std::move(site_id);
    r.page_urls = std::move(page_urls);
    r.n_segments = results.size();
    r.mode = mode;

    std::array<std::size_t, kNumCategories> counts{};
    CategoryValues sums{};
    for (const auto& res : results) {
        ++counts[index_of(res.predicted)];
        for (std::size_t k = 0; k < kNumCategories; ++k) sums[k] += res.distribution.probabilities()[k];
        if (res.any_flag()) r.flagged.push_back({res.segment, res.distribution.probabilities(), res.flagged});
    }
    const auto n = static_cast<double>(results.size());
    CategoryValues argmax{};
    for (std::size_t k = 0; k < kNumCategories; ++k) {
        argmax[k] = static_cast<double>(counts[k]) / n;
        r.mean_probabilities[k] = sums[k] / n;
    }
    r.fractions = mode == AggregationMode::ArgmaxFraction ? argmax : r.mean_probabilities;
    return r;
}

ComparisonReport compare_sites(const std::vector<SiteReport>& reports) {
    if (reports.size() < 2) throw InvalidArgument("comparison needs at least two reports");
    ComparisonReport cmp;
    cmp.mode = reports.front().mode;
    for (const auto& r : reports) {
        if (r.mode != cmp.mode)
            throw ModeMismatch(fmt::format("report '{}' uses mode {}, expected {}", r.site_id, mode_name(r.mode), mode_name(cmp.mode)));
        cmp.sites.push_back(r.site_id);
    }

    const std::size_t clean = index_of(Category::NotDarkPattern);
    std::vector<std::size_t> order(reports.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return reports[a].fractions[clean] > reports[b].fractions[clean]; });
    for (auto k : order) cmp.ranking.push_back(reports[k].site_id);

    for (Category c : canonical_order()) {
        CategoryComparison row;
        row.category = c;
        for (const auto& r : reports) row.values.push_back(r.fractions[index_of(c)]);
        const auto [lo, hi] = std::minmax_element(row.values.begin(), row.values.end());
        row.delta = *hi - *lo;
        const double best = is_dark(c) ? *lo : *hi;
        const auto winners = std::count(row.values.begin(), row.values.end(), best);
        if (winners > 1) {
            row.better = kTie;
        } else {
            const auto at = static_cast<std::size_t>(std::find(row.values.begin(), row.values.end(), best) - row.values.begin());
            row.better = reports[at].site_id;
        }
        if (c == Category::NotDarkPattern) cmp.overall = row.better;
        cmp.categories.push_back(std::move(row));
    }
    return cmp;
}

}  // namespace darkscan
