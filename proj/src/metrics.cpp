#include "darkscan/error.hpp"
#include "darkscan/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace darkscan {

double f_beta(std::size_t tp, std::size_t fp, std::size_t fn, double beta) {
    const double b2 = beta * beta;
    const double denom = (1.0 + b2) * static_cast<double>(tp) + b2 * static_cast<double>(fn) + static_cast<double>(fp);
    return denom == 0.0 ? 0.0 : (1.0 + b2) * static_cast<double>(tp) / denom;
}

EvalMetrics compute_metrics(const std::vector<Category>& predicted, const std::vector<Category>& gold) {
    if (predicted.size() != gold.size())
        throw LengthMismatch(fmt::format("{} predictions for {} gold labels", predicted.size(), gold.size()));
    if (gold.empty()) throw EmptyInput("no examples to score");

    EvalMetrics m;
    m.n = gold.size();
    for (std::size_t k = 0; k < gold.size(); ++k) ++m.confusion[index_of(gold[k])][index_of(predicted[k])];

    std::size_t correct = 0;
    std::array<std::size_t, kNumCategories> predicted_count{};
    for (std::size_t g = 0; g < kNumCategories; ++g) {
        correct += m.confusion[g][g];
        for (std::size_t p = 0; p < kNumCategories; ++p) {
            m.support[g] += m.confusion[g][p];
            predicted_count[p] += m.confusion[g][p];
        }
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n);

    double f1_sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        const std::size_t tp = m.confusion[c][c];
        auto& pc = m.per_class[c];
        pc.precision = predicted_count[c] == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted_count[c]);
        pc.recall = m.support[c] == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.support[c]);
        pc.f1 = pc.precision + pc.recall == 0.0 ? 0.0 : 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall);
        if (m.support[c] > 0 || predicted_count[c] > 0) {
            f1_sum += pc.f1;
            ++present;
        }
    }
    m.macro_f1 = f1_sum / static_cast<double>(present);
    return m;
}

nlohmann::ordered_json metrics_to_json(const EvalMetrics& m) {
    nlohmann::ordered_json doc;
    doc["accuracy"] = m.accuracy;
    doc["macro_f1"] = m.macro_f1;
    doc["n"] = m.n;
    nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
    for (Category c : canonical_order()) {
        const auto& pc = m.per_class[index_of(c)];
        per_class[std::string(display_name(c))] = {
            {"precision", pc.precision}, {"recall", pc.recall}, {"f1", pc.f1}, {"support", m.support[index_of(c)]}};
    }
    doc["per_class"] = std::move(per_class);
    nlohmann::ordered_json labels = nlohmann::ordered_json::array();
    for (Category c : canonical_order()) labels.push_back(std::string(display_name(c)));
    doc["labels"] = std::move(labels);
    doc["confusion"] = m.confusion;
    return doc;
}

ThresholdObjective ThresholdObjective::parse(std::string_view s) {
    if (s == "f1") return {1.0};
    if (s.starts_with("fbeta:")) {
        const std::string_view num = s.substr(6);
        double beta = 0.0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), beta);
        if (ec == std::errc{} && ptr == num.data() + num.size() && std::isfinite(beta) && beta > 0.0) return {beta};
    }
    throw InvalidArgument(fmt::format("objective '{}' must be f1 or fbeta:<positive number>", s));
}

double flag_objective(const std::vector<ScoredExample>& val, Category c, double t, double beta) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& ex : val) {
        const bool flagged = ex.distribution[c] >= t;
        const bool positive = ex.gold == c;
        if (flagged && positive) ++tp;
        else if (flagged) ++fp;
        else if (positive) ++fn;
    }
    return f_beta(tp, fp, fn, beta);
}

TunedThresholds tune_thresholds(const std::vector<ScoredExample>& val, const ThresholdObjective& objective) {
    if (val.empty()) throw EmptyInput("no validation results to tune on");
    TunedThresholds out;
    for (Category c : dark_categories()) {
        const bool has_positive = std::any_of(val.begin(), val.end(), [c](const ScoredExample& e) { return e.gold == c; });
        if (!has_positive) {
            out.thresholds.set(c, 1.0);
            out.objective[index_of(c)] = 0.0;
            out.notes[std::string(display_name(c))] = "no positive examples; threshold 1.0 disables flagging in practice";
            continue;
        }
        std::vector<double> candidates;
        candidates.reserve(val.size());
        for (const auto& e : val) candidates.push_back(e.distribution[c]);
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        double best_t = candidates.back();
        double best = -1.0;
        // Walking downward with a strict comparison keeps the higher threshold on ties.
        for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
            const double score = flag_objective(val, c, *it, objective.beta);
            if (score > best) {
                best = score;
                best_t = *it;
            }
        }
        out.thresholds.set(c, std::clamp(best_t, 0.0, 1.0));
        out.objective[index_of(c)] = best;
    }
    return out;
}

}  // namespace darkscan
