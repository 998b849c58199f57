#include "darkscan/distribution.hpp"

#include "darkscan/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace darkscan {

CategoryDistribution CategoryDistribution::from_probabilities(const Probabilities& probs) {
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0)
            throw InvalidDistribution("probability out of [0,1]: " + std::to_string(p));
        sum += p;
    }
    if (std::abs(sum - 1.0) > kDistributionTolerance)
        throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
    CategoryDistribution d;
    d.probs_ = probs;
    return d;
}

CategoryDistribution CategoryDistribution::normalized(const Probabilities& weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw InvalidDistribution("invalid weight " + std::to_string(w));
        sum += w;
    }
    if (sum <= 0.0) throw InvalidDistribution("all weights are zero");
    CategoryDistribution d;
    for (std::size_t i = 0; i < kNumCategories; ++i) d.probs_[i] = weights[i] / sum;
    return d;
}

CategoryDistribution CategoryDistribution::uniform() noexcept {
    CategoryDistribution d;
    d.probs_.fill(1.0 / static_cast<double>(kNumCategories));
    return d;
}

Category CategoryDistribution::argmax() const noexcept {
    // max_element returns the first maximum, which is the canonical tie-break.
    auto it = std::max_element(probs_.begin(), probs_.end());
    return static_cast<Category>(it - probs_.begin());
}

CategoryDistribution softmax(std::span<const double> scores, double temperature) {
    if (scores.size() != kNumCategories)
        throw InvalidArgument("softmax expects 8 scores, got " + std::to_string(scores.size()));
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw InvalidArgument("softmax temperature must be positive");
    for (double s : scores) {
        if (!std::isfinite(s)) throw NonFinite("non-finite score passed to softmax");
    }
    const double max = *std::max_element(scores.begin(), scores.end());
    CategoryDistribution::Probabilities weights{};
    for (std::size_t i = 0; i < kNumCategories; ++i) weights[i] = std::exp((scores[i] - max) / temperature);
    return CategoryDistribution::normalized(weights);
}

}  // namespace darkscan
