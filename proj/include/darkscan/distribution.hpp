#pragma once

#include "darkscan/taxonomy.hpp"

#include <array>
#include <span>

namespace darkscan {

inline constexpr double kDistributionTolerance = 1e-6;

/// A probability vector over the eight categories, indexed canonically.
/// Always holds all eight entries, each in [0, 1], summing to 1 within
/// kDistributionTolerance.
class CategoryDistribution {
public:
    using Probabilities = std::array<double, kNumCategories>;

    /// Validates and stores. Throws InvalidDistribution.
    [[nodiscard]] static CategoryDistribution from_probabilities(const Probabilities& probs);

    /// Rescales non-negative finite weights to sum to one. Throws InvalidDistribution
    /// when all weights are zero or any is negative/non-finite.
    [[nodiscard]] static CategoryDistribution normalized(const Probabilities& weights);

    [[nodiscard]] static CategoryDistribution uniform() noexcept;

    [[nodiscard]] double operator[](Category c) const noexcept { return probs_[index_of(c)]; }
    [[nodiscard]] const Probabilities& probabilities() const noexcept { return probs_; }

    /// Highest-probability category; ties go to the earliest in canonical order.
    [[nodiscard]] Category argmax() const noexcept;

    friend bool operator==(const CategoryDistribution&, const CategoryDistribution&) = default;

private:
    CategoryDistribution() = default;
    Probabilities probs_{};
};

/// probs[i] = exp(scores[i]/T) / sum_j exp(scores[j]/T), evaluated with
/// max-subtraction so that any finite scores and any T > 0 are safe.
/// Throws NonFinite for NaN/inf scores and InvalidArgument for T <= 0 or a
/// score count other than eight.
[[nodiscard]] CategoryDistribution softmax(std::span<const double> scores, double temperature = 1.0);

}  // namespace darkscan
