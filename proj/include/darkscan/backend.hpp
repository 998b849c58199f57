#pragma once

#include "darkscan/distribution.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace darkscan {

/// Anything that maps text segments to category distributions.
///
/// Implementations return exactly one distribution per input, in input
/// order, are deterministic for fixed state, and must tolerate concurrent
/// classify_batch calls once constructed.
class ClassifierBackend {
public:
    virtual ~ClassifierBackend() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual std::vector<CategoryDistribution> classify_batch(std::span<const std::string> texts) const = 0;

    [[nodiscard]] CategoryDistribution classify(const std::string& text) const {
        return classify_batch(std::span<const std::string>(&text, 1)).front();
    }
};

using BackendPtr = std::shared_ptr<const ClassifierBackend>;

}  // namespace darkscan
