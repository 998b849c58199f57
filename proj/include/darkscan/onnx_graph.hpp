#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace darkscan::onnx {

using Shape = std::vector<std::int64_t>;

enum class DType { Float, Int64, Bool };

/// Dense row-major tensor. Float data lives in `f`; Int64 and Bool data
/// live in `i` (bools as 0/1). Narrower integer and double inputs are
/// widened/narrowed to these three types on load.
struct Tensor {
    DType dtype = DType::Float;
    Shape shape;
    std::vector<float> f;
    std::vector<std::int64_t> i;

    [[nodiscard]] static Tensor floats(Shape shape, std::vector<float> data);
    [[nodiscard]] static Tensor int64s(Shape shape, std::vector<std::int64_t> data);
    [[nodiscard]] static Tensor bools(Shape shape, std::vector<std::int64_t> data);

    [[nodiscard]] std::int64_t numel() const noexcept;
    [[nodiscard]] bool is_float() const noexcept { return dtype == DType::Float; }
};

[[nodiscard]] std::int64_t numel(const Shape& shape) noexcept;

using TensorMap = std::unordered_map<std::string, Tensor>;

// An ONNX model loaded for CPU inference by a small reference interpreter.
// Covers the default-domain operators that transformer encoders exported
// from common frameworks use (see supported_operators()). Execution is
// single-threaded and bitwise deterministic; a loaded Graph is immutable
// and safe to run from several threads at once.
class Graph {
public:
    /// Throws ArtifactLoadError on unreadable/invalid files or operators
    /// outside supported_operators().
    [[nodiscard]] static Graph load(const std::filesystem::path& path);
    [[nodiscard]] static Graph parse(std::string_view bytes, const std::filesystem::path& base_dir = {});

    /// Graph inputs that are not initializers.
    [[nodiscard]] const std::vector<std::string>& input_names() const noexcept;
    [[nodiscard]] const std::vector<std::string>& output_names() const noexcept;
    [[nodiscard]] std::int64_t opset() const noexcept;

    /// Runs the graph and returns every graph output. Throws ShapeMismatch
    /// for inconsistent shapes, InvalidArgument for missing feeds.
    [[nodiscard]] TensorMap run(const TensorMap& feeds) const;

    [[nodiscard]] static const std::vector<std::string>& supported_operators();

    struct Impl;

private:
    std::shared_ptr<const Impl> impl_;
};

}  // namespace darkscan::onnx
