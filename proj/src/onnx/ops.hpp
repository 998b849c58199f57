#pragma once

#include "darkscan/onnx_graph.hpp"

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace darkscan::onnx::detail {

struct Attribute {
    std::optional<float> f;
    std::optional<std::int64_t> i;
    std::optional<std::string> s;
    std::optional<Tensor> t;
    std::vector<float> floats;
    std::vector<std::int64_t> ints;
    bool has_ints = false;
    bool has_floats = false;
};

struct NodeDef {
    std::string op_type;
    std::string name;
    std::vector<std::string> inputs;  // "" marks an omitted optional input
    std::vector<std::string> outputs;
    std::unordered_map<std::string, Attribute> attributes;

    [[nodiscard]] const Attribute* attribute(const std::string& key) const;
    [[nodiscard]] std::int64_t int_attr(const std::string& key, std::int64_t fallback) const;
    [[nodiscard]] float float_attr(const std::string& key, float fallback) const;
    [[nodiscard]] std::string string_attr(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] std::optional<std::vector<std::int64_t>> ints_attr(const std::string& key) const;
};

struct OpContext {
    const NodeDef& node;
    std::vector<const Tensor*> inputs;  // nullptr for omitted optional inputs
    std::int64_t opset;

    [[nodiscard]] const Tensor& in(std::size_t k) const;
    [[nodiscard]] const Tensor* optional_in(std::size_t k) const {
        return k < inputs.size() ? inputs[k] : nullptr;
    }
};

using OpFn = std::function<std::vector<Tensor>(const OpContext&)>;

[[nodiscard]] const std::unordered_map<std::string, OpFn>& op_registry();

}  // namespace darkscan::onnx::detail
