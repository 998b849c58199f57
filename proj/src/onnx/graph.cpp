#include "darkscan/onnx_graph.hpp"

#include "darkscan/error.hpp"
#include "ops.hpp"
#include "onnx.pb.h"

#include <fmt/format.h>
#include <google/protobuf/io/coded_stream.h>

#include <climits>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace darkscan::onnx {

std::int64_t numel(const Shape& shape) noexcept {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

Tensor Tensor::floats(Shape shape, std::vector<float> data) {
    Tensor t;
    t.dtype = DType::Float;
    t.shape = std::move(shape);
    t.f = std::move(data);
    return t;
}

Tensor Tensor::int64s(Shape shape, std::vector<std::int64_t> data) {
    Tensor t;
    t.dtype = DType::Int64;
    t.shape = std::move(shape);
    t.i = std::move(data);
    return t;
}

Tensor Tensor::bools(Shape shape, std::vector<std::int64_t> data) {
    Tensor t = int64s(std::move(shape), std::move(data));
    t.dtype = DType::Bool;
    return t;
}

std::int64_t Tensor::numel() const noexcept {
    return onnx::numel(shape);
}

struct Graph::Impl {
    std::vector<detail::NodeDef> nodes;
    TensorMap initializers;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::int64_t opset = 0;
    // For each node, the value names whose last use is that node.
    std::vector<std::vector<std::string>> release_after;
};

namespace {

float half_to_float(std::uint16_t h) {
    const std::uint32_t sign = (h & 0x8000u) << 16;
    std::uint32_t exp = (h >> 10) & 0x1Fu;
    std::uint32_t mant = h & 0x3FFu;
    std::uint32_t bits;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;
        } else {
            exp = 127 - 15 + 1;
            while ((mant & 0x400u) == 0) {
                mant <<= 1;
                --exp;
            }
            mant &= 0x3FFu;
            bits = sign | (exp << 23) | (mant << 13);
        }
    } else if (exp == 31) {
        bits = sign | 0x7F800000u | (mant << 13);
    } else {
        bits = sign | ((exp + 127 - 15) << 23) | (mant << 13);
    }
    float out;
    std::memcpy(&out, &bits, sizeof out);
    return out;
}

float bf16_to_float(std::uint16_t h) {
    std::uint32_t bits = static_cast<std::uint32_t>(h) << 16;
    float out;
    std::memcpy(&out, &bits, sizeof out);
    return out;
}

template <class T>
std::vector<T> unpack_raw(const std::string& raw, std::int64_t count, const std::string& name) {
    if (raw.size() != static_cast<std::size_t>(count) * sizeof(T))
        throw ArtifactLoadError(fmt::format("tensor '{}' raw data has {} bytes, expected {}", name, raw.size(), count * sizeof(T)));
    std::vector<T> out(static_cast<std::size_t>(count));
    if (count > 0) std::memcpy(out.data(), raw.data(), raw.size());
    return out;
}

std::string read_external(const ::onnx::TensorProto& proto, const std::filesystem::path& base_dir) {
    std::string location;
    std::int64_t offset = 0, length = -1;
    for (const auto& kv : proto.external_data()) {
        if (kv.key() == "location") location = kv.value();
        else if (kv.key() == "offset") offset = std::stoll(kv.value());
        else if (kv.key() == "length") length = std::stoll(kv.value());
    }
    const auto path = base_dir / location;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactLoadError("cannot open external tensor data " + path.string());
    in.seekg(0, std::ios::end);
    const std::int64_t size = in.tellg();
    if (length < 0) length = size - offset;
    if (offset < 0 || offset + length > size) throw ArtifactLoadError("external tensor data out of range in " + path.string());
    std::string buf(static_cast<std::size_t>(length), '\0');
    in.seekg(offset);
    in.read(buf.data(), length);
    return buf;
}

Tensor convert_tensor(const ::onnx::TensorProto& proto, const std::filesystem::path& base_dir) {
    Shape shape(proto.dims().begin(), proto.dims().end());
    const std::int64_t count = numel(shape);
    const std::string& name = proto.name();
    std::string raw;
    bool has_raw = proto.has_raw_data();
    if (proto.data_location() == ::onnx::TensorProto::EXTERNAL) {
        raw = read_external(proto, base_dir);
        has_raw = true;
    } else if (has_raw) {
        raw = proto.raw_data();
    }

    using TP = ::onnx::TensorProto;
    switch (proto.data_type()) {
        case TP::FLOAT:
            if (has_raw) return Tensor::floats(shape, unpack_raw<float>(raw, count, name));
            return Tensor::floats(shape, {proto.float_data().begin(), proto.float_data().end()});
        case TP::DOUBLE: {
            std::vector<double> d = has_raw ? unpack_raw<double>(raw, count, name)
                                            : std::vector<double>(proto.double_data().begin(), proto.double_data().end());
            return Tensor::floats(shape, std::vector<float>(d.begin(), d.end()));
        }
        case TP::FLOAT16:
        case TP::BFLOAT16: {
            std::vector<std::uint16_t> h;
            if (has_raw) h = unpack_raw<std::uint16_t>(raw, count, name);
            else for (auto v : proto.int32_data()) h.push_back(static_cast<std::uint16_t>(v));
            std::vector<float> f(h.size());
            for (std::size_t k = 0; k < h.size(); ++k)
                f[k] = proto.data_type() == TP::FLOAT16 ? half_to_float(h[k]) : bf16_to_float(h[k]);
            return Tensor::floats(shape, std::move(f));
        }
        case TP::INT64:
            if (has_raw) return Tensor::int64s(shape, unpack_raw<std::int64_t>(raw, count, name));
            return Tensor::int64s(shape, {proto.int64_data().begin(), proto.int64_data().end()});
        case TP::INT32: {
            std::vector<std::int32_t> v = has_raw ? unpack_raw<std::int32_t>(raw, count, name)
                                                  : std::vector<std::int32_t>(proto.int32_data().begin(), proto.int32_data().end());
            return Tensor::int64s(shape, std::vector<std::int64_t>(v.begin(), v.end()));
        }
        case TP::BOOL:
        case TP::UINT8:
        case TP::INT8: {
            std::vector<std::int64_t> v;
            if (has_raw) {
                if (raw.size() != static_cast<std::size_t>(count)) throw ArtifactLoadError("tensor '" + name + "' raw data size mismatch");
                for (char c : raw) {
                    v.push_back(proto.data_type() == TP::INT8 ? static_cast<std::int64_t>(static_cast<std::int8_t>(c))
                                                              : static_cast<std::int64_t>(static_cast<std::uint8_t>(c)));
                }
            } else {
                v.assign(proto.int32_data().begin(), proto.int32_data().end());
            }
            if (proto.data_type() == TP::BOOL) {
                for (auto& x : v) x = x != 0 ? 1 : 0;
                return Tensor::bools(shape, std::move(v));
            }
            return Tensor::int64s(shape, std::move(v));
        }
        default:
            throw ArtifactLoadError(fmt::format("tensor '{}' has unsupported element type {}", name, proto.data_type()));
    }
}

detail::Attribute convert_attribute(const ::onnx::AttributeProto& a, const std::filesystem::path& base_dir) {
    detail::Attribute out;
    using AP = ::onnx::AttributeProto;
    switch (a.type()) {
        case AP::FLOAT: out.f = a.f(); break;
        case AP::INT: out.i = a.i(); break;
        case AP::STRING: out.s = a.s(); break;
        case AP::TENSOR: out.t = convert_tensor(a.t(), base_dir); break;
        case AP::FLOATS:
            out.floats.assign(a.floats().begin(), a.floats().end());
            out.has_floats = true;
            break;
        case AP::INTS:
            out.ints.assign(a.ints().begin(), a.ints().end());
            out.has_ints = true;
            break;
        default:
            // Graph-valued and other attribute kinds are not needed by any supported operator.
            break;
    }
    return out;
}

}  // namespace

Graph Graph::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactLoadError("cannot open model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.parent_path());
}

Graph Graph::parse(std::string_view bytes, const std::filesystem::path& base_dir) {
    ::onnx::ModelProto model;
    google::protobuf::io::CodedInputStream stream(reinterpret_cast<const std::uint8_t*>(bytes.data()),
                                                  static_cast<int>(bytes.size()));
    stream.SetTotalBytesLimit(INT_MAX);
    if (!model.ParseFromCodedStream(&stream) || !model.has_graph())
        throw ArtifactLoadError("model file is not a valid ONNX model");

    auto impl = std::make_shared<Impl>();
    for (const auto& op : model.opset_import()) {
        if (op.domain().empty() || op.domain() == "ai.onnx") impl->opset = op.version();
    }
    if (impl->opset == 0) impl->opset = 13;

    const auto& g = model.graph();
    for (const auto& init : g.initializer()) impl->initializers.emplace(init.name(), convert_tensor(init, base_dir));
    for (const auto& in : g.input()) {
        if (!impl->initializers.contains(in.name())) impl->inputs.push_back(in.name());
    }
    for (const auto& out : g.output()) impl->outputs.push_back(out.name());

    const auto& registry = detail::op_registry();
    std::vector<std::string> missing;
    for (const auto& n : g.node()) {
        if (!n.domain().empty() && n.domain() != "ai.onnx") {
            missing.push_back(n.domain() + "::" + n.op_type());
            continue;
        }
        if (!registry.contains(n.op_type())) missing.push_back(n.op_type());
        detail::NodeDef def;
        def.op_type = n.op_type();
        def.name = n.name();
        def.inputs.assign(n.input().begin(), n.input().end());
        def.outputs.assign(n.output().begin(), n.output().end());
        for (const auto& a : n.attribute()) def.attributes.emplace(a.name(), convert_attribute(a, base_dir));
        impl->nodes.push_back(std::move(def));
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        throw ArtifactLoadError(fmt::format("model uses unsupported operators: {}", fmt::join(missing, ", ")));
    }

    // Nodes must be topologically sorted per the format; verify instead of sorting.
    std::unordered_set<std::string> available(impl->inputs.begin(), impl->inputs.end());
    for (const auto& [name, _] : impl->initializers) available.insert(name);
    for (const auto& node : impl->nodes) {
        for (const auto& in : node.inputs) {
            if (!in.empty() && !available.contains(in))
                throw ArtifactLoadError(fmt::format("node '{}' reads '{}' before it is produced", node.name, in));
        }
        for (const auto& out : node.outputs) available.insert(out);
    }
    for (const auto& out : impl->outputs) {
        if (!available.contains(out)) throw ArtifactLoadError("graph output '" + out + "' is never produced");
    }

    std::unordered_map<std::string, std::size_t> last_use;
    for (std::size_t k = 0; k < impl->nodes.size(); ++k) {
        for (const auto& in : impl->nodes[k].inputs) last_use[in] = k;
    }
    std::unordered_set<std::string> keep(impl->outputs.begin(), impl->outputs.end());
    impl->release_after.resize(impl->nodes.size());
    for (const auto& [name, k] : last_use) {
        if (!name.empty() && !keep.contains(name) && !impl->initializers.contains(name)) impl->release_after[k].push_back(name);
    }

    Graph graph;
    graph.impl_ = std::move(impl);
    return graph;
}

const std::vector<std::string>& Graph::input_names() const noexcept {
    return impl_->inputs;
}

const std::vector<std::string>& Graph::output_names() const noexcept {
    return impl_->outputs;
}

std::int64_t Graph::opset() const noexcept {
    return impl_->opset;
}

TensorMap Graph::run(const TensorMap& feeds) const {
    TensorMap values;
    for (const auto& name : impl_->inputs) {
        auto it = feeds.find(name);
        if (it == feeds.end()) throw InvalidArgument("missing feed for graph input '" + name + "'");
        values.emplace(name, it->second);
    }
    auto lookup = [&](const std::string& name) -> const Tensor* {
        if (name.empty()) return nullptr;
        if (auto it = values.find(name); it != values.end()) return &it->second;
        if (auto it = impl_->initializers.find(name); it != impl_->initializers.end()) return &it->second;
        throw ShapeMismatch("value '" + name + "' is not available");
    };

    const auto& registry = detail::op_registry();
    for (std::size_t k = 0; k < impl_->nodes.size(); ++k) {
        const auto& node = impl_->nodes[k];
        detail::OpContext ctx{node, {}, impl_->opset};
        ctx.inputs.reserve(node.inputs.size());
        for (const auto& in : node.inputs) ctx.inputs.push_back(lookup(in));
        std::vector<Tensor> produced = registry.at(node.op_type)(ctx);
        for (std::size_t o = 0; o < node.outputs.size() && o < produced.size(); ++o) {
            if (node.outputs[o].empty()) continue;
            values.insert_or_assign(node.outputs[o], std::move(produced[o]));
        }
        for (const auto& name : impl_->release_after[k]) values.erase(name);
    }

    TensorMap out;
    for (const auto& name : impl_->outputs) out.emplace(name, *lookup(name));
    return out;
}

const std::vector<std::string>& Graph::supported_operators() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, _] : detail::op_registry()) v.push_back(name);
        std::sort(v.begin(), v.end());
        return v;
    }();
    return names;
}

}  // namespace darkscan::onnx
