#include "ops.hpp"

#include "darkscan/error.hpp"

#include <Eigen/Core>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace darkscan::onnx::detail {

namespace {

using Strides = std::vector<std::int64_t>;

[[noreturn]] void shape_error(const OpContext& ctx, const std::string& what) {
    throw ShapeMismatch(fmt::format("{} node '{}': {}", ctx.node.op_type, ctx.node.name, what));
}

Strides contiguous_strides(const Shape& shape) {
    Strides s(shape.size(), 1);
    for (int d = static_cast<int>(shape.size()) - 2; d >= 0; --d) s[d] = s[d + 1] * shape[d + 1];
    return s;
}

std::int64_t normalize_axis(const OpContext& ctx, std::int64_t axis, std::size_t rank) {
    auto r = static_cast<std::int64_t>(rank);
    if (axis < -r || axis >= std::max<std::int64_t>(r, 1)) shape_error(ctx, fmt::format("axis {} out of range for rank {}", axis, r));
    return axis < 0 ? axis + r : axis;
}

Shape broadcast_shapes(const OpContext& ctx, const Shape& a, const Shape& b) {
    std::size_t rank = std::max(a.size(), b.size());
    Shape out(rank, 1);
    for (std::size_t k = 0; k < rank; ++k) {
        std::int64_t da = k < rank - a.size() ? 1 : a[k - (rank - a.size())];
        std::int64_t db = k < rank - b.size() ? 1 : b[k - (rank - b.size())];
        if (da != db && da != 1 && db != 1) shape_error(ctx, "shapes are not broadcastable");
        out[k] = da == 1 ? db : da;
    }
    return out;
}

// Strides of `in` viewed at the rank of `out`, zero along broadcast axes.
Strides broadcast_strides(const Shape& in, const Shape& out) {
    Strides base = contiguous_strides(in);
    Strides s(out.size(), 0);
    std::size_t offset = out.size() - in.size();
    for (std::size_t k = 0; k < in.size(); ++k) s[k + offset] = in[k] == 1 ? 0 : base[k];
    return s;
}

// Visits every coordinate of `out` in row-major order, passing the flat
// output index and one offset per stride set.
template <std::size_t N, class F>
void strided_loop(const Shape& out, const std::array<Strides, N>& strides, std::array<std::int64_t, N> base, F&& f) {
    const std::int64_t total = numel(out);
    if (total == 0) return;
    const std::size_t rank = out.size();
    if (rank == 0) {
        f(std::int64_t{0}, base);
        return;
    }
    const std::int64_t inner = out[rank - 1];
    std::array<std::int64_t, N> inner_step{};
    for (std::size_t n = 0; n < N; ++n) inner_step[n] = strides[n][rank - 1];
    std::vector<std::int64_t> idx(rank, 0);
    std::array<std::int64_t, N> off = base;
    for (std::int64_t o = 0; o < total; o += inner) {
        std::array<std::int64_t, N> cur = off;
        for (std::int64_t k = 0; k < inner; ++k) {
            f(o + k, cur);
            for (std::size_t n = 0; n < N; ++n) cur[n] += inner_step[n];
        }
        for (int d = static_cast<int>(rank) - 2; d >= 0; --d) {
            ++idx[d];
            for (std::size_t n = 0; n < N; ++n) off[n] += strides[n][d];
            if (idx[d] < out[d]) break;
            for (std::size_t n = 0; n < N; ++n) off[n] -= strides[n][d] * out[d];
            idx[d] = 0;
        }
    }
}

Tensor like(DType dtype, Shape shape) {
    Tensor t;
    t.dtype = dtype;
    t.shape = std::move(shape);
    if (dtype == DType::Float) t.f.assign(static_cast<std::size_t>(numel(t.shape)), 0.0f);
    else t.i.assign(static_cast<std::size_t>(numel(t.shape)), 0);
    return t;
}

std::vector<std::int64_t> as_int64s(const Tensor& t) {
    if (t.dtype == DType::Float) {
        std::vector<std::int64_t> out(t.f.size());
        std::transform(t.f.begin(), t.f.end(), out.begin(), [](float v) { return static_cast<std::int64_t>(v); });
        return out;
    }
    return t.i;
}

double scalar_value(const Tensor& t) {
    return t.dtype == DType::Float ? static_cast<double>(t.f.at(0)) : static_cast<double>(t.i.at(0));
}

Tensor to_float(const Tensor& t) {
    if (t.dtype == DType::Float) return t;
    Tensor out = like(DType::Float, t.shape);
    std::transform(t.i.begin(), t.i.end(), out.f.begin(), [](std::int64_t v) { return static_cast<float>(v); });
    return out;
}

// ---------------------------------------------------------------- elementwise

enum class BinaryKind { Arithmetic, Compare, Logical };

template <class FloatOp, class IntOp>
Tensor binary(const OpContext& ctx, const Tensor& a_in, const Tensor& b_in, BinaryKind kind, FloatOp fop, IntOp iop) {
    const Tensor* a = &a_in;
    const Tensor* b = &b_in;
    Tensor a_promoted, b_promoted;
    if (a->dtype == DType::Float && b->dtype != DType::Float) b = &(b_promoted = to_float(*b));
    if (b->dtype == DType::Float && a->dtype != DType::Float) a = &(a_promoted = to_float(*a));

    const Shape out_shape = broadcast_shapes(ctx, a->shape, b->shape);
    const std::array<Strides, 2> strides = {broadcast_strides(a->shape, out_shape), broadcast_strides(b->shape, out_shape)};
    const bool float_inputs = a->dtype == DType::Float;

    DType out_type = a->dtype;
    if (kind == BinaryKind::Compare || kind == BinaryKind::Logical) out_type = DType::Bool;
    Tensor out = like(out_type, out_shape);

    if (float_inputs) {
        const float* pa = a->f.data();
        const float* pb = b->f.data();
        if (out_type == DType::Float) {
            float* po = out.f.data();
            strided_loop<2>(out_shape, strides, {0, 0}, [&](std::int64_t o, const std::array<std::int64_t, 2>& off) {
                po[o] = static_cast<float>(fop(pa[off[0]], pb[off[1]]));
            });
        } else {
            std::int64_t* po = out.i.data();
            strided_loop<2>(out_shape, strides, {0, 0}, [&](std::int64_t o, const std::array<std::int64_t, 2>& off) {
                po[o] = fop(pa[off[0]], pb[off[1]]) ? 1 : 0;
            });
        }
    } else {
        const std::int64_t* pa = a->i.data();
        const std::int64_t* pb = b->i.data();
        std::int64_t* po = out.i.data();
        strided_loop<2>(out_shape, strides, {0, 0}, [&](std::int64_t o, const std::array<std::int64_t, 2>& off) {
            po[o] = static_cast<std::int64_t>(iop(pa[off[0]], pb[off[1]]));
        });
    }
    return out;
}

template <class FloatOp, class IntOp>
OpFn arithmetic(FloatOp fop, IntOp iop) {
    return [fop, iop](const OpContext& ctx) {
        return std::vector<Tensor>{binary(ctx, ctx.in(0), ctx.in(1), BinaryKind::Arithmetic, fop, iop)};
    };
}

template <class Op>
OpFn comparison(Op op) {
    return [op](const OpContext& ctx) {
        return std::vector<Tensor>{binary(
            ctx, ctx.in(0), ctx.in(1), BinaryKind::Compare, [op](float x, float y) { return op(x, y); },
            [op](std::int64_t x, std::int64_t y) { return op(x, y) ? 1 : 0; })};
    };
}

template <class Op>
OpFn logical(Op op) {
    return [op](const OpContext& ctx) {
        return std::vector<Tensor>{binary(
            ctx, ctx.in(0), ctx.in(1), BinaryKind::Logical, [op](float x, float y) { return op(x != 0, y != 0); },
            [op](std::int64_t x, std::int64_t y) { return op(x != 0, y != 0) ? 1 : 0; })};
    };
}

// Folds a variadic op (Sum/Min/Max) pairwise.
template <class FloatOp, class IntOp>
OpFn variadic(FloatOp fop, IntOp iop) {
    return [fop, iop](const OpContext& ctx) {
        Tensor acc = ctx.in(0);
        for (std::size_t k = 1; k < ctx.inputs.size(); ++k) {
            if (ctx.inputs[k] == nullptr) continue;
            acc = binary(ctx, acc, *ctx.inputs[k], BinaryKind::Arithmetic, fop, iop);
        }
        return std::vector<Tensor>{std::move(acc)};
    };
}

template <class FloatOp>
OpFn unary_float(FloatOp op) {
    return [op](const OpContext& ctx) {
        Tensor out = to_float(ctx.in(0));
        for (auto& v : out.f) v = static_cast<float>(op(v));
        return std::vector<Tensor>{std::move(out)};
    };
}

std::vector<Tensor> op_neg(const OpContext& ctx) {
    Tensor out = ctx.in(0);
    for (auto& v : out.f) v = -v;
    for (auto& v : out.i) v = -v;
    return {std::move(out)};
}

std::vector<Tensor> op_abs(const OpContext& ctx) {
    Tensor out = ctx.in(0);
    for (auto& v : out.f) v = std::fabs(v);
    for (auto& v : out.i) v = v < 0 ? -v : v;
    return {std::move(out)};
}

std::vector<Tensor> op_not(const OpContext& ctx) {
    Tensor out = ctx.in(0);
    out.dtype = DType::Bool;
    for (auto& v : out.i) v = v == 0 ? 1 : 0;
    return {std::move(out)};
}

std::vector<Tensor> op_isnan(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    Tensor out = like(DType::Bool, x.shape);
    if (x.dtype == DType::Float) {
        for (std::size_t k = 0; k < x.f.size(); ++k) out.i[k] = std::isnan(x.f[k]) ? 1 : 0;
    }
    return {std::move(out)};
}

std::vector<Tensor> op_identity(const OpContext& ctx) {
    std::vector<Tensor> out{ctx.in(0)};
    if (ctx.node.op_type == "Dropout" && ctx.node.outputs.size() > 1) {
        Tensor mask = like(DType::Bool, ctx.in(0).shape);
        std::fill(mask.i.begin(), mask.i.end(), 1);
        out.push_back(std::move(mask));
    }
    return out;
}

std::vector<Tensor> op_gelu(const OpContext& ctx) {
    const bool tanh_approx = ctx.node.string_attr("approximate", "none") == "tanh";
    Tensor out = to_float(ctx.in(0));
    for (auto& v : out.f) {
        const double x = v;
        if (tanh_approx) {
            v = static_cast<float>(0.5 * x * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (x + 0.044715 * x * x * x))));
        } else {
            v = static_cast<float>(0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))));
        }
    }
    return {std::move(out)};
}

std::vector<Tensor> op_clip(const OpContext& ctx) {
    Tensor out = ctx.in(0);
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    if (ctx.opset < 11) {
        lo = ctx.node.float_attr("min", -std::numeric_limits<float>::max());
        hi = ctx.node.float_attr("max", std::numeric_limits<float>::max());
    } else {
        if (const Tensor* t = ctx.optional_in(1)) lo = scalar_value(*t);
        if (const Tensor* t = ctx.optional_in(2)) hi = scalar_value(*t);
    }
    for (auto& v : out.f) v = static_cast<float>(std::clamp<double>(v, lo, hi));
    for (auto& v : out.i) v = static_cast<std::int64_t>(std::clamp<double>(static_cast<double>(v), lo, hi));
    return {std::move(out)};
}

std::vector<Tensor> op_where(const OpContext& ctx) {
    const Tensor& cond = ctx.in(0);
    const Tensor* x = &ctx.in(1);
    const Tensor* y = &ctx.in(2);
    Tensor xp, yp;
    if (x->dtype == DType::Float && y->dtype != DType::Float) y = &(yp = to_float(*y));
    if (y->dtype == DType::Float && x->dtype != DType::Float) x = &(xp = to_float(*x));
    Shape out_shape = broadcast_shapes(ctx, broadcast_shapes(ctx, cond.shape, x->shape), y->shape);
    std::array<Strides, 3> strides = {broadcast_strides(cond.shape, out_shape), broadcast_strides(x->shape, out_shape),
                                      broadcast_strides(y->shape, out_shape)};
    Tensor out = like(x->dtype, out_shape);
    const std::vector<std::int64_t> cv = as_int64s(cond);
    strided_loop<3>(out_shape, strides, {0, 0, 0}, [&](std::int64_t o, const std::array<std::int64_t, 3>& off) {
        const bool pick_x = cv[static_cast<std::size_t>(off[0])] != 0;
        if (out.dtype == DType::Float) out.f[o] = pick_x ? x->f[off[1]] : y->f[off[2]];
        else out.i[o] = pick_x ? x->i[off[1]] : y->i[off[2]];
    });
    return {std::move(out)};
}

std::vector<Tensor> op_cast(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    const std::int64_t to = ctx.node.int_attr("to", 1);
    Tensor out;
    out.shape = x.shape;
    switch (to) {
        case 1:   // FLOAT
        case 10:  // FLOAT16
        case 11:  // DOUBLE
        case 16:  // BFLOAT16
            out = to_float(x);
            break;
        case 9:  // BOOL
            out = like(DType::Bool, x.shape);
            if (x.dtype == DType::Float) {
                for (std::size_t k = 0; k < x.f.size(); ++k) out.i[k] = x.f[k] != 0.0f ? 1 : 0;
            } else {
                for (std::size_t k = 0; k < x.i.size(); ++k) out.i[k] = x.i[k] != 0 ? 1 : 0;
            }
            break;
        case 2: case 3: case 4: case 5: case 6: case 7: case 12: case 13:  // integer types
            out = like(DType::Int64, x.shape);
            out.i = as_int64s(x);
            break;
        default:
            throw UnsupportedOperator(fmt::format("Cast to ONNX type {} is not supported", to));
    }
    return {std::move(out)};
}

// ---------------------------------------------------------------- shape ops

std::vector<Tensor> op_shape(const OpContext& ctx) {
    const Shape& s = ctx.in(0).shape;
    auto rank = static_cast<std::int64_t>(s.size());
    std::int64_t start = ctx.node.int_attr("start", 0);
    std::int64_t end = ctx.node.int_attr("end", rank);
    if (start < 0) start += rank;
    if (end < 0) end += rank;
    start = std::clamp<std::int64_t>(start, 0, rank);
    end = std::clamp<std::int64_t>(end, 0, rank);
    std::vector<std::int64_t> dims;
    for (std::int64_t k = start; k < end; ++k) dims.push_back(s[k]);
    auto n = static_cast<std::int64_t>(dims.size());
    return {Tensor::int64s({n}, std::move(dims))};
}

std::vector<Tensor> op_constant(const OpContext& ctx) {
    const NodeDef& n = ctx.node;
    if (const Attribute* a = n.attribute("value"); a && a->t) return {*a->t};
    if (const Attribute* a = n.attribute("value_float"); a && a->f) return {Tensor::floats({}, {*a->f})};
    if (const Attribute* a = n.attribute("value_int"); a && a->i) return {Tensor::int64s({}, {*a->i})};
    if (const Attribute* a = n.attribute("value_floats"); a && a->has_floats)
        return {Tensor::floats({static_cast<std::int64_t>(a->floats.size())}, a->floats)};
    if (const Attribute* a = n.attribute("value_ints"); a && a->has_ints)
        return {Tensor::int64s({static_cast<std::int64_t>(a->ints.size())}, a->ints)};
    throw UnsupportedOperator("Constant node '" + n.name + "' has no supported value attribute");
}

std::vector<Tensor> op_constant_of_shape(const OpContext& ctx) {
    Shape shape = as_int64s(ctx.in(0));
    Tensor fill = Tensor::floats({1}, {0.0f});
    if (const Attribute* a = ctx.node.attribute("value"); a && a->t) fill = *a->t;
    Tensor out = like(fill.dtype, shape);
    if (fill.dtype == DType::Float) std::fill(out.f.begin(), out.f.end(), fill.f.at(0));
    else std::fill(out.i.begin(), out.i.end(), fill.i.at(0));
    return {std::move(out)};
}

Tensor with_shape(Tensor t, Shape shape) {
    t.shape = std::move(shape);
    return t;
}

std::vector<Tensor> op_reshape(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    std::vector<std::int64_t> spec = as_int64s(ctx.in(1));
    const bool allow_zero = ctx.node.int_attr("allowzero", 0) != 0;
    Shape out(spec.size());
    std::int64_t known = 1;
    int infer = -1;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        if (spec[k] == -1) {
            if (infer >= 0) shape_error(ctx, "more than one -1 in reshape target");
            infer = static_cast<int>(k);
            continue;
        }
        out[k] = (spec[k] == 0 && !allow_zero) ? x.shape.at(k) : spec[k];
        known *= out[k];
    }
    if (infer >= 0) {
        if (known == 0 || x.numel() % known != 0) shape_error(ctx, "cannot infer reshape dimension");
        out[static_cast<std::size_t>(infer)] = x.numel() / known;
    }
    if (numel(out) != x.numel()) shape_error(ctx, "reshape changes element count");
    return {with_shape(x, std::move(out))};
}

std::vector<Tensor> op_flatten(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    std::int64_t axis = ctx.node.int_attr("axis", 1);
    auto rank = static_cast<std::int64_t>(x.shape.size());
    if (axis < 0) axis += rank;
    std::int64_t outer = 1;
    for (std::int64_t k = 0; k < axis; ++k) outer *= x.shape[k];
    return {with_shape(x, {outer, outer == 0 ? 0 : x.numel() / std::max<std::int64_t>(outer, 1)})};
}

std::vector<std::int64_t> axes_from(const OpContext& ctx, std::size_t input_index) {
    if (auto a = ctx.node.ints_attr("axes")) return *a;
    if (const Tensor* t = ctx.optional_in(input_index)) return as_int64s(*t);
    return {};
}

std::vector<Tensor> op_unsqueeze(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    std::vector<std::int64_t> axes = axes_from(ctx, 1);
    const std::size_t out_rank = x.shape.size() + axes.size();
    for (auto& a : axes) a = normalize_axis(ctx, a, out_rank);
    std::sort(axes.begin(), axes.end());
    Shape out;
    std::size_t src = 0;
    for (std::size_t k = 0; k < out_rank; ++k) {
        if (std::binary_search(axes.begin(), axes.end(), static_cast<std::int64_t>(k))) out.push_back(1);
        else out.push_back(x.shape.at(src++));
    }
    return {with_shape(x, std::move(out))};
}

std::vector<Tensor> op_squeeze(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    std::vector<std::int64_t> axes = axes_from(ctx, 1);
    for (auto& a : axes) a = normalize_axis(ctx, a, x.shape.size());
    Shape out;
    for (std::size_t k = 0; k < x.shape.size(); ++k) {
        const bool listed = std::find(axes.begin(), axes.end(), static_cast<std::int64_t>(k)) != axes.end();
        if (axes.empty() ? x.shape[k] == 1 : listed) {
            if (x.shape[k] != 1) shape_error(ctx, "cannot squeeze a non-unit axis");
            continue;
        }
        out.push_back(x.shape[k]);
    }
    return {with_shape(x, std::move(out))};
}

// Copies `x` through a strided view into a fresh tensor of shape `out_shape`.
Tensor gather_view(const Tensor& x, const Shape& out_shape, const Strides& strides, std::int64_t base) {
    Tensor out = like(x.dtype, out_shape);
    std::array<Strides, 1> s = {strides};
    if (x.dtype == DType::Float) {
        strided_loop<1>(out_shape, s, {base}, [&](std::int64_t o, const std::array<std::int64_t, 1>& off) { out.f[o] = x.f[off[0]]; });
    } else {
        strided_loop<1>(out_shape, s, {base}, [&](std::int64_t o, const std::array<std::int64_t, 1>& off) { out.i[o] = x.i[off[0]]; });
    }
    return out;
}

std::vector<Tensor> op_transpose(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    const std::size_t rank = x.shape.size();
    std::vector<std::int64_t> perm(rank);
    if (auto p = ctx.node.ints_attr("perm")) perm = *p;
    else std::iota(perm.rbegin(), perm.rend(), 0);
    if (perm.size() != rank) shape_error(ctx, "perm length differs from rank");
    Strides in_strides = contiguous_strides(x.shape);
    Shape out_shape(rank);
    Strides view(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        out_shape[k] = x.shape.at(static_cast<std::size_t>(perm[k]));
        view[k] = in_strides.at(static_cast<std::size_t>(perm[k]));
    }
    return {gather_view(x, out_shape, view, 0)};
}

std::vector<Tensor> op_expand(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    Shape target = as_int64s(ctx.in(1));
    Shape out_shape = broadcast_shapes(ctx, x.shape, target);
    return {gather_view(x, out_shape, broadcast_strides(x.shape, out_shape), 0)};
}

std::vector<Tensor> op_tile(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    std::vector<std::int64_t> reps = as_int64s(ctx.in(1));
    if (reps.size() != x.shape.size()) shape_error(ctx, "repeats length differs from rank");
    Shape out_shape(x.shape.size());
    for (std::size_t k = 0; k < x.shape.size(); ++k) out_shape[k] = x.shape[k] * reps[k];
    Tensor out = like(x.dtype, out_shape);
    Strides in_strides = contiguous_strides(x.shape);
    std::vector<std::int64_t> coord(out_shape.size(), 0);
    for (std::int64_t o = 0; o < numel(out_shape); ++o) {
        std::int64_t rem = o;
        std::int64_t src = 0;
        for (int d = static_cast<int>(out_shape.size()) - 1; d >= 0; --d) {
            std::int64_t c = rem % out_shape[d];
            rem /= out_shape[d];
            src += (c % x.shape[d]) * in_strides[d];
        }
        if (x.dtype == DType::Float) out.f[o] = x.f[src];
        else out.i[o] = x.i[src];
    }
    return {std::move(out)};
}

std::vector<Tensor> op_concat(const OpContext& ctx) {
    std::vector<const Tensor*> parts;
    for (const Tensor* t : ctx.inputs) {
        if (t != nullptr) parts.push_back(t);
    }
    if (parts.empty()) shape_error(ctx, "no inputs");
    const std::size_t rank = parts.front()->shape.size();
    const std::int64_t axis = normalize_axis(ctx, ctx.node.int_attr("axis", 0), rank);
    bool any_float = std::any_of(parts.begin(), parts.end(), [](const Tensor* t) { return t->dtype == DType::Float; });
    Shape out_shape = parts.front()->shape;
    out_shape[axis] = 0;
    for (const Tensor* t : parts) {
        if (t->shape.size() != rank) shape_error(ctx, "rank mismatch");
        for (std::size_t k = 0; k < rank; ++k) {
            if (static_cast<std::int64_t>(k) != axis && t->shape[k] != parts.front()->shape[k]) shape_error(ctx, "dimension mismatch");
        }
        out_shape[axis] += t->shape[axis];
    }
    std::int64_t outer = 1, inner = 1;
    for (std::int64_t k = 0; k < axis; ++k) outer *= out_shape[k];
    for (std::size_t k = static_cast<std::size_t>(axis) + 1; k < rank; ++k) inner *= out_shape[k];
    Tensor out = like(any_float ? DType::Float : parts.front()->dtype, out_shape);
    std::int64_t dst = 0;
    for (std::int64_t o = 0; o < outer; ++o) {
        for (const Tensor* t : parts) {
            const std::int64_t chunk = t->shape[axis] * inner;
            const std::int64_t src = o * chunk;
            if (out.dtype == DType::Float) {
                Tensor conv;
                const Tensor* ft = t;
                if (t->dtype != DType::Float) ft = &(conv = to_float(*t));
                std::copy_n(ft->f.begin() + src, chunk, out.f.begin() + dst);
            } else {
                std::copy_n(t->i.begin() + src, chunk, out.i.begin() + dst);
            }
            dst += chunk;
        }
    }
    return {std::move(out)};
}

std::vector<Tensor> op_split(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    const std::int64_t axis = normalize_axis(ctx, ctx.node.int_attr("axis", 0), x.shape.size());
    std::vector<std::int64_t> sizes;
    if (const Tensor* s = ctx.optional_in(1)) sizes = as_int64s(*s);
    else if (auto attr = ctx.node.ints_attr("split")) sizes = *attr;
    const auto parts = static_cast<std::int64_t>(ctx.node.outputs.size());
    if (sizes.empty()) {
        const std::int64_t dim = x.shape[axis];
        const std::int64_t each = (dim + parts - 1) / parts;
        for (std::int64_t k = 0; k < parts; ++k) sizes.push_back(std::min(each, dim - k * each));
    }
    Strides strides = contiguous_strides(x.shape);
    std::vector<Tensor> out;
    std::int64_t start = 0;
    for (std::int64_t size : sizes) {
        Shape s = x.shape;
        s[axis] = size;
        out.push_back(gather_view(x, s, strides, start * strides[axis]));
        start += size;
    }
    return out;
}

std::vector<Tensor> op_slice(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    const std::size_t rank = x.shape.size();
    std::vector<std::int64_t> starts, ends, axes, steps;
    if (ctx.opset < 10) {
        starts = *ctx.node.ints_attr("starts");
        ends = *ctx.node.ints_attr("ends");
        if (auto a = ctx.node.ints_attr("axes")) axes = *a;
    } else {
        starts = as_int64s(ctx.in(1));
        ends = as_int64s(ctx.in(2));
        if (const Tensor* a = ctx.optional_in(3)) axes = as_int64s(*a);
        if (const Tensor* s = ctx.optional_in(4)) steps = as_int64s(*s);
    }
    if (axes.empty()) {
        axes.resize(starts.size());
        std::iota(axes.begin(), axes.end(), 0);
    }
    if (steps.empty()) steps.assign(starts.size(), 1);

    Shape out_shape = x.shape;
    Strides in_strides = contiguous_strides(x.shape);
    Strides view = in_strides;
    std::int64_t base = 0;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        const std::int64_t axis = normalize_axis(ctx, axes[k], rank);
        const std::int64_t dim = x.shape[axis];
        const std::int64_t step = steps[k];
        if (step == 0) shape_error(ctx, "slice step is zero");
        std::int64_t s = starts[k], e = ends[k];
        if (s < 0) s += dim;
        if (e < 0) e += dim;
        if (step > 0) {
            s = std::clamp<std::int64_t>(s, 0, dim);
            e = std::clamp<std::int64_t>(e, 0, dim);
        } else {
            s = std::clamp<std::int64_t>(s, 0, dim - 1);
            e = std::clamp<std::int64_t>(e, -1, dim - 1);
        }
        std::int64_t len = step > 0 ? (e - s + step - 1) / step : (s - e + (-step) - 1) / (-step);
        len = std::max<std::int64_t>(len, 0);
        out_shape[axis] = len;
        view[axis] = in_strides[axis] * step;
        base += s * in_strides[axis];
    }
    return {gather_view(x, out_shape, view, base)};
}

std::vector<Tensor> op_gather(const OpContext& ctx) {
    const Tensor& data = ctx.in(0);
    const std::vector<std::int64_t> idx = as_int64s(ctx.in(1));
    const Shape& idx_shape = ctx.in(1).shape;
    const std::int64_t axis = normalize_axis(ctx, ctx.node.int_attr("axis", 0), data.shape.size());
    const std::int64_t dim = data.shape[axis];

    Shape out_shape(data.shape.begin(), data.shape.begin() + axis);
    out_shape.insert(out_shape.end(), idx_shape.begin(), idx_shape.end());
    out_shape.insert(out_shape.end(), data.shape.begin() + axis + 1, data.shape.end());

    std::int64_t outer = 1, inner = 1;
    for (std::int64_t k = 0; k < axis; ++k) outer *= data.shape[k];
    for (std::size_t k = static_cast<std::size_t>(axis) + 1; k < data.shape.size(); ++k) inner *= data.shape[k];

    Tensor out = like(data.dtype, out_shape);
    const auto n_idx = static_cast<std::int64_t>(idx.size());
    for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t j = 0; j < n_idx; ++j) {
            std::int64_t ix = idx[j] < 0 ? idx[j] + dim : idx[j];
            if (ix < 0 || ix >= dim) shape_error(ctx, fmt::format("index {} out of range [0,{})", idx[j], dim));
            const std::int64_t src = (o * dim + ix) * inner;
            const std::int64_t dst = (o * n_idx + j) * inner;
            if (data.dtype == DType::Float) std::copy_n(data.f.begin() + src, inner, out.f.begin() + dst);
            else std::copy_n(data.i.begin() + src, inner, out.i.begin() + dst);
        }
    }
    return {std::move(out)};
}

std::vector<Tensor> op_gather_elements(const OpContext& ctx) {
    const Tensor& data = ctx.in(0);
    const Tensor& indices = ctx.in(1);
    const std::vector<std::int64_t> idx = as_int64s(indices);
    const std::size_t rank = data.shape.size();
    if (indices.shape.size() != rank) shape_error(ctx, "indices rank differs from data rank");
    const std::int64_t axis = normalize_axis(ctx, ctx.node.int_attr("axis", 0), rank);
    Strides ds = contiguous_strides(data.shape);
    Tensor out = like(data.dtype, indices.shape);
    for (std::int64_t o = 0; o < indices.numel(); ++o) {
        std::int64_t rem = o;
        std::int64_t src = 0;
        for (int d = static_cast<int>(rank) - 1; d >= 0; --d) {
            std::int64_t c = rem % indices.shape[d];
            rem /= indices.shape[d];
            if (d == axis) {
                c = idx[o] < 0 ? idx[o] + data.shape[d] : idx[o];
                if (c < 0 || c >= data.shape[d]) shape_error(ctx, "index out of range");
            }
            src += c * ds[d];
        }
        if (data.dtype == DType::Float) out.f[o] = data.f[src];
        else out.i[o] = data.i[src];
    }
    return {std::move(out)};
}

std::vector<Tensor> op_range(const OpContext& ctx) {
    const Tensor& start = ctx.in(0);
    const double s = scalar_value(start), l = scalar_value(ctx.in(1)), d = scalar_value(ctx.in(2));
    if (d == 0) shape_error(ctx, "range delta is zero");
    auto n = static_cast<std::int64_t>(std::max(std::ceil((l - s) / d), 0.0));
    if (start.dtype == DType::Float) {
        std::vector<float> v(static_cast<std::size_t>(n));
        for (std::int64_t k = 0; k < n; ++k) v[k] = static_cast<float>(s + static_cast<double>(k) * d);
        return {Tensor::floats({n}, std::move(v))};
    }
    std::vector<std::int64_t> v(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) v[k] = start.i.at(0) + k * ctx.in(2).i.at(0);
    return {Tensor::int64s({n}, std::move(v))};
}

std::vector<Tensor> op_cumsum(const OpContext& ctx) {
    const Tensor& x = ctx.in(0);
    const std::int64_t axis = normalize_axis(ctx, static_cast<std::int64_t>(scalar_value(ctx.in(1))), x.shape.size());
    const bool exclusive = ctx.node.int_attr("exclusive", 0) != 0;
    const bool reverse = ctx.node.int_attr("reverse", 0) != 0;
    std::int64_t outer = 1, inner = 1;
    for (std::int64_t k = 0; k < axis; ++k) outer *= x.shape[k];
    for (std::size_t k = static_cast<std::size_t>(axis) + 1; k < x.shape.size(); ++k) inner *= x.shape[k];
    const std::int64_t dim = x.shape[axis];
    Tensor out = like(x.dtype, x.shape);
    for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t in = 0; in < inner; ++in) {
            double acc = 0;
            for (std::int64_t step = 0; step < dim; ++step) {
                const std::int64_t j = reverse ? dim - 1 - step : step;
                const std::int64_t at = (o * dim + j) * inner + in;
                const double v = x.dtype == DType::Float ? x.f[at] : static_cast<double>(x.i[at]);
                if (!exclusive) acc += v;
                if (out.dtype == DType::Float) out.f[at] = static_cast<float>(acc);
                else out.i[at] = static_cast<std::int64_t>(acc);
                if (exclusive) acc += v;
            }
        }
    }
    return {std::move(out)};
}

// ---------------------------------------------------------------- linear algebra

using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<Tensor> op_matmul(const OpContext& ctx) {
    Tensor a = to_float(ctx.in(0));
    Tensor b = to_float(ctx.in(1));
    const bool a_vec = a.shape.size() == 1;
    const bool b_vec = b.shape.size() == 1;
    if (a_vec) a.shape.insert(a.shape.begin(), 1);
    if (b_vec) b.shape.push_back(1);
    if (a.shape.size() < 2 || b.shape.size() < 2) shape_error(ctx, "operands must have rank >= 1");

    const std::int64_t m = a.shape[a.shape.size() - 2];
    const std::int64_t k = a.shape.back();
    const std::int64_t k2 = b.shape[b.shape.size() - 2];
    const std::int64_t n = b.shape.back();
    if (k != k2) shape_error(ctx, fmt::format("inner dimensions differ ({} vs {})", k, k2));

    Shape a_batch(a.shape.begin(), a.shape.end() - 2);
    Shape b_batch(b.shape.begin(), b.shape.end() - 2);
    Shape batch = broadcast_shapes(ctx, a_batch, b_batch);
    std::array<Strides, 2> strides = {broadcast_strides(a_batch, batch), broadcast_strides(b_batch, batch)};

    Shape out_shape = batch;
    if (!a_vec) out_shape.push_back(m);
    if (!b_vec) out_shape.push_back(n);
    Tensor out = like(DType::Float, out_shape);

    strided_loop<2>(batch, strides, {0, 0}, [&](std::int64_t o, const std::array<std::int64_t, 2>& off) {
        Eigen::Map<const RowMajor> ma(a.f.data() + off[0] * m * k, m, k);
        Eigen::Map<const RowMajor> mb(b.f.data() + off[1] * k * n, k, n);
        Eigen::Map<RowMajor> mo(out.f.data() + o * m * n, m, n);
        mo.noalias() = ma * mb;
    });
    return {std::move(out)};
}

std::vector<Tensor> op_gemm(const OpContext& ctx) {
    Tensor a = to_float(ctx.in(0));
    Tensor b = to_float(ctx.in(1));
    if (a.shape.size() != 2 || b.shape.size() != 2) shape_error(ctx, "Gemm operands must be 2-D");
    const bool ta = ctx.node.int_attr("transA", 0) != 0;
    const bool tb = ctx.node.int_attr("transB", 0) != 0;
    const float alpha = ctx.node.float_attr("alpha", 1.0f);
    const float beta = ctx.node.float_attr("beta", 1.0f);

    Eigen::Map<const RowMajor> ma(a.f.data(), a.shape[0], a.shape[1]);
    Eigen::Map<const RowMajor> mb(b.f.data(), b.shape[0], b.shape[1]);
    RowMajor result;
    if (ta && tb) result = ma.transpose() * mb.transpose();
    else if (ta) result = ma.transpose() * mb;
    else if (tb) result = ma * mb.transpose();
    else {
        if (ma.cols() != mb.rows()) shape_error(ctx, "inner dimensions differ");
        result = ma * mb;
    }
    result *= alpha;
    Shape out_shape = {result.rows(), result.cols()};
    Tensor out = like(DType::Float, out_shape);
    std::copy_n(result.data(), result.size(), out.f.begin());
    if (const Tensor* c_in = ctx.optional_in(2)) {
        Tensor c = to_float(*c_in);
        std::array<Strides, 1> s = {broadcast_strides(c.shape, out_shape)};
        strided_loop<1>(out_shape, s, {0}, [&](std::int64_t o, const std::array<std::int64_t, 1>& off) {
            out.f[o] += beta * c.f[off[0]];
        });
    }
    return {std::move(out)};
}

// ---------------------------------------------------------------- reductions / normalization

enum class Reduce { Mean, Sum, Max, Min };

OpFn reduction(Reduce kind) {
    return [kind](const OpContext& ctx) {
        Tensor x = to_float(ctx.in(0));
        const std::size_t rank = x.shape.size();
        std::vector<std::int64_t> axes;
        if (auto a = ctx.node.ints_attr("axes")) axes = *a;
        else if (const Tensor* t = ctx.optional_in(1)) axes = as_int64s(*t);
        const bool keepdims = ctx.node.int_attr("keepdims", 1) != 0;
        if (axes.empty()) {
            if (ctx.node.int_attr("noop_with_empty_axes", 0) != 0) return std::vector<Tensor>{x};
            axes.resize(rank);
            std::iota(axes.begin(), axes.end(), 0);
        }
        std::vector<bool> reduced(rank, false);
        for (auto a : axes) reduced[static_cast<std::size_t>(normalize_axis(ctx, a, rank))] = true;

        Shape kept_shape(rank);
        for (std::size_t d = 0; d < rank; ++d) kept_shape[d] = reduced[d] ? 1 : x.shape[d];
        Strides out_strides = contiguous_strides(kept_shape);
        for (std::size_t d = 0; d < rank; ++d) {
            if (reduced[d]) out_strides[d] = 0;
        }
        const std::int64_t out_n = numel(kept_shape);
        std::vector<double> acc(static_cast<std::size_t>(out_n),
                                kind == Reduce::Max   ? -std::numeric_limits<double>::infinity()
                                : kind == Reduce::Min ? std::numeric_limits<double>::infinity()
                                                      : 0.0);
        std::array<Strides, 1> s = {out_strides};
        strided_loop<1>(x.shape, s, {0}, [&](std::int64_t in, const std::array<std::int64_t, 1>& off) {
            double& slot = acc[static_cast<std::size_t>(off[0])];
            const double v = x.f[in];
            if (kind == Reduce::Max) slot = std::max(slot, v);
            else if (kind == Reduce::Min) slot = std::min(slot, v);
            else slot += v;
        });
        if (kind == Reduce::Mean) {
            const double count = static_cast<double>(x.numel()) / static_cast<double>(std::max<std::int64_t>(out_n, 1));
            for (auto& v : acc) v /= count;
        }
        Shape out_shape;
        for (std::size_t d = 0; d < rank; ++d) {
            if (!reduced[d]) out_shape.push_back(x.shape[d]);
            else if (keepdims) out_shape.push_back(1);
        }
        std::vector<float> data(acc.begin(), acc.end());
        return std::vector<Tensor>{Tensor::floats(std::move(out_shape), std::move(data))};
    };
}

std::vector<Tensor> op_softmax(const OpContext& ctx) {
    Tensor x = to_float(ctx.in(0));
    const std::size_t rank = x.shape.size();
    std::int64_t outer = 1, dim = 1, inner = 1;
    if (ctx.opset < 13) {
        // Coerced to 2-D: [prod(shape[:axis]), prod(shape[axis:])].
        const std::int64_t axis = normalize_axis(ctx, ctx.node.int_attr("axis", 1), rank);
        for (std::int64_t k = 0; k < axis; ++k) outer *= x.shape[k];
        for (std::size_t k = static_cast<std::size_t>(axis); k < rank; ++k) dim *= x.shape[k];
    } else {
        const std::int64_t axis = normalize_axis(ctx, ctx.node.int_attr("axis", -1), rank);
        for (std::int64_t k = 0; k < axis; ++k) outer *= x.shape[k];
        dim = x.shape[axis];
        for (std::size_t k = static_cast<std::size_t>(axis) + 1; k < rank; ++k) inner *= x.shape[k];
    }
    for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t in = 0; in < inner; ++in) {
            float* base = x.f.data() + o * dim * inner + in;
            float max = -std::numeric_limits<float>::infinity();
            for (std::int64_t j = 0; j < dim; ++j) max = std::max(max, base[j * inner]);
            double sum = 0;
            for (std::int64_t j = 0; j < dim; ++j) {
                const float e = std::exp(base[j * inner] - max);
                base[j * inner] = e;
                sum += e;
            }
            for (std::int64_t j = 0; j < dim; ++j) base[j * inner] = static_cast<float>(base[j * inner] / sum);
        }
    }
    return {std::move(x)};
}

std::vector<Tensor> op_layer_norm(const OpContext& ctx) {
    Tensor x = to_float(ctx.in(0));
    const Tensor scale = to_float(ctx.in(1));
    const Tensor* bias_in = ctx.optional_in(2);
    const Tensor bias = bias_in ? to_float(*bias_in) : Tensor{};
    const std::size_t rank = x.shape.size();
    const std::int64_t axis = normalize_axis(ctx, ctx.node.int_attr("axis", -1), rank);
    const double eps = ctx.node.float_attr("epsilon", 1e-5f);
    std::int64_t outer = 1, norm = 1;
    for (std::int64_t k = 0; k < axis; ++k) outer *= x.shape[k];
    for (std::size_t k = static_cast<std::size_t>(axis); k < rank; ++k) norm *= x.shape[k];
    if (scale.numel() != norm && scale.numel() != 1) shape_error(ctx, "scale does not match normalized shape");
    for (std::int64_t o = 0; o < outer; ++o) {
        float* row = x.f.data() + o * norm;
        double mean = 0;
        for (std::int64_t j = 0; j < norm; ++j) mean += row[j];
        mean /= static_cast<double>(norm);
        double var = 0;
        for (std::int64_t j = 0; j < norm; ++j) var += (row[j] - mean) * (row[j] - mean);
        var /= static_cast<double>(norm);
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::int64_t j = 0; j < norm; ++j) {
            double y = (row[j] - mean) * inv * scale.f[scale.numel() == 1 ? 0 : j];
            if (bias_in) y += bias.f[bias.numel() == 1 ? 0 : j];
            row[j] = static_cast<float>(y);
        }
    }
    return {std::move(x)};
}

// Integer division in ONNX truncates toward zero like C++.
std::int64_t int_div(std::int64_t a, std::int64_t b) {
    return b == 0 ? 0 : a / b;
}

}  // namespace

const Attribute* NodeDef::attribute(const std::string& key) const {
    auto it = attributes.find(key);
    return it == attributes.end() ? nullptr : &it->second;
}

std::int64_t NodeDef::int_attr(const std::string& key, std::int64_t fallback) const {
    const Attribute* a = attribute(key);
    return a && a->i ? *a->i : fallback;
}

float NodeDef::float_attr(const std::string& key, float fallback) const {
    const Attribute* a = attribute(key);
    return a && a->f ? *a->f : fallback;
}

std::string NodeDef::string_attr(const std::string& key, const std::string& fallback) const {
    const Attribute* a = attribute(key);
    return a && a->s ? *a->s : fallback;
}

std::optional<std::vector<std::int64_t>> NodeDef::ints_attr(const std::string& key) const {
    const Attribute* a = attribute(key);
    if (a && a->has_ints) return a->ints;
    return std::nullopt;
}

const Tensor& OpContext::in(std::size_t k) const {
    if (k >= inputs.size() || inputs[k] == nullptr)
        throw ShapeMismatch(fmt::format("{} node '{}' is missing required input {}", node.op_type, node.name, k));
    return *inputs[k];
}

const std::unordered_map<std::string, OpFn>& op_registry() {
    static const std::unordered_map<std::string, OpFn> registry = [] {
        std::unordered_map<std::string, OpFn> r;
        r["Add"] = arithmetic([](float a, float b) { return a + b; }, [](std::int64_t a, std::int64_t b) { return a + b; });
        r["Sub"] = arithmetic([](float a, float b) { return a - b; }, [](std::int64_t a, std::int64_t b) { return a - b; });
        r["Mul"] = arithmetic([](float a, float b) { return a * b; }, [](std::int64_t a, std::int64_t b) { return a * b; });
        r["Div"] = arithmetic([](float a, float b) { return a / b; }, int_div);
        r["Pow"] = arithmetic([](float a, float b) { return std::pow(a, b); },
                              [](std::int64_t a, std::int64_t b) { return static_cast<std::int64_t>(std::pow(a, b)); });
        r["Equal"] = comparison([](auto a, auto b) { return a == b; });
        r["Less"] = comparison([](auto a, auto b) { return a < b; });
        r["LessOrEqual"] = comparison([](auto a, auto b) { return a <= b; });
        r["Greater"] = comparison([](auto a, auto b) { return a > b; });
        r["GreaterOrEqual"] = comparison([](auto a, auto b) { return a >= b; });
        r["And"] = logical([](bool a, bool b) { return a && b; });
        r["Or"] = logical([](bool a, bool b) { return a || b; });
        r["Xor"] = logical([](bool a, bool b) { return a != b; });
        r["Sum"] = variadic([](float a, float b) { return a + b; }, [](std::int64_t a, std::int64_t b) { return a + b; });
        r["Max"] = variadic([](float a, float b) { return std::max(a, b); }, [](std::int64_t a, std::int64_t b) { return std::max(a, b); });
        r["Min"] = variadic([](float a, float b) { return std::min(a, b); }, [](std::int64_t a, std::int64_t b) { return std::min(a, b); });
        r["Sqrt"] = unary_float([](double v) { return std::sqrt(v); });
        r["Erf"] = unary_float([](double v) { return std::erf(v); });
        r["Tanh"] = unary_float([](double v) { return std::tanh(v); });
        r["Exp"] = unary_float([](double v) { return std::exp(v); });
        r["Log"] = unary_float([](double v) { return std::log(v); });
        r["Relu"] = unary_float([](double v) { return v > 0 ? v : 0.0; });
        r["Sigmoid"] = unary_float([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        r["Reciprocal"] = unary_float([](double v) { return 1.0 / v; });
        r["Floor"] = unary_float([](double v) { return std::floor(v); });
        r["Ceil"] = unary_float([](double v) { return std::ceil(v); });
        r["Neg"] = op_neg;
        r["Abs"] = op_abs;
        r["Not"] = op_not;
        r["IsNaN"] = op_isnan;
        r["Identity"] = op_identity;
        r["Dropout"] = op_identity;
        r["Gelu"] = op_gelu;
        r["Clip"] = op_clip;
        r["Where"] = op_where;
        r["Cast"] = op_cast;
        r["Shape"] = op_shape;
        r["Constant"] = op_constant;
        r["ConstantOfShape"] = op_constant_of_shape;
        r["Reshape"] = op_reshape;
        r["Flatten"] = op_flatten;
        r["Unsqueeze"] = op_unsqueeze;
        r["Squeeze"] = op_squeeze;
        r["Transpose"] = op_transpose;
        r["Expand"] = op_expand;
        r["Tile"] = op_tile;
        r["Concat"] = op_concat;
        r["Split"] = op_split;
        r["Slice"] = op_slice;
        r["Gather"] = op_gather;
        r["GatherElements"] = op_gather_elements;
        r["Range"] = op_range;
        r["CumSum"] = op_cumsum;
        r["MatMul"] = op_matmul;
        r["Gemm"] = op_gemm;
        r["ReduceMean"] = reduction(Reduce::Mean);
        r["ReduceSum"] = reduction(Reduce::Sum);
        r["ReduceMax"] = reduction(Reduce::Max);
        r["ReduceMin"] = reduction(Reduce::Min);
        r["Softmax"] = op_softmax;
        r["LayerNormalization"] = op_layer_norm;
        return r;
    }();
    return registry;
}

}  // namespace darkscan::onnx::detail
