#include <algorithm>

#include "op_detail.hpp"
#include "opgraph/ops.hpp"

namespace opg {

namespace detail {

BroadcastPlan make_broadcast(const TypeInfo& in, const TypeInfo& pattern,
                             const std::string& what) {
    BroadcastPlan plan;
    plan.out = in;
    for (const auto& pa : pattern.axes) {
        const int k = in.axis_index(pa.name);
        if (k >= 0) {
            if (in.axes[k].extent != pa.extent)
                throw TypeError(what + ": axis '" + pa.name + "' extent " +
                                std::to_string(pa.extent) + " does not match input extent " +
                                std::to_string(in.axes[k].extent));
        } else {
            plan.out.axes.push_back(pa);
        }
    }
    // strides per output axis
    std::vector<std::size_t> in_strides(in.axes.size(), 1);
    for (std::size_t i = in.axes.size(); i-- > 1;)
        in_strides[i - 1] = in_strides[i] * in.axes[i].extent;
    std::vector<std::size_t> pat_strides(pattern.axes.size(), 1);
    for (std::size_t i = pattern.axes.size(); i-- > 1;)
        pat_strides[i - 1] = pat_strides[i] * pattern.axes[i].extent;

    for (const auto& oa : plan.out.axes) {
        const int ki = in.axis_index(oa.name);
        plan.x_stride.push_back(ki >= 0 ? in_strides[ki] : 0);
        const int kp = pattern.axis_index(oa.name);
        plan.m_stride.push_back(kp >= 0 ? pat_strides[kp] : 0);
    }
    return plan;
}

} // namespace detail

// Forward declarations of per-kind implementations (defined in the op_*.cpp files).
TypeInfo infer_propagate(const PropagateParams&, const TypeInfo&);
TypeInfo infer_modulate(const ModulateParams&, const TypeInfo&);
TypeInfo infer_project(const ProjectParams&, const TypeInfo&);
TypeInfo infer_encode(const EncodeParams&, const TypeInfo&);
TypeInfo infer_convolve(const ConvolveParams&, const TypeInfo&);
TypeInfo infer_accumulate(const AccumulateParams&, const TypeInfo&);
TypeInfo infer_detect(const DetectParams&, const TypeInfo&);
TypeInfo infer_sample(const SampleParams&, const TypeInfo&);
TypeInfo infer_disperse(const DisperseParams&, const TypeInfo&);
TypeInfo infer_scatter(const ScatterParams&, const TypeInfo&);
TypeInfo infer_transform(const TransformParams&, const TypeInfo&);
TypeInfo infer_linearized(const LinearizedParams&, const TypeInfo&);

Field fwd_propagate(const PropagateParams&, const Field&);
Field fwd_modulate(const ModulateParams&, const Field&);
Field fwd_project(const ProjectParams&, const Field&);
Field fwd_encode(const EncodeParams&, const Field&);
Field fwd_convolve(const ConvolveParams&, const Field&);
Field fwd_accumulate(const AccumulateParams&, const Field&);
Field fwd_detect(const DetectParams&, const Field&);
Field fwd_sample(const SampleParams&, const Field&);
Field fwd_disperse(const DisperseParams&, const Field&);
Field fwd_scatter(const ScatterParams&, const Field&);
Field fwd_transform(const TransformParams&, const Field&);
Field fwd_linearized(const LinearizedParams&, const Field&);

Field adj_propagate(const PropagateParams&, const Field&);
Field adj_modulate(const ModulateParams&, const Field&, const TypeInfo& in);
Field adj_project(const ProjectParams&, const Field&, const TypeInfo& in);
Field adj_encode(const EncodeParams&, const Field&, const TypeInfo& in);
Field adj_convolve(const ConvolveParams&, const Field&);
Field adj_accumulate(const AccumulateParams&, const Field&, const TypeInfo& in);
Field adj_sample(const SampleParams&, const Field&, const TypeInfo& in);
Field adj_disperse(const DisperseParams&, const Field&);
Field adj_scatter(const ScatterParams&, const Field&, const TypeInfo& in);
Field adj_linearized(const LinearizedParams&, const Field&);

PrimitiveNode linearize_detect(const PrimitiveNode&, const Field& x_op);
PrimitiveNode linearize_transform(const PrimitiveNode&, const Field& x_op);

TypeInfo infer_output_type(const PrimitiveNode& node, const TypeInfo& in) {
    switch (node.kind) {
        case Kind::propagate: return infer_propagate(node.as<PropagateParams>(), in);
        case Kind::modulate: return infer_modulate(node.as<ModulateParams>(), in);
        case Kind::project: return infer_project(node.as<ProjectParams>(), in);
        case Kind::encode: return infer_encode(node.as<EncodeParams>(), in);
        case Kind::convolve: return infer_convolve(node.as<ConvolveParams>(), in);
        case Kind::accumulate: return infer_accumulate(node.as<AccumulateParams>(), in);
        case Kind::detect: return infer_detect(node.as<DetectParams>(), in);
        case Kind::sample: return infer_sample(node.as<SampleParams>(), in);
        case Kind::disperse: return infer_disperse(node.as<DisperseParams>(), in);
        case Kind::scatter: return infer_scatter(node.as<ScatterParams>(), in);
        case Kind::transform: return infer_transform(node.as<TransformParams>(), in);
        case Kind::linearized: return infer_linearized(node.as<LinearizedParams>(), in);
    }
    throw Error("unreachable kind");
}

namespace {

std::string node_label(const PrimitiveNode& n) {
    return std::string(kind_name(n.kind)) + " node " + std::to_string(n.id);
}

void check_input(const PrimitiveNode& node, const Field& x) {
    if (node.in_type && !(x.type() == *node.in_type))
        throw TypeError(node_label(node) + " expects input " + node.in_type->str() +
                        ", got " + x.type().str());
    x.check_finite("input to " + node_label(node));
}

} // namespace

Field forward(const PrimitiveNode& node, const Field& x) {
    check_input(node, x);
    switch (node.kind) {
        case Kind::propagate: return fwd_propagate(node.as<PropagateParams>(), x);
        case Kind::modulate: return fwd_modulate(node.as<ModulateParams>(), x);
        case Kind::project: return fwd_project(node.as<ProjectParams>(), x);
        case Kind::encode: return fwd_encode(node.as<EncodeParams>(), x);
        case Kind::convolve: return fwd_convolve(node.as<ConvolveParams>(), x);
        case Kind::accumulate: return fwd_accumulate(node.as<AccumulateParams>(), x);
        case Kind::detect: return fwd_detect(node.as<DetectParams>(), x);
        case Kind::sample: return fwd_sample(node.as<SampleParams>(), x);
        case Kind::disperse: return fwd_disperse(node.as<DisperseParams>(), x);
        case Kind::scatter: return fwd_scatter(node.as<ScatterParams>(), x);
        case Kind::transform: return fwd_transform(node.as<TransformParams>(), x);
        case Kind::linearized: return fwd_linearized(node.as<LinearizedParams>(), x);
    }
    throw Error("unreachable kind");
}

Field adjoint(const PrimitiveNode& node, const Field& y) {
    y.check_finite("adjoint input to " + node_label(node));
    // The spatial structure of several adjoints needs the forward input type.
    const auto need_in = [&]() -> const TypeInfo& {
        if (!node.in_type)
            throw TypeError(node_label(node) +
                            ": adjoint requires the node's declared input type");
        return *node.in_type;
    };
    switch (node.kind) {
        case Kind::propagate: return adj_propagate(node.as<PropagateParams>(), y);
        case Kind::modulate: return adj_modulate(node.as<ModulateParams>(), y, need_in());
        case Kind::project: return adj_project(node.as<ProjectParams>(), y, need_in());
        case Kind::encode: return adj_encode(node.as<EncodeParams>(), y, need_in());
        case Kind::convolve: return adj_convolve(node.as<ConvolveParams>(), y);
        case Kind::accumulate: return adj_accumulate(node.as<AccumulateParams>(), y, need_in());
        case Kind::sample: return adj_sample(node.as<SampleParams>(), y, need_in());
        case Kind::disperse: return adj_disperse(node.as<DisperseParams>(), y);
        case Kind::scatter: return adj_scatter(node.as<ScatterParams>(), y, need_in());
        case Kind::linearized: {
            Field out = adj_linearized(node.as<LinearizedParams>(), y);
            if (node.in_type) out.set_units(node.in_type->units);
            return out;
        }
        case Kind::detect: {
            const auto& p = node.as<DetectParams>();
            if (p.family == DetectFamily::linear_field) {
                Field out = y;
                out *= p.g; // real gain, self-adjoint up to conjugation
                out.set_units(node.in_type ? node.in_type->units : y.units());
                return out;
            }
            if (!p.x_op)
                throw LinearizationError(node_label(node) +
                                         " adjoint needs an operating point x_op");
            return adjoint(linearize(node, *p.x_op), y);
        }
        case Kind::transform: {
            const auto& p = node.as<TransformParams>();
            if (!p.x_op)
                throw LinearizationError(node_label(node) +
                                         " adjoint needs an operating point x_op");
            return adjoint(linearize(node, *p.x_op), y);
        }
    }
    throw Error("unreachable kind");
}

PrimitiveNode linearize(const PrimitiveNode& node, const Field& x_op) {
    if (node.kind == Kind::detect) return linearize_detect(node, x_op);
    if (node.kind == Kind::transform) return linearize_transform(node, x_op);
    throw ParamError("linearize: node kind must be detect or transform, got " +
                     std::string(kind_name(node.kind)));
}

bool is_linear(const PrimitiveNode& node) {
    switch (node.kind) {
        case Kind::detect:
            return node.as<DetectParams>().family == DetectFamily::linear_field;
        case Kind::transform:
            return false;
        default:
            return true;
    }
}

bool is_complex_linear(const PrimitiveNode& node) {
    if (!is_linear(node)) return false;
    if (node.kind == Kind::linearized)
        return node.as<LinearizedParams>().mode == LinMode::cdiag;
    return true;
}

LinOp node_linop(const PrimitiveNode& node, const TypeInfo& in) {
    PrimitiveNode n = node;
    if (!is_linear(n)) {
        const Field* xop = nullptr;
        if (n.kind == Kind::detect && n.as<DetectParams>().x_op)
            xop = &*n.as<DetectParams>().x_op;
        if (n.kind == Kind::transform && n.as<TransformParams>().x_op)
            xop = &*n.as<TransformParams>().x_op;
        if (!xop)
            throw LinearizationError(std::string(kind_name(n.kind)) +
                                     " node has no operating point");
        n = linearize(n, *xop);
    }
    n.in_type = in;
    LinOp op;
    op.in_type = in;
    op.out_type = infer_output_type(n, in);
    op.c_linear = is_complex_linear(n);
    op.fwd = [n](const Field& x) { return forward(n, x); };
    op.adj = [n](const Field& y) { return adjoint(n, y); };
    return op;
}

DenseMatrix materialize(const LinOp& op, std::size_t cap) {
    const std::size_t n = op.in_type.size();
    if (n > cap)
        throw OracleTooLargeError("input dimension " + std::to_string(n) +
                                  " exceeds cap " + std::to_string(cap));
    if (op.in_type.dtype == DType::complex128 && !op.c_linear)
        throw TypeError("materialize: operator is not complex-linear on a complex space");
    DenseMatrix A;
    A.cols = n;
    A.rows = op.out_type.size();
    A.a.assign(A.rows * A.cols, cplx{0.0, 0.0});
    Field e(op.in_type);
    for (std::size_t j = 0; j < n; ++j) {
        if (j > 0) e[j - 1] = 0.0;
        e[j] = 1.0;
        Field col = op.fwd(e);
        if (col.size() != A.rows)
            throw TypeError("materialize: forward output size changed between columns");
        for (std::size_t r = 0; r < A.rows; ++r) A.at(r, j) = col[r];
    }
    return A;
}

Field apply_dense(const DenseMatrix& A, const TypeInfo& out_type, const Field& x) {
    if (x.size() != A.cols) throw TypeError("apply_dense: dimension mismatch");
    Field y(out_type);
    for (std::size_t r = 0; r < A.rows; ++r) {
        cplx acc{0.0, 0.0};
        const cplx* row = &A.a[r * A.cols];
        for (std::size_t c = 0; c < A.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

Field apply_dense_adjoint(const DenseMatrix& A, const TypeInfo& in_type, const Field& y) {
    if (y.size() != A.rows) throw TypeError("apply_dense_adjoint: dimension mismatch");
    Field x(in_type);
    for (std::size_t r = 0; r < A.rows; ++r) {
        const cplx yr = y[r];
        const cplx* row = &A.a[r * A.cols];
        for (std::size_t c = 0; c < A.cols; ++c) x[c] += std::conj(row[c]) * yr;
    }
    return x;
}

} // namespace opg
