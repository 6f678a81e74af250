#ifndef OPGRAPH_OPS_HPP
#define OPGRAPH_OPS_HPP

#include <functional>

#include "opgraph/node.hpp"

namespace opg {

/// Static output type of a node applied to `in` (shape/axis propagation,
/// dtype promotion, unit tagging). Throws TypeError when incompatible.
TypeInfo infer_output_type(const PrimitiveNode& node, const TypeInfo& in);

/// Apply the node's forward map. Validates the input against the declared
/// type when present and rejects non-finite inputs.
Field forward(const PrimitiveNode& node, const Field& x);

/// Apply the adjoint map. Linear kinds use the exact conjugate transpose of
/// the discretized forward; Detect/Transform require params.x_op and apply
/// the linearized (Jacobian) adjoint at that point.
Field adjoint(const PrimitiveNode& node, const Field& y);

/// Jacobian of a Detect/Transform node at x_op, as a linearized node whose
/// forward multiplies elementwise by the family derivative.
PrimitiveNode linearize(const PrimitiveNode& node, const Field& x_op);

/// True for the nine linear primitives, Detect family 1 and linearized nodes.
bool is_linear(const PrimitiveNode& node);
/// True when the map is additionally complex-linear (safe to materialize on a
/// complex basis). Linearized real-part projections are only R-linear.
bool is_complex_linear(const PrimitiveNode& node);

/// Lipschitz constants of the five Transform families over |x| <= R:
/// L1 = alpha*e^(alpha R), L2 = 1/delta, L3 = 1, L4 = sum k|a_k| R^(k-1), L5 = 1.
double lipschitz_constant(const TransformParams& p, double R);

/// Pointwise Transform evaluation on a real scalar (used by oracles/tests).
double transform_scalar(const TransformParams& p, double x);
/// Pointwise derivative with the left-subgradient convention at wrap branch
/// points and saturate boundaries; sets *at_boundary when one is hit.
double transform_derivative(const TransformParams& p, double x, bool* at_boundary = nullptr);

// ---------------------------------------------------------------------------
// Matrix-free linear operator view (dot tests, norms, dense materialization)
// ---------------------------------------------------------------------------

struct LinOp {
    TypeInfo in_type, out_type;
    bool c_linear = true;
    std::function<Field(const Field&)> fwd, adj;
};

/// View a node as a matrix-free linear operator on `in`. Detect/Transform
/// nodes are linearized at params.x_op (LinearizationError if absent).
LinOp node_linop(const PrimitiveNode& node, const TypeInfo& in);

/// Dense matrix by applying fwd to each canonical basis vector; column j is
/// forward(e_j) flattened row-major. Complex input spaces require a
/// complex-linear operator. Throws OracleTooLargeError above `cap`.
/// Row-major (row*cols + col) storage.
struct DenseMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<cplx> a;
    cplx& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    const cplx& at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

DenseMatrix materialize(const LinOp& op, std::size_t cap = 4096);

/// y = A x and y = A^H x on flattened fields.
Field apply_dense(const DenseMatrix& A, const TypeInfo& out_type, const Field& x);
Field apply_dense_adjoint(const DenseMatrix& A, const TypeInfo& in_type, const Field& y);

} // namespace opg

#endif
