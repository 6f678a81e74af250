#ifndef OPGRAPH_METRICS_HPP
#define OPGRAPH_METRICS_HPP

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "opgraph/graph.hpp"
#include "opgraph/rng.hpp"

namespace opg {

/// Random field with the given type: iid standard normal entries (complex:
/// standard complex normal).
Field random_field(const TypeInfo& t, Rng& rng);

// ---------------------------------------------------------------------------
// Adjoint consistency (dot test)
// ---------------------------------------------------------------------------

struct DotTestReport {
    std::size_t trials = 0;
    double max_rel_err = 0.0;
    double epsilon_guard = 1e-8;
    std::uint64_t seed = 0;
    std::vector<double> rel_errs;
};

/// |<Ax,y> - <x,A'y>| / max(|<Ax,y>|, guard) over seeded random pairs.
/// R-linear-only operators are tested with the real inner product.
DotTestReport dot_test(const LinOp& op, std::size_t trials, std::uint64_t seed,
                       double epsilon_guard = 1e-8);

// ---------------------------------------------------------------------------
// Fidelity metric e_img
// ---------------------------------------------------------------------------

struct FidelityReport {
    double e_sup = 0.0;
    double e_mean = 0.0;
    double e_std = 0.0;
    std::size_t n_test = 0;
    double delta_guard = 1e-8;
    std::vector<double> ratios;
};

using Apply = std::function<Field(const Field&)>;

/// Per-object ||H_ref(x) - H_G(x)|| / (||H_ref(x)|| + delta); sup/mean/std.
FidelityReport e_img(const Apply& h_ref, const Apply& h_g, const std::vector<Field>& test_set,
                     double delta_guard = 1e-8);

// ---------------------------------------------------------------------------
// Operator norm via power iteration on A'A
// ---------------------------------------------------------------------------

struct NormEstimate {
    double value = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

NormEstimate operator_norm(const LinOp& op, double tol = 1e-8, std::size_t max_iter = 500,
                           std::uint64_t seed = 0x5eed);

// ---------------------------------------------------------------------------
// Telescoping composition bound (sharp and loose forms)
// ---------------------------------------------------------------------------

struct BoundInputs {
    /// (epsilon_k, gamma_k), ordered so that gamma factors *after* stage k are
    /// downstream; the shipped worked examples follow this convention.
    std::vector<std::pair<double, double>> per_stage;
    double B = 4.0;
    double H_norm = 1.0;
};

struct BoundResult {
    double absolute_sharp = 0.0; // sum_k eps_k * prod_{j>k} gamma_j
    double absolute_loose = 0.0; // K * max_k eps_k * B^(K-1)
    double relative = 0.0;       // absolute_sharp / H_norm
};

BoundResult composition_bound(const BoundInputs& b);

// ---------------------------------------------------------------------------
// Measured perturbation vs bound on a concrete chain
// ---------------------------------------------------------------------------

/// A chain of operator stages applied left to right.
struct StageChain {
    std::vector<LinOp> stages;
};

LinOp chain_linop(const StageChain& chain);
/// Difference of two same-shaped operators as a matrix-free LinOp.
LinOp difference_linop(const LinOp& a, const LinOp& b);

struct BoundCheckResult {
    double measured = 0.0;
    double bound_sharp = 0.0;
    double bound_loose = 0.0;
    std::vector<double> stage_norms;
    bool ok = false; // measured <= bound_sharp
};

/// Perturbs stages of `base` into `pert` (same length); `stage_eps[k]` is the
/// operator norm of the k-th stage delta (0 for unperturbed stages). Effective
/// epsilons include upstream amplification, so measured <= sharp bound is a
/// theorem for exact arithmetic.
BoundCheckResult bound_check(const StageChain& base, const StageChain& pert,
                             const std::vector<double>& stage_eps, double B = 4.0,
                             double norm_tol = 1e-6, std::size_t norm_iters = 300,
                             std::uint64_t seed = 0x5eed);

} // namespace opg

#endif
