#include "opgraph/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace opg {

Field random_field(const TypeInfo& t, Rng& rng) {
    Field f(t);
    if (t.dtype == DType::complex128) {
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.cgaussian();
    } else {
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.gaussian();
    }
    return f;
}

DotTestReport dot_test(const LinOp& op, std::size_t trials, std::uint64_t seed,
                       double epsilon_guard) {
    DotTestReport rep;
    rep.trials = trials;
    rep.seed = seed;
    rep.epsilon_guard = epsilon_guard;
    Rng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        Field x = random_field(op.in_type, rng);
        Field y = random_field(op.out_type, rng);
        double err;
        if (op.c_linear) {
            const cplx lhs = cdot(op.fwd(x), y);
            const cplx rhs = cdot(x, op.adj(y));
            err = std::abs(lhs - rhs) / std::max(std::abs(lhs), epsilon_guard);
        } else {
            const double lhs = rdot(op.fwd(x), y);
            const double rhs = rdot(x, op.adj(y));
            err = std::fabs(lhs - rhs) / std::max(std::fabs(lhs), epsilon_guard);
        }
        rep.rel_errs.push_back(err);
        rep.max_rel_err = std::max(rep.max_rel_err, err);
    }
    return rep;
}

FidelityReport e_img(const Apply& h_ref, const Apply& h_g, const std::vector<Field>& test_set,
                     double delta_guard) {
    if (test_set.empty()) throw Error("e_img: empty test set");
    FidelityReport rep;
    rep.delta_guard = delta_guard;
    rep.n_test = test_set.size();
    double sum = 0.0, sumsq = 0.0;
    for (const auto& x : test_set) {
        Field ref = h_ref(x);
        Field got = h_g(x);
        if (!(ref.type().edge_type().shape == got.type().edge_type().shape))
            throw TypeError("e_img: reference and candidate outputs have different shapes");
        const double num = (ref - got).norm2();
        const double ratio = num / (ref.norm2() + delta_guard);
        rep.ratios.push_back(ratio);
        rep.e_sup = std::max(rep.e_sup, ratio);
        sum += ratio;
        sumsq += ratio * ratio;
    }
    rep.e_mean = sum / static_cast<double>(rep.n_test);
    const double var =
        std::max(0.0, sumsq / static_cast<double>(rep.n_test) - rep.e_mean * rep.e_mean);
    rep.e_std = std::sqrt(var);
    return rep;
}

NormEstimate operator_norm(const LinOp& op, double tol, std::size_t max_iter,
                           std::uint64_t seed) {
    NormEstimate est;
    Rng rng(seed);
    for (int attempt = 0; attempt < 2; ++attempt) { // one restart on stagnation
        Field v = random_field(op.in_type, rng);
        double nv = v.norm2();
        if (nv == 0.0) continue;
        v *= 1.0 / nv;
        double sigma = 0.0, prev = -1.0;
        for (std::size_t it = 0; it < max_iter; ++it) {
            Field av = op.fwd(v);
            sigma = av.norm2();
            ++est.iterations;
            if (sigma == 0.0) { // zero operator (or v in the null space)
                est.value = 0.0;
                est.converged = attempt > 0 ? est.converged : false;
                break;
            }
            Field w = op.adj(av);
            const double nw = w.norm2();
            if (nw == 0.0) break;
            v = (1.0 / nw) * w;
            if (prev >= 0.0 && std::fabs(sigma - prev) <= tol * std::max(sigma, 1e-300)) {
                est.value = sigma;
                est.converged = true;
                return est;
            }
            prev = sigma;
        }
        est.value = std::max(est.value, sigma);
        if (est.converged) return est;
    }
    return est;
}

BoundResult composition_bound(const BoundInputs& b) {
    BoundResult r;
    const std::size_t k_stages = b.per_stage.size();
    double max_eps = 0.0;
    for (std::size_t k = 0; k < k_stages; ++k) {
        double prod = 1.0;
        for (std::size_t j = k + 1; j < k_stages; ++j) prod *= b.per_stage[j].second;
        r.absolute_sharp += b.per_stage[k].first * prod;
        max_eps = std::max(max_eps, b.per_stage[k].first);
    }
    if (k_stages > 0)
        r.absolute_loose = static_cast<double>(k_stages) * max_eps *
                           std::pow(b.B, static_cast<double>(k_stages - 1));
    r.relative = b.H_norm > 0.0 ? r.absolute_sharp / b.H_norm : 0.0;
    return r;
}

LinOp chain_linop(const StageChain& chain) {
    if (chain.stages.empty()) throw Error("chain_linop: empty chain");
    LinOp op;
    op.in_type = chain.stages.front().in_type;
    op.out_type = chain.stages.back().out_type;
    op.c_linear = true;
    for (const auto& s : chain.stages) op.c_linear = op.c_linear && s.c_linear;
    auto stages = chain.stages;
    op.fwd = [stages](const Field& x) {
        Field v = x;
        for (const auto& s : stages) v = s.fwd(v);
        return v;
    };
    op.adj = [stages](const Field& y) {
        Field v = y;
        for (auto it = stages.rbegin(); it != stages.rend(); ++it) v = it->adj(v);
        return v;
    };
    return op;
}

LinOp difference_linop(const LinOp& a, const LinOp& b) {
    LinOp op;
    op.in_type = a.in_type;
    op.out_type = a.out_type;
    op.c_linear = a.c_linear && b.c_linear;
    auto af = a.fwd, bf = b.fwd, aa = a.adj, ba = b.adj;
    op.fwd = [af, bf](const Field& x) { return af(x) - bf(x); };
    op.adj = [aa, ba](const Field& y) { return aa(y) - ba(y); };
    return op;
}

BoundCheckResult bound_check(const StageChain& base, const StageChain& pert,
                             const std::vector<double>& stage_eps, double B, double norm_tol,
                             std::size_t norm_iters, std::uint64_t seed) {
    if (base.stages.size() != pert.stages.size() || base.stages.size() != stage_eps.size())
        throw Error("bound_check: stage count mismatch");
    BoundCheckResult res;
    const std::size_t K = base.stages.size();
    for (std::size_t k = 0; k < K; ++k) {
        auto est = operator_norm(base.stages[k], norm_tol, norm_iters, mix64(seed ^ (k + 1)));
        // power iteration approaches the norm from below; grant it its own tolerance
        res.stage_norms.push_back(est.value * (1.0 + 10.0 * norm_tol));
    }
    BoundInputs bi;
    bi.B = B;
    double upstream = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
        // effective per-stage error on the reachable domain (S6 two-sided form)
        bi.per_stage.emplace_back(stage_eps[k] * upstream, res.stage_norms[k]);
        upstream *= res.stage_norms[k];
    }
    auto bound = composition_bound(bi);
    res.bound_sharp = bound.absolute_sharp;
    res.bound_loose = bound.absolute_loose;

    LinOp diff = difference_linop(chain_linop(base), chain_linop(pert));
    res.measured = operator_norm(diff, norm_tol, norm_iters, mix64(seed ^ 0xD1FF)).value;
    res.ok = res.measured <= res.bound_sharp * (1.0 + 1e-12) + 1e-300;
    return res;
}

} // namespace opg
