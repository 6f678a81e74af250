#include "opgraph/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "opgraph/oracles.hpp"
#include "opgraph/patterns.hpp"
#include "opgraph/phantoms.hpp"
#include "opgraph/testsets.hpp"

namespace opg {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

TypeInfo t2d(std::size_t ny, std::size_t nx, DType d = DType::real64) {
    return TypeInfo{{{"y", ny}, {"x", nx}}, d, "au"};
}

std::map<std::string, std::size_t> resolved_sizes(const ModalityRecord& rec,
                                                  const Sizes& sizes) {
    std::map<std::string, std::size_t> out = rec.default_sizes;
    for (const auto& [k, v] : sizes.v) out[k] = v;
    return out;
}

} // namespace

std::vector<NamedOp> canonical_primitive_ops(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<NamedOp> ops;

    {
        TypeInfo in = t2d(n, n, DType::complex128);
        ops.push_back({"P",
                       make_node(1, Kind::propagate,
                                 PropagateParams{0.7 * double(n), 0.5, 1.0, 1.0}, in),
                       in});
    }
    {
        TypeInfo in = t2d(n, n, DType::complex128);
        ModulateParams mp;
        mp.m = Field(in);
        for (std::size_t i = 0; i < mp.m.size(); ++i) mp.m[i] = rng.cgaussian();
        ops.push_back({"M", make_node(1, Kind::modulate, mp, in), in});
    }
    {
        TypeInfo in = t2d(n, n);
        ProjectParams pp = patterns::radon_params(n, std::max<std::size_t>(6, n / 4));
        ops.push_back({"Pi", make_node(1, Kind::project, pp, in), in});
    }
    {
        TypeInfo in = t2d(n, n, DType::complex128);
        EncodeParams ep;
        for (std::size_t j = 0; j < 2 * n; ++j)
            ep.ktraj.push_back({rng.uniform(-double(n) / 2, double(n) / 2),
                                rng.uniform(-double(n) / 2, double(n) / 2)});
        ops.push_back({"F", make_node(1, Kind::encode, ep, in), in});
    }
    {
        TypeInfo in = t2d(n, n, DType::complex128);
        ConvolveParams cp;
        TypeInfo kt = t2d(5, 5, DType::complex128);
        cp.h = Field(kt);
        for (std::size_t i = 0; i < cp.h.size(); ++i) cp.h[i] = rng.cgaussian();
        ops.push_back({"C", make_node(1, Kind::convolve, cp, in), in});
    }
    {
        TypeInfo in{{{"y", n / 2}, {"x", n / 2}, {"lambda", 8}}, DType::real64, "au"};
        ops.push_back({"Sigma", make_node(1, Kind::accumulate, AccumulateParams{"lambda"}, in),
                       in});
    }
    {
        TypeInfo in = t2d(n, n, DType::complex128);
        DetectParams dp;
        dp.family = DetectFamily::intensity_square;
        Field xop(in);
        for (std::size_t i = 0; i < xop.size(); ++i) xop[i] = rng.cgaussian();
        dp.x_op = xop;
        ops.push_back({"D", make_node(1, Kind::detect, dp, in), in});
    }
    {
        TypeInfo in{{{"pix", n * n}}, DType::complex128, "au"};
        SampleParams sp;
        for (std::size_t i = 0; i < n * n; i += 2) sp.omega.push_back(i);
        ops.push_back({"S", make_node(1, Kind::sample, sp, in), in});
    }
    {
        TypeInfo in{{{"y", n / 2}, {"x", n / 2}, {"lambda", 8}}, DType::real64, "au"};
        DisperseParams wp;
        wp.alpha = 1.0;
        wp.axis = "x";
        for (int j = 0; j < 8; ++j) wp.lambdas.push_back(double(j));
        ops.push_back({"W", make_node(1, Kind::disperse, wp, in), in});
    }
    {
        TypeInfo in{{{"y", n / 2}, {"x", n / 2}, {"E", 8}}, DType::real64, "au"};
        ScatterParams rp;
        rp.n_out = 8;
        rp.n_in = 8;
        rp.kernel.resize(64);
        for (auto& v : rp.kernel) v = rng.uniform();
        Field atten(in);
        for (std::size_t i = 0; i < atten.size(); ++i) atten[i] = rng.uniform(0.1, 1.0);
        rp.atten = atten;
        ops.push_back({"R", make_node(1, Kind::scatter, rp, in), in});
    }
    {
        TypeInfo in = t2d(n, n);
        TransformParams tp;
        tp.family = TransformFamily::poly;
        tp.coeffs = {0.1, 1.0, -0.3, 0.05};
        Field xop(in);
        for (std::size_t i = 0; i < xop.size(); ++i) xop[i] = rng.gaussian();
        tp.x_op = xop;
        ops.push_back({"Lambda", make_node(1, Kind::transform, tp, in), in});
    }
    return ops;
}

double table_s1_value(const std::string& letter) {
    if (letter == "P") return 1e-14;
    if (letter == "M") return 1e-15;
    if (letter == "Pi") return 1e-12;
    if (letter == "F") return 1e-14;
    if (letter == "C") return 1e-14;
    if (letter == "Sigma") return 1e-15;
    if (letter == "D") return 1e-13;
    if (letter == "S") return 1e-15;
    if (letter == "W") return 1e-13;
    if (letter == "R") return 1e-11;
    if (letter == "Lambda") return 1e-13;
    return 1e-6;
}

AdjointSuiteReport run_adjoint_suite(std::uint64_t seed, const std::vector<std::size_t>& sizes,
                                     std::size_t trials) {
    const double t0 = now_seconds();
    AdjointSuiteReport rep;
    rep.seed = seed;
    rep.trials = trials;
    rep.all_pass = true;
    for (std::size_t n : sizes) {
        for (const auto& op : canonical_primitive_ops(n, mix64(seed ^ n))) {
            AdjointRow row;
            row.letter = op.letter;
            row.size = n;
            row.guard = table_s1_value(op.letter) * 100.0;
            auto dt = dot_test(node_linop(op.node, op.in), trials, mix64(seed ^ (n * 131)));
            row.max_rel_err = dt.max_rel_err;
            row.pass = row.max_rel_err < 1e-6 && row.max_rel_err < row.guard;
            rep.all_pass = rep.all_pass && row.pass;
            rep.rows.push_back(row);
        }
    }
    rep.seconds = now_seconds() - t0;
    return rep;
}

FidelityRow validate_modality(const Registry& reg, const std::string& name, const Sizes& sizes,
                              std::uint64_t seed) {
    const ModalityRecord& rec = reg.get(name);
    FidelityRow row;
    row.name = name;
    row.tier = tier_name(rec.tier);
    row.bound = rec.expected_e_img;

    OperatorGraph g = build_modality(reg, name, sizes, seed);
    auto st = stats(g);
    row.n_nodes = st.n_nodes;
    row.depth = st.depth;
    row.stats_ok = st.n_nodes == rec.expected_nodes && st.depth == rec.expected_depth &&
                   validate(g).empty();
    row.has_oracle = has_oracle(name);
    if (row.has_oracle) {
        auto resolved = resolved_sizes(rec, sizes);
        auto objects = s1_test_objects(g.source_type, mix64(seed ^ hash_label(name)));
        auto rep = e_img([&](const Field& x) { return run_oracle(name, resolved, seed, x); },
                         [&](const Field& x) { return compose(g, x); }, objects);
        row.e_mean = rep.e_mean;
        row.e_sup = rep.e_sup;
        row.e_std = rep.e_std;
    }
    row.pass = row.stats_ok && (!row.has_oracle || !row.bound || row.e_mean < *row.bound);
    return row;
}

RegistryReport run_validate_registry(const Registry& reg, std::uint64_t seed) {
    const double t0 = now_seconds();
    RegistryReport rep;
    rep.seed = seed;
    rep.all_pass = true;
    std::vector<const ModalityRecord*> ordered;
    for (const auto& r : reg.records()) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](auto* a, auto* b) { return a->name < b->name; });
    for (const auto* r : ordered) {
        auto row = validate_modality(reg, r->name, Sizes{}, seed);
        rep.all_pass = rep.all_pass && row.pass;
        rep.rows.push_back(std::move(row));
    }
    rep.seconds = now_seconds() - t0;
    return rep;
}

// ---------------------------------------------------------------------------

StageChain template_stage_chain(const OperatorGraph& g, const Field& x_op) {
    StageChain chain;
    Field v = x_op;
    for (int id : topo_order(g)) {
        const PrimitiveNode& node = g.nodes.at(id);
        PrimitiveNode staged = is_linear(node) ? node : linearize(node, v);
        staged.in_type = v.type();
        chain.stages.push_back(node_linop(staged, v.type()));
        v = forward(node, v);
    }
    return chain;
}

NormsReport run_norms(const Registry& reg, std::uint64_t seed) {
    NormsReport rep;
    rep.all_pass = true;

    // Table S3 chains at registry default sizes
    for (const std::string name : {"cassi", "mri", "ct", "compton"}) {
        OperatorGraph g = build_modality_default(reg, name, seed);
        Field x_op = adapt_phantom(0, g.source_type);
        Field v = x_op;
        std::size_t idx = 0;
        for (int id : topo_order(g)) {
            const PrimitiveNode& node = g.nodes.at(id);
            NormRow row;
            row.chain = name;
            row.stage = std::string(kind_letter(node.kind)) + "#" + std::to_string(idx++);
            if (node.kind == Kind::detect) {
                row.value = node.as<DetectParams>().g; // Table S3 convention
                row.method = "gain";
            } else if (node.kind == Kind::transform) {
                double mx = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i)
                    mx = std::max(mx,
                                  std::fabs(transform_derivative(node.as<TransformParams>(),
                                                                 v[i].real())));
                row.value = mx;
                row.method = "linearized";
            } else {
                auto est = operator_norm(node_linop(node, v.type()), 1e-8, 500,
                                         mix64(seed ^ hash_label(row.stage)));
                row.value = est.value;
                row.method = "power-iteration";
            }
            row.within_bound = row.value <= rep.B;
            rep.all_pass = rep.all_pass && row.within_bound;
            rep.stage_rows.push_back(row);
            v = forward(node, v);
        }
    }

    // closed-form reference operators
    auto push_ref = [&](const std::string& label, double value, double want, double tol) {
        NormRow row;
        row.chain = "reference";
        row.stage = label;
        row.value = value;
        row.method = "power-iteration";
        row.within_bound = std::fabs(value - want) <= tol * std::max(1.0, std::fabs(want));
        rep.all_pass = rep.all_pass && row.within_bound;
        rep.reference_rows.push_back(row);
    };
    {
        TypeInfo in{{{"pix", 64}}, DType::complex128, "au"};
        SampleParams sp;
        for (std::size_t i = 0; i < 64; i += 2) sp.omega.push_back(i);
        push_ref("sample",
                 operator_norm(node_linop(make_node(1, Kind::sample, sp, in), in)).value, 1.0,
                 1e-4);
    }
    {
        TypeInfo in = t2d(16, 16, DType::complex128);
        EncodeParams ep;
        ep.ktraj = full_grid_ktraj(16, 16);
        push_ref("encode-full-grid-unnormalized",
                 operator_norm(node_linop(make_node(1, Kind::encode, ep, in), in)).value, 16.0,
                 1e-4);
        ep.normalize = true;
        push_ref("encode-full-grid-normalized",
                 operator_norm(node_linop(make_node(1, Kind::encode, ep, in), in)).value, 1.0,
                 1e-4);
    }
    {
        TypeInfo in{{{"y", 4}, {"x", 4}, {"lambda", 15}}, DType::real64, "au"};
        push_ref(
            "accumulate-15",
            operator_norm(node_linop(make_node(1, Kind::accumulate, AccumulateParams{"lambda"},
                                               in),
                                     in))
                .value,
            std::sqrt(15.0), 1e-4);
    }
    {
        TypeInfo in = t2d(16, 16);
        Rng rng(seed);
        ModulateParams mp;
        mp.m = patterns::binary_mask(16, 16, rng);
        const double v =
            operator_norm(node_linop(make_node(1, Kind::modulate, mp, in), in)).value;
        NormRow row;
        row.chain = "reference";
        row.stage = "modulate-binary";
        row.value = v;
        row.method = "power-iteration";
        row.within_bound = v <= 1.0 + 1e-4;
        rep.all_pass = rep.all_pass && row.within_bound;
        rep.reference_rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------

SweepReport run_perturbation_sweep(const Registry& reg, std::size_t trials,
                                   std::uint64_t seed) {
    SweepReport rep;
    rep.seed = seed;
    Rng rng = Rng(seed).child("perturbation-sweep");

    // small instances keep the power iterations quick
    Sizes cassi_sz;
    cassi_sz.v = {{"n", 16}, {"bands", 4}};
    Sizes mri_sz;
    mri_sz.v = {{"n", 16}, {"samples", 64}};
    Sizes ct_sz;
    ct_sz.v = {{"n", 24}, {"angles", 10}};
    struct Prepared {
        std::string name;
        OperatorGraph g;
        StageChain chain;
    };
    std::vector<Prepared> prepared;
    for (const auto& [name, sz] :
         std::vector<std::pair<std::string, Sizes>>{{"cassi", cassi_sz},
                                                    {"mri", mri_sz},
                                                    {"ct", ct_sz}}) {
        OperatorGraph g = build_modality(reg, name, sz, seed);
        Field x_op = adapt_phantom(0, g.source_type);
        prepared.push_back({name, g, template_stage_chain(g, x_op)});
    }

    for (std::size_t t = 0; t < trials; ++t) {
        auto& pre = prepared[t % prepared.size()];
        const std::size_t K = pre.chain.stages.size();
        const std::size_t k = rng.integer(K);
        const double delta = std::pow(10.0, rng.uniform(-6.0, -2.0));

        StageChain pert = pre.chain;
        std::vector<double> eps(K, 0.0);
        // scale perturbation A_k -> (1+delta) A_k; eps_k = delta * ||A_k||
        const LinOp base_stage = pre.chain.stages[k];
        LinOp scaled = base_stage;
        auto f = base_stage.fwd;
        auto a = base_stage.adj;
        scaled.fwd = [f, delta](const Field& x) {
            Field y = f(x);
            y *= 1.0 + delta;
            return y;
        };
        scaled.adj = [a, delta](const Field& y) {
            Field x = a(y);
            x *= 1.0 + delta;
            return x;
        };
        pert.stages[k] = scaled;
        const double stage_norm =
            operator_norm(base_stage, 1e-8, 300, mix64(seed ^ (t * 977 + k))).value;
        eps[k] = delta * stage_norm;

        auto res = bound_check(pre.chain, pert, eps, 4.0, 1e-7, 300,
                               mix64(seed ^ (t * 31 + 7)));
        SweepTrial st;
        st.chain = pre.name;
        st.stage = k;
        st.eps = eps[k];
        st.measured = res.measured;
        st.bound = res.bound_sharp;
        st.ok = res.ok;
        if (st.ok) ++rep.passes;
        rep.trials.push_back(st);
    }
    rep.all_pass = rep.passes == rep.trials.size();
    return rep;
}

// ---------------------------------------------------------------------------

ClosureReport run_closure_test(const Registry& reg, const std::vector<Kind>& frozen,
                               double epsilon, std::uint64_t seed,
                               const SearchBudget& search_budget) {
    ClosureReport rep;
    rep.seed = seed;
    rep.epsilon = epsilon;
    for (Kind k : frozen) rep.frozen.push_back(kind_letter(k));

    std::vector<const ModalityRecord*> rows;
    for (const auto& r : reg.records())
        if (r.closure_member) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->name < b->name; });

    auto frozen_has = [&](const std::string& letter) {
        for (Kind k : frozen)
            if (letter == kind_letter(k)) return true;
        return false;
    };

    for (const auto* r : rows) {
        ClosureRow row;
        row.name = r->name;
        std::vector<std::string> missing;
        for (const auto& letter : r->chain)
            if (!frozen_has(letter)) missing.push_back(letter);
        const auto resolved = resolved_sizes(*r, Sizes{});
        if (missing.empty()) {
            OperatorGraph g = build_modality_default(reg, r->name, seed);
            auto objects = s1_test_objects(g.source_type, mix64(seed ^ hash_label(r->name)));
            auto fr =
                e_img([&](const Field& x) { return run_oracle(r->name, resolved, seed, x); },
                      [&](const Field& x) { return compose(g, x); }, objects);
            row.e_img = fr.e_mean;
            row.via_search = false;
            row.chain = r->chain;
            row.new_primitive = !(fr.e_mean < epsilon);
        } else {
            SearchBudget budget = search_budget;
            budget.allowed_kinds = frozen;
            TypeInfo in = oracle_input_type(r->name, resolved);
            auto objects = s1_test_objects(in, mix64(seed ^ hash_label(r->name)));
            auto res = extension_search(
                [&](const Field& x) { return run_oracle(r->name, resolved, seed, x); }, in,
                objects, budget, seed);
            row.e_img = res.min_e_img;
            row.via_search = true;
            row.chain = res.best_chain;
            row.new_primitive = !(res.min_e_img < epsilon);
            row.missing_kinds = missing;
        }
        rep.flags_any = rep.flags_any || row.new_primitive;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

ExtensionCheckReport run_extension_check(const Registry& reg, const std::string& target,
                                         Kind without, double epsilon, std::uint64_t seed,
                                         SearchBudget budget, const Sizes& sizes) {
    const double t0 = now_seconds();
    ExtensionCheckReport rep;
    rep.target = target;
    rep.without = kind_letter(without);

    const ModalityRecord& rec = reg.get(target);
    const auto resolved = resolved_sizes(rec, sizes);
    // with the full library: the registry template itself
    {
        OperatorGraph g = build_modality(reg, target, sizes, seed);
        auto objects = s1_test_objects(g.source_type, mix64(seed ^ hash_label(target)));
        auto fr = e_img([&](const Field& x) { return run_oracle(target, resolved, seed, x); },
                        [&](const Field& x) { return compose(g, x); }, objects);
        rep.template_e_img = fr.e_mean;
    }
    // without the named kind: bounded search
    if (budget.allowed_kinds.empty()) {
        for (Kind k : {Kind::propagate, Kind::modulate, Kind::project, Kind::encode,
                       Kind::convolve, Kind::accumulate, Kind::detect, Kind::sample,
                       Kind::disperse, Kind::scatter, Kind::transform})
            if (k != without) budget.allowed_kinds.push_back(k);
    } else {
        budget.allowed_kinds.erase(std::remove(budget.allowed_kinds.begin(),
                                               budget.allowed_kinds.end(), without),
                                   budget.allowed_kinds.end());
    }
    TypeInfo in = oracle_input_type(target, resolved);
    auto objects = s1_test_objects(in, mix64(seed ^ hash_label(target)));
    auto res = extension_search(
        [&](const Field& x) { return run_oracle(target, resolved, seed, x); }, in, objects,
        budget, seed);
    rep.min_e_img = res.min_e_img;
    rep.best_chain = res.best_chain;
    rep.budget_exhausted = res.budget_exhausted;
    rep.topologies = res.topologies_tried;
    rep.property_holds = rep.min_e_img > epsilon && rep.template_e_img < epsilon;
    rep.seconds = now_seconds() - t0;
    return rep;
}

SabotageReport run_sabotage_control(std::uint64_t seed) {
    // representable target: a pure Modulate forward with a known pattern
    const std::size_t n = 12;
    TypeInfo in = t2d(n, n);
    Rng rng = Rng(seed).child("sabotage");
    Field m_star = patterns::smooth_pattern(n, n, rng);
    Apply target = [m_star](const Field& x) {
        Field y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = m_star[i].real() * x[i].real();
        y.set_units("counts");
        return y;
    };
    auto objects = s1_test_objects(in, mix64(seed ^ 0x5ab0));
    SearchBudget budget;
    budget.max_nodes = 2;
    budget.allowed_kinds = {Kind::modulate, Kind::detect};
    auto res = extension_search(target, in, objects, budget, seed);
    SabotageReport rep;
    rep.e_img = res.min_e_img;
    rep.pass = res.min_e_img < 1e-6;
    return rep;
}

DenseMatrix materialize_parallel(const LinOp& op, std::size_t cap, std::size_t threads) {
    const std::size_t n = op.in_type.size();
    if (n > cap)
        throw OracleTooLargeError("input dimension " + std::to_string(n) + " exceeds cap " +
                                  std::to_string(cap));
    if (op.in_type.dtype == DType::complex128 && !op.c_linear)
        throw TypeError("materialize: operator is not complex-linear on a complex space");
    DenseMatrix A;
    A.cols = n;
    A.rows = op.out_type.size();
    A.a.assign(A.rows * A.cols, cplx{0.0, 0.0});
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t j = w; j < n; j += threads) {
                Field e(op.in_type);
                e[j] = 1.0;
                Field col = op.fwd(e);
                for (std::size_t r = 0; r < A.rows; ++r) A.at(r, j) = col[r];
            }
        });
    }
    for (auto& th : pool) th.join();
    return A;
}

} // namespace opg
