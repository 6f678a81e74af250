#include <cmath>

#include "doctest.h"
#include "opgraph/metrics.hpp"
#include "opgraph/patterns.hpp"
#include "test_support.hpp"

using namespace opg;
using namespace opg::testsup;

TEST_CASE("dot test flags a sabotaged adjoint") {
    TypeInfo in = t1d(16, "pix", DType::complex128);
    ModulateParams mp;
    Rng rng(3);
    mp.m = random_field(in, rng);
    LinOp op = node_linop(make_node(1, Kind::modulate, mp, in), in);
    LinOp bad = op;
    auto adj = op.adj;
    bad.adj = [adj](const Field& y) {
        Field v = adj(y);
        v *= -1.0; // sign-flipped adjoint
        return v;
    };
    auto good_rep = dot_test(op, 20, 5);
    auto bad_rep = dot_test(bad, 20, 5);
    CHECK(good_rep.max_rel_err < 1e-13);
    CHECK(bad_rep.max_rel_err > 1.0); // mismatch ratio is about 2
}

TEST_CASE("identity-like operator dot test sits at machine epsilon") {
    TypeInfo in = t1d(32, "pix", DType::complex128);
    SampleParams sp;
    for (std::size_t i = 0; i < 32; ++i) sp.omega.push_back(i);
    auto rep = dot_test(node_linop(make_node(1, Kind::sample, sp, in), in), 20, 7);
    CHECK(rep.max_rel_err < 1e-14);
}

TEST_CASE("e_img is zero for identical maps and about one for a zero map") {
    Rng rng(11);
    TypeInfo in = t2d(8, 8);
    std::vector<Field> objs;
    for (int i = 0; i < 5; ++i) objs.push_back(random_field(in, rng));
    Apply h = [](const Field& x) {
        Field y = x;
        y *= 2.0;
        return y;
    };
    auto same = e_img(h, h, objs);
    CHECK(same.e_sup == 0.0);
    CHECK(same.e_mean == 0.0);

    Apply zero = [&in](const Field&) { return Field(in); };
    auto off = e_img(h, zero, objs);
    CHECK(off.e_mean == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(off.e_mean <= off.e_sup);
}

TEST_CASE("e_img is scale aware") {
    Rng rng(13);
    TypeInfo in = t2d(8, 8);
    std::vector<Field> objs;
    for (int i = 0; i < 5; ++i) objs.push_back(random_field(in, rng));
    Apply href = [](const Field& x) {
        Field y = x;
        y *= 3.0;
        return y;
    };
    Apply hg = [](const Field& x) {
        Field y = x;
        y *= 3.0000003;
        return y;
    };
    auto base = e_img(href, hg, objs);
    const double c = 40.0;
    Apply href_s = [&](const Field& x) {
        Field y = href(x);
        y *= c;
        return y;
    };
    Apply hg_s = [&](const Field& x) {
        Field y = hg(x);
        y *= c;
        return y;
    };
    auto scaled = e_img(href_s, hg_s, objs);
    CHECK(std::fabs(scaled.e_sup - base.e_sup) < 1e-9);
}

TEST_CASE("operator norms of reference primitives") {
    // Sample: norm 1
    {
        TypeInfo in = t1d(64, "pix", DType::complex128);
        SampleParams sp;
        for (std::size_t i = 0; i < 64; i += 2) sp.omega.push_back(i);
        auto est = operator_norm(node_linop(make_node(1, Kind::sample, sp, in), in));
        CHECK(est.value == doctest::Approx(1.0).epsilon(1e-6));
    }
    // Encode on the full centered grid: sqrt(n) unnormalized, 1 normalized
    {
        TypeInfo in = t2d(8, 8, DType::complex128);
        EncodeParams ep;
        ep.ktraj = full_grid_ktraj(8, 8);
        auto est = operator_norm(node_linop(make_node(1, Kind::encode, ep, in), in));
        CHECK(est.value == doctest::Approx(8.0).epsilon(1e-6)); // sqrt(64)
        ep.normalize = true;
        auto est_n = operator_norm(node_linop(make_node(1, Kind::encode, ep, in), in));
        CHECK(est_n.value == doctest::Approx(1.0).epsilon(1e-6));
    }
    // Modulate m = [2, 3]: norm 3
    {
        TypeInfo in = t1d(2);
        ModulateParams mp;
        mp.m = Field(t1d(2));
        mp.m[0] = 2.0;
        mp.m[1] = 3.0;
        auto est = operator_norm(node_linop(make_node(1, Kind::modulate, mp, in), in), 1e-10,
                                 2000, 17);
        CHECK(est.value == doctest::Approx(3.0).epsilon(1e-5));
    }
    // zero operator returns 0
    {
        TypeInfo in = t1d(4);
        ModulateParams mp;
        mp.m = Field(t1d(4));
        mp.m[0] = 0.0; // all-zero pattern: make_node validates non-empty, zero is fine
        auto est = operator_norm(node_linop(make_node(1, Kind::modulate, mp, in), in));
        CHECK(est.value == 0.0);
    }
}

TEST_CASE("composition bound formulas") {
    // K = 1: bound equals eps exactly
    {
        BoundInputs b;
        b.per_stage = {{1e-3, 1.0}};
        auto r = composition_bound(b);
        CHECK(r.absolute_sharp == doctest::Approx(1e-3));
        CHECK(r.absolute_loose == doctest::Approx(1e-3));
    }
    // CASSI worked constant: only eps_D nonzero, downstream norm product 3.9
    {
        BoundInputs b;
        b.per_stage = {{1e-3, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 3.9}};
        b.H_norm = 1.0;
        auto r = composition_bound(b);
        CHECK(r.absolute_sharp == doctest::Approx(3.9e-3).epsilon(1e-12));
    }
    // CT worked constant: eps_D through ||Pi|| = 3.2
    {
        BoundInputs b;
        b.per_stage = {{1e-3, 1.0}, {0.0, 3.2}};
        auto r = composition_bound(b);
        CHECK(r.absolute_sharp == doctest::Approx(3.2e-3).epsilon(1e-12));
    }
}

TEST_CASE("bound check: zero perturbation and single-stage pattern delta") {
    Rng rng(19);
    const std::size_t n = 8, nl = 4;
    TypeInfo src = t3d(n, n, nl);
    ModulateParams mask;
    mask.m = Field(TypeInfo{{{"y", n}, {"x", n}}, DType::real64, "au"});
    for (std::size_t i = 0; i < mask.m.size(); ++i) mask.m[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    AccumulateParams acc{"lambda"};

    auto mk_chain = [&](const ModulateParams& m) {
        StageChain ch;
        auto n1 = make_node(1, Kind::modulate, m, src);
        ch.stages.push_back(node_linop(n1, src));
        ch.stages.push_back(node_linop(make_node(2, Kind::accumulate, acc, src), src));
        return ch;
    };
    StageChain base = mk_chain(mask);

    // zero perturbation: measured deviation 0 <= bound
    auto res0 = bound_check(base, base, {0.0, 0.0});
    CHECK(res0.measured <= 1e-12);
    CHECK(res0.ok);

    // perturb the mask by a uniform-magnitude delta of sup norm 1e-4
    ModulateParams pert = mask;
    pert.m = mask.m;
    for (std::size_t i = 0; i < pert.m.size(); ++i)
        pert.m[i] += (rng.uniform() < 0.5 ? -1e-4 : 1e-4);
    StageChain chp = mk_chain(pert);
    auto res1 = bound_check(base, chp, {1e-4, 0.0});
    CHECK(res1.measured <= res1.bound_sharp);
    CHECK(res1.measured > 0.0);
    CHECK(res1.ok);

    // two perturbed stages stay below the two-term sharp bound
    StageChain chq = mk_chain(pert);
    chq.stages[1].fwd = [&](const Field& x) {
        Field y = forward(make_node(2, Kind::accumulate, acc, src), x);
        y *= 1.0 + 1e-5;
        return y;
    };
    chq.stages[1].adj = [&](const Field& y) {
        Field x = adjoint(make_node(2, Kind::accumulate, acc, src), y);
        x *= 1.0 + 1e-5;
        return x;
    };
    const double sigma_norm = std::sqrt(double(nl));
    auto res2 = bound_check(base, chq, {1e-4, 1e-5 * sigma_norm});
    CHECK(res2.measured <= res2.bound_sharp);
}
