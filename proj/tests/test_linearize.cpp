#include <cmath>

#include "doctest.h"
#include "opgraph/metrics.hpp"
#include "opgraph/ops.hpp"
#include "test_support.hpp"

using namespace opg;
using namespace opg::testsup;

namespace {

/// Central-difference directional derivative of a node's forward map.
Field fd_jvp(const PrimitiveNode& node, const Field& x_op, const Field& dir, double h) {
    Field xp = x_op, xm = x_op;
    for (std::size_t i = 0; i < x_op.size(); ++i) {
        xp[i] += h * dir[i];
        xm[i] -= h * dir[i];
    }
    Field fp = forward(node, xp), fm = forward(node, xm);
    Field out = fp - fm;
    out *= 1.0 / (2.0 * h);
    return out;
}

} // namespace

TEST_CASE("linearized poly with f = 2x multiplies by two everywhere") {
    TypeInfo in = t1d(6);
    TransformParams tp;
    tp.family = TransformFamily::poly;
    tp.coeffs = {0.0, 2.0};
    Rng rng(3);
    Field x_op = random_field(in, rng);
    PrimitiveNode lin = linearize(make_node(1, Kind::transform, tp, in), x_op);
    Field v = random_field(in, rng);
    Field jv = forward(lin, v);
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(jv[i].real() == doctest::Approx(2.0 * v[i].real()));
}

TEST_CASE("linearized exp_atten at x = 0 has derivative -alpha") {
    TypeInfo in = t1d(1);
    TransformParams tp;
    tp.family = TransformFamily::exp_atten;
    tp.alpha = 1.0;
    Field x_op(in); // zero
    PrimitiveNode lin = linearize(make_node(1, Kind::transform, tp, in), x_op);
    Field v(in);
    v[0] = 1.0;
    Field jv = forward(lin, v);
    CHECK(jv[0].real() == doctest::Approx(-1.0));
}

TEST_CASE("detect jacobians match central finite differences") {
    const double h = 1e-5;
    TypeInfo in = t1d(10, "pix", DType::complex128);
    Rng rng(17);
    for (auto fam : {DetectFamily::logarithmic, DetectFamily::sigmoid,
                     DetectFamily::intensity_square, DetectFamily::coherent_field}) {
        DetectParams dp;
        dp.family = fam;
        dp.g = 0.9;
        dp.x0 = 0.8;
        dp.phi = 0.3;
        auto node = make_node(1, Kind::detect, dp, in);
        Field x_op = random_field(in, rng);
        PrimitiveNode lin = linearize(node, x_op);
        // probe along 10 random complex directions (exercises re and im parts)
        for (int t = 0; t < 10; ++t) {
            Field dir = random_field(in, rng);
            Field jv = forward(lin, dir);
            Field fv = fd_jvp(node, x_op, dir, h);
            const double rel = (jv - fv).norm2() / std::max(fv.norm2(), 1e-12);
            INFO("family ", static_cast<int>(fam), " trial ", t);
            CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("transform jacobians match central finite differences on real fields") {
    const double h = 1e-5;
    TypeInfo in = t1d(12);
    Rng rng(19);
    std::vector<TransformParams> cases;
    {
        TransformParams p;
        p.family = TransformFamily::exp_atten;
        p.alpha = 0.7;
        cases.push_back(p);
    }
    {
        TransformParams p;
        p.family = TransformFamily::log;
        p.delta = 0.05;
        cases.push_back(p);
    }
    {
        TransformParams p;
        p.family = TransformFamily::poly;
        p.coeffs = {0.2, 1.0, -0.4, 0.1, 0.0, 0.02};
        cases.push_back(p);
    }
    for (const auto& p : cases) {
        auto node = make_node(1, Kind::transform, p, in);
        Field x_op = random_field(in, rng);
        if (p.family == TransformFamily::log)
            for (std::size_t i = 0; i < x_op.size(); ++i)
                x_op[i] = std::fabs(x_op[i].real()) + 0.5;
        PrimitiveNode lin = linearize(node, x_op);
        Field dir = random_field(in, rng);
        Field jv = forward(lin, dir);
        Field fv = fd_jvp(node, x_op, dir, h);
        CHECK((jv - fv).norm2() / std::max(fv.norm2(), 1e-12) < 1e-4);
    }
}

TEST_CASE("wrap branch point uses the left derivative and raises the warning flag") {
    TypeInfo in = t1d(2);
    TransformParams tp;
    tp.family = TransformFamily::wrap;
    Field x_op(in);
    x_op[0] = M_PI; // exactly on the branch
    x_op[1] = 0.3;
    PrimitiveNode lin = linearize(make_node(1, Kind::transform, tp, in), x_op);
    CHECK(lin.warn_subgradient);
    Field v(in);
    v[0] = 1.0;
    v[1] = 1.0;
    Field jv = forward(lin, v);
    CHECK(jv[0].real() == 1.0);
    CHECK(jv[1].real() == 1.0);
}

TEST_CASE("saturate boundary uses the left derivative and raises the warning flag") {
    TypeInfo in = t1d(3);
    TransformParams tp;
    tp.family = TransformFamily::saturate;
    tp.x_min = -1.0;
    tp.x_max = 1.0;
    Field x_op(in);
    x_op[0] = -1.0; // at the lower clip: from the left the map is constant
    x_op[1] = 1.0;  // at the upper clip: from the left the map is the identity
    x_op[2] = 0.0;
    PrimitiveNode lin = linearize(make_node(1, Kind::transform, tp, in), x_op);
    CHECK(lin.warn_subgradient);
    Field v(in);
    for (std::size_t i = 0; i < 3; ++i) v[i] = 1.0;
    Field jv = forward(lin, v);
    CHECK(jv[0].real() == 0.0);
    CHECK(jv[1].real() == 1.0);
    CHECK(jv[2].real() == 1.0);
}

TEST_CASE("linearized detect and transform pass dot tests") {
    Rng rng(23);
    TypeInfo in = t1d(24, "pix", DType::complex128);
    for (auto fam : {DetectFamily::logarithmic, DetectFamily::sigmoid,
                     DetectFamily::intensity_square, DetectFamily::coherent_field}) {
        DetectParams dp;
        dp.family = fam;
        dp.g = 1.1;
        dp.x0 = 0.6;
        dp.phi = 1.2;
        dp.x_op = random_field(in, rng);
        auto rep = dot_test(node_linop(make_node(1, Kind::detect, dp, in), in), 20, 31);
        CHECK(rep.max_rel_err < 1e-13);
    }
    // Transform on complex fields (parts convention) stays self-consistent
    TypeInfo cin = t1d(16, "pix", DType::complex128);
    TransformParams tp;
    tp.family = TransformFamily::poly;
    tp.coeffs = {0.0, 1.0, 0.3};
    tp.x_op = random_field(cin, rng);
    auto rep = dot_test(node_linop(make_node(1, Kind::transform, tp, cin), cin), 20, 37);
    CHECK(rep.max_rel_err < 1e-13);
}

TEST_CASE("linearize rejects linear kinds") {
    TypeInfo in = t1d(4);
    ModulateParams mp;
    mp.m = Field(in);
    mp.m[0] = 1.0;
    Field x(in);
    CHECK_THROWS_AS(linearize(make_node(1, Kind::modulate, mp, in), x), ParamError);
}
