#include <cmath>

#include "doctest.h"
#include "opgraph/graph.hpp"
#include "opgraph/metrics.hpp"
#include "opgraph/patterns.hpp"
#include "opgraph/phantoms.hpp"
#include "test_support.hpp"

using namespace opg;
using namespace opg::testsup;

namespace {

OperatorGraph single_modulate_graph(const TypeInfo& in, Rng& rng) {
    ModulateParams mp;
    mp.m = random_field(TypeInfo{in.axes, DType::real64, "au"}, rng);
    return chain_graph(in, {make_node(0, Kind::modulate, mp)});
}

/// Two-arm interferometer: source fans out to two Propagate nodes whose sum
/// feeds Accumulate over lambda, then coherent Detect.
OperatorGraph oct_graph(std::size_t n, std::size_t nl, double d1, double d2) {
    TypeInfo src = t3d(n, n, nl, "lambda", DType::complex128);
    OperatorGraph g;
    g.source_type = src;
    auto p1 = make_node(1, Kind::propagate, PropagateParams{d1, 0.8, 1.0, 1.0}, src);
    auto p2 = make_node(2, Kind::propagate, PropagateParams{d2, 0.8, 1.0, 1.0}, src);
    auto sum = make_node(3, Kind::accumulate, AccumulateParams{"lambda"}, src);
    TypeInfo after_sum = infer_output_type(sum, src);
    DetectParams dp;
    dp.family = DetectFamily::coherent_field;
    dp.g = 1.0;
    dp.phi = 0.25;
    auto det = make_node(4, Kind::detect, dp, after_sum);
    g.add_node(p1);
    g.add_node(p2);
    g.add_node(sum);
    g.add_node(det);
    g.add_edge(kSourceId, 1);
    g.add_edge(kSourceId, 2);
    g.add_edge(1, 3);
    g.add_edge(2, 3);
    g.add_edge(3, 4);
    g.merge_policy[3] = MergeSpec{MergePolicy::sum, ""};
    return g;
}

} // namespace

TEST_CASE("minimal single-node graph is well-formed") {
    Rng rng(1);
    auto g = single_modulate_graph(t2d(4, 4, DType::complex128), rng);
    CHECK(validate(g).empty());
    auto s = stats(g);
    CHECK(s.n_nodes == 1);
    CHECK(s.depth == 1);
}

TEST_CASE("dtype mismatch on an edge is reported") {
    // complex producer feeding a node that declares a real64 input
    TypeInfo src = t2d(4, 4, DType::complex128);
    OperatorGraph g;
    g.source_type = src;
    ModulateParams mp;
    mp.m = Field(TypeInfo{src.axes, DType::real64, "au"});
    for (std::size_t i = 0; i < mp.m.size(); ++i) mp.m[i] = 1.0;
    auto m = make_node(1, Kind::modulate, mp, src);
    TypeInfo wrong = t2d(4, 4, DType::real64);
    auto m2 = make_node(2, Kind::modulate, mp, wrong);
    g.add_node(m);
    g.add_node(m2);
    g.add_edge(kSourceId, 1);
    g.add_edge(1, 2);
    auto viol = validate(g);
    REQUIRE(!viol.empty());
    bool found = false;
    for (const auto& v : viol) found = found || v.rule == "type-mismatch";
    CHECK(found);
}

TEST_CASE("two-node cycle violates acyclicity") {
    TypeInfo src = t2d(4, 4, DType::complex128);
    OperatorGraph g;
    g.source_type = src;
    ModulateParams mp;
    mp.m = Field(TypeInfo{src.axes, DType::real64, "au"});
    for (std::size_t i = 0; i < mp.m.size(); ++i) mp.m[i] = 1.0;
    g.add_node(make_node(1, Kind::modulate, mp, src));
    g.add_node(make_node(2, Kind::modulate, mp, src));
    g.add_edge(kSourceId, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 1);
    auto viol = validate(g);
    bool found = false;
    for (const auto& v : viol) found = found || v.rule == "acyclicity";
    CHECK(found);
}

TEST_CASE("single-node composition equals the node forward") {
    Rng rng(5);
    TypeInfo in = t2d(6, 6, DType::complex128);
    auto g = single_modulate_graph(in, rng);
    Field x = random_field(in, rng);
    Field via_graph = compose(g, x);
    Field direct = forward(g.nodes.at(1), x);
    CHECK((via_graph - direct).norm2() == 0.0);
}

TEST_CASE("two-branch interferometer graph equals the hand-composed evaluation") {
    Rng rng(7);
    auto g = oct_graph(8, 4, 17.0, 21.0);
    REQUIRE(validate(g).empty());
    auto s = stats(g);
    CHECK(s.n_nodes == 4);
    CHECK(s.depth == 3);

    Field x = random_field(g.source_type, rng);
    Field got = compose(g, x);
    // by hand: D(Sigma(P1 x + P2 x))
    Field b1 = forward(g.nodes.at(1), x);
    Field b2 = forward(g.nodes.at(2), x);
    Field merged = b1 + b2;
    Field summed = forward(g.nodes.at(3), merged);
    Field want = forward(g.nodes.at(4), summed);
    CHECK((got - want).norm2() == 0.0);
}

TEST_CASE("graph of one full sample node has the identity adjoint") {
    TypeInfo in = t1d(9, "pix", DType::complex128);
    SampleParams sp;
    for (std::size_t i = 0; i < 9; ++i) sp.omega.push_back(i);
    auto g = chain_graph(in, {make_node(0, Kind::sample, sp)});
    Rng rng(9);
    Field y = random_field(sink_type(g), rng);
    Field x_op = random_field(in, rng);
    Field back = compose_adjoint(g, y, x_op);
    for (std::size_t i = 0; i < 9; ++i) CHECK(back[i] == y[i]);
}

TEST_CASE("linear chain adjoint equals the dense conjugate transpose") {
    // M -> F -> S -> D(family 1) on a 16x16 grid
    const std::size_t n = 16;
    Rng rng(11);
    TypeInfo src = t2d(n, n, DType::complex128);
    ModulateParams coil;
    coil.m = random_field(src, rng);
    EncodeParams enc;
    enc.ktraj = full_grid_ktraj(n, n);
    enc.normalize = true;
    SampleParams samp;
    for (std::size_t i = 0; i < n * n; i += 3) samp.omega.push_back(i);
    DetectParams det;
    det.family = DetectFamily::linear_field;
    det.g = 1.0;
    auto g = chain_graph(src, {make_node(0, Kind::modulate, coil), make_node(0, Kind::encode, enc),
                               make_node(0, Kind::sample, samp), make_node(0, Kind::detect, det)});
    REQUIRE(validate(g).empty());
    LinOp op = graph_linop(g);
    DenseMatrix A = materialize(op);
    Field y = random_field(op.out_type, rng);
    Field via_graph = op.adj(y);
    Field via_dense = apply_dense_adjoint(A, op.in_type, y);
    double mx = 0.0;
    for (std::size_t i = 0; i < via_graph.size(); ++i)
        mx = std::max(mx, std::abs(via_graph[i] - via_dense[i]));
    CHECK(mx < 1e-10);
}

TEST_CASE("whole-graph dot test on a linearized projection chain") {
    const std::size_t n = 16;
    TypeInfo src = t2d(n, n);
    ProjectParams pp;
    for (int a = 0; a < 8; ++a) pp.thetas.push_back(M_PI * a / 8.0);
    pp.n_det = 23;
    pp.pixel_size = 2.0 / double(n);
    DetectParams dp;
    dp.family = DetectFamily::intensity_square;
    dp.g = 1.0;
    auto g = chain_graph(src, {make_node(0, Kind::project, pp), make_node(0, Kind::detect, dp)});
    Field x_op = phantom2d("shepp_logan", n, n);
    LinOp jac = graph_linearized(g, x_op);
    auto rep = dot_test(jac, 20, 1717);
    CHECK(rep.max_rel_err < 1e-6);
}

TEST_CASE("composition on linear chains is additive and homogeneous") {
    Rng rng(13);
    const std::size_t n = 8;
    TypeInfo src = t2d(n, n, DType::complex128);
    ModulateParams mp;
    mp.m = random_field(src, rng);
    EncodeParams enc;
    enc.ktraj = full_grid_ktraj(n, n);
    auto g = chain_graph(src, {make_node(0, Kind::modulate, mp), make_node(0, Kind::encode, enc)});
    Field x = random_field(src, rng), y = random_field(src, rng);
    const cplx a = rng.cgaussian(), b = rng.cgaussian();
    Field axby(src);
    for (std::size_t i = 0; i < x.size(); ++i) axby[i] = a * x[i] + b * y[i];
    Field lhs = compose(g, axby);
    Field fx = compose(g, x), fy = compose(g, y);
    Field rhs(fx.type());
    for (std::size_t i = 0; i < fx.size(); ++i) rhs[i] = a * fx[i] + b * fy[i];
    CHECK((lhs - rhs).norm2() / rhs.norm2() < 1e-12);
}

TEST_CASE("materialized composition equals the product of per-node matrices") {
    Rng rng(15);
    const std::size_t n = 8;
    TypeInfo src = t2d(n, n, DType::complex128);
    ModulateParams mp;
    mp.m = random_field(src, rng);
    EncodeParams enc;
    enc.ktraj = full_grid_ktraj(n, n);
    enc.normalize = true;
    SampleParams sp;
    for (std::size_t i = 0; i < n * n; i += 2) sp.omega.push_back(i);
    auto g = chain_graph(src, {make_node(0, Kind::modulate, mp), make_node(0, Kind::encode, enc),
                               make_node(0, Kind::sample, sp)});
    DenseMatrix whole = materialize(graph_linop(g));

    // product in topological order
    TypeInfo cur = src;
    DenseMatrix prod;
    bool first = true;
    for (int id : topo_order(g)) {
        const auto& node = g.nodes.at(id);
        DenseMatrix A = materialize(node_linop(node, cur));
        cur = infer_output_type(node, cur);
        if (first) {
            prod = A;
            first = false;
        } else {
            DenseMatrix next;
            next.rows = A.rows;
            next.cols = prod.cols;
            next.a.assign(next.rows * next.cols, cplx{0.0, 0.0});
            for (std::size_t r = 0; r < A.rows; ++r)
                for (std::size_t k = 0; k < A.cols; ++k) {
                    const cplx ark = A.at(r, k);
                    if (ark == cplx{0.0, 0.0}) continue;
                    for (std::size_t c = 0; c < prod.cols; ++c)
                        next.at(r, c) += ark * prod.at(k, c);
                }
            prod = std::move(next);
        }
    }
    REQUIRE(whole.rows == prod.rows);
    REQUIRE(whole.cols == prod.cols);
    double mx = 0.0;
    for (std::size_t i = 0; i < whole.a.size(); ++i)
        mx = std::max(mx, std::abs(whole.a[i] - prod.a[i]));
    CHECK(mx < 1e-10);
}

TEST_CASE("evaluating a graph twice is bit-identical") {
    Rng rng(17);
    auto g = oct_graph(8, 4, 5.0, 9.0);
    Field x = random_field(g.source_type, rng);
    Field a = compose(g, x);
    Field b = compose(g, x);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].real() == b[i].real());
        CHECK(a[i].imag() == b[i].imag());
    }
}

TEST_CASE("concat merge stacks branch outputs along the named axis") {
    Rng rng(19);
    TypeInfo src = t3d(4, 4, 2);
    OperatorGraph g;
    g.source_type = src;
    ModulateParams m1, m2;
    m1.m = random_field(TypeInfo{{{"y", 4}, {"x", 4}}, DType::real64, "au"}, rng);
    m2.m = random_field(TypeInfo{{{"y", 4}, {"x", 4}}, DType::real64, "au"}, rng);
    g.add_node(make_node(1, Kind::modulate, m1, src));
    g.add_node(make_node(2, Kind::modulate, m2, src));
    TypeInfo merged = src;
    merged.axes[2].extent = 4;
    g.add_node(make_node(3, Kind::accumulate, AccumulateParams{"lambda"}, merged));
    g.add_edge(kSourceId, 1);
    g.add_edge(kSourceId, 2);
    g.add_edge(1, 3);
    g.add_edge(2, 3);
    g.merge_policy[3] = MergeSpec{MergePolicy::concat, "lambda"};
    REQUIRE(validate(g).empty());
    Field x = random_field(src, rng);
    Field got = compose(g, x);
    Field b1 = forward(g.nodes.at(1), x), b2 = forward(g.nodes.at(2), x);
    Field cat = concat_fields({b1, b2}, "lambda");
    Field want = forward(g.nodes.at(3), cat);
    CHECK((got - want).norm2() == 0.0);

    // adjoint consistency through the concat merge
    LinOp op = graph_linop(g);
    auto rep = dot_test(op, 10, 23);
    CHECK(rep.max_rel_err < 1e-12);
}

TEST_CASE("fan-in with mismatched units is rejected") {
    TypeInfo src = t2d(4, 4, DType::complex128);
    OperatorGraph g;
    g.source_type = src;
    auto p1 = make_node(1, Kind::propagate, PropagateParams{3.0, 0.5, 1.0, 1.0}, src);
    DetectParams dfam1;
    dfam1.family = DetectFamily::linear_field; // output units become "counts"
    auto d1 = make_node(2, Kind::detect, dfam1, src);
    TypeInfo pd = src;
    auto sum = make_node(3, Kind::accumulate, AccumulateParams{"x"}, pd);
    g.add_node(p1);
    g.add_node(d1);
    g.add_node(sum);
    g.add_edge(kSourceId, 1);
    g.add_edge(kSourceId, 2);
    g.add_edge(1, 3);
    g.add_edge(2, 3);
    g.merge_policy[3] = MergeSpec{MergePolicy::sum, ""};
    auto viol = validate(g);
    bool found = false;
    for (const auto& v : viol) found = found || v.rule == "type-mismatch";
    CHECK(found);
}
