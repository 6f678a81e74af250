#include "doctest.h"
#include "opgraph/graph_serialize.hpp"
#include "opgraph/metrics.hpp"
#include "opgraph/phantoms.hpp"
#include "test_support.hpp"

using namespace opg;
using namespace opg::testsup;

namespace {

/// CASSI-shaped chain: mask, per-band shift, spectral sum, square-law detect.
OperatorGraph cassi_like(std::size_t n, std::size_t nl, Rng& rng) {
    TypeInfo src = t3d(n, n, nl);
    ModulateParams mask;
    mask.m = Field(TypeInfo{{{"y", n}, {"x", n}}, DType::real64, "au"});
    for (std::size_t i = 0; i < mask.m.size(); ++i) mask.m[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    DisperseParams w;
    w.alpha = 1.0;
    w.a = 0.0;
    w.axis = "x";
    for (std::size_t j = 0; j < nl; ++j) w.lambdas.push_back(double(j));
    AccumulateParams acc{"lambda"};
    DetectParams det;
    det.family = DetectFamily::intensity_square;
    det.g = 1.0;
    return chain_graph(src, {make_node(0, Kind::modulate, mask), make_node(0, Kind::disperse, w),
                             make_node(0, Kind::accumulate, acc), make_node(0, Kind::detect, det)});
}

} // namespace

TEST_CASE("graph round-trip preserves structure and composes bit-exactly") {
    Rng rng(42);
    auto g = cassi_like(16, 6, rng);
    REQUIRE(validate(g).empty());
    const std::string text = serialize(g);
    OperatorGraph h = deserialize(text);
    CHECK(validate(h).empty());
    CHECK(h.nodes.size() == g.nodes.size());
    CHECK(h.edges == g.edges);

    Field x = phantom2d("gaussian_blobs", 16, 16);
    TypeInfo cube = g.source_type;
    Field xc(cube);
    for (std::size_t i = 0; i < 16 * 16; ++i)
        for (std::size_t l = 0; l < 6; ++l)
            xc[i * 6 + l] = x[i].real() * (1.0 + 0.1 * double(l));
    Field ya = compose(g, xc);
    Field yb = compose(h, xc);
    REQUIRE(ya.size() == yb.size());
    for (std::size_t i = 0; i < ya.size(); ++i) {
        CHECK(ya[i].real() == yb[i].real());
        CHECK(ya[i].imag() == yb[i].imag());
    }
}

TEST_CASE("unknown primitive kind is a parse error naming the kind") {
    const std::string text = R"(format: opgraph/v1
source:
  axes: [{name: pix, extent: 2}]
  dtype: real64
  units: au
nodes:
  - id: 1
    kind: teleport
    input: {axes: [{name: pix, extent: 2}], dtype: real64, units: au}
    params: {}
edges: [[0, 1]]
)";
    try {
        deserialize(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("teleport") != std::string::npos);
    }
}

TEST_CASE("missing edge-type units field is a parse error") {
    const std::string text = R"(format: opgraph/v1
source:
  axes: [{name: pix, extent: 2}]
  dtype: real64
  units: au
nodes:
  - id: 1
    kind: accumulate
    input: {axes: [{name: pix, extent: 2}], dtype: real64, units: au}
    params: {axis: pix}
edges: [[0, 1]]
edge_types:
  - {shape: [2], dtype: real64}
)";
    CHECK_THROWS_AS(deserialize(text), ParseError);
}

TEST_CASE("full-precision numbers survive the round trip") {
    Rng rng(7);
    TypeInfo src = t2d(3, 3, DType::complex128);
    ModulateParams mp;
    mp.m = random_field(src, rng);
    auto g = chain_graph(src, {make_node(0, Kind::modulate, mp)});
    OperatorGraph h = deserialize(serialize(g));
    const auto& ma = g.nodes.at(1).as<ModulateParams>().m;
    const auto& mb = h.nodes.at(1).as<ModulateParams>().m;
    for (std::size_t i = 0; i < ma.size(); ++i) {
        CHECK(ma[i].real() == mb[i].real());
        CHECK(ma[i].imag() == mb[i].imag());
    }
}
