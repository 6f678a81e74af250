#ifndef OPGRAPH_TEST_SUPPORT_HPP
#define OPGRAPH_TEST_SUPPORT_HPP

#include <string>
#include <utility>
#include <vector>

#include "opgraph/metrics.hpp"
#include "opgraph/ops.hpp"

namespace opg::testsup {

inline TypeInfo t2d(std::size_t ny, std::size_t nx, DType d = DType::real64,
                    const std::string& units = "au") {
    return TypeInfo{{{"y", ny}, {"x", nx}}, d, units};
}

inline TypeInfo t3d(std::size_t ny, std::size_t nx, std::size_t nl,
                    const std::string& lname = "lambda", DType d = DType::real64,
                    const std::string& units = "au") {
    return TypeInfo{{{"y", ny}, {"x", nx}, {lname, nl}}, d, units};
}

inline TypeInfo t1d(std::size_t n, const std::string& name = "pix", DType d = DType::real64,
                    const std::string& units = "au") {
    return TypeInfo{{{name, n}}, d, units};
}

struct NamedOp {
    std::string name; // paper letter
    PrimitiveNode node;
    TypeInfo in;
};

/// Canonical instance of each of the 11 primitives at roughly size n per axis
/// (Detect/Transform carry operating points so they linearize on demand).
inline std::vector<NamedOp> canonical_ops(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<NamedOp> ops;

    { // Propagate on complex n x n
        TypeInfo in = t2d(n, n, DType::complex128);
        ops.push_back({"P", make_node(1, Kind::propagate,
                                      PropagateParams{0.7 * double(n), 0.5, 1.0, 1.0}, in),
                       in});
    }
    { // Modulate by a random complex pattern
        TypeInfo in = t2d(n, n, DType::complex128);
        ModulateParams mp;
        mp.m = random_field(in, rng);
        ops.push_back({"M", make_node(1, Kind::modulate, mp, in), in});
    }
    { // Project, real input
        TypeInfo in = t2d(n, n, DType::real64);
        ProjectParams pp;
        const std::size_t n_ang = std::max<std::size_t>(6, n / 4);
        for (std::size_t a = 0; a < n_ang; ++a)
            pp.thetas.push_back(M_PI * double(a) / double(n_ang));
        pp.n_det = n + n / 2 + 1;
        pp.pixel_size = 2.0 / double(n);
        ops.push_back({"Pi", make_node(1, Kind::project, pp, in), in});
    }
    { // Encode at random k
        TypeInfo in = t2d(n, n, DType::complex128);
        EncodeParams ep;
        const std::size_t m = 2 * n;
        for (std::size_t j = 0; j < m; ++j)
            ep.ktraj.push_back({rng.uniform(-double(n) / 2, double(n) / 2),
                                rng.uniform(-double(n) / 2, double(n) / 2)});
        ops.push_back({"F", make_node(1, Kind::encode, ep, in), in});
    }
    { // Convolve with a complex 5x5 kernel
        TypeInfo in = t2d(n, n, DType::complex128);
        ConvolveParams cp;
        cp.h = random_field(t2d(5, 5, DType::complex128), rng);
        ops.push_back({"C", make_node(1, Kind::convolve, cp, in), in});
    }
    { // Accumulate over an 8-deep spectral axis
        TypeInfo in = t3d(n / 2, n / 2, 8);
        ops.push_back({"Sigma", make_node(1, Kind::accumulate, AccumulateParams{"lambda"}, in),
                       in});
    }
    { // Detect family 4 with a random operating point
        TypeInfo in = t2d(n, n, DType::complex128);
        DetectParams dp;
        dp.family = DetectFamily::intensity_square;
        dp.g = 1.0;
        dp.x_op = random_field(in, rng);
        ops.push_back({"D", make_node(1, Kind::detect, dp, in), in});
    }
    { // Sample half the entries
        TypeInfo in = t1d(n * n, "pix", DType::complex128);
        SampleParams sp;
        for (std::size_t i = 0; i < n * n; i += 2) sp.omega.push_back(i);
        ops.push_back({"S", make_node(1, Kind::sample, sp, in), in});
    }
    { // Disperse an 8-band cube along x
        TypeInfo in = t3d(n / 2, n / 2, 8);
        DisperseParams wp;
        wp.alpha = 1.0;
        wp.a = 0.0;
        wp.axis = "x";
        for (int j = 0; j < 8; ++j) wp.lambdas.push_back(double(j));
        ops.push_back({"W", make_node(1, Kind::disperse, wp, in), in});
    }
    { // Scatter with a random 8x8 kernel plus attenuation
        TypeInfo in = t3d(n / 2, n / 2, 8, "E");
        ScatterParams rp;
        rp.n_out = 8;
        rp.n_in = 8;
        rp.kernel.resize(64);
        for (auto& v : rp.kernel) v = rng.uniform();
        TypeInfo at = in;
        Field atten(at);
        for (std::size_t i = 0; i < atten.size(); ++i) atten[i] = rng.uniform(0.1, 1.0);
        rp.atten = atten;
        ops.push_back({"R", make_node(1, Kind::scatter, rp, in), in});
    }
    { // Transform poly with a random real operating point
        TypeInfo in = t2d(n, n, DType::real64);
        TransformParams tp;
        tp.family = TransformFamily::poly;
        tp.coeffs = {0.1, 1.0, -0.3, 0.05};
        tp.x_op = random_field(in, rng);
        ops.push_back({"Lambda", make_node(1, Kind::transform, tp, in), in});
    }
    return ops;
}

/// Table S1 rows scaled by the two-orders-of-magnitude regression guard.
inline double table_s1_guard(const std::string& letter) {
    if (letter == "P") return 1e-14 * 100;
    if (letter == "M") return 1e-15 * 100;
    if (letter == "Pi") return 1e-12 * 100;
    if (letter == "F") return 1e-14 * 100;
    if (letter == "C") return 1e-14 * 100;
    if (letter == "Sigma") return 1e-15 * 100;
    if (letter == "D") return 1e-13 * 100;
    if (letter == "S") return 1e-15 * 100;
    if (letter == "W") return 1e-13 * 100;
    if (letter == "R") return 1e-11 * 100;
    if (letter == "Lambda") return 1e-13 * 100;
    return 1e-6;
}

} // namespace opg::testsup

#endif
