#include "opgraph/testsets.hpp"

#include <cmath>

#include "opgraph/phantoms.hpp"
#include "opgraph/rng.hpp"

namespace opg {

namespace {

/// 2D phantom resampled on an arbitrary (ny, nx) grid.
Field phantom_plane(std::size_t k, std::size_t ny, std::size_t nx) {
    return phantom2d(kPhantomNames[k % kPhantomNames.size()], ny, nx);
}

} // namespace

Field adapt_phantom(std::size_t k, const TypeInfo& t) {
    Field out(t);
    const std::size_t rank = t.rank();
    if (rank == 1) {
        const std::size_t n = t.axes[0].extent;
        Field line = phantom_plane(k, 1, n);
        Field line2 = phantom_plane((k + 3) % 10, 1, n);
        for (std::size_t i = 0; i < n; ++i) {
            const double re = line[i].real();
            const double im = t.dtype == DType::complex128 ? 0.6 * line2[i].real() : 0.0;
            out[i] = {re, im};
        }
        return out;
    }
    if (rank == 2) {
        const std::size_t ny = t.axes[0].extent, nx = t.axes[1].extent;
        Field re = phantom_plane(k, ny, nx);
        Field im = phantom_plane((k + 3) % 10, ny, nx);
        for (std::size_t i = 0; i < re.size(); ++i)
            out[i] = {re[i].real(),
                      t.dtype == DType::complex128 ? 0.6 * im[i].real() : 0.0};
        return out;
    }
    // rank >= 3: treat the first two axes as spatial, mix a second phantom in
    // with band-dependent weight so bands carry distinct structure
    const std::size_t ny = t.axes[0].extent, nx = t.axes[1].extent;
    std::size_t inner = 1;
    for (std::size_t a = 2; a < rank; ++a) inner *= t.axes[a].extent;
    Field base = phantom_plane(k, ny, nx);
    Field alt = phantom_plane((k + 1) % 10, ny, nx);
    Field alt2 = phantom_plane((k + 4) % 10, ny, nx);
    for (std::size_t p = 0; p < ny * nx; ++p) {
        for (std::size_t l = 0; l < inner; ++l) {
            const double w = inner > 1 ? double(l) / double(inner - 1) : 0.0;
            const double re = (1.0 - 0.7 * w) * base[p].real() + 0.7 * w * alt[p].real();
            const double im =
                t.dtype == DType::complex128 ? 0.5 * (1.0 - w) * alt2[p].real() : 0.0;
            out[p * inner + l] = {re, im};
        }
    }
    return out;
}

std::vector<Field> s1_test_objects(const TypeInfo& t, std::uint64_t seed) {
    std::vector<Field> objs;
    for (std::size_t k = 0; k < 10; ++k) objs.push_back(adapt_phantom(k, t));
    Rng rng = Rng(seed).child("s1-gaussians");
    for (std::size_t k = 0; k < 10; ++k) {
        Field g(t);
        if (t.dtype == DType::complex128)
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.cgaussian();
        else
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.gaussian();
        const double n = g.norm2();
        if (n > 0) g *= 1.0 / n; // normalized to unit norm
        objs.push_back(std::move(g));
    }
    return objs;
}

Field add_gaussian_noise(const Field& y, double sigma, std::uint64_t seed) {
    Rng rng = Rng(seed).child("noise");
    Field out = y;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.dtype() == DType::complex128)
            out[i] += sigma * rng.cgaussian();
        else
            out[i] += sigma * rng.gaussian();
    }
    return out;
}

} // namespace opg
