#include "opgraph/patterns.hpp"

#include <algorithm>
#include <cmath>

namespace opg {

namespace patterns {

TypeInfo plane(std::size_t ny, std::size_t nx, DType d) {
    return TypeInfo{{{"y", ny}, {"x", nx}}, d, "au"};
}

Field binary_mask(std::size_t ny, std::size_t nx, Rng& rng) {
    Field m(plane(ny, nx));
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    return m;
}

Field smooth_pattern(std::size_t ny, std::size_t nx, Rng& rng) {
    Field m(plane(ny, nx));
    const double cy = rng.uniform(-0.4, 0.4), cx = rng.uniform(-0.4, 0.4);
    const double s1 = rng.uniform(0.2, 0.5), s2 = rng.uniform(0.2, 0.5);
    double mx = 0.0;
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double y = 2.0 * double(iy) / double(ny) - 1.0;
            const double x = 2.0 * double(ix) / double(nx) - 1.0;
            const double v = 0.3 + std::exp(-((x - cx) * (x - cx) / (2 * s1 * s1) +
                                              (y - cy) * (y - cy) / (2 * s2 * s2)));
            m[iy * nx + ix] = v;
            mx = std::max(mx, v);
        }
    }
    m *= 1.0 / mx;
    return m;
}

Field complex_map(std::size_t ny, std::size_t nx, Rng& rng) {
    Field m(plane(ny, nx, DType::complex128));
    const double fy = rng.uniform(0.3, 1.2), fx = rng.uniform(0.3, 1.2);
    const double py = rng.uniform(0.0, 6.28), px = rng.uniform(0.0, 6.28);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double y = 2.0 * double(iy) / double(ny) - 1.0;
            const double x = 2.0 * double(ix) / double(nx) - 1.0;
            const double amp = 0.4 + 0.6 * std::exp(-(x * x + y * y));
            const double ph = fy * y * 3.0 + fx * x * 3.0 + 0.5 * std::sin(py + 3 * x) +
                              0.5 * std::cos(px + 3 * y);
            m[iy * nx + ix] = amp * cplx{std::cos(ph), std::sin(ph)};
        }
    }
    return m;
}

Field random_psf(std::size_t k, Rng& rng) {
    Field h(plane(k, k));
    double sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double v = rng.uniform();
        h[i] = v;
        sum += v;
    }
    h *= 1.0 / sum;
    return h;
}

Field gaussian_psf(std::size_t k, double sigma) {
    Field h(plane(k, k));
    const double c = 0.5 * (double(k) - 1.0);
    double sum = 0.0;
    for (std::size_t iy = 0; iy < k; ++iy) {
        for (std::size_t ix = 0; ix < k; ++ix) {
            const double dy = double(iy) - c, dx = double(ix) - c;
            const double v = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
            h[iy * k + ix] = v;
            sum += v;
        }
    }
    h *= 1.0 / sum;
    return h;
}

ScatterParams banded_kernel(std::size_t n, int shift, double width, Rng& rng) {
    ScatterParams p;
    p.n_out = n;
    p.n_in = n;
    p.kernel.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t o = 0; o < n; ++o) {
            const double d = double(int(o) - int(i) - shift);
            p.at(o, i) = std::exp(-d * d / (2 * width * width)) * (0.8 + 0.4 * rng.uniform());
        }
    }
    double r1 = 0.0, rinf = 0.0; // Schur bound ||K|| <= sqrt(||K||_1 ||K||_inf)
    for (std::size_t o = 0; o < n; ++o) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p.at(o, i);
        rinf = std::max(rinf, s);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t o = 0; o < n; ++o) s += p.at(o, i);
        r1 = std::max(r1, s);
    }
    const double bound = std::sqrt(r1 * rinf);
    if (bound > 0.0)
        for (auto& v : p.kernel) v /= bound;
    return p;
}

ScatterParams direction_kernel(std::size_t n, double c, Rng& rng) {
    ScatterParams p = banded_kernel(n, 0, 1.2, rng);
    for (auto& v : p.kernel) v *= c;
    return p;
}

std::vector<std::size_t> random_subset(std::size_t n, std::size_t m, Rng& rng) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    for (std::size_t i = 0; i < n; ++i) std::swap(all[i], all[rng.integer(n)]);
    all.resize(std::min(m, n));
    std::sort(all.begin(), all.end());
    return all;
}

std::size_t odd_det_count(std::size_t n) {
    std::size_t d = static_cast<std::size_t>(std::ceil(double(n) * 1.45)) + 2;
    return d | 1;
}

ProjectParams radon_params(std::size_t n, std::size_t n_angles) {
    ProjectParams pp;
    for (std::size_t a = 0; a < n_angles; ++a)
        pp.thetas.push_back(M_PI * double(a) / double(n_angles));
    pp.n_det = odd_det_count(n);
    pp.det_spacing = 1.0;
    pp.pixel_size = 2.0 / double(n); // unit field of view
    pp.step = 0.5;
    return pp;
}

} // namespace patterns

ScatterParams klein_nishina_kernel(std::size_t n_bins, double e_min_kev, double e_max_kev) {
    if (n_bins == 0 || !(e_min_kev > 0.0) || !(e_max_kev > e_min_kev))
        throw ParamError("klein_nishina_kernel: need n_bins>0 and 0 < e_min < e_max");
    const double mec2 = 510.99895; // electron rest energy, keV
    ScatterParams p;
    p.n_out = n_bins;
    p.n_in = n_bins;
    p.kernel.assign(n_bins * n_bins, 0.0);
    for (std::size_t i = 0; i < n_bins; ++i) {
        const double E = e_min_kev + (e_max_kev - e_min_kev) * (double(i) + 0.5) / double(n_bins);
        const double k = E / mec2;
        for (std::size_t o = 0; o < n_bins; ++o) {
            const double th = M_PI * (double(o) + 0.5) / double(n_bins);
            const double ratio = 1.0 / (1.0 + k * (1.0 - std::cos(th))); // E'/E
            const double dkn =
                0.5 * ratio * ratio * (ratio + 1.0 / ratio - std::sin(th) * std::sin(th));
            p.at(o, i) = dkn * std::sin(th); // solid-angle weight
        }
    }
    // normalize to unit spectral norm (power iteration on K^T K)
    std::vector<double> v(n_bins, 1.0), w(n_bins), u(n_bins);
    double sigma = 0.0;
    for (int it = 0; it < 200; ++it) {
        for (std::size_t o = 0; o < n_bins; ++o) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n_bins; ++i) acc += p.at(o, i) * v[i];
            w[o] = acc;
        }
        for (std::size_t i = 0; i < n_bins; ++i) {
            double acc = 0.0;
            for (std::size_t o = 0; o < n_bins; ++o) acc += p.at(o, i) * w[o];
            u[i] = acc;
        }
        double nu = 0.0;
        for (double z : u) nu += z * z;
        nu = std::sqrt(nu);
        if (nu == 0.0) break;
        sigma = std::sqrt(nu);
        for (std::size_t i = 0; i < n_bins; ++i) v[i] = u[i] / nu;
    }
    if (sigma > 0.0)
        for (double& z : p.kernel) z /= sigma;
    return p;
}

std::vector<std::array<double, 2>> full_grid_ktraj(std::size_t ny, std::size_t nx) {
    std::vector<std::array<double, 2>> k;
    k.reserve(ny * nx);
    const long hy = static_cast<long>(ny) / 2, hx = static_cast<long>(nx) / 2;
    for (long ky = -hy; ky < static_cast<long>(ny) - hy; ++ky)
        for (long kx = -hx; kx < static_cast<long>(nx) - hx; ++kx)
            k.push_back({static_cast<double>(ky), static_cast<double>(kx)});
    return k;
}

} // namespace opg
