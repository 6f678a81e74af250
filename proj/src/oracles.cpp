#include "opgraph/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "opgraph/patterns.hpp"
#include "opgraph/rng.hpp"

// Straightforward loop implementations only: no code from the operator or
// graph modules is used here. Discretization conventions (centered grids,
// ray geometry, FFT sign) are mirrored from the operator documentation.

namespace opg {

namespace {

using patterns::plane;

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::size_t sz(const std::map<std::string, std::size_t>& sizes, const std::string& key,
               std::size_t fb) {
    auto it = sizes.find(key);
    return it == sizes.end() ? fb : it->second;
}

// -- elementary loop kernels -------------------------------------------------

/// 2D direct-DFT angular spectrum propagation of one (ny, nx) complex slice.
void loop_propagate_slice(std::vector<cplx>& u, std::size_t ny, std::size_t nx, double d,
                          double lambda, double pitch_y, double pitch_x) {
    std::vector<cplx> spec(ny * nx, cplx{0, 0});
    for (std::size_t ky = 0; ky < ny; ++ky) {
        for (std::size_t kx = 0; kx < nx; ++kx) {
            cplx acc{0, 0};
            for (std::size_t iy = 0; iy < ny; ++iy)
                for (std::size_t ix = 0; ix < nx; ++ix) {
                    const double ph = -kTwoPi * (double(ky) * double(iy) / double(ny) +
                                                 double(kx) * double(ix) / double(nx));
                    acc += u[iy * nx + ix] * cplx{std::cos(ph), std::sin(ph)};
                }
            spec[ky * nx + kx] = acc;
        }
    }
    const double inv_l2 = 1.0 / (lambda * lambda);
    for (std::size_t ky = 0; ky < ny; ++ky) {
        const double fy = (ky < (ny + 1) / 2 ? double(ky) : double(ky) - double(ny)) /
                          (double(ny) * pitch_y);
        for (std::size_t kx = 0; kx < nx; ++kx) {
            const double fx = (kx < (nx + 1) / 2 ? double(kx) : double(kx) - double(nx)) /
                              (double(nx) * pitch_x);
            const double f2 = fx * fx + fy * fy;
            if (f2 >= inv_l2) {
                spec[ky * nx + kx] = 0.0;
            } else {
                const double ph = kTwoPi * d * std::sqrt(inv_l2 - f2);
                spec[ky * nx + kx] *= cplx{std::cos(ph), std::sin(ph)};
            }
        }
    }
    const double inv_n = 1.0 / double(ny * nx);
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            cplx acc{0, 0};
            for (std::size_t ky = 0; ky < ny; ++ky)
                for (std::size_t kx = 0; kx < nx; ++kx) {
                    const double ph = kTwoPi * (double(ky) * double(iy) / double(ny) +
                                                double(kx) * double(ix) / double(nx));
                    acc += spec[ky * nx + kx] * cplx{std::cos(ph), std::sin(ph)};
                }
            u[iy * nx + ix] = acc * inv_n;
        }
}

/// Propagate a (y, x, trailing) cube slice by slice.
Field loop_propagate(const Field& x, double d, double lambda) {
    const std::size_t ny = x.extent(0), nx = x.extent(1);
    std::size_t inner = 1;
    for (std::size_t a = 2; a < x.rank(); ++a) inner *= x.extent(a);
    Field out = x;
    std::vector<cplx> slice(ny * nx);
    for (std::size_t l = 0; l < inner; ++l) {
        for (std::size_t p = 0; p < ny * nx; ++p) slice[p] = x[p * inner + l];
        loop_propagate_slice(slice, ny, nx, d, lambda, 1.0, 1.0);
        for (std::size_t p = 0; p < ny * nx; ++p) out[p * inner + l] = slice[p];
    }
    return out;
}

/// Ray-driven Radon of one (ny, nx) slice set; mirrors the documented
/// geometry (centered pixels, detector offsets in pixel units, bilinear
/// footprints, quadrature weight step * pixel_size).
void loop_radon(const Field& x, std::size_t ny, std::size_t nx, std::size_t inner,
                const std::vector<double>& thetas, std::size_t n_det, double det_spacing,
                double pixel_size, double step, Field& out) {
    const double diag = 0.5 * std::sqrt(double(nx) * double(nx) + double(ny) * double(ny)) + 1.0;
    const double S = diag * pixel_size;
    const double ds = step * pixel_size;
    const std::size_t n_samp = static_cast<std::size_t>(std::floor(2.0 * S / ds)) + 1;
    for (std::size_t a = 0; a < thetas.size(); ++a) {
        const double cs = std::cos(thetas[a]), sn = std::sin(thetas[a]);
        for (std::size_t k = 0; k < n_det; ++k) {
            const double t = (double(k) - 0.5 * (double(n_det) - 1.0)) * det_spacing * pixel_size;
            std::vector<cplx> acc(inner, cplx{0, 0});
            for (std::size_t i = 0; i < n_samp; ++i) {
                const double s = -S + double(i) * ds;
                const double gx = (t * cs - s * sn) / pixel_size + 0.5 * (double(nx) - 1.0);
                const double gy = (t * sn + s * cs) / pixel_size + 0.5 * (double(ny) - 1.0);
                const double fx0 = std::floor(gx), fy0 = std::floor(gy);
                const long ix0 = long(fx0), iy0 = long(fy0);
                const double wx1 = gx - fx0, wy1 = gy - fy0;
                for (int dy = 0; dy < 2; ++dy) {
                    const long iy = iy0 + dy;
                    if (iy < 0 || iy >= long(ny)) continue;
                    for (int dx = 0; dx < 2; ++dx) {
                        const long ix = ix0 + dx;
                        if (ix < 0 || ix >= long(nx)) continue;
                        const double w = (dy ? wy1 : 1.0 - wy1) * (dx ? wx1 : 1.0 - wx1);
                        if (w == 0.0) continue;
                        for (std::size_t l = 0; l < inner; ++l)
                            acc[l] += w * x[(std::size_t(iy) * nx + std::size_t(ix)) * inner + l];
                    }
                }
            }
            for (std::size_t l = 0; l < inner; ++l)
                out[(a * n_det + k) * inner + l] = acc[l] * ds;
        }
    }
}

/// Same-size zero-padded 2D convolution.
Field loop_conv2(const Field& x, const Field& h) {
    const long ny = long(x.extent(0)), nx = long(x.extent(1));
    const long ky = long(h.extent(0)), kx = long(h.extent(1));
    const long cy = ky / 2, cx = kx / 2;
    Field out(x.type());
    if (h.dtype() == DType::complex128) out.set_dtype(DType::complex128);
    for (long iy = 0; iy < ny; ++iy)
        for (long ix = 0; ix < nx; ++ix) {
            cplx acc{0, 0};
            for (long jy = 0; jy < ky; ++jy) {
                const long qy = iy - jy + cy;
                if (qy < 0 || qy >= ny) continue;
                for (long jx = 0; jx < kx; ++jx) {
                    const long qx = ix - jx + cx;
                    if (qx < 0 || qx >= nx) continue;
                    acc += h[jy * kx + jx] * x[qy * nx + qx];
                }
            }
            out[iy * nx + ix] = acc;
        }
    return out;
}

Field loop_conv1(const Field& x, const Field& h) {
    const long n = long(x.extent(0)), k = long(h.extent(0)), c = k / 2;
    Field out(x.type());
    for (long i = 0; i < n; ++i) {
        cplx acc{0, 0};
        for (long j = 0; j < k; ++j) {
            const long q = i - j + c;
            if (q < 0 || q >= n) continue;
            acc += h[j] * x[q];
        }
        out[i] = acc;
    }
    return out;
}

/// Direct DFT at arbitrary (ky, kx) samples over the centered grid.
cplx loop_dft_sample(const Field& x, const Field* weight, std::size_t ny, std::size_t nx,
                     double ky, double kx, double scale) {
    const double cy = double(ny / 2), cx = double(nx / 2);
    cplx acc{0, 0};
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double ph = -kTwoPi * (ky * (double(iy) - cy) / double(ny) +
                                         kx * (double(ix) - cx) / double(nx));
            cplx v = x[iy * nx + ix];
            if (weight) v *= (*weight)[iy * nx + ix];
            acc += v * cplx{std::cos(ph), std::sin(ph)};
        }
    return acc * scale;
}

double detect_square(double g, cplx v) { return g * std::norm(v); }

double wrap_scalar(double v) { return std::atan2(std::sin(v), std::cos(v)); }

/// Scatter kernel applied along the last axis with optional (y,x) attenuation.
Field loop_scatter(const Field& x, const ScatterParams& rp, const Field* atten2d) {
    const std::size_t rank = x.rank();
    const std::size_t ne = x.extent(rank - 1);
    std::size_t outer = x.size() / ne;
    TypeInfo ot = x.type();
    ot.axes[rank - 1].extent = rp.n_out;
    Field out(ot);
    for (std::size_t p = 0; p < outer; ++p) {
        for (std::size_t o = 0; o < rp.n_out; ++o) {
            cplx acc{0, 0};
            for (std::size_t i = 0; i < ne; ++i) {
                cplx v = x[p * ne + i];
                if (atten2d) v *= (*atten2d)[p % atten2d->size()];
                acc += rp.at(o, i) * v;
            }
            out[p * rp.n_out + o] = acc;
        }
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

std::vector<std::string> oracle_names() {
    return {"lensless",       "ct",          "spc",
            "cacti",          "ptychography", "mri",
            "cassi",          "oct",         "photoacoustic",
            "sim",            "phase_contrast", "electron_ptycho",
            "ghost",          "thz",         "compton",
            "raman",          "fluorescence", "dot",
            "brillouin",      "beam_hardening_ct", "phase_wrapped_mri",
            "nonlinear_ultrasound", "mpi"};
}

bool has_oracle(const std::string& name) {
    auto names = oracle_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

TypeInfo oracle_input_type(const std::string& name,
                           const std::map<std::string, std::size_t>& sizes) {
    const std::size_t n = sz(sizes, "n", 32);
    if (name == "lensless" || name == "ct" || name == "sim" || name == "spect")
        return plane(n, n);
    if (name == "spc" || name == "ghost")
        return TypeInfo{{{"pix", n * n}}, DType::real64, "au"};
    if (name == "cacti")
        return TypeInfo{{{"y", n}, {"x", n}, {"t", sz(sizes, "frames", 8)}}, DType::real64, "au"};
    if (name == "ptychography" || name == "electron_ptycho" || name == "mri" ||
        name == "photoacoustic" || name == "phase_contrast" || name == "nonlinear_ultrasound" ||
        name == "phase_wrapped_mri")
        return plane(n, n, DType::complex128);
    if (name == "cassi")
        return TypeInfo{{{"y", n}, {"x", n}, {"lambda", sz(sizes, "bands", 8)}},
                        DType::real64, "au"};
    if (name == "oct")
        return TypeInfo{{{"y", n}, {"x", n}, {"lambda", sz(sizes, "bands", 4)}},
                        DType::complex128, "au"};
    if (name == "thz")
        return TypeInfo{{{"t", n}}, DType::complex128, "au"};
    if (name == "compton" || name == "raman" || name == "fluorescence" || name == "brillouin")
        return TypeInfo{{{"y", n}, {"x", n}, {"E", sz(sizes, "bins", 8)}}, DType::real64, "au"};
    if (name == "dot")
        return TypeInfo{{{"y", n}, {"x", n}, {"dir", sz(sizes, "dirs", 4)}},
                        DType::complex128, "au"};
    if (name == "beam_hardening_ct")
        return TypeInfo{{{"y", n}, {"x", n}, {"E", sz(sizes, "bins", 4)}}, DType::real64, "au"};
    if (name == "mpi") return plane(n, n);
    throw Error("no oracle for modality '" + name + "'");
}

Field run_oracle(const std::string& name, const std::map<std::string, std::size_t>& sizes,
                 std::uint64_t seed, const Field& x) {
    Rng rng = Rng(seed).child(name); // same stream as the registry builder
    const std::size_t n = sz(sizes, "n", 32);

    if (name == "lensless") {
        Field h = patterns::random_psf(sz(sizes, "kernel", 15) | 1, rng);
        Field u = loop_conv2(x, h);
        Field y(u.type());
        y.set_units("counts");
        for (std::size_t i = 0; i < u.size(); ++i) y[i] = detect_square(1.0, u[i]);
        return y;
    }

    if (name == "ct") {
        auto pp = patterns::radon_params(n, sz(sizes, "angles", 30));
        TypeInfo st{{{"theta", pp.thetas.size()}, {"t", pp.n_det}}, DType::real64, "counts"};
        Field sino(st);
        loop_radon(x, n, n, 1, pp.thetas, pp.n_det, pp.det_spacing, pp.pixel_size, pp.step, sino);
        for (std::size_t i = 0; i < sino.size(); ++i) sino[i] = detect_square(1.0, sino[i]);
        return sino;
    }

    if (name == "spc" || name == "ghost") {
        const std::size_t pix = n * n, T = sz(sizes, "frames", 128);
        std::vector<double> P(pix * T);
        for (auto& v : P)
            v = name == "spc" ? (rng.uniform() < 0.5 ? 0.0 : 1.0)
                              : std::fabs(rng.gaussian()) * 0.5;
        TypeInfo ot{{{"t", T}}, DType::real64, "counts"};
        Field y(ot);
        for (std::size_t t = 0; t < T; ++t) {
            double acc = 0.0;
            for (std::size_t p = 0; p < pix; ++p) acc += P[p * T + t] * x[p].real();
            y[t] = acc * acc; // square-law bucket
        }
        return y;
    }

    if (name == "cacti") {
        const std::size_t T = sz(sizes, "frames", 8);
        Field base = patterns::binary_mask(n, n, rng);
        TypeInfo ot{{{"y", n}, {"x", n}}, DType::real64, "counts"};
        Field y(ot);
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix) {
                double acc = 0.0;
                for (std::size_t t = 0; t < T; ++t)
                    acc += base[iy * n + (ix + t) % n].real() *
                           x[(iy * n + ix) * T + t].real();
                y[iy * n + ix] = acc * acc;
            }
        return y;
    }

    if (name == "ptychography" || name == "electron_ptycho" || name == "holography" ||
        name == "light_field" || name == "fpm") {
        Field probe = name == "light_field" ? patterns::binary_mask(n, n, rng)
                                            : patterns::complex_map(n, n, rng);
        const double lambda = name == "electron_ptycho" ? 0.05 : 0.5;
        const double dist = name == "electron_ptycho" ? 150.0 : 40.0;
        Field u(x.type());
        for (std::size_t i = 0; i < x.size(); ++i) u[i] = probe[i] * x[i];
        u = loop_propagate(u, dist, lambda);
        Field y(plane(n, n));
        y.set_units("counts");
        for (std::size_t i = 0; i < u.size(); ++i) y[i] = detect_square(1.0, u[i]);
        return y;
    }

    if (name == "mri") {
        Field coil = patterns::complex_map(n, n, rng);
        auto omega = patterns::random_subset(n * n, sz(sizes, "samples", 256), rng);
        auto grid = full_grid_ktraj(n, n);
        const double scale = 1.0 / std::sqrt(double(n * n));
        TypeInfo ot{{{"sample", omega.size()}}, DType::complex128, "counts"};
        Field y(ot);
        for (std::size_t j = 0; j < omega.size(); ++j) {
            const auto& k = grid[omega[j]];
            y[j] = loop_dft_sample(x, &coil, n, n, k[0], k[1], scale);
        }
        return y;
    }

    if (name == "cassi") {
        const std::size_t nl = sz(sizes, "bands", 8);
        Field mask = patterns::binary_mask(n, n, rng);
        TypeInfo ot{{{"y", n}, {"x", n}}, DType::real64, "counts"};
        Field y(ot);
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix) {
                double acc = 0.0;
                for (std::size_t l = 0; l < nl; ++l) {
                    const long src = long(ix) - long(l); // shift round(1.0*l + 0)
                    if (src < 0 || src >= long(n)) continue;
                    acc += mask[iy * n + std::size_t(src)].real() *
                           x[(iy * n + std::size_t(src)) * nl + l].real();
                }
                y[iy * n + ix] = acc * acc;
            }
        return y;
    }

    if (name == "oct") {
        const std::size_t nl = sz(sizes, "bands", 4);
        Field ref = loop_propagate(x, 12.0, 0.8);
        Field smp = loop_propagate(x, 28.0, 0.8);
        TypeInfo ot{{{"y", n}, {"x", n}}, DType::real64, "counts"};
        Field y(ot);
        const cplx rot{std::cos(0.3), std::sin(0.3)};
        for (std::size_t p = 0; p < n * n; ++p) {
            cplx acc{0, 0};
            for (std::size_t l = 0; l < nl; ++l)
                acc += ref[p * nl + l] + smp[p * nl + l];
            y[p] = (acc * rot).real();
        }
        return y;
    }

    if (name == "photoacoustic") {
        Field ab = patterns::smooth_pattern(n, n, rng);
        Field u(x.type());
        for (std::size_t i = 0; i < x.size(); ++i) u[i] = ab[i].real() * x[i];
        u = loop_propagate(u, 25.0, 2.0);
        u.set_units("counts");
        return u; // family 1, g = 1
    }

    if (name == "sim") {
        const double ph = rng.uniform(0.0, 6.28);
        Field illum(plane(n, n));
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix)
                illum[iy * n + ix] =
                    0.5 * (1.0 + std::cos(kTwoPi * 3.0 * double(ix) / double(n) + ph));
        Field h = patterns::gaussian_psf(sz(sizes, "kernel", 7) | 1, 1.4);
        Field u(x.type());
        for (std::size_t i = 0; i < x.size(); ++i) u[i] = illum[i].real() * x[i];
        u = loop_conv2(u, h);
        Field y(plane(n, n));
        y.set_units("counts");
        for (std::size_t i = 0; i < u.size(); ++i) y[i] = detect_square(1.0, u[i]);
        return y;
    }

    if (name == "phase_contrast") {
        auto pp = patterns::radon_params(n, sz(sizes, "angles", 16));
        Field m = patterns::complex_map(pp.thetas.size(), pp.n_det, rng);
        TypeInfo st{{{"theta", pp.thetas.size()}, {"t", pp.n_det}}, DType::complex128, "au"};
        Field sino(st);
        loop_radon(x, n, n, 1, pp.thetas, pp.n_det, pp.det_spacing, pp.pixel_size, pp.step, sino);
        sino = loop_propagate(sino, 15.0, 0.5);
        Field y(TypeInfo{st.axes, DType::real64, "counts"});
        for (std::size_t i = 0; i < sino.size(); ++i)
            y[i] = detect_square(1.0, m[i] * sino[i]);
        return y;
    }

    if (name == "thz") {
        const std::size_t nt = n;
        const std::size_t k = sz(sizes, "kernel", 15) | 1;
        TypeInfo kt{{{"t", k}}, DType::complex128, "au"};
        Field h(kt);
        double norm = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            h[i] = {rng.gaussian(), rng.gaussian()};
            norm += std::abs(h[i]);
        }
        h *= 1.0 / norm;
        Field u = loop_conv1(x, h);
        Field y(TypeInfo{{{"t", nt}}, DType::real64, "counts"});
        for (std::size_t i = 0; i < u.size(); ++i) y[i] = u[i].real();
        return y;
    }

    if (name == "compton" || name == "raman" || name == "fluorescence" ||
        name == "brillouin") {
        const std::size_t ne = sz(sizes, "bins", 8);
        Field dens = patterns::smooth_pattern(n, n, rng);
        ScatterParams rp;
        if (name == "compton")
            rp = klein_nishina_kernel(ne, 20.0, 140.0);
        else if (name == "raman")
            rp = patterns::banded_kernel(ne, 2, 0.7, rng);
        else if (name == "fluorescence")
            rp = patterns::banded_kernel(ne, 3, 1.5, rng);
        else
            rp = patterns::banded_kernel(ne, 1, 0.5, rng);
        TypeInfo ot{{{"y", n}, {"x", n}, {"E", ne}}, DType::real64, "counts"};
        Field y(ot);
        for (std::size_t p = 0; p < n * n; ++p)
            for (std::size_t o = 0; o < ne; ++o) {
                double acc = 0.0;
                for (std::size_t i = 0; i < ne; ++i)
                    acc += rp.at(o, i) * dens[p].real() * x[p * ne + i].real();
                y[p * ne + o] = acc * acc;
            }
        return y;
    }

    if (name == "dot") {
        const std::size_t nd = sz(sizes, "dirs", 4);
        Field mu = patterns::smooth_pattern(n, n, rng);
        ScatterParams r1 = patterns::direction_kernel(nd, 0.9, rng);
        ScatterParams r2 = patterns::direction_kernel(nd, 0.9, rng);
        Field u(x.type());
        for (std::size_t p = 0; p < n * n; ++p)
            for (std::size_t l = 0; l < nd; ++l) u[p * nd + l] = mu[p].real() * x[p * nd + l];
        u = loop_scatter(u, r1, nullptr);
        u = loop_propagate(u, 18.0, 2.0);
        u = loop_scatter(u, r2, nullptr);
        Field y(TypeInfo{{{"y", n}, {"x", n}, {"dir", nd}}, DType::real64, "counts"});
        for (std::size_t i = 0; i < u.size(); ++i) y[i] = detect_square(1.0, u[i]);
        return y;
    }

    if (name == "beam_hardening_ct") {
        const std::size_t ne = sz(sizes, "bins", 4);
        auto pp = patterns::radon_params(n, sz(sizes, "angles", 16));
        const std::size_t na = pp.thetas.size(), ndet = pp.n_det;
        TypeInfo st{{{"theta", na}, {"t", ndet}, {"E", ne}}, DType::real64, "au"};
        Field sino(st);
        loop_radon(x, n, n, ne, pp.thetas, ndet, pp.det_spacing, pp.pixel_size, pp.step, sino);
        Field y(TypeInfo{{{"theta", na}, {"t", ndet}}, DType::real64, "counts"});
        const double alpha = 0.6, delta = 1e-8;
        for (std::size_t p = 0; p < na * ndet; ++p) {
            double q = 0.0;
            for (std::size_t e = 0; e < ne; ++e)
                q += std::exp(-alpha * sino[p * ne + e].real());
            const double r = std::log(q + delta);
            y[p] = r * r; // terminal square-law detector
        }
        return y;
    }

    if (name == "phase_wrapped_mri") {
        Field coil = patterns::complex_map(n, n, rng);
        auto omega = patterns::random_subset(n * n, sz(sizes, "samples", 128), rng);
        auto grid = full_grid_ktraj(n, n);
        const double scale = 1.0 / std::sqrt(double(n * n));
        TypeInfo ot{{{"sample", omega.size()}}, DType::complex128, "counts"};
        Field y(ot);
        for (std::size_t j = 0; j < omega.size(); ++j) {
            const auto& k = grid[omega[j]];
            const cplx z = loop_dft_sample(x, &coil, n, n, k[0], k[1], scale);
            y[j] = {wrap_scalar(z.real()), wrap_scalar(z.imag())};
        }
        return y;
    }

    if (name == "nonlinear_ultrasound") {
        Field med = patterns::smooth_pattern(n, n, rng);
        Field u = loop_propagate(x, 14.0, 2.0);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const cplx v = med[i].real() * u[i];
            const double re = v.real() + 0.15 * v.real() * v.real();
            const double im = v.imag() + 0.15 * v.imag() * v.imag();
            u[i] = {re, im};
        }
        u = loop_propagate(u, 14.0, 2.0);
        u.set_units("counts");
        return u; // family 1
    }

    if (name == "mpi") {
        Field sens = patterns::smooth_pattern(n, n, rng);
        std::vector<std::array<double, 2>> ktraj;
        const std::size_t m = sz(sizes, "samples", 128);
        for (std::size_t j = 0; j < m; ++j) {
            const double ky = rng.uniform(-double(n) / 2, double(n) / 2);
            const double kx = rng.uniform(-double(n) / 2, double(n) / 2);
            ktraj.push_back({ky, kx});
        }
        Field u(plane(n, n));
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double v = sens[i].real() * x[i].real();
            u[i] = v - 0.15 * v * v * v;
        }
        const double scale = 1.0 / std::sqrt(double(n * n));
        TypeInfo ot{{{"k", m}}, DType::complex128, "counts"};
        Field y(ot);
        for (std::size_t j = 0; j < m; ++j)
            y[j] = loop_dft_sample(u, nullptr, n, n, ktraj[j][0], ktraj[j][1], scale);
        return y;
    }

    throw Error("no oracle for modality '" + name + "'");
}

// ---------------------------------------------------------------------------
// Affine multiple-scattering model
// ---------------------------------------------------------------------------

namespace {

Field born_step(const ScatterParams& scatter, const PropagateParams& prop,
                const ModulateParams& mod, const Field& z, const Field& u_inc) {
    Field s = z;
    s += u_inc;
    s = loop_propagate(s, prop.d, prop.lambda);
    s = loop_scatter(s, scatter, nullptr);
    // modulate by the (y, x) pattern, broadcast over trailing axes
    const std::size_t plane_sz = mod.m.size();
    std::size_t inner = s.size() / plane_sz;
    for (std::size_t p = 0; p < plane_sz; ++p)
        for (std::size_t l = 0; l < inner; ++l) s[p * inner + l] *= mod.m[p];
    return s;
}

} // namespace

Field born_partial(const ScatterParams& scatter, const PropagateParams& prop,
                   const ModulateParams& mod, const Field& u_inc, std::size_t levels) {
    // z_0 = R(M(u_inc))
    Field z = u_inc;
    const std::size_t plane_sz = mod.m.size();
    std::size_t inner = z.size() / plane_sz;
    for (std::size_t p = 0; p < plane_sz; ++p)
        for (std::size_t l = 0; l < inner; ++l) z[p * inner + l] *= mod.m[p];
    z = loop_scatter(z, scatter, nullptr);
    for (std::size_t l = 0; l < levels; ++l) {
        // z_{j+1} = M(R(P(z_j + u_inc))), but with M applied after R as in the
        // per-level chain P -> R -> M
        Field s = z;
        s += u_inc;
        s = loop_propagate(s, prop.d, prop.lambda);
        s = loop_scatter(s, scatter, nullptr);
        for (std::size_t p = 0; p < plane_sz; ++p)
            for (std::size_t q = 0; q < inner; ++q) s[p * inner + q] *= mod.m[p];
        z = s;
    }
    return z;
}

Field born_fixed_point(const ScatterParams& scatter, const PropagateParams& prop,
                       const ModulateParams& mod, const Field& u_inc, std::size_t max_iter,
                       double tol) {
    Field z(u_inc.type()); // Picard iteration of the contraction from zero
    const std::size_t plane_sz = mod.m.size();
    const std::size_t inner = z.size() / plane_sz;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Field s = z;
        s += u_inc;
        s = loop_propagate(s, prop.d, prop.lambda);
        s = loop_scatter(s, scatter, nullptr);
        for (std::size_t p = 0; p < plane_sz; ++p)
            for (std::size_t q = 0; q < inner; ++q) s[p * inner + q] *= mod.m[p];
        const double delta = (s - z).norm2();
        z = std::move(s);
        if (delta <= tol * std::max(1.0, z.norm2())) break;
    }
    return z;
}

} // namespace opg
