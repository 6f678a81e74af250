#include <cmath>

#include "op_detail.hpp"
#include "opgraph/ops.hpp"

namespace opg {

using detail::promote;

// ---------------------------------------------------------------------------
// Project: ray-driven Radon transform over the two leading spatial axes with
// bilinear footprint weights; the adjoint scatters the same weights, so the
// pair is an exact transpose by construction. Trailing axes broadcast.
// ---------------------------------------------------------------------------

TypeInfo infer_project(const ProjectParams& p, const TypeInfo& in) {
    p.validate();
    if (in.rank() < 2) throw TypeError("project: input needs two spatial axes");
    TypeInfo out = in;
    out.axes[0] = {"theta", p.thetas.size()};
    out.axes[1] = {"t", p.n_det};
    return out;
}

namespace {

struct RayGeom {
    double S;           // half-length of the sampling segment (physical units)
    double ds;          // sampling step (physical units)
    std::size_t n_samp; // samples per ray
};

RayGeom ray_geometry(const ProjectParams& p, std::size_t ny, std::size_t nx) {
    RayGeom g;
    const double diag =
        0.5 * std::hypot(static_cast<double>(nx), static_cast<double>(ny)) + 1.0;
    g.S = diag * p.pixel_size;
    g.ds = p.step * p.pixel_size;
    g.n_samp = static_cast<std::size_t>(std::floor(2.0 * g.S / g.ds)) + 1;
    return g;
}

/// Enumerate the bilinear footprint weights of one ray and hand each
/// (pixel, weight) pair to `emit(iy, ix, w)`.
template <class Emit>
void walk_ray(const ProjectParams& p, std::size_t ny, std::size_t nx, double theta, double t,
              const RayGeom& g, Emit&& emit) {
    const double nx_half = 0.5 * (static_cast<double>(nx) - 1.0);
    const double ny_half = 0.5 * (static_cast<double>(ny) - 1.0);
    const double cs = std::cos(theta), sn = std::sin(theta);
    for (std::size_t i = 0; i < g.n_samp; ++i) {
        const double s = -g.S + static_cast<double>(i) * g.ds;
        const double X = t * cs - s * sn;
        const double Y = t * sn + s * cs;
        const double gx = X / p.pixel_size + nx_half;
        const double gy = Y / p.pixel_size + ny_half;
        const double fx0 = std::floor(gx), fy0 = std::floor(gy);
        const long ix0 = static_cast<long>(fx0), iy0 = static_cast<long>(fy0);
        const double wx1 = gx - fx0, wy1 = gy - fy0;
        const double wx0 = 1.0 - wx1, wy0 = 1.0 - wy1;
        for (int dy = 0; dy < 2; ++dy) {
            const long iy = iy0 + dy;
            if (iy < 0 || iy >= static_cast<long>(ny)) continue;
            const double wy = dy ? wy1 : wy0;
            for (int dx = 0; dx < 2; ++dx) {
                const long ix = ix0 + dx;
                if (ix < 0 || ix >= static_cast<long>(nx)) continue;
                const double w = wy * (dx ? wx1 : wx0);
                if (w != 0.0) emit(static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), w);
            }
        }
    }
}

} // namespace

Field fwd_project(const ProjectParams& p, const Field& x) {
    TypeInfo out_t = infer_project(p, x.type());
    const std::size_t ny = x.extent(0), nx = x.extent(1);
    std::size_t inner = 1;
    for (std::size_t i = 2; i < x.rank(); ++i) inner *= x.extent(i);
    const RayGeom g = ray_geometry(p, ny, nx);
    Field out(out_t);
    for (std::size_t a = 0; a < p.thetas.size(); ++a) {
        for (std::size_t k = 0; k < p.n_det; ++k) {
            const double t = (static_cast<double>(k) - 0.5 * (static_cast<double>(p.n_det) - 1.0)) *
                             p.det_spacing * p.pixel_size;
            std::vector<cplx> acc(inner, cplx{0.0, 0.0});
            walk_ray(p, ny, nx, p.thetas[a], t, g, [&](std::size_t iy, std::size_t ix, double w) {
                const cplx* src = x.data() + (iy * nx + ix) * inner;
                for (std::size_t s = 0; s < inner; ++s) acc[s] += w * src[s];
            });
            cplx* dst = out.data() + (a * p.n_det + k) * inner;
            for (std::size_t s = 0; s < inner; ++s) dst[s] = acc[s] * g.ds;
        }
    }
    return out;
}

Field adj_project(const ProjectParams& p, const Field& y, const TypeInfo& in) {
    TypeInfo out_t = infer_project(p, in);
    if (!(y.type().edge_type().shape == out_t.edge_type().shape))
        throw TypeError("project adjoint: sinogram shape mismatch");
    const std::size_t ny = in.axes[0].extent, nx = in.axes[1].extent;
    std::size_t inner = 1;
    for (std::size_t i = 2; i < in.axes.size(); ++i) inner *= in.axes[i].extent;
    const RayGeom g = ray_geometry(p, ny, nx);
    TypeInfo in_t = in;
    in_t.dtype = promote(in.dtype, y.dtype());
    Field out(in_t);
    for (std::size_t a = 0; a < p.thetas.size(); ++a) {
        for (std::size_t k = 0; k < p.n_det; ++k) {
            const double t = (static_cast<double>(k) - 0.5 * (static_cast<double>(p.n_det) - 1.0)) *
                             p.det_spacing * p.pixel_size;
            const cplx* val = y.data() + (a * p.n_det + k) * inner;
            walk_ray(p, ny, nx, p.thetas[a], t, g, [&](std::size_t iy, std::size_t ix, double w) {
                cplx* dst = out.data() + (iy * nx + ix) * inner;
                const double ww = w * g.ds;
                for (std::size_t s = 0; s < inner; ++s) dst[s] += ww * val[s];
            });
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convolve: same-size linear convolution with zero padding along the kernel's
// axes (matched to the input by name); other axes broadcast.
// ---------------------------------------------------------------------------

TypeInfo infer_convolve(const ConvolveParams& p, const TypeInfo& in) {
    p.validate();
    for (const auto& ka : p.h.axes()) {
        if (in.axis_index(ka.name) < 0)
            throw TypeError("convolve: input lacks kernel axis '" + ka.name + "'");
    }
    TypeInfo out = in;
    out.dtype = promote(in.dtype, p.h.dtype());
    return out;
}

namespace {

struct ConvPlan {
    std::vector<std::size_t> axes;    // input axis indices being convolved, kernel order
    std::vector<long> center;         // kernel center per convolved axis
    std::vector<std::size_t> in_ext;  // input extents (all axes)
    std::vector<std::size_t> in_str;  // input strides (all axes)
    std::vector<std::size_t> k_ext;
};

ConvPlan conv_plan(const ConvolveParams& p, const TypeInfo& in) {
    ConvPlan c;
    for (const auto& ka : p.h.axes()) {
        c.axes.push_back(static_cast<std::size_t>(in.axis_index(ka.name)));
        c.center.push_back(static_cast<long>(ka.extent / 2));
        c.k_ext.push_back(ka.extent);
    }
    for (const auto& a : in.axes) c.in_ext.push_back(a.extent);
    c.in_str.assign(in.axes.size(), 1);
    for (std::size_t i = in.axes.size(); i-- > 1;)
        c.in_str[i - 1] = c.in_str[i] * c.in_ext[i];
    return c;
}

} // namespace

// adjoint=false: y[p] = sum_k h[k] x[p - k + c]; adjoint=true: correlation
// with the conjugate kernel, x[p] = sum_k conj(h[k]) y[p + k - c].
static Field convolve_impl(const ConvolveParams& p, const Field& x, bool adjoint_mode) {
    TypeInfo out_t = infer_convolve(p, x.type());
    const ConvPlan c = conv_plan(p, x.type());
    Field out(out_t);

    if (x.rank() == 2 && p.h.rank() == 2 && c.axes[0] == 0 && c.axes[1] == 1) {
        // common 2D case, direct loops
        const long ny = static_cast<long>(x.extent(0)), nx = static_cast<long>(x.extent(1));
        const long ky = static_cast<long>(p.h.extent(0)), kx = static_cast<long>(p.h.extent(1));
        const long cy = ky / 2, cx = kx / 2;
        for (long iy = 0; iy < ny; ++iy) {
            for (long ix = 0; ix < nx; ++ix) {
                cplx acc{0.0, 0.0};
                for (long jy = 0; jy < ky; ++jy) {
                    const long qy = adjoint_mode ? iy + jy - cy : iy - jy + cy;
                    if (qy < 0 || qy >= ny) continue;
                    for (long jx = 0; jx < kx; ++jx) {
                        const long qx = adjoint_mode ? ix + jx - cx : ix - jx + cx;
                        if (qx < 0 || qx >= nx) continue;
                        const cplx h = adjoint_mode ? std::conj(p.h[jy * kx + jx])
                                                    : p.h[jy * kx + jx];
                        acc += h * x[qy * nx + qx];
                    }
                }
                out[iy * nx + ix] = acc;
            }
        }
        return out;
    }

    std::size_t flat = 0;
    for (Odometer od(c.in_ext); !od.done(); od.next(), ++flat) {
        const auto& idx = od.idx();
        cplx acc{0.0, 0.0};
        std::size_t kflat = 0;
        for (Odometer kd(c.k_ext); !kd.done(); kd.next(), ++kflat) {
            long off = 0;
            bool ok = true;
            for (std::size_t d = 0; d < c.axes.size(); ++d) {
                const std::size_t ax = c.axes[d];
                const long shift = static_cast<long>(kd.idx()[d]) - c.center[d];
                const long q = static_cast<long>(idx[ax]) + (adjoint_mode ? shift : -shift);
                if (q < 0 || q >= static_cast<long>(c.in_ext[ax])) {
                    ok = false;
                    break;
                }
                off += (q - static_cast<long>(idx[ax])) * static_cast<long>(c.in_str[ax]);
            }
            if (!ok) continue;
            const cplx h = adjoint_mode ? std::conj(p.h[kflat]) : p.h[kflat];
            acc += h * x[static_cast<std::size_t>(static_cast<long>(flat) + off)];
        }
        out[flat] = acc;
    }
    return out;
}

Field fwd_convolve(const ConvolveParams& p, const Field& x) { return convolve_impl(p, x, false); }

Field adj_convolve(const ConvolveParams& p, const Field& y) { return convolve_impl(p, y, true); }

} // namespace opg
