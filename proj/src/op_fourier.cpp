#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

#include "op_detail.hpp"
#include "opgraph/ops.hpp"

namespace opg {

// ---------------------------------------------------------------------------
// 2D FFT helper (FFTW, unaligned plans cached per shape/direction)
// ---------------------------------------------------------------------------

namespace {

class FftCache {
public:
    static FftCache& instance() {
        static FftCache c;
        return c;
    }

    void exec(std::size_t ny, std::size_t nx, int sign, cplx* data) {
        fftw_plan plan;
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto key = std::make_tuple(ny, nx, sign);
            auto it = plans_.find(key);
            if (it == plans_.end()) {
                std::vector<cplx> scratch(ny * nx);
                plan = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx),
                                        reinterpret_cast<fftw_complex*>(scratch.data()),
                                        reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
                plans_.emplace(key, plan);
            } else {
                plan = it->second;
            }
        }
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }

private:
    FftCache() = default;
    std::mutex mu_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

inline double fftfreq(std::size_t i, std::size_t n, double pitch) {
    const auto half = (n + 1) / 2; // first negative frequency index
    const double k = (i < half) ? static_cast<double>(i)
                                : static_cast<double>(i) - static_cast<double>(n);
    return k / (static_cast<double>(n) * pitch);
}

} // namespace

// ---------------------------------------------------------------------------
// Propagate: angular spectrum transfer over the two leading spatial axes,
// broadcast over any trailing axes.
// ---------------------------------------------------------------------------

TypeInfo infer_propagate(const PropagateParams& p, const TypeInfo& in) {
    p.validate();
    if (in.rank() < 2) throw TypeError("propagate: input needs two spatial axes");
    if (in.dtype != DType::complex128)
        throw TypeError("propagate: input must be complex128");
    return in;
}

namespace {

std::vector<cplx> transfer_function(const PropagateParams& p, std::size_t ny, std::size_t nx) {
    std::vector<cplx> T(ny * nx);
    const double inv_l2 = 1.0 / (p.lambda * p.lambda);
    const double two_pi_d = 2.0 * M_PI * p.d;
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double fy = fftfreq(iy, ny, p.pitch_y);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double fx = fftfreq(ix, nx, p.pitch_x);
            const double f2 = fx * fx + fy * fy;
            if (f2 >= inv_l2) {
                T[iy * nx + ix] = 0.0; // evanescent components are zeroed
            } else {
                const double ph = two_pi_d * std::sqrt(inv_l2 - f2);
                T[iy * nx + ix] = {std::cos(ph), std::sin(ph)};
            }
        }
    }
    return T;
}

} // namespace

Field fwd_propagate(const PropagateParams& p, const Field& x) {
    infer_propagate(p, x.type());
    const std::size_t ny = x.extent(0), nx = x.extent(1);
    const std::size_t plane = ny * nx;
    const std::size_t n_slices = x.size() / plane;
    const auto T = transfer_function(p, ny, nx);
    const double inv_n = 1.0 / static_cast<double>(plane);

    Field out = x;
    // row-major layout is (y, x, trailing...): gather each trailing slice
    std::vector<cplx> buf(plane);
    const std::size_t inner = n_slices; // trailing axes are contiguous innermost
    for (std::size_t s = 0; s < n_slices; ++s) {
        for (std::size_t i = 0; i < plane; ++i) buf[i] = x[i * inner + s];
        FftCache::instance().exec(ny, nx, FFTW_FORWARD, buf.data());
        for (std::size_t i = 0; i < plane; ++i) buf[i] *= T[i];
        FftCache::instance().exec(ny, nx, FFTW_BACKWARD, buf.data());
        for (std::size_t i = 0; i < plane; ++i) out[i * inner + s] = buf[i] * inv_n;
    }
    return out;
}

Field adj_propagate(const PropagateParams& p, const Field& y) {
    PropagateParams back = p;
    back.d = -p.d; // P^dagger(d, lambda) = P(-d, lambda)
    return fwd_propagate(back, y);
}

// ---------------------------------------------------------------------------
// Encode: direct-summation DFT at arbitrary k (cycles per field of view) on a
// centered index grid. The kernel is separable in (ky, kx), which keeps the
// direct sum at O(n) per sample.
// ---------------------------------------------------------------------------

TypeInfo infer_encode(const EncodeParams& p, const TypeInfo& in) {
    p.validate();
    if (in.rank() != 2) throw TypeError("encode: input must be a 2D field");
    TypeInfo out;
    out.axes = {{"k", p.ktraj.size()}};
    out.dtype = DType::complex128;
    out.units = in.units;
    return out;
}

namespace {

void encode_phasors(double k, std::size_t n, std::vector<cplx>& ph) {
    ph.resize(n);
    const double c = static_cast<double>(n / 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (static_cast<double>(i) - c) / static_cast<double>(n);
        const double a = -2.0 * M_PI * k * r;
        ph[i] = {std::cos(a), std::sin(a)};
    }
}

} // namespace

Field fwd_encode(const EncodeParams& p, const Field& x) {
    TypeInfo out_t = infer_encode(p, x.type());
    const std::size_t ny = x.extent(0), nx = x.extent(1);
    const double scale = p.normalize ? 1.0 / std::sqrt(static_cast<double>(ny * nx)) : 1.0;
    Field out(out_t);
    std::vector<cplx> phy, phx;
    for (std::size_t j = 0; j < p.ktraj.size(); ++j) {
        encode_phasors(p.ktraj[j][0], ny, phy);
        encode_phasors(p.ktraj[j][1], nx, phx);
        cplx acc{0.0, 0.0};
        for (std::size_t iy = 0; iy < ny; ++iy) {
            cplx row{0.0, 0.0};
            const cplx* xr = x.data() + iy * nx;
            for (std::size_t ix = 0; ix < nx; ++ix) row += phx[ix] * xr[ix];
            acc += phy[iy] * row;
        }
        out[j] = scale * acc;
    }
    return out;
}

Field adj_encode(const EncodeParams& p, const Field& y, const TypeInfo& in) {
    if (y.size() != p.ktraj.size()) throw TypeError("encode adjoint: sample count mismatch");
    const std::size_t ny = in.axes[0].extent, nx = in.axes[1].extent;
    const double scale = p.normalize ? 1.0 / std::sqrt(static_cast<double>(ny * nx)) : 1.0;
    TypeInfo in_t = in;
    in_t.dtype = DType::complex128;
    Field out(in_t);
    std::vector<cplx> phy, phx;
    for (std::size_t j = 0; j < p.ktraj.size(); ++j) {
        encode_phasors(p.ktraj[j][0], ny, phy);
        encode_phasors(p.ktraj[j][1], nx, phx);
        const cplx v = scale * y[j];
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const cplx vy = std::conj(phy[iy]) * v;
            cplx* xr = out.data() + iy * nx;
            for (std::size_t ix = 0; ix < nx; ++ix) xr[ix] += std::conj(phx[ix]) * vy;
        }
    }
    return out;
}

} // namespace opg
