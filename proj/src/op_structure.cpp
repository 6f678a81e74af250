#include <cmath>

#include "op_detail.hpp"
#include "opgraph/ops.hpp"

namespace opg {

using detail::AxisSplit;
using detail::make_broadcast;
using detail::promote;
using detail::split_axis;

// from op_pointwise.cpp (attenuation reuses the pattern-broadcast machinery)
Field fwd_modulate(const ModulateParams&, const Field&);
Field adj_modulate(const ModulateParams&, const Field&, const TypeInfo&);

// ---------------------------------------------------------------------------
// Sample
// ---------------------------------------------------------------------------

TypeInfo infer_sample(const SampleParams& p, const TypeInfo& in) {
    p.validate();
    if (p.omega.back() >= in.size())
        throw TypeError("sample: index " + std::to_string(p.omega.back()) +
                        " out of range for input size " + std::to_string(in.size()));
    TypeInfo out;
    out.axes = {{"sample", p.omega.size()}};
    out.dtype = in.dtype;
    out.units = in.units;
    return out;
}

Field fwd_sample(const SampleParams& p, const Field& x) {
    Field out(infer_sample(p, x.type()));
    for (std::size_t i = 0; i < p.omega.size(); ++i) out[i] = x[p.omega[i]];
    return out;
}

Field adj_sample(const SampleParams& p, const Field& y, const TypeInfo& in) {
    if (y.size() != p.omega.size()) throw TypeError("sample adjoint: size mismatch");
    TypeInfo in_t = in;
    in_t.dtype = promote(in.dtype, y.dtype());
    Field out(in_t); // zero-fills unsampled locations
    for (std::size_t i = 0; i < p.omega.size(); ++i) out[p.omega[i]] = y[i];
    return out;
}

// ---------------------------------------------------------------------------
// Accumulate
// ---------------------------------------------------------------------------

TypeInfo infer_accumulate(const AccumulateParams& p, const TypeInfo& in) {
    const int k = in.axis_index(p.axis);
    if (k < 0) throw TypeError("accumulate: input has no axis '" + p.axis + "'");
    TypeInfo out = in;
    out.axes.erase(out.axes.begin() + k);
    if (out.axes.empty()) out.axes = {{"scalar", 1}};
    return out;
}

Field fwd_accumulate(const AccumulateParams& p, const Field& x) {
    const int k = x.axis_index(p.axis);
    if (k < 0) throw TypeError("accumulate: input has no axis '" + p.axis + "'");
    const AxisSplit s = split_axis(x.type(), static_cast<std::size_t>(k));
    Field out(infer_accumulate(p, x.type()));
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t j = 0; j < s.n; ++j)
            for (std::size_t i = 0; i < s.inner; ++i)
                out[o * s.inner + i] += x[(o * s.n + j) * s.inner + i];
    return out;
}

Field adj_accumulate(const AccumulateParams& p, const Field& y, const TypeInfo& in) {
    const int k = in.axis_index(p.axis);
    if (k < 0) throw TypeError("accumulate adjoint: input has no axis '" + p.axis + "'");
    const AxisSplit s = split_axis(in, static_cast<std::size_t>(k));
    if (y.size() != s.outer * s.inner) throw TypeError("accumulate adjoint: size mismatch");
    TypeInfo in_t = in;
    in_t.dtype = promote(in.dtype, y.dtype());
    Field out(in_t); // replicate along the reduced axis
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t j = 0; j < s.n; ++j)
            for (std::size_t i = 0; i < s.inner; ++i)
                out[(o * s.n + j) * s.inner + i] = y[o * s.inner + i];
    return out;
}

// ---------------------------------------------------------------------------
// Disperse: integer per-channel shift round(alpha*lambda_j + a) along a
// spatial axis, zero-filled (a partial permutation).
// ---------------------------------------------------------------------------

TypeInfo infer_disperse(const DisperseParams& p, const TypeInfo& in) {
    const int ks = in.axis_index(p.axis);
    if (ks < 0) throw TypeError("disperse: input has no shift axis '" + p.axis + "'");
    const int kl = in.axis_index(p.spectral_axis);
    if (kl < 0)
        throw TypeError("disperse: input has no spectral axis '" + p.spectral_axis + "'");
    if (p.lambdas.size() != in.axes[kl].extent)
        throw TypeError("disperse: lambdas length must equal the spectral extent");
    return in;
}

namespace {

Field disperse_impl(const DisperseParams& p, const Field& x, int sign) {
    infer_disperse(p, x.type());
    const auto shape = x.type();
    const auto strides = x.strides();
    const std::size_t ks = static_cast<std::size_t>(x.axis_index(p.axis));
    const std::size_t kl = static_cast<std::size_t>(x.axis_index(p.spectral_axis));
    const std::size_t n_shift = shape.axes[ks].extent;

    std::vector<long> shift(p.lambdas.size());
    for (std::size_t j = 0; j < p.lambdas.size(); ++j)
        shift[j] = static_cast<long>(std::lround(p.alpha * p.lambdas[j] + p.a)) * sign;

    Field out(x.type());
    std::vector<std::size_t> ext;
    for (const auto& a : shape.axes) ext.push_back(a.extent);
    std::size_t flat = 0;
    for (Odometer od(ext); !od.done(); od.next(), ++flat) {
        const long src = static_cast<long>(od.idx()[ks]) - shift[od.idx()[kl]];
        if (src < 0 || src >= static_cast<long>(n_shift)) continue;
        const long off = (src - static_cast<long>(od.idx()[ks])) * static_cast<long>(strides[ks]);
        out[flat] = x[static_cast<std::size_t>(static_cast<long>(flat) + off)];
    }
    return out;
}

} // namespace

Field fwd_disperse(const DisperseParams& p, const Field& x) { return disperse_impl(p, x, +1); }

Field adj_disperse(const DisperseParams& p, const Field& y) { return disperse_impl(p, y, -1); }

// ---------------------------------------------------------------------------
// Scatter: dense kernel along the energy/angle axis (default: last axis),
// optional pointwise attenuation applied first.
// ---------------------------------------------------------------------------

namespace {

std::size_t scatter_axis_index(const ScatterParams& p, const TypeInfo& in) {
    if (p.axis.empty()) {
        if (in.rank() == 0) throw TypeError("scatter: input has no axes");
        return in.rank() - 1;
    }
    const int k = in.axis_index(p.axis);
    if (k < 0) throw TypeError("scatter: input has no axis '" + p.axis + "'");
    return static_cast<std::size_t>(k);
}

} // namespace

TypeInfo infer_scatter(const ScatterParams& p, const TypeInfo& in) {
    p.validate();
    const std::size_t k = scatter_axis_index(p, in);
    if (in.axes[k].extent != p.n_in)
        throw TypeError("scatter: kernel expects extent " + std::to_string(p.n_in) +
                        " along '" + in.axes[k].name + "', input has " +
                        std::to_string(in.axes[k].extent));
    if (p.atten) make_broadcast(in, p.atten->type(), "scatter atten");
    TypeInfo out = in;
    out.axes[k].extent = p.n_out;
    return out;
}

Field fwd_scatter(const ScatterParams& p, const Field& x) {
    const TypeInfo out_t = infer_scatter(p, x.type());
    const std::size_t k = scatter_axis_index(p, x.type());

    Field t = x;
    if (p.atten) {
        ModulateParams mp{*p.atten};
        t = fwd_modulate(mp, x);
    }
    const AxisSplit si = split_axis(x.type(), k);
    Field out(out_t);
    for (std::size_t o = 0; o < si.outer; ++o) {
        for (std::size_t ob = 0; ob < p.n_out; ++ob) {
            for (std::size_t ib = 0; ib < p.n_in; ++ib) {
                const double kv = p.at(ob, ib);
                if (kv == 0.0) continue;
                const cplx* src = t.data() + (o * si.n + ib) * si.inner;
                cplx* dst = out.data() + (o * p.n_out + ob) * si.inner;
                for (std::size_t i = 0; i < si.inner; ++i) dst[i] += kv * src[i];
            }
        }
    }
    return out;
}

Field adj_scatter(const ScatterParams& p, const Field& y, const TypeInfo& in) {
    const std::size_t k = scatter_axis_index(p, in);
    const AxisSplit si = split_axis(in, static_cast<std::size_t>(k));
    if (y.size() != si.outer * p.n_out * si.inner)
        throw TypeError("scatter adjoint: size mismatch");
    TypeInfo mid_t = in;
    mid_t.dtype = promote(in.dtype, y.dtype());
    Field mid(mid_t);
    for (std::size_t o = 0; o < si.outer; ++o) {
        for (std::size_t ob = 0; ob < p.n_out; ++ob) {
            for (std::size_t ib = 0; ib < p.n_in; ++ib) {
                const double kv = p.at(ob, ib);
                if (kv == 0.0) continue;
                const cplx* src = y.data() + (o * p.n_out + ob) * si.inner;
                cplx* dst = mid.data() + (o * si.n + ib) * si.inner;
                for (std::size_t i = 0; i < si.inner; ++i) dst[i] += kv * src[i];
            }
        }
    }
    if (p.atten) {
        ModulateParams mp{*p.atten};
        return adj_modulate(mp, mid, mid_t);
    }
    return mid;
}

} // namespace opg
