#include <cmath>

#include "op_detail.hpp"
#include "opgraph/ops.hpp"

namespace opg {

using detail::BroadcastPlan;
using detail::make_broadcast;
using detail::promote;

// ---------------------------------------------------------------------------
// Modulate
// ---------------------------------------------------------------------------

TypeInfo infer_modulate(const ModulateParams& p, const TypeInfo& in) {
    BroadcastPlan plan = make_broadcast(in, p.m.type(), "modulate");
    plan.out.dtype = promote(in.dtype, p.m.dtype());
    plan.out.units = in.units;
    return plan.out;
}

Field fwd_modulate(const ModulateParams& p, const Field& x) {
    BroadcastPlan plan = make_broadcast(x.type(), p.m.type(), "modulate");
    plan.out.dtype = promote(x.dtype(), p.m.dtype());
    plan.out.units = x.units();
    Field out(plan.out);
    std::vector<std::size_t> ext;
    for (const auto& a : plan.out.axes) ext.push_back(a.extent);
    std::size_t flat = 0;
    for (Odometer od(ext); !od.done(); od.next(), ++flat) {
        std::size_t xoff = 0, moff = 0;
        for (std::size_t k = 0; k < ext.size(); ++k) {
            xoff += od.idx()[k] * plan.x_stride[k];
            moff += od.idx()[k] * plan.m_stride[k];
        }
        out[flat] = x[xoff] * p.m[moff];
    }
    return out;
}

Field adj_modulate(const ModulateParams& p, const Field& y, const TypeInfo& in) {
    BroadcastPlan plan = make_broadcast(in, p.m.type(), "modulate");
    if (y.size() != plan.out.size()) throw TypeError("modulate adjoint: output size mismatch");
    TypeInfo in_t = in;
    in_t.dtype = promote(in.dtype, y.dtype());
    Field out(in_t);
    std::vector<std::size_t> ext;
    for (const auto& a : plan.out.axes) ext.push_back(a.extent);
    std::size_t flat = 0;
    for (Odometer od(ext); !od.done(); od.next(), ++flat) {
        std::size_t xoff = 0, moff = 0;
        for (std::size_t k = 0; k < ext.size(); ++k) {
            xoff += od.idx()[k] * plan.x_stride[k];
            moff += od.idx()[k] * plan.m_stride[k];
        }
        out[xoff] += std::conj(p.m[moff]) * y[flat];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Detect
// ---------------------------------------------------------------------------

TypeInfo infer_detect(const DetectParams& p, const TypeInfo& in) {
    TypeInfo out = in;
    if (p.family != DetectFamily::linear_field) out.dtype = DType::real64;
    out.units = "counts";
    return out;
}

namespace {
inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
} // namespace

Field fwd_detect(const DetectParams& p, const Field& x) {
    TypeInfo out_t = infer_detect(p, x.type());
    Field out(out_t);
    const std::size_t n = x.size();
    switch (p.family) {
        case DetectFamily::linear_field:
            for (std::size_t i = 0; i < n; ++i) out[i] = p.g * x[i];
            break;
        case DetectFamily::logarithmic:
            for (std::size_t i = 0; i < n; ++i)
                out[i] = p.g * std::log1p(std::norm(x[i]) / p.x0);
            break;
        case DetectFamily::sigmoid:
            for (std::size_t i = 0; i < n; ++i)
                out[i] = p.g * logistic(std::norm(x[i]) - p.x0);
            break;
        case DetectFamily::intensity_square:
            for (std::size_t i = 0; i < n; ++i) out[i] = p.g * std::norm(x[i]);
            break;
        case DetectFamily::coherent_field: {
            const cplx rot{std::cos(p.phi), std::sin(p.phi)};
            for (std::size_t i = 0; i < n; ++i) out[i] = p.g * (x[i] * rot).real();
            break;
        }
    }
    return out;
}

PrimitiveNode linearize_detect(const PrimitiveNode& node, const Field& x_op) {
    const auto& p = node.as<DetectParams>();
    const bool cx = x_op.dtype() == DType::complex128;
    LinearizedParams lp;
    TypeInfo coef_t = x_op.type();
    coef_t.units = "gain";
    Field c(coef_t);
    const std::size_t n = x_op.size();

    switch (p.family) {
        case DetectFamily::linear_field: {
            lp.mode = LinMode::cdiag;
            c.set_dtype(DType::real64);
            for (std::size_t i = 0; i < n; ++i) c[i] = p.g;
            break;
        }
        case DetectFamily::logarithmic: {
            // d/dx g*log(1 + |x|^2/x0) = 2g/(x0 + |x|^2) * Re(conj(x) h)
            lp.mode = cx ? LinMode::repart : LinMode::cdiag;
            for (std::size_t i = 0; i < n; ++i) {
                const double s = 2.0 * p.g / (p.x0 + std::norm(x_op[i]));
                c[i] = s * std::conj(x_op[i]);
            }
            break;
        }
        case DetectFamily::sigmoid: {
            lp.mode = cx ? LinMode::repart : LinMode::cdiag;
            for (std::size_t i = 0; i < n; ++i) {
                const double sg = logistic(std::norm(x_op[i]) - p.x0);
                const double s = 2.0 * p.g * sg * (1.0 - sg);
                c[i] = s * std::conj(x_op[i]);
            }
            break;
        }
        case DetectFamily::intensity_square: {
            lp.mode = cx ? LinMode::repart : LinMode::cdiag;
            for (std::size_t i = 0; i < n; ++i) c[i] = 2.0 * p.g * std::conj(x_op[i]);
            break;
        }
        case DetectFamily::coherent_field: {
            if (cx) {
                lp.mode = LinMode::repart;
                const cplx rot{std::cos(p.phi), std::sin(p.phi)};
                for (std::size_t i = 0; i < n; ++i) c[i] = p.g * rot;
            } else {
                lp.mode = LinMode::cdiag;
                for (std::size_t i = 0; i < n; ++i) c[i] = p.g * std::cos(p.phi);
            }
            break;
        }
    }
    c.set_dtype(lp.mode == LinMode::cdiag && !cx ? DType::real64 : DType::complex128);
    lp.coef = std::move(c);
    PrimitiveNode out = make_node(node.id, Kind::linearized, lp, x_op.type());
    return out;
}

// ---------------------------------------------------------------------------
// Transform
// ---------------------------------------------------------------------------

double transform_scalar(const TransformParams& p, double x) {
    switch (p.family) {
        case TransformFamily::exp_atten:
            return std::exp(-p.alpha * x);
        case TransformFamily::log:
            if (!(x + p.delta > 0.0))
                throw DomainError("transform log: x + delta <= 0");
            return std::log(x + p.delta);
        case TransformFamily::wrap:
            return std::atan2(std::sin(x), std::cos(x));
        case TransformFamily::poly: {
            double v = 0.0;
            for (std::size_t k = p.coeffs.size(); k-- > 0;) v = v * x + p.coeffs[k];
            return v;
        }
        case TransformFamily::saturate:
            return std::min(std::max(x, p.x_min), p.x_max);
    }
    throw Error("unreachable family");
}

double transform_derivative(const TransformParams& p, double x, bool* at_boundary) {
    if (at_boundary) *at_boundary = false;
    switch (p.family) {
        case TransformFamily::exp_atten:
            return -p.alpha * std::exp(-p.alpha * x);
        case TransformFamily::log:
            if (!(x + p.delta > 0.0))
                throw DomainError("transform log: derivative outside domain");
            return 1.0 / (x + p.delta);
        case TransformFamily::wrap: {
            // branch points at x = pi + 2*pi*k; left derivative is 1
            const double b = std::remainder(x - M_PI, 2.0 * M_PI);
            if (b == 0.0 && at_boundary) *at_boundary = true;
            return 1.0;
        }
        case TransformFamily::poly: {
            double v = 0.0;
            for (std::size_t k = p.coeffs.size(); k-- > 1;)
                v = v * x + static_cast<double>(k) * p.coeffs[k];
            return v;
        }
        case TransformFamily::saturate:
            if (x == p.x_min) {
                if (at_boundary) *at_boundary = true;
                return 0.0; // from the left, below x_min the map is constant
            }
            if (x == p.x_max) {
                if (at_boundary) *at_boundary = true;
                return 1.0; // from the left, inside the pass band
            }
            return (x > p.x_min && x < p.x_max) ? 1.0 : 0.0;
    }
    throw Error("unreachable family");
}

double lipschitz_constant(const TransformParams& p, double R) {
    switch (p.family) {
        case TransformFamily::exp_atten:
            return p.alpha * std::exp(p.alpha * R);
        case TransformFamily::log:
            return 1.0 / p.delta;
        case TransformFamily::wrap:
            return 1.0;
        case TransformFamily::poly: {
            double L = 0.0;
            for (std::size_t k = 1; k < p.coeffs.size(); ++k)
                L += static_cast<double>(k) * std::fabs(p.coeffs[k]) * std::pow(R, double(k - 1));
            return L;
        }
        case TransformFamily::saturate:
            return 1.0;
    }
    throw Error("unreachable family");
}

TypeInfo infer_transform(const TransformParams&, const TypeInfo& in) { return in; }

Field fwd_transform(const TransformParams& p, const Field& x) {
    Field out(x.type());
    const bool cx = x.dtype() == DType::complex128;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (cx) {
            // complex fields: the scalar family acts on re and im independently
            out[i] = {transform_scalar(p, x[i].real()), transform_scalar(p, x[i].imag())};
        } else {
            out[i] = transform_scalar(p, x[i].real());
        }
    }
    return out;
}

PrimitiveNode linearize_transform(const PrimitiveNode& node, const Field& x_op) {
    const auto& p = node.as<TransformParams>();
    const bool cx = x_op.dtype() == DType::complex128;
    LinearizedParams lp;
    TypeInfo coef_t = x_op.type();
    coef_t.units = "gain";
    Field c(coef_t);
    bool warn = false;
    for (std::size_t i = 0; i < x_op.size(); ++i) {
        bool b1 = false, b2 = false;
        const double ca = transform_derivative(p, x_op[i].real(), &b1);
        const double cb = cx ? transform_derivative(p, x_op[i].imag(), &b2) : 0.0;
        c[i] = {ca, cb};
        warn = warn || b1 || b2;
    }
    if (cx) {
        lp.mode = LinMode::partsdiag;
        c.set_dtype(DType::complex128);
    } else {
        lp.mode = LinMode::cdiag;
        c.set_dtype(DType::real64);
    }
    lp.coef = std::move(c);
    PrimitiveNode out = make_node(node.id, Kind::linearized, lp, x_op.type());
    out.warn_subgradient = warn;
    return out;
}

// ---------------------------------------------------------------------------
// Linearized pointwise node
// ---------------------------------------------------------------------------

TypeInfo infer_linearized(const LinearizedParams& p, const TypeInfo& in) {
    if (p.coef.type().edge_type().shape != in.edge_type().shape)
        throw TypeError("linearized node: coefficient shape mismatch");
    TypeInfo out = in;
    if (p.mode == LinMode::repart) out.dtype = DType::real64;
    return out;
}

Field fwd_linearized(const LinearizedParams& p, const Field& x) {
    TypeInfo out_t = infer_linearized(p, x.type());
    Field out(out_t);
    switch (p.mode) {
        case LinMode::cdiag:
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = p.coef[i] * x[i];
            break;
        case LinMode::repart:
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = (p.coef[i] * x[i]).real();
            break;
        case LinMode::partsdiag:
            for (std::size_t i = 0; i < x.size(); ++i)
                out[i] = {p.coef[i].real() * x[i].real(), p.coef[i].imag() * x[i].imag()};
            break;
    }
    return out;
}

Field adj_linearized(const LinearizedParams& p, const Field& y) {
    TypeInfo in_t = y.type();
    switch (p.mode) {
        case LinMode::cdiag: {
            Field out(in_t);
            for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::conj(p.coef[i]) * y[i];
            return out;
        }
        case LinMode::repart: {
            in_t.dtype = DType::complex128;
            Field out(in_t);
            for (std::size_t i = 0; i < y.size(); ++i)
                out[i] = std::conj(p.coef[i]) * y[i].real();
            return out;
        }
        case LinMode::partsdiag: {
            Field out(in_t);
            for (std::size_t i = 0; i < y.size(); ++i)
                out[i] = {p.coef[i].real() * y[i].real(), p.coef[i].imag() * y[i].imag()};
            return out;
        }
    }
    throw Error("unreachable mode");
}

} // namespace opg
