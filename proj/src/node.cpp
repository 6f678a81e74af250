#include "opgraph/node.hpp"

#include <cmath>

namespace opg {

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::propagate: return "propagate";
        case Kind::modulate: return "modulate";
        case Kind::project: return "project";
        case Kind::encode: return "encode";
        case Kind::convolve: return "convolve";
        case Kind::accumulate: return "accumulate";
        case Kind::detect: return "detect";
        case Kind::sample: return "sample";
        case Kind::disperse: return "disperse";
        case Kind::scatter: return "scatter";
        case Kind::transform: return "transform";
        case Kind::linearized: return "linearized";
    }
    return "?";
}

const char* kind_letter(Kind k) {
    switch (k) {
        case Kind::propagate: return "P";
        case Kind::modulate: return "M";
        case Kind::project: return "Pi";
        case Kind::encode: return "F";
        case Kind::convolve: return "C";
        case Kind::accumulate: return "Sigma";
        case Kind::detect: return "D";
        case Kind::sample: return "S";
        case Kind::disperse: return "W";
        case Kind::scatter: return "R";
        case Kind::transform: return "Lambda";
        case Kind::linearized: return "J";
    }
    return "?";
}

Kind kind_from_name(const std::string& s) {
    if (s == "propagate" || s == "P") return Kind::propagate;
    if (s == "modulate" || s == "M") return Kind::modulate;
    if (s == "project" || s == "Pi") return Kind::project;
    if (s == "encode" || s == "F") return Kind::encode;
    if (s == "convolve" || s == "C") return Kind::convolve;
    if (s == "accumulate" || s == "Sigma") return Kind::accumulate;
    if (s == "detect" || s == "D") return Kind::detect;
    if (s == "sample" || s == "S") return Kind::sample;
    if (s == "disperse" || s == "W") return Kind::disperse;
    if (s == "scatter" || s == "R") return Kind::scatter;
    if (s == "transform" || s == "Lambda") return Kind::transform;
    throw ParseError("unknown primitive kind '" + s + "'");
}

void PropagateParams::validate() const {
    if (!(lambda > 0.0)) throw ParamError("propagate: lambda must be > 0");
    if (!(pitch_y > 0.0) || !(pitch_x > 0.0))
        throw ParamError("propagate: pitch must be > 0 on both spatial axes");
}

void ModulateParams::validate() const {
    if (m.size() == 0) throw ParamError("modulate: empty pattern");
}

void ProjectParams::validate() const {
    if (thetas.empty()) throw ParamError("project: thetas must be non-empty");
    if (n_det < 1) throw ParamError("project: n_det must be >= 1");
    if (!(det_spacing > 0.0) || !(pixel_size > 0.0) || !(step > 0.0))
        throw ParamError("project: spacings must be > 0");
}

void EncodeParams::validate() const {
    if (ktraj.empty()) throw ParamError("encode: ktraj must be non-empty");
}

void ConvolveParams::validate() const {
    if (h.size() == 0) throw ParamError("convolve: empty kernel");
    for (const auto& a : h.axes())
        if (a.extent % 2 == 0)
            throw ParamError("convolve: kernel extent along '" + a.name + "' must be odd");
}

void DetectParams::validate() const {
    if (!(g > 0.0)) throw ParamError("detect: gain must be > 0");
    if ((family == DetectFamily::logarithmic || family == DetectFamily::sigmoid) && !(x0 > 0.0))
        throw ParamError("detect: x0 must be > 0 for families 2 and 3");
}

void SampleParams::validate() const {
    if (omega.empty()) throw ParamError("sample: omega must be non-empty");
    for (std::size_t i = 1; i < omega.size(); ++i)
        if (omega[i] <= omega[i - 1])
            throw ParamError("sample: omega must be strictly increasing");
}

void ScatterParams::validate() const {
    if (n_out == 0 || n_in == 0 || kernel.size() != n_out * n_in)
        throw ParamError("scatter: kernel dimensions inconsistent");
    for (double v : kernel)
        if (!std::isfinite(v)) throw ParamError("scatter: kernel must be finite-valued");
    if (atten) {
        for (std::size_t i = 0; i < atten->size(); ++i) {
            const cplx v = (*atten)[i];
            if (v.imag() != 0.0 || v.real() < 0.0)
                throw ParamError("scatter: atten must be real and non-negative");
        }
    }
}

void TransformParams::validate() const {
    switch (family) {
        case TransformFamily::exp_atten:
            break;
        case TransformFamily::log:
            if (!(delta > 0.0)) throw ParamError("transform log: delta must be > 0");
            break;
        case TransformFamily::wrap:
            break;
        case TransformFamily::poly:
            if (coeffs.empty() || coeffs.size() > 6)
                throw ParamError("transform poly: degree must be <= 5");
            break;
        case TransformFamily::saturate:
            if (!(x_min <= x_max)) throw ParamError("transform saturate: need x_min <= x_max");
            break;
    }
}

PrimitiveNode make_node(int id, Kind kind, Params params, std::optional<TypeInfo> in_type) {
    PrimitiveNode n;
    n.id = id;
    n.kind = kind;
    n.params = std::move(params);
    n.in_type = std::move(in_type);
    std::visit(
        [](const auto& p) {
            if constexpr (requires { p.validate(); }) p.validate();
        },
        n.params);
    return n;
}

} // namespace opg
