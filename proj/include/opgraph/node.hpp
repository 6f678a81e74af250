#ifndef OPGRAPH_NODE_HPP
#define OPGRAPH_NODE_HPP

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opgraph/field.hpp"

namespace opg {

enum class Kind {
    propagate,
    modulate,
    project,
    encode,
    convolve,
    accumulate,
    detect,
    sample,
    disperse,
    scatter,
    transform,
    linearized, // internal: Jacobian of a Detect/Transform node at an operating point
};

/// Canonical kind names used in graph files and on the CLI.
const char* kind_name(Kind k);
Kind kind_from_name(const std::string& s); // accepts long names and P/M/Pi/F/C/Sigma/D/S/W/R/Lambda
/// Paper-letter for reports (P, M, Pi, F, C, Sigma, D, S, W, R, Lambda).
const char* kind_letter(Kind k);

// ---------------------------------------------------------------------------
// Parameter records
// ---------------------------------------------------------------------------

struct PropagateParams {
    double d = 0.0;      // propagation distance (may be negative)
    double lambda = 1.0; // wavelength, > 0
    double pitch_y = 1.0, pitch_x = 1.0;
    void validate() const;
};

struct ModulateParams {
    Field m; // pattern; axes align with the input by name, extra axes expand the output
    void validate() const;
};

struct ProjectParams {
    std::vector<double> thetas; // radians
    std::size_t n_det = 0;
    double det_spacing = 1.0; // detector pitch in pixel units
    double pixel_size = 1.0;  // physical size of one pixel (line-integral quadrature unit)
    double step = 0.5;        // ray sampling step in pixel units
    void validate() const;
};

struct EncodeParams {
    std::vector<std::array<double, 2>> ktraj; // (ky, kx) in cycles per field of view
    bool normalize = false;                   // scale by 1/sqrt(n); off by default
    void validate() const;
};

struct ConvolveParams {
    Field h; // kernel; odd extents along each convolved axis (matched to input by name)
    void validate() const;
};

struct AccumulateParams {
    std::string axis;
};

enum class DetectFamily {
    linear_field = 1,
    logarithmic = 2,
    sigmoid = 3,
    intensity_square = 4,
    coherent_field = 5,
};

struct DetectParams {
    DetectFamily family = DetectFamily::intensity_square;
    double g = 1.0;  // gain, > 0
    double x0 = 1.0; // offset (families 2, 3)
    double phi = 0.0; // phase (family 5)
    std::optional<Field> x_op; // linearization point
    void validate() const;
};

struct SampleParams {
    std::vector<std::size_t> omega; // strictly increasing flat indices
    void validate() const;
};

struct DisperseParams {
    double alpha = 0.0; // pixels per wavelength unit
    double a = 0.0;     // intercept, pixels
    std::string axis;   // spatial shift axis
    std::string spectral_axis = "lambda";
    std::vector<double> lambdas; // per-channel wavelengths
};

struct ScatterParams {
    std::size_t n_out = 0, n_in = 0;
    std::vector<double> kernel; // row-major n_out x n_in, acts along `axis`
    std::string axis;           // energy/angle axis; empty = last axis
    std::optional<Field> atten; // optional non-negative pointwise attenuation
    double& at(std::size_t o, std::size_t i) { return kernel[o * n_in + i]; }
    double at(std::size_t o, std::size_t i) const { return kernel[o * n_in + i]; }
    void validate() const;
};

enum class TransformFamily {
    exp_atten = 1,
    log = 2,
    wrap = 3,
    poly = 4,
    saturate = 5,
};

struct TransformParams {
    TransformFamily family = TransformFamily::poly;
    double alpha = 1.0;          // exp_atten
    double delta = 1e-8;         // log, > 0
    std::vector<double> coeffs;  // poly a_0..a_d, d <= 5
    double x_min = 0.0, x_max = 1.0; // saturate
    std::optional<Field> x_op;
    void validate() const;
};

enum class LinMode {
    cdiag,     // x -> c .* x         (complex-linear)
    repart,    // x -> Re(w .* x)     (complex -> real, R-linear)
    partsdiag, // x -> ca.*Re(x) + i cb.*Im(x)  (R-linear, ca+i*cb packed in coef)
};

struct LinearizedParams {
    LinMode mode = LinMode::cdiag;
    Field coef;
};

using Params = std::variant<PropagateParams, ModulateParams, ProjectParams, EncodeParams,
                            ConvolveParams, AccumulateParams, DetectParams, SampleParams,
                            DisperseParams, ScatterParams, TransformParams, LinearizedParams>;

/// One operator node. Immutable after construction; forward/adjoint are pure.
struct PrimitiveNode {
    int id = 0;
    Kind kind = Kind::modulate;
    Params params;
    std::optional<TypeInfo> in_type; // declared input type, set by graph builders
    bool warn_subgradient = false;   // set by linearize at wrap/saturate boundaries

    template <class T>
    const T& as() const {
        return std::get<T>(params);
    }
    template <class T>
    T& as() {
        return std::get<T>(params);
    }
};

PrimitiveNode make_node(int id, Kind kind, Params params,
                        std::optional<TypeInfo> in_type = std::nullopt);

} // namespace opg

#endif
