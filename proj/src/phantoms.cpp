#include "opgraph/phantoms.hpp"

#include <cmath>

namespace opg {

const std::vector<std::string> kPhantomNames = {
    "shepp_logan", "disk",          "ring",         "checkerboard",  "gaussian_blobs",
    "bars_h",      "bars_v",        "radial_gradient", "sinusoid_grid", "point_grid"};

namespace {

struct Ellipse {
    double value, a, b, x0, y0, phi_deg;
};

// Kak & Slaney Shepp-Logan ellipse set (additive intensities).
const Ellipse kSheppLogan[] = {
    {2.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.98, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.02, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.02, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.01, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.01, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.01, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.01, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.01, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.01, 0.0230, 0.0460, 0.06, -0.605, 0.0},
};

double shepp_logan_at(double x, double y) {
    double v = 0.0;
    for (const auto& e : kSheppLogan) {
        const double ph = e.phi_deg * M_PI / 180.0;
        const double c = std::cos(ph), s = std::sin(ph);
        const double xr = c * (x - e.x0) + s * (y - e.y0);
        const double yr = -s * (x - e.x0) + c * (y - e.y0);
        if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) v += e.value;
    }
    return v / 2.0; // scale into [0, 1]
}

bool needs_antialias(const std::string& name) {
    return name == "shepp_logan" || name == "disk" || name == "ring" ||
           name == "checkerboard" || name == "bars_h" || name == "bars_v" ||
           name == "point_grid";
}

} // namespace

double phantom_value(const std::string& name, double x, double y) {
    const double r2 = x * x + y * y;
    if (name == "shepp_logan") return shepp_logan_at(x, y);
    if (name == "disk") return r2 <= 0.36 ? 1.0 : 0.0; // radius 0.6
    if (name == "ring") return (r2 >= 0.25 && r2 <= 0.49) ? 1.0 : 0.0;
    if (name == "checkerboard") {
        const int bx = static_cast<int>(std::floor((x + 1.0) * 4.0));
        const int by = static_cast<int>(std::floor((y + 1.0) * 4.0));
        return ((bx + by) & 1) ? 1.0 : 0.0;
    }
    if (name == "gaussian_blobs") {
        static const double cx[] = {-0.4, 0.35, 0.0, -0.25, 0.45};
        static const double cy[] = {-0.35, -0.4, 0.1, 0.45, 0.4};
        static const double sg[] = {0.18, 0.12, 0.25, 0.10, 0.15};
        static const double am[] = {1.0, 0.8, 0.6, 0.9, 0.7};
        double v = 0.0;
        for (int i = 0; i < 5; ++i) {
            const double dx = x - cx[i], dy = y - cy[i];
            v += am[i] * std::exp(-(dx * dx + dy * dy) / (2.0 * sg[i] * sg[i]));
        }
        return v;
    }
    if (name == "bars_h") {
        if (std::fabs(x) > 0.85 || std::fabs(y) > 0.85) return 0.0;
        const int band = static_cast<int>(std::floor((y + 0.85) / 0.2125));
        return (band & 1) ? 1.0 : 0.0;
    }
    if (name == "bars_v") {
        if (std::fabs(x) > 0.85 || std::fabs(y) > 0.85) return 0.0;
        const int band = static_cast<int>(std::floor((x + 0.85) / 0.2125));
        return (band & 1) ? 1.0 : 0.0;
    }
    if (name == "radial_gradient") {
        const double r = std::sqrt(r2);
        return r < 1.0 ? 1.0 - r : 0.0;
    }
    if (name == "sinusoid_grid")
        return 0.5 + 0.5 * std::sin(2.0 * M_PI * 1.5 * x) * std::sin(2.0 * M_PI * 2.5 * y);
    if (name == "point_grid") {
        // 4x4 lattice of small dots
        double best = 2.0;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                const double px = -0.6 + 0.4 * i, py = -0.6 + 0.4 * j;
                const double dx = x - px, dy = y - py;
                best = std::min(best, dx * dx + dy * dy);
            }
        }
        return best <= 0.0036 ? 1.0 : 0.0; // dot radius 0.06
    }
    throw Error("unknown phantom '" + name + "'");
}

Field phantom2d(const std::string& name, std::size_t ny, std::size_t nx) {
    TypeInfo t;
    t.axes = {{"y", ny}, {"x", nx}};
    t.dtype = DType::real64;
    t.units = "au";
    Field f(t);
    const int ss = needs_antialias(name) ? 8 : 1;
    const double wy = 2.0 / static_cast<double>(ny), wx = 2.0 / static_cast<double>(nx);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            double acc = 0.0;
            for (int sy = 0; sy < ss; ++sy) {
                for (int sx = 0; sx < ss; ++sx) {
                    const double fy = (static_cast<double>(iy) + (sy + 0.5) / ss) * wy - 1.0;
                    const double fx = (static_cast<double>(ix) + (sx + 0.5) / ss) * wx - 1.0;
                    acc += phantom_value(name, fx, fy);
                }
            }
            f[iy * nx + ix] = acc / (ss * ss);
        }
    }
    return f;
}

} // namespace opg
