#ifndef OPGRAPH_PATTERNS_HPP
#define OPGRAPH_PATTERNS_HPP

#include <array>
#include <vector>

#include "opgraph/field.hpp"
#include "opgraph/node.hpp"
#include "opgraph/rng.hpp"

namespace opg {

/// Seeded parameter generators shared by the registry builders and the loop
/// oracles. Both sides draw the same patterns from the same child stream, so
/// a template and its oracle see identical physics parameters while sharing
/// no evaluation code.
namespace patterns {

TypeInfo plane(std::size_t ny, std::size_t nx, DType d = DType::real64);

Field binary_mask(std::size_t ny, std::size_t nx, Rng& rng);
Field smooth_pattern(std::size_t ny, std::size_t nx, Rng& rng);
Field complex_map(std::size_t ny, std::size_t nx, Rng& rng);
Field random_psf(std::size_t k, Rng& rng);
Field gaussian_psf(std::size_t k, double sigma);

/// Banded energy-shift kernel with unit spectral-norm bound.
ScatterParams banded_kernel(std::size_t n, int shift, double width, Rng& rng);
/// Direction-mixing kernel with spectral norm about c.
ScatterParams direction_kernel(std::size_t n, double c, Rng& rng);

std::vector<std::size_t> random_subset(std::size_t n, std::size_t m, Rng& rng);

std::size_t odd_det_count(std::size_t n);
ProjectParams radon_params(std::size_t n, std::size_t n_angles);

} // namespace patterns

/// Klein-Nishina differential cross-section kernel over matched incident
/// energy and exit-angle bins, normalized to unit spectral norm.
ScatterParams klein_nishina_kernel(std::size_t n_bins, double e_min_kev, double e_max_kev);

/// Full centered Cartesian k-space lattice for an ny x nx grid.
std::vector<std::array<double, 2>> full_grid_ktraj(std::size_t ny, std::size_t nx);

} // namespace opg

#endif
