#ifndef OPGRAPH_PHANTOMS_HPP
#define OPGRAPH_PHANTOMS_HPP

#include <string>
#include <vector>

#include "opgraph/field.hpp"

namespace opg {

/// The ten built-in analytic test scenes, evaluated on the centered grid
/// covering [-1,1]^2 (pixel (iy,ix) at x = (2 ix - (nx-1))/nx and likewise
/// for y). Discontinuous scenes are antialiased by supersampling.
extern const std::vector<std::string> kPhantomNames;

/// 2D phantom with axes (y, x), real64 values in [0, ~1].
Field phantom2d(const std::string& name, std::size_t ny, std::size_t nx);

/// Analytic value of a named phantom at continuous (x, y) in [-1,1]^2,
/// without antialiasing (used by analytic oracles, e.g. disk chords).
double phantom_value(const std::string& name, double x, double y);

} // namespace opg

#endif
