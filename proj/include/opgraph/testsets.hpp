#ifndef OPGRAPH_TESTSETS_HPP
#define OPGRAPH_TESTSETS_HPP

#include <cstdint>
#include <vector>

#include "opgraph/field.hpp"

namespace opg {

/// S1 test distribution: the ten built-in phantoms adapted to the input type
/// (multi-band cubes mix distinct phantoms per band so they are not separable
/// across the spectral axis) followed by ten unit-norm Gaussian objects.
std::vector<Field> s1_test_objects(const TypeInfo& t, std::uint64_t seed);

/// Phantom number k (0-9) adapted to an arbitrary field type.
Field adapt_phantom(std::size_t k, const TypeInfo& t);

/// Harness utility: measurement noise added after composition (off by default
/// everywhere; forward maps themselves stay deterministic).
Field add_gaussian_noise(const Field& y, double sigma, std::uint64_t seed);

} // namespace opg

#endif
