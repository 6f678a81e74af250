#ifndef OPGRAPH_ORACLES_HPP
#define OPGRAPH_ORACLES_HPP

#include <cstdint>
#include <map>
#include <string>

#include "opgraph/field.hpp"
#include "opgraph/node.hpp"

namespace opg {

/// Loop-based reference forward models, deliberately independent of the
/// operator/graph evaluation code. Parameters are re-drawn from the same
/// seeded stream as the registry builders (same child label, same draw
/// order), so a template and its oracle see identical physics.
bool has_oracle(const std::string& name);

/// All modality names with a reference oracle.
std::vector<std::string> oracle_names();

/// Sizes must be fully resolved (registry defaults merged in by the caller).
Field run_oracle(const std::string& name, const std::map<std::string, std::size_t>& sizes,
                 std::uint64_t seed, const Field& x);

/// Input field type expected by an oracle at the given sizes.
TypeInfo oracle_input_type(const std::string& name,
                           const std::map<std::string, std::size_t>& sizes);

/// Converged fixed point of the affine scattering model
/// u = M(R(P(u + u_inc))), solved by plain iteration with loop kernels.
Field born_fixed_point(const ScatterParams& scatter, const PropagateParams& prop,
                       const ModulateParams& mod, const Field& u_inc,
                       std::size_t max_iter = 400, double tol = 1e-15);

/// The L-level partial iterate z_L of the same model (z_0 = R(M(u_inc))),
/// computed with the loop kernels; the unrolled DAG must reproduce it.
Field born_partial(const ScatterParams& scatter, const PropagateParams& prop,
                   const ModulateParams& mod, const Field& u_inc, std::size_t levels);

} // namespace opg

#endif
