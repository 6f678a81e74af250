#ifndef OPGRAPH_HARNESS_HPP
#define OPGRAPH_HARNESS_HPP

#include <optional>

#include "opgraph/extension.hpp"
#include "opgraph/registry.hpp"

namespace opg {

/// Canonical instance of each of the 11 primitives at size ~n per axis, used
/// by the adjoint suite (Detect/Transform carry operating points).
struct NamedOp {
    std::string letter;
    PrimitiveNode node;
    TypeInfo in;
};
std::vector<NamedOp> canonical_primitive_ops(std::size_t n, std::uint64_t seed);

/// Table S1 target for one primitive letter (desk-scale reference residuals).
double table_s1_value(const std::string& letter);

// -- adjoint suite -----------------------------------------------------------

struct AdjointRow {
    std::string letter;
    std::size_t size = 0;
    double max_rel_err = 0.0;
    double guard = 0.0; // Table S1 row x 100
    bool pass = false;
};

struct AdjointSuiteReport {
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::vector<AdjointRow> rows;
    bool all_pass = false;
    double seconds = 0.0;
};

AdjointSuiteReport run_adjoint_suite(std::uint64_t seed,
                                     const std::vector<std::size_t>& sizes = {16, 32, 64},
                                     std::size_t trials = 20);

// -- registry fidelity -------------------------------------------------------

struct FidelityRow {
    std::string name;
    std::string tier;
    double e_mean = 0.0, e_sup = 0.0, e_std = 0.0;
    std::optional<double> bound;
    bool has_oracle = false;
    bool stats_ok = false;
    std::size_t n_nodes = 0, depth = 0;
    bool pass = false;
};

struct RegistryReport {
    std::uint64_t seed = 0;
    std::vector<FidelityRow> rows;
    bool all_pass = false;
    double seconds = 0.0;
};

/// Build every template at default sizes, check stats, and where a loop
/// oracle exists compare compose against it under the S1 protocol.
RegistryReport run_validate_registry(const Registry& reg, std::uint64_t seed);

/// One modality only (sizes resolved against the record defaults).
FidelityRow validate_modality(const Registry& reg, const std::string& name, const Sizes& sizes,
                              std::uint64_t seed);

// -- operator norms ----------------------------------------------------------

struct NormRow {
    std::string chain;
    std::string stage; // kind letter + index
    double value = 0.0;
    std::string method; // power-iteration | gain | linearized
    bool within_bound = true;
};

struct NormsReport {
    double B = 4.0;
    std::vector<NormRow> stage_rows;     // Table S3 chains at default sizes
    std::vector<NormRow> reference_rows; // closed-form reference operators
    bool all_pass = false;
};

NormsReport run_norms(const Registry& reg, std::uint64_t seed);

// -- telescoping bound sweep ---------------------------------------------------

struct SweepTrial {
    std::string chain;
    std::size_t stage = 0;
    double eps = 0.0;
    double measured = 0.0;
    double bound = 0.0;
    bool ok = false;
};

struct SweepReport {
    std::uint64_t seed = 0;
    std::vector<SweepTrial> trials;
    std::size_t passes = 0;
    bool all_pass = false;
};

/// Seeded single-stage perturbations of the CASSI/MRI/CT chains; each trial
/// checks measured composed deviation against the sharp telescoping bound.
SweepReport run_perturbation_sweep(const Registry& reg, std::size_t trials, std::uint64_t seed);

// -- closure test --------------------------------------------------------------

struct ClosureRow {
    std::string name;
    double e_img = 0.0;
    bool via_search = false;
    bool new_primitive = false;
    std::vector<std::string> missing_kinds;
    std::vector<std::string> chain;
};

struct ClosureReport {
    std::vector<std::string> frozen;
    std::uint64_t seed = 0;
    double epsilon = 0.01;
    std::vector<ClosureRow> rows;
    bool flags_any = false;
};

ClosureReport run_closure_test(const Registry& reg, const std::vector<Kind>& frozen,
                               double epsilon, std::uint64_t seed,
                               const SearchBudget& search_budget);

// -- necessity witnesses ---------------------------------------------------------

struct ExtensionCheckReport {
    std::string target;
    std::string without;
    double min_e_img = 0.0;
    double template_e_img = 0.0; // with the full library template
    bool property_holds = false; // min > epsilon while template < epsilon
    bool budget_exhausted = false;
    std::vector<std::string> best_chain;
    std::size_t topologies = 0;
    double seconds = 0.0;
};

/// Sizes default to the registry record; witness runs may pass a smaller
/// instance (the necessity property is scale-free, the search cost is not).
ExtensionCheckReport run_extension_check(const Registry& reg, const std::string& target,
                                         Kind without, double epsilon, std::uint64_t seed,
                                         SearchBudget budget = {}, const Sizes& sizes = {});

/// Representable-target control: the search must recover a pure Modulate
/// oracle essentially exactly, guarding against vacuous necessity claims.
struct SabotageReport {
    double e_img = 0.0;
    bool pass = false;
};

SabotageReport run_sabotage_control(std::uint64_t seed);

/// Stage chain of a sequential template with nonlinear nodes linearized at
/// the intermediates generated by x_op.
StageChain template_stage_chain(const OperatorGraph& g, const Field& x_op);

/// Dense materialization parallelized over basis columns.
DenseMatrix materialize_parallel(const LinOp& op, std::size_t cap = 4096,
                                 std::size_t threads = 0);

} // namespace opg

#endif
