#ifndef OPGRAPH_EXTENSION_HPP
#define OPGRAPH_EXTENSION_HPP

#include <limits>

#include "opgraph/metrics.hpp"

namespace opg {

struct SearchBudget {
    std::size_t max_nodes = 4;
    std::vector<Kind> allowed_kinds; // non-empty
    std::size_t restarts = 1;        // extra seeded restarts for scalar fits
    std::size_t eval_cap = 60000;    // objective evaluations across the search
    std::size_t n_max = 20, d_max = 10;
};

struct SearchResult {
    bool found = false;
    double min_e_img = std::numeric_limits<double>::infinity(); // upper bound on Eq.(7) minimum
    std::vector<std::string> best_chain;
    OperatorGraph best_graph;
    bool budget_exhausted = false;
    std::size_t topologies_tried = 0;
    std::size_t evals_used = 0;
};

/// Bounded search over chain-topology graphs: enumerate kind sequences up to
/// max_nodes (Detect terminal only, at most one free-form pattern/kernel node
/// per chain), fit parameters (closed-form least squares where the suffix is
/// linear or pointwise, seeded coordinate descent for scalars), and return the
/// best mean e_img found. The result is an upper bound on the true minimum.
SearchResult extension_search(const Apply& target, const TypeInfo& in_type,
                              const std::vector<Field>& objects, const SearchBudget& budget,
                              std::uint64_t seed, double delta_guard = 1e-8);

} // namespace opg

#endif
