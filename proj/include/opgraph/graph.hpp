#ifndef OPGRAPH_GRAPH_HPP
#define OPGRAPH_GRAPH_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opgraph/ops.hpp"

namespace opg {

/// Reserved id of the input terminal. It is not an operator node and is not
/// counted in the graph stats.
constexpr int kSourceId = 0;

enum class MergePolicy { sum, concat };

struct MergeSpec {
    MergePolicy policy = MergePolicy::sum;
    std::string concat_axis; // for concat
};

struct Violation {
    std::string rule;   // acyclicity | terminal-uniqueness | type-mismatch | unknown-kind | ...
    std::string detail;
};

/// Validated typed DAG with a unique source terminal and a unique sink.
struct OperatorGraph {
    TypeInfo source_type;
    std::map<int, PrimitiveNode> nodes;       // id -> node (ids > 0)
    std::vector<std::pair<int, int>> edges;   // ordered (src, dst)
    std::map<std::pair<int, int>, EdgeType> edge_types;
    std::map<int, MergeSpec> merge_policy;    // per fan-in node

    /// Append a node; the node's declared in_type must be set by the caller
    /// (chain/builder helpers do this via type inference).
    void add_node(PrimitiveNode n) { nodes.emplace(n.id, std::move(n)); }
    void add_edge(int src, int dst) { edges.emplace_back(src, dst); }
};

struct GraphStats {
    std::size_t n_nodes = 0;
    std::size_t depth = 0;
};

struct GraphConfig {
    std::size_t n_max = 20;
    std::size_t d_max = 10;
};

/// Well-formedness check; empty result iff the graph is well-formed.
std::vector<Violation> validate(const OperatorGraph& g);

/// Topological order with ties broken by ascending node id (excludes the
/// source terminal). Throws CompositionError on a cycle.
std::vector<int> topo_order(const OperatorGraph& g);

/// Evaluate the graph on x (fan-out duplicates, fan-in merges per policy).
Field compose(const OperatorGraph& g, const Field& x);

/// Adjoint of the graph linearized at x_op, applied to y.
Field compose_adjoint(const OperatorGraph& g, const Field& y, const Field& x_op);

/// Matrix-free operator for an all-linear graph.
LinOp graph_linop(const OperatorGraph& g);

/// Matrix-free Jacobian of the graph at x_op (nonlinear nodes linearized at
/// the intermediates produced by x_op).
LinOp graph_linearized(const OperatorGraph& g, const Field& x_op);

/// Node count (source excluded) and operator-node length of the longest
/// source-to-sink path.
GraphStats stats(const OperatorGraph& g);

/// Output type at the sink.
TypeInfo sink_type(const OperatorGraph& g);
int sink_id(const OperatorGraph& g);

/// Build a sequential chain source -> nodes[0] -> ... -> nodes.back(), wiring
/// edges, inferring per-node input types and edge annotations. Node ids are
/// assigned 1..K when zero.
OperatorGraph chain_graph(const TypeInfo& source, std::vector<PrimitiveNode> chain);

/// Concatenate fields along a named axis (used by concat merges).
Field concat_fields(const std::vector<Field>& parts, const std::string& axis);

} // namespace opg

#endif
