#ifndef OPGRAPH_GRAPH_SERIALIZE_HPP
#define OPGRAPH_GRAPH_SERIALIZE_HPP

#include <string>

#include "opgraph/graph.hpp"

namespace opg {

/// YAML graph file (format opgraph/v1): source type, nodes (kind, input,
/// params), ordered edges, per-edge type annotations, merge policies.
/// Numbers are emitted with 17 significant digits and round-trip bit-exactly.
std::string serialize(const OperatorGraph& g);
void write_graph_file(const std::string& path, const OperatorGraph& g);

OperatorGraph deserialize(const std::string& text);
OperatorGraph read_graph_file(const std::string& path);

} // namespace opg

#endif
