#include "opgraph/graph.hpp"

#include <algorithm>
#include <set>

#include "op_detail.hpp"

namespace opg {

namespace {

std::map<int, std::vector<int>> predecessors(const OperatorGraph& g) {
    std::map<int, std::vector<int>> pred;
    for (const auto& [id, n] : g.nodes) pred[id]; // ensure every node has an entry
    for (const auto& [s, d] : g.edges)
        if (d != kSourceId) pred[d].push_back(s);
    for (auto& [id, v] : pred) std::sort(v.begin(), v.end());
    return pred;
}

std::map<int, std::vector<int>> successors(const OperatorGraph& g) {
    std::map<int, std::vector<int>> succ;
    succ[kSourceId];
    for (const auto& [id, n] : g.nodes) succ[id];
    for (const auto& [s, d] : g.edges) succ[s].push_back(d);
    for (auto& [id, v] : succ) std::sort(v.begin(), v.end());
    return succ;
}

/// Merged input type of a node given its predecessors' output types.
TypeInfo merged_input_type(const OperatorGraph& g, int id, const std::vector<int>& preds,
                           const std::map<int, TypeInfo>& out_types,
                           std::vector<Violation>* viol) {
    auto type_of = [&](int u) -> const TypeInfo& {
        return u == kSourceId ? g.source_type : out_types.at(u);
    };
    if (preds.size() == 1) return type_of(preds[0]);
    const auto it = g.merge_policy.find(id);
    if (it == g.merge_policy.end()) {
        if (viol)
            viol->push_back({"merge-policy", "fan-in node " + std::to_string(id) +
                                                 " has no merge policy"});
        return type_of(preds[0]);
    }
    if (it->second.policy == MergePolicy::sum) {
        const TypeInfo& first = type_of(preds[0]);
        for (std::size_t i = 1; i < preds.size(); ++i) {
            if (!(type_of(preds[i]) == first) && viol)
                viol->push_back({"type-mismatch",
                                 "sum merge at node " + std::to_string(id) +
                                     " combines " + first.str() + " with " +
                                     type_of(preds[i]).str()});
        }
        return first;
    }
    // concat along a named axis, in ascending child-id order
    const std::string& ax = it->second.concat_axis;
    TypeInfo out = type_of(preds[0]);
    const int k = out.axis_index(ax);
    if (k < 0) {
        if (viol)
            viol->push_back({"type-mismatch", "concat merge at node " + std::to_string(id) +
                                                  " has no axis '" + ax + "'"});
        return out;
    }
    for (std::size_t i = 1; i < preds.size(); ++i) {
        const TypeInfo& t = type_of(preds[i]);
        bool compatible = t.dtype == out.dtype && t.units == out.units &&
                          t.rank() == out.rank();
        if (compatible) {
            for (std::size_t a = 0; a < t.rank(); ++a) {
                if (a == static_cast<std::size_t>(k)) continue;
                if (!(t.axes[a] == out.axes[a])) compatible = false;
            }
        }
        if (!compatible) {
            if (viol)
                viol->push_back({"type-mismatch", "concat merge at node " + std::to_string(id) +
                                                      " combines incompatible types"});
            continue;
        }
        out.axes[k].extent += t.axes[k].extent;
    }
    return out;
}

} // namespace

std::vector<int> topo_order(const OperatorGraph& g) {
    std::map<int, std::size_t> in_deg;
    for (const auto& [id, n] : g.nodes) in_deg[id] = 0;
    for (const auto& [s, d] : g.edges) // the source terminal is always available
        if (s != kSourceId && d != kSourceId && g.nodes.count(d)) ++in_deg[d];
    std::set<int> ready;
    for (const auto& [id, deg] : in_deg)
        if (deg == 0) ready.insert(id);
    auto succ = successors(g);
    // the source terminal feeds its successors first
    std::vector<int> order;
    while (!ready.empty()) {
        const int v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(v);
        for (int w : succ[v]) {
            if (w == kSourceId || !g.nodes.count(w)) continue;
            if (--in_deg[w] == 0) ready.insert(w);
        }
    }
    if (order.size() != g.nodes.size())
        throw CompositionError("graph contains a cycle");
    return order;
}

std::vector<Violation> validate(const OperatorGraph& g) {
    std::vector<Violation> viol;

    // (iii) every node kind within the 11-primitive library
    for (const auto& [id, n] : g.nodes) {
        if (n.kind == Kind::linearized)
            viol.push_back({"unknown-kind", "node " + std::to_string(id) +
                                                " uses internal kind 'linearized'"});
        if (!n.in_type)
            viol.push_back({"type-mismatch",
                            "node " + std::to_string(id) + " has no declared input type"});
    }

    // edge endpoints
    for (const auto& [s, d] : g.edges) {
        if (s != kSourceId && !g.nodes.count(s))
            viol.push_back({"terminal-uniqueness", "edge from unknown node " + std::to_string(s)});
        if (d == kSourceId)
            viol.push_back({"terminal-uniqueness", "source terminal has an incoming edge"});
        else if (!g.nodes.count(d))
            viol.push_back({"terminal-uniqueness", "edge to unknown node " + std::to_string(d)});
    }
    if (!viol.empty()) return viol; // structure too broken for deeper checks

    // (i) acyclicity and terminal uniqueness
    std::vector<int> order;
    try {
        order = topo_order(g);
    } catch (const CompositionError&) {
        viol.push_back({"acyclicity", "graph contains a cycle"});
        return viol;
    }
    auto succ = successors(g);
    std::vector<int> sinks;
    for (const auto& [id, n] : g.nodes)
        if (succ[id].empty()) sinks.push_back(id);
    if (sinks.size() != 1)
        viol.push_back({"terminal-uniqueness",
                        "graph has " + std::to_string(sinks.size()) + " sinks, need exactly 1"});
    auto pred = predecessors(g);
    for (const auto& [id, n] : g.nodes)
        if (pred[id].empty())
            viol.push_back({"terminal-uniqueness",
                            "node " + std::to_string(id) + " is not connected to the source"});
    if (succ[kSourceId].empty())
        viol.push_back({"terminal-uniqueness", "source terminal has no outgoing edge"});

    // (ii) edge type agreement, walking in topological order
    std::map<int, TypeInfo> out_types;
    for (int id : order) {
        const PrimitiveNode& n = g.nodes.at(id);
        if (!n.in_type) continue;
        const TypeInfo merged = merged_input_type(g, id, pred[id], out_types, &viol);
        if (!(merged.edge_type() == n.in_type->edge_type()))
            viol.push_back({"type-mismatch",
                            "node " + std::to_string(id) + " declares input " +
                                n.in_type->edge_type().str() + " but receives " +
                                merged.edge_type().str()});
        TypeInfo out;
        try {
            out = infer_output_type(n, *n.in_type);
        } catch (const Error& e) {
            viol.push_back({"type-mismatch",
                            "node " + std::to_string(id) + ": " + e.what()});
            out = *n.in_type;
        }
        out_types[id] = out;
    }
    for (const auto& [edge, et] : g.edge_types) {
        const auto [s, d] = edge;
        const TypeInfo& prod = (s == kSourceId) ? g.source_type : out_types.at(s);
        if (!(prod.edge_type() == et))
            viol.push_back({"type-mismatch",
                            "edge " + std::to_string(s) + "->" + std::to_string(d) +
                                " annotated " + et.str() + " but producer emits " +
                                prod.edge_type().str()});
    }
    return viol;
}

Field concat_fields(const std::vector<Field>& parts, const std::string& axis) {
    if (parts.empty()) throw CompositionError("concat of zero fields");
    TypeInfo out_t = parts[0].type();
    const int k = out_t.axis_index(axis);
    if (k < 0) throw CompositionError("concat axis '" + axis + "' missing");
    std::size_t total = 0;
    for (const auto& f : parts) total += f.axes()[k].extent;
    out_t.axes[k].extent = total;
    Field out(out_t);
    const auto sp_out = detail::split_axis(out_t, static_cast<std::size_t>(k));
    std::size_t base = 0;
    for (const auto& f : parts) {
        const auto sp = detail::split_axis(f.type(), static_cast<std::size_t>(k));
        if (sp.outer != sp_out.outer || sp.inner != sp_out.inner)
            throw CompositionError("concat shape mismatch on axis '" + axis + "'");
        for (std::size_t o = 0; o < sp.outer; ++o)
            for (std::size_t j = 0; j < sp.n; ++j)
                for (std::size_t i = 0; i < sp.inner; ++i)
                    out[(o * sp_out.n + base + j) * sp.inner + i] =
                        f[(o * sp.n + j) * sp.inner + i];
        base += sp.n;
    }
    return out;
}

namespace {

/// Split a cotangent across concat inputs, ascending child order.
std::vector<Field> split_concat(const Field& y, const std::vector<TypeInfo>& part_types,
                                const std::string& axis) {
    std::vector<Field> parts;
    const int k = y.axis_index(axis);
    if (k < 0) throw CompositionError("concat adjoint: axis '" + axis + "' missing");
    const auto sp_out = detail::split_axis(y.type(), static_cast<std::size_t>(k));
    std::size_t base = 0;
    for (const auto& t : part_types) {
        TypeInfo pt = t;
        pt.dtype = y.dtype();
        Field f(pt);
        const auto sp = detail::split_axis(pt, static_cast<std::size_t>(k));
        for (std::size_t o = 0; o < sp.outer; ++o)
            for (std::size_t j = 0; j < sp.n; ++j)
                for (std::size_t i = 0; i < sp.inner; ++i)
                    f[(o * sp.n + j) * sp.inner + i] =
                        y[(o * sp_out.n + base + j) * sp.inner + i];
        base += sp.n;
        parts.push_back(std::move(f));
    }
    return parts;
}

struct EvalContext {
    std::vector<int> order;
    std::map<int, std::vector<int>> pred;
    int sink = -1;
};

EvalContext make_context(const OperatorGraph& g) {
    auto viol = validate(g);
    if (!viol.empty())
        throw CompositionError("graph is not well-formed: " + viol.front().rule + " (" +
                               viol.front().detail + ")");
    EvalContext ctx;
    ctx.order = topo_order(g);
    ctx.pred = predecessors(g);
    auto succ = successors(g);
    for (const auto& [id, n] : g.nodes)
        if (succ[id].empty()) ctx.sink = id;
    return ctx;
}

Field merge_inputs(const OperatorGraph& g, int id, const std::vector<int>& preds,
                   const std::map<int, Field>& values, const Field& x) {
    auto value_of = [&](int u) -> const Field& {
        return u == kSourceId ? x : values.at(u);
    };
    if (preds.size() == 1) return value_of(preds[0]);
    const MergeSpec& ms = g.merge_policy.at(id);
    if (ms.policy == MergePolicy::sum) {
        Field acc = value_of(preds[0]);
        for (std::size_t i = 1; i < preds.size(); ++i) {
            const Field& f = value_of(preds[i]);
            if (!(f.type() == acc.type()))
                throw CompositionError("sum merge at node " + std::to_string(id) +
                                       " combines mismatched fields");
            acc += f;
        }
        return acc;
    }
    std::vector<Field> parts;
    for (int u : preds) parts.push_back(value_of(u));
    return concat_fields(parts, ms.concat_axis);
}

/// Forward pass storing each node's post-merge input.
std::map<int, Field> forward_pass(const OperatorGraph& g, const EvalContext& ctx, const Field& x,
                                  std::map<int, Field>* inputs) {
    if (!(x.type() == g.source_type))
        throw TypeError("compose: input " + x.type().str() + " does not match source " +
                        g.source_type.str());
    std::map<int, Field> values;
    for (int id : ctx.order) {
        Field in = merge_inputs(g, id, ctx.pred.at(id), values, x);
        if (inputs) (*inputs)[id] = in;
        values[id] = forward(g.nodes.at(id), in);
    }
    return values;
}

} // namespace

Field compose(const OperatorGraph& g, const Field& x) {
    EvalContext ctx = make_context(g);
    auto values = forward_pass(g, ctx, x, nullptr);
    return values.at(ctx.sink);
}

namespace {

/// Shared reverse sweep: nodes must already be linear (or pre-linearized in
/// `lin_nodes`); stored_inputs supplies each node's forward input type.
Field reverse_pass(const OperatorGraph& g, const EvalContext& ctx,
                   const std::map<int, PrimitiveNode>& lin_nodes, const Field& y) {
    std::map<int, Field> ct; // cotangent at each node's output
    ct[ctx.sink] = y;
    bool have_source_ct = false;
    Field source_ct;

    for (auto it = ctx.order.rbegin(); it != ctx.order.rend(); ++it) {
        const int id = *it;
        const auto f = ct.find(id);
        if (f == ct.end()) continue;
        const PrimitiveNode& n = lin_nodes.at(id);
        Field gin = adjoint(n, f->second);
        const auto& preds = ctx.pred.at(id);
        auto push = [&](int u, Field v) {
            if (u == kSourceId) {
                if (!have_source_ct) {
                    source_ct = std::move(v);
                    have_source_ct = true;
                } else {
                    source_ct += v;
                }
            } else {
                auto c = ct.find(u);
                if (c == ct.end())
                    ct.emplace(u, std::move(v));
                else
                    c->second += v;
            }
        };
        if (preds.size() == 1) {
            push(preds[0], std::move(gin));
        } else {
            const MergeSpec& ms = g.merge_policy.at(id);
            if (ms.policy == MergePolicy::sum) {
                for (int u : preds) push(u, gin); // sum merge adjoints to duplication
            } else {
                std::vector<TypeInfo> part_types;
                for (int u : preds)
                    part_types.push_back(u == kSourceId ? g.source_type
                                                        : g.nodes.at(u).in_type
                                                              ? infer_output_type(
                                                                    g.nodes.at(u),
                                                                    *g.nodes.at(u).in_type)
                                                              : g.source_type);
                auto parts = split_concat(gin, part_types, ms.concat_axis);
                for (std::size_t i = 0; i < preds.size(); ++i)
                    push(preds[i], std::move(parts[i]));
            }
        }
    }
    if (!have_source_ct) throw CompositionError("adjoint did not reach the source terminal");
    return source_ct;
}

std::map<int, PrimitiveNode> linearize_nodes(const OperatorGraph& g, const EvalContext& ctx,
                                             const Field& x_op) {
    std::map<int, Field> inputs;
    forward_pass(g, ctx, x_op, &inputs);
    std::map<int, PrimitiveNode> lin;
    for (const auto& [id, n] : g.nodes) {
        if (is_linear(n))
            lin.emplace(id, n);
        else
            lin.emplace(id, linearize(n, inputs.at(id)));
    }
    return lin;
}

} // namespace

Field compose_adjoint(const OperatorGraph& g, const Field& y, const Field& x_op) {
    EvalContext ctx = make_context(g);
    auto lin = linearize_nodes(g, ctx, x_op);
    return reverse_pass(g, ctx, lin, y);
}

LinOp graph_linop(const OperatorGraph& g) {
    EvalContext ctx = make_context(g);
    bool clin = true;
    for (const auto& [id, n] : g.nodes) {
        if (!is_linear(n))
            throw LinearizationError("graph_linop: node " + std::to_string(id) +
                                     " is nonlinear; use graph_linearized");
        clin = clin && is_complex_linear(n);
    }
    LinOp op;
    op.in_type = g.source_type;
    op.out_type = sink_type(g);
    op.c_linear = clin;
    OperatorGraph gc = g;
    op.fwd = [gc](const Field& x) { return compose(gc, x); };
    std::map<int, PrimitiveNode> lin;
    for (const auto& [id, n] : g.nodes) lin.emplace(id, n);
    op.adj = [gc, ctx, lin](const Field& y) { return reverse_pass(gc, ctx, lin, y); };
    return op;
}

LinOp graph_linearized(const OperatorGraph& g, const Field& x_op) {
    EvalContext ctx = make_context(g);
    auto lin = linearize_nodes(g, ctx, x_op);
    bool clin = true;
    for (const auto& [id, n] : lin) clin = clin && is_complex_linear(n);

    OperatorGraph gl = g;
    gl.nodes = lin; // evaluate the Jacobian chain in place of the original nodes
    LinOp op;
    op.in_type = g.source_type;
    // infer the sink type directly (internal linearized kinds bypass validate)
    {
        std::map<int, TypeInfo> out_types;
        for (int id : ctx.order)
            out_types[id] = infer_output_type(gl.nodes.at(id), *gl.nodes.at(id).in_type);
        op.out_type = out_types.at(ctx.sink);
    }
    op.c_linear = clin;
    op.fwd = [gl, ctx](const Field& x) {
        std::map<int, Field> values;
        for (int id : ctx.order) {
            Field in = merge_inputs(gl, id, ctx.pred.at(id), values, x);
            values[id] = forward(gl.nodes.at(id), in);
        }
        return values.at(ctx.sink);
    };
    op.adj = [gl, ctx](const Field& y) { return reverse_pass(gl, ctx, gl.nodes, y); };
    return op;
}

GraphStats stats(const OperatorGraph& g) {
    GraphStats s;
    s.n_nodes = g.nodes.size();
    auto order = topo_order(g);
    auto pred = predecessors(g);
    std::map<int, std::size_t> depth;
    std::size_t best = 0;
    for (int id : order) {
        std::size_t d = 0;
        for (int u : pred[id])
            if (u != kSourceId) d = std::max(d, depth[u]);
        depth[id] = d + 1;
        best = std::max(best, depth[id]);
    }
    s.depth = best;
    return s;
}

int sink_id(const OperatorGraph& g) {
    auto succ = successors(g);
    int sink = -1;
    for (const auto& [id, n] : g.nodes)
        if (succ[id].empty()) sink = id;
    return sink;
}

TypeInfo sink_type(const OperatorGraph& g) {
    EvalContext ctx = make_context(g);
    std::map<int, TypeInfo> out_types;
    auto pred = predecessors(g);
    for (int id : ctx.order) {
        const PrimitiveNode& n = g.nodes.at(id);
        out_types[id] = infer_output_type(n, *n.in_type);
    }
    return out_types.at(ctx.sink);
}

OperatorGraph chain_graph(const TypeInfo& source, std::vector<PrimitiveNode> chain) {
    OperatorGraph g;
    g.source_type = source;
    TypeInfo cur = source;
    int prev = kSourceId;
    int next_id = 1;
    for (auto& n : chain) {
        if (n.id == 0) n.id = next_id;
        next_id = std::max(next_id, n.id) + 1;
        n.in_type = cur;
        TypeInfo out = infer_output_type(n, cur);
        g.add_edge(prev, n.id);
        g.edge_types[{prev, n.id}] = cur.edge_type();
        prev = n.id;
        g.add_node(std::move(n));
        cur = out;
    }
    return g;
}

} // namespace opg
