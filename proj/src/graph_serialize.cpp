#include "opgraph/graph_serialize.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <limits>
#include <sstream>

namespace opg {

namespace {

constexpr int kPrec = std::numeric_limits<double>::max_digits10;

YAML::Node type_to_yaml(const TypeInfo& t) {
    YAML::Node n;
    for (const auto& a : t.axes) {
        YAML::Node an;
        an["name"] = a.name;
        an["extent"] = a.extent;
        n["axes"].push_back(an);
    }
    n["dtype"] = dtype_name(t.dtype);
    n["units"] = t.units;
    return n;
}

TypeInfo type_from_yaml(const YAML::Node& n, const std::string& where) {
    TypeInfo t;
    if (!n["axes"]) throw ParseError(where + ": missing axes");
    for (const auto& an : n["axes"]) {
        Axis a;
        a.name = an["name"].as<std::string>();
        a.extent = an["extent"].as<std::size_t>();
        t.axes.push_back(a);
    }
    if (!n["dtype"]) throw ParseError(where + ": missing dtype");
    t.dtype = dtype_from_name(n["dtype"].as<std::string>());
    if (!n["units"]) throw ParseError(where + ": missing units field");
    t.units = n["units"].as<std::string>();
    return t;
}

YAML::Node edge_type_to_yaml(const EdgeType& t) {
    YAML::Node n;
    for (auto e : t.shape) n["shape"].push_back(e);
    n["dtype"] = dtype_name(t.dtype);
    n["units"] = t.units;
    return n;
}

EdgeType edge_type_from_yaml(const YAML::Node& n, const std::string& where) {
    EdgeType t;
    if (!n["shape"]) throw ParseError(where + ": missing shape");
    for (const auto& e : n["shape"]) t.shape.push_back(e.as<std::size_t>());
    if (!n["dtype"]) throw ParseError(where + ": missing dtype");
    t.dtype = dtype_from_name(n["dtype"].as<std::string>());
    if (!n["units"]) throw ParseError(where + ": missing units field");
    t.units = n["units"].as<std::string>();
    return t;
}

YAML::Node field_to_yaml(const Field& f) {
    YAML::Node n = type_to_yaml(f.type());
    YAML::Node data;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.dtype() == DType::complex128) {
            YAML::Node pair;
            pair.push_back(f[i].real());
            pair.push_back(f[i].imag());
            pair.SetStyle(YAML::EmitterStyle::Flow);
            data.push_back(pair);
        } else {
            data.push_back(f[i].real());
        }
    }
    data.SetStyle(YAML::EmitterStyle::Flow);
    n["data"] = data;
    return n;
}

Field field_from_yaml(const YAML::Node& n, const std::string& where) {
    TypeInfo t = type_from_yaml(n, where);
    Field f(t);
    if (!n["data"]) throw ParseError(where + ": missing data");
    const auto& data = n["data"];
    if (data.size() != f.size()) throw ParseError(where + ": data length mismatch");
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (t.dtype == DType::complex128)
            f[i] = {data[i][0].as<double>(), data[i][1].as<double>()};
        else
            f[i] = data[i].as<double>();
    }
    return f;
}

YAML::Node params_to_yaml(const PrimitiveNode& node) {
    YAML::Node p;
    switch (node.kind) {
        case Kind::propagate: {
            const auto& q = node.as<PropagateParams>();
            p["d"] = q.d;
            p["lambda"] = q.lambda;
            p["pitch_y"] = q.pitch_y;
            p["pitch_x"] = q.pitch_x;
            break;
        }
        case Kind::modulate:
            p["m"] = field_to_yaml(node.as<ModulateParams>().m);
            break;
        case Kind::project: {
            const auto& q = node.as<ProjectParams>();
            YAML::Node th;
            for (double v : q.thetas) th.push_back(v);
            th.SetStyle(YAML::EmitterStyle::Flow);
            p["thetas"] = th;
            p["n_det"] = q.n_det;
            p["det_spacing"] = q.det_spacing;
            p["pixel_size"] = q.pixel_size;
            p["step"] = q.step;
            break;
        }
        case Kind::encode: {
            const auto& q = node.as<EncodeParams>();
            YAML::Node kt;
            for (const auto& k : q.ktraj) {
                YAML::Node pair;
                pair.push_back(k[0]);
                pair.push_back(k[1]);
                pair.SetStyle(YAML::EmitterStyle::Flow);
                kt.push_back(pair);
            }
            kt.SetStyle(YAML::EmitterStyle::Flow);
            p["ktraj"] = kt;
            p["normalize"] = q.normalize;
            break;
        }
        case Kind::convolve:
            p["h"] = field_to_yaml(node.as<ConvolveParams>().h);
            break;
        case Kind::accumulate:
            p["axis"] = node.as<AccumulateParams>().axis;
            break;
        case Kind::detect: {
            const auto& q = node.as<DetectParams>();
            p["family"] = static_cast<int>(q.family);
            p["g"] = q.g;
            p["x0"] = q.x0;
            p["phi"] = q.phi;
            break;
        }
        case Kind::sample: {
            YAML::Node om;
            for (auto i : node.as<SampleParams>().omega) om.push_back(i);
            om.SetStyle(YAML::EmitterStyle::Flow);
            p["omega"] = om;
            break;
        }
        case Kind::disperse: {
            const auto& q = node.as<DisperseParams>();
            p["alpha"] = q.alpha;
            p["a"] = q.a;
            p["axis"] = q.axis;
            p["spectral_axis"] = q.spectral_axis;
            YAML::Node l;
            for (double v : q.lambdas) l.push_back(v);
            l.SetStyle(YAML::EmitterStyle::Flow);
            p["lambdas"] = l;
            break;
        }
        case Kind::scatter: {
            const auto& q = node.as<ScatterParams>();
            p["n_out"] = q.n_out;
            p["n_in"] = q.n_in;
            YAML::Node k;
            for (double v : q.kernel) k.push_back(v);
            k.SetStyle(YAML::EmitterStyle::Flow);
            p["kernel"] = k;
            if (!q.axis.empty()) p["axis"] = q.axis;
            if (q.atten) p["atten"] = field_to_yaml(*q.atten);
            break;
        }
        case Kind::transform: {
            const auto& q = node.as<TransformParams>();
            p["family"] = static_cast<int>(q.family);
            p["alpha"] = q.alpha;
            p["delta"] = q.delta;
            YAML::Node c;
            for (double v : q.coeffs) c.push_back(v);
            c.SetStyle(YAML::EmitterStyle::Flow);
            p["coeffs"] = c;
            p["x_min"] = q.x_min;
            p["x_max"] = q.x_max;
            break;
        }
        case Kind::linearized:
            throw Error("linearized nodes are runtime-only and cannot be serialized");
    }
    return p;
}

Params params_from_yaml(Kind kind, const YAML::Node& p, const std::string& where) {
    switch (kind) {
        case Kind::propagate: {
            PropagateParams q;
            q.d = p["d"].as<double>();
            q.lambda = p["lambda"].as<double>();
            q.pitch_y = p["pitch_y"].as<double>();
            q.pitch_x = p["pitch_x"].as<double>();
            return q;
        }
        case Kind::modulate: {
            ModulateParams q;
            q.m = field_from_yaml(p["m"], where + ".m");
            return q;
        }
        case Kind::project: {
            ProjectParams q;
            for (const auto& v : p["thetas"]) q.thetas.push_back(v.as<double>());
            q.n_det = p["n_det"].as<std::size_t>();
            q.det_spacing = p["det_spacing"].as<double>();
            q.pixel_size = p["pixel_size"].as<double>();
            q.step = p["step"].as<double>();
            return q;
        }
        case Kind::encode: {
            EncodeParams q;
            for (const auto& v : p["ktraj"])
                q.ktraj.push_back({v[0].as<double>(), v[1].as<double>()});
            q.normalize = p["normalize"].as<bool>();
            return q;
        }
        case Kind::convolve: {
            ConvolveParams q;
            q.h = field_from_yaml(p["h"], where + ".h");
            return q;
        }
        case Kind::accumulate: {
            AccumulateParams q;
            q.axis = p["axis"].as<std::string>();
            return q;
        }
        case Kind::detect: {
            DetectParams q;
            q.family = static_cast<DetectFamily>(p["family"].as<int>());
            q.g = p["g"].as<double>();
            q.x0 = p["x0"].as<double>();
            q.phi = p["phi"].as<double>();
            return q;
        }
        case Kind::sample: {
            SampleParams q;
            for (const auto& v : p["omega"]) q.omega.push_back(v.as<std::size_t>());
            return q;
        }
        case Kind::disperse: {
            DisperseParams q;
            q.alpha = p["alpha"].as<double>();
            q.a = p["a"].as<double>();
            q.axis = p["axis"].as<std::string>();
            q.spectral_axis = p["spectral_axis"].as<std::string>();
            for (const auto& v : p["lambdas"]) q.lambdas.push_back(v.as<double>());
            return q;
        }
        case Kind::scatter: {
            ScatterParams q;
            q.n_out = p["n_out"].as<std::size_t>();
            q.n_in = p["n_in"].as<std::size_t>();
            for (const auto& v : p["kernel"]) q.kernel.push_back(v.as<double>());
            if (p["axis"]) q.axis = p["axis"].as<std::string>();
            if (p["atten"]) q.atten = field_from_yaml(p["atten"], where + ".atten");
            return q;
        }
        case Kind::transform: {
            TransformParams q;
            q.family = static_cast<TransformFamily>(p["family"].as<int>());
            q.alpha = p["alpha"].as<double>();
            q.delta = p["delta"].as<double>();
            if (p["coeffs"])
                for (const auto& v : p["coeffs"]) q.coeffs.push_back(v.as<double>());
            q.x_min = p["x_min"].as<double>();
            q.x_max = p["x_max"].as<double>();
            return q;
        }
        case Kind::linearized:
            break;
    }
    throw ParseError(where + ": unsupported kind");
}

} // namespace

std::string serialize(const OperatorGraph& g) {
    {
        auto viol = validate(g);
        if (!viol.empty())
            throw Error("serialize requires a well-formed graph: " + viol.front().rule);
    }
    YAML::Node root;
    root["format"] = "opgraph/v1";
    root["source"] = type_to_yaml(g.source_type);
    for (const auto& [id, n] : g.nodes) {
        YAML::Node nn;
        nn["id"] = id;
        nn["kind"] = kind_name(n.kind);
        nn["input"] = type_to_yaml(*n.in_type);
        nn["params"] = params_to_yaml(n);
        root["nodes"].push_back(nn);
    }
    for (const auto& [s, d] : g.edges) {
        YAML::Node e;
        e.push_back(s);
        e.push_back(d);
        e.SetStyle(YAML::EmitterStyle::Flow);
        root["edges"].push_back(e);
        auto it = g.edge_types.find({s, d});
        root["edge_types"].push_back(it != g.edge_types.end()
                                         ? edge_type_to_yaml(it->second)
                                         : YAML::Node());
    }
    if (!g.merge_policy.empty()) {
        YAML::Node mp;
        for (const auto& [id, ms] : g.merge_policy) {
            YAML::Node m;
            m["policy"] = ms.policy == MergePolicy::sum ? "sum" : "concat";
            if (ms.policy == MergePolicy::concat) m["axis"] = ms.concat_axis;
            mp[std::to_string(id)] = m;
        }
        root["merge_policy"] = mp;
    }
    YAML::Emitter em;
    em.SetDoublePrecision(kPrec);
    em.SetFloatPrecision(kPrec);
    em << root;
    return std::string(em.c_str()) + "\n";
}

OperatorGraph deserialize(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("invalid YAML: ") + e.what());
    }
    try {
        if (!root["format"] || root["format"].as<std::string>() != "opgraph/v1")
            throw ParseError("graph file: missing or unsupported format tag");
        OperatorGraph g;
        g.source_type = type_from_yaml(root["source"], "source");
        if (!root["nodes"]) throw ParseError("graph file: missing nodes");
        for (const auto& nn : root["nodes"]) {
            const int id = nn["id"].as<int>();
            const std::string where = "node " + std::to_string(id);
            const Kind kind = kind_from_name(nn["kind"].as<std::string>());
            TypeInfo in = type_from_yaml(nn["input"], where + ".input");
            PrimitiveNode node = make_node(id, kind, params_from_yaml(kind, nn["params"], where), in);
            g.add_node(std::move(node));
        }
        if (root["edges"]) {
            std::size_t i = 0;
            for (const auto& e : root["edges"]) {
                const int s = e[0].as<int>(), d = e[1].as<int>();
                g.add_edge(s, d);
                if (root["edge_types"] && i < root["edge_types"].size() &&
                    root["edge_types"][i].IsMap())
                    g.edge_types[{s, d}] = edge_type_from_yaml(
                        root["edge_types"][i], "edge_types[" + std::to_string(i) + "]");
                ++i;
            }
        }
        if (root["merge_policy"]) {
            for (const auto& kv : root["merge_policy"]) {
                MergeSpec ms;
                const auto pol = kv.second["policy"].as<std::string>();
                if (pol == "sum")
                    ms.policy = MergePolicy::sum;
                else if (pol == "concat") {
                    ms.policy = MergePolicy::concat;
                    ms.concat_axis = kv.second["axis"].as<std::string>();
                } else
                    throw ParseError("unknown merge policy '" + pol + "'");
                g.merge_policy[std::stoi(kv.first.as<std::string>())] = ms;
            }
        }
        return g;
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("graph file: ") + e.what());
    }
}

void write_graph_file(const std::string& path, const OperatorGraph& g) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << serialize(g);
}

OperatorGraph read_graph_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return deserialize(ss.str());
}

} // namespace opg
