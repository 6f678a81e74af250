#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "opgraph/field_io.hpp"
#include "opgraph/graph_serialize.hpp"
#include "opgraph/oracles.hpp"
#include "opgraph/reports.hpp"

using namespace opg;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 20260809;
    std::size_t size = 0; // 0 = registry defaults
    double epsilon = 0.01;
    std::size_t nmax = 20;
    std::size_t dmax = 10;
    std::string report_path;
    std::string registry_path;
};

Registry load_registry(const GlobalOpts& g) {
    return g.registry_path.empty() ? Registry::load_default()
                                   : Registry::load_file(g.registry_path);
}

void emit(const GlobalOpts& g, const std::string& json) {
    if (!g.report_path.empty()) {
        write_text_file(g.report_path, json);
        std::cout << "report written to " << g.report_path << "\n";
    }
}

std::vector<Kind> read_kinds_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open kinds file '" + path + "'");
    std::vector<Kind> kinds;
    std::string tok;
    while (is >> tok) {
        if (tok.empty() || tok[0] == '#') continue;
        kinds.push_back(kind_from_name(tok));
    }
    if (kinds.empty()) throw Error("kinds file '" + path + "' lists no kinds");
    return kinds;
}

int cmd_validate_adjoints(const GlobalOpts& g) {
    std::vector<std::size_t> sizes = g.size ? std::vector<std::size_t>{g.size}
                                            : std::vector<std::size_t>{16, 32, 64};
    auto rep = run_adjoint_suite(g.seed, sizes, 20);
    std::printf("%-8s %-6s %-14s %-14s %s\n", "prim", "size", "max_rel_err", "guard", "pass");
    for (const auto& r : rep.rows)
        std::printf("%-8s %-6zu %-14.3e %-14.3e %s\n", r.letter.c_str(), r.size, r.max_rel_err,
                    r.guard, r.pass ? "yes" : "NO");
    std::printf("adjoint suite: %s (%.2fs, seed %llu)\n", rep.all_pass ? "PASS" : "FAIL",
                rep.seconds, static_cast<unsigned long long>(rep.seed));
    emit(g, to_json(rep));
    return rep.all_pass ? 0 : 1;
}

int cmd_validate_registry(const GlobalOpts& g) {
    auto reg = load_registry(g);
    auto rep = run_validate_registry(reg, g.seed);
    std::printf("%-24s %-10s %-6s %-6s %-12s %-12s %s\n", "modality", "tier", "nodes", "depth",
                "e_mean", "bound", "pass");
    for (const auto& r : rep.rows) {
        if (r.has_oracle)
            std::printf("%-24s %-10s %-6zu %-6zu %-12.3e %-12.3e %s\n", r.name.c_str(),
                        r.tier.c_str(), r.n_nodes, r.depth, r.e_mean,
                        r.bound ? *r.bound : 0.0, r.pass ? "yes" : "NO");
        else
            std::printf("%-24s %-10s %-6zu %-6zu %-12s %-12s %s\n", r.name.c_str(),
                        r.tier.c_str(), r.n_nodes, r.depth, "-", "-", r.pass ? "yes" : "NO");
    }
    std::printf("registry: %s (%.2fs)\n", rep.all_pass ? "PASS" : "FAIL", rep.seconds);
    emit(g, to_json(rep));
    return rep.all_pass ? 0 : 1;
}

int cmd_norms(const GlobalOpts& g) {
    auto reg = load_registry(g);
    auto rep = run_norms(reg, g.seed);
    for (const auto& r : rep.stage_rows)
        std::printf("%-10s %-10s %-16s %-12.6f %s\n", r.chain.c_str(), r.stage.c_str(),
                    r.method.c_str(), r.value, r.within_bound ? "<=B" : "EXCEEDS B");
    for (const auto& r : rep.reference_rows)
        std::printf("%-10s %-32s %-12.6f %s\n", "reference", r.stage.c_str(), r.value,
                    r.within_bound ? "ok" : "MISMATCH");
    std::printf("norms: %s (B = %.1f)\n", rep.all_pass ? "PASS" : "FAIL", rep.B);
    emit(g, to_json(rep));
    return rep.all_pass ? 0 : 1;
}

int cmd_closure(const GlobalOpts& g, const std::string& kinds_file) {
    auto reg = load_registry(g);
    auto frozen = read_kinds_file(kinds_file);
    SearchBudget budget;
    budget.max_nodes = 4;
    budget.n_max = g.nmax;
    budget.d_max = g.dmax;
    auto rep = run_closure_test(reg, frozen, g.epsilon, g.seed, budget);
    std::printf("frozen kinds:");
    for (const auto& k : rep.frozen) std::printf(" %s", k.c_str());
    std::printf("\n%-18s %-12s %-8s %s\n", "modality", "e_img", "search", "new primitive?");
    for (const auto& r : rep.rows) {
        std::string flag = "N";
        if (r.new_primitive) {
            flag = "Y (";
            for (const auto& m : r.missing_kinds) flag += m;
            flag += ")";
        }
        std::printf("%-18s %-12.3e %-8s %s\n", r.name.c_str(), r.e_img,
                    r.via_search ? "yes" : "no", flag.c_str());
    }
    emit(g, to_json(rep));
    return rep.flags_any ? 1 : 0;
}

int cmd_extension(const GlobalOpts& g, const std::string& target, const std::string& without) {
    auto reg = load_registry(g);
    SearchBudget budget;
    budget.max_nodes = 4;
    budget.n_max = g.nmax;
    budget.d_max = g.dmax;
    Sizes sizes;
    if (g.size) sizes.v["n"] = g.size;
    auto rep = run_extension_check(reg, target, kind_from_name(without), g.epsilon, g.seed,
                                   budget, sizes);
    std::printf("target %s without %s: min e_img %.4e over %zu topologies (%.1fs)\n",
                rep.target.c_str(), rep.without.c_str(), rep.min_e_img, rep.topologies,
                rep.seconds);
    std::printf("with-library template e_img %.4e; property %s\n", rep.template_e_img,
                rep.property_holds ? "holds" : "FAILS");
    emit(g, to_json(rep));
    return rep.min_e_img > g.epsilon ? 1 : 0;
}

int cmd_basis_growth(const GlobalOpts& g, const std::string& csv_path) {
    auto reg = load_registry(g);
    auto curve = basis_growth(reg);
    const std::string csv = growth_csv(curve);
    if (!csv_path.empty()) {
        write_text_file(csv_path, csv);
        std::cout << "curve written to " << csv_path << "\n";
    } else {
        std::cout << csv;
    }
    const bool ok = curve.size() == 40 && curve.front().k == 2 && curve[6].k == 9 &&
                    curve.back().k == 11;
    std::printf("basis growth: %s (K = %zu at N = %zu)\n", ok ? "PASS" : "FAIL",
                curve.back().k, curve.back().n);
    return ok ? 0 : 1;
}

int cmd_compose_run(const GlobalOpts&, const std::string& graph_path,
                    const std::string& input_path, const std::string& output_path) {
    OperatorGraph g = read_graph_file(graph_path);
    Field x = read_field_file(input_path);
    Field y = compose(g, x);
    write_field_file(output_path, y);
    std::cout << "wrote " << output_path << " (" << y.type().str() << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"imaging forward-model operator graphs: validation harness"};
    app.require_subcommand(1);
    app.fallthrough(); // accept global flags after the subcommand name
    GlobalOpts g;
    app.add_option("--seed", g.seed, "seed for all randomized checks");
    app.add_option("--size", g.size, "override the per-axis size (0 = defaults)");
    app.add_option("--epsilon", g.epsilon, "fidelity threshold")->capture_default_str();
    app.add_option("--nmax", g.nmax, "max node count")->capture_default_str();
    app.add_option("--dmax", g.dmax, "max depth")->capture_default_str();
    app.add_option("--report", g.report_path, "write a JSON report here");
    app.add_option("--registry", g.registry_path, "registry YAML (defaults to shipped data)");

    auto* va = app.add_subcommand("validate-adjoints", "dot-test all 11 primitives");
    auto* vr = app.add_subcommand("validate-registry", "build and check all 40 templates");
    auto* no = app.add_subcommand("norms", "operator-norm report for the Table S3 chains");
    auto* cl = app.add_subcommand("closure-test", "frozen-library closure test");
    std::string kinds_file;
    cl->add_option("--frozen", kinds_file, "file listing the frozen kinds")->required();
    auto* ex = app.add_subcommand("extension-check", "necessity witness search");
    std::string target, without;
    ex->add_option("--target", target, "target modality")->required();
    ex->add_option("--without", without, "kind withheld from the library")->required();
    auto* bg = app.add_subcommand("basis-growth", "emit the basis-growth curve");
    std::string csv_path;
    bg->add_option("--csv", csv_path, "CSV output path");
    auto* cr = app.add_subcommand("compose-run", "evaluate a graph file on a field file");
    std::string graph_path, input_path, output_path;
    cr->add_option("--graph", graph_path, "graph YAML file")->required();
    cr->add_option("--input", input_path, "input field file")->required();
    cr->add_option("--output", output_path, "output field file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // usage error
    }

    try {
        if (va->parsed()) return cmd_validate_adjoints(g);
        if (vr->parsed()) return cmd_validate_registry(g);
        if (no->parsed()) return cmd_norms(g);
        if (cl->parsed()) return cmd_closure(g, kinds_file);
        if (ex->parsed()) return cmd_extension(g, target, without);
        if (bg->parsed()) return cmd_basis_growth(g, csv_path);
        if (cr->parsed()) return cmd_compose_run(g, graph_path, input_path, output_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
