#include "opgraph/reports.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace opg {

using nlohmann::json;

std::string to_json(const AdjointSuiteReport& r) {
    json j;
    j["seed"] = r.seed;
    j["trials"] = r.trials;
    j["threshold"] = 1e-6;
    j["all_pass"] = r.all_pass;
    j["seconds"] = r.seconds;
    for (const auto& row : r.rows)
        j["rows"].push_back({{"primitive", row.letter},
                             {"size", row.size},
                             {"max_rel_err", row.max_rel_err},
                             {"regression_guard", row.guard},
                             {"pass", row.pass}});
    return j.dump(2);
}

std::string to_json(const RegistryReport& r) {
    json j;
    j["seed"] = r.seed;
    j["all_pass"] = r.all_pass;
    j["seconds"] = r.seconds;
    for (const auto& row : r.rows) {
        json e = {{"name", row.name},       {"tier", row.tier},
                  {"nodes", row.n_nodes},   {"depth", row.depth},
                  {"stats_ok", row.stats_ok}, {"has_oracle", row.has_oracle},
                  {"pass", row.pass}};
        if (row.has_oracle) {
            e["e_mean"] = row.e_mean;
            e["e_sup"] = row.e_sup;
            e["e_std"] = row.e_std;
        }
        if (row.bound) e["bound"] = *row.bound;
        j["rows"].push_back(e);
    }
    return j.dump(2);
}

std::string to_json(const NormsReport& r) {
    json j;
    j["B"] = r.B;
    j["all_pass"] = r.all_pass;
    for (const auto& row : r.stage_rows)
        j["stages"].push_back({{"chain", row.chain},
                               {"stage", row.stage},
                               {"norm", row.value},
                               {"method", row.method},
                               {"within_B", row.within_bound}});
    for (const auto& row : r.reference_rows)
        j["reference"].push_back({{"operator", row.stage},
                                  {"norm", row.value},
                                  {"pass", row.within_bound}});
    return j.dump(2);
}

std::string to_json(const SweepReport& r) {
    json j;
    j["seed"] = r.seed;
    j["passes"] = r.passes;
    j["trials"] = r.trials.size();
    j["all_pass"] = r.all_pass;
    for (const auto& t : r.trials)
        j["rows"].push_back({{"chain", t.chain},
                             {"stage", t.stage},
                             {"eps", t.eps},
                             {"measured", t.measured},
                             {"bound_sharp", t.bound},
                             {"ok", t.ok}});
    return j.dump(2);
}

std::string to_json(const ClosureReport& r) {
    json j;
    j["frozen"] = r.frozen;
    j["seed"] = r.seed;
    j["epsilon"] = r.epsilon;
    j["flags_any"] = r.flags_any;
    for (const auto& row : r.rows)
        j["rows"].push_back({{"modality", row.name},
                             {"e_img", row.e_img},
                             {"via_search", row.via_search},
                             {"new_primitive", row.new_primitive},
                             {"missing_kinds", row.missing_kinds},
                             {"chain", row.chain}});
    return j.dump(2);
}

std::string to_json(const ExtensionCheckReport& r) {
    json j;
    j["target"] = r.target;
    j["without"] = r.without;
    j["min_e_img"] = r.min_e_img;
    j["template_e_img"] = r.template_e_img;
    j["property_holds"] = r.property_holds;
    j["budget_exhausted"] = r.budget_exhausted;
    j["topologies"] = r.topologies;
    j["best_chain"] = r.best_chain;
    j["seconds"] = r.seconds;
    return j.dump(2);
}

std::string to_json(const DotTestReport& r) {
    json j;
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    j["epsilon_guard"] = r.epsilon_guard;
    j["max_rel_err"] = r.max_rel_err;
    j["rel_errs"] = r.rel_errs;
    return j.dump(2);
}

std::string to_json(const FidelityReport& r) {
    json j;
    j["e_sup"] = r.e_sup;
    j["e_mean"] = r.e_mean;
    j["e_std"] = r.e_std;
    j["n_test"] = r.n_test;
    j["delta_guard"] = r.delta_guard;
    j["ratios"] = r.ratios;
    return j.dump(2);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << content;
}

std::string growth_csv(const std::vector<GrowthPoint>& curve) {
    std::ostringstream os;
    os << "N,K,introduced_kinds\n";
    for (const auto& p : curve) {
        os << p.n << "," << p.k << ",";
        for (std::size_t i = 0; i < p.introduced.size(); ++i)
            os << (i ? "+" : "") << p.introduced[i];
        os << "\n";
    }
    return os.str();
}

} // namespace opg
