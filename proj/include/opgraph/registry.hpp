#ifndef OPGRAPH_REGISTRY_HPP
#define OPGRAPH_REGISTRY_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opgraph/graph.hpp"

namespace opg {

enum class Tier { full, held_out, exotic, tmpl, nonlinear };
const char* tier_name(Tier t);
Tier tier_from_name(const std::string& s);

enum class Carrier { photon, electron, spin, acoustic, xray, neutron, thz, rf, particle };
const char* carrier_name(Carrier c);
Carrier carrier_from_name(const std::string& s);

struct ModalityRecord {
    std::string name;
    Carrier carrier = Carrier::photon;
    Tier tier = Tier::tmpl;
    bool closure_member = false; // held-out closure-test row
    int detect_family = 4;
    int intro_order = 0; // 1..40, chronological registry position
    std::optional<double> expected_e_img;
    std::vector<std::string> chain; // paper letters, display/cross-check
    std::size_t expected_nodes = 0;
    std::size_t expected_depth = 0;
    std::map<std::string, std::size_t> default_sizes;
};

/// Size bindings for a template; falls back to the record defaults.
struct Sizes {
    std::map<std::string, std::size_t> v;
    std::size_t get(const std::string& key, std::size_t fallback) const {
        auto it = v.find(key);
        return it == v.end() ? fallback : it->second;
    }
};

class Registry {
public:
    static Registry load_file(const std::string& path);
    static Registry load_default(); // data/registry.yaml shipped with the repo

    const std::vector<ModalityRecord>& records() const { return records_; }
    bool has(const std::string& name) const;
    const ModalityRecord& get(const std::string& name) const;

private:
    std::vector<ModalityRecord> records_;
};

/// Instantiate a registry template at concrete sizes. Pattern-valued
/// parameters (masks, probes, kernels) come from the seeded generator.
OperatorGraph build_modality(const Registry& reg, const std::string& name, const Sizes& sizes,
                             std::uint64_t seed = 20260809);

/// Size bindings taken from the record defaults.
OperatorGraph build_modality_default(const Registry& reg, const std::string& name,
                                     std::uint64_t seed = 20260809);

/// Unrolled multiple-scattering ladder: z_0 = R(M(u)), z_j = M(R(P(z_{j-1} + u))).
/// 3L + 2 operator nodes; the source fans out into each level's Propagate with
/// a sum merge. Throws ComplexityError when the node count exceeds n_max.
OperatorGraph born_unroll(std::size_t levels, const ScatterParams& scatter,
                          const PropagateParams& prop, const ModulateParams& mod,
                          const TypeInfo& source, std::size_t n_max = 20);

struct GrowthPoint {
    std::size_t n = 0; // modalities admitted so far
    std::size_t k = 0; // distinct primitive kinds in use
    std::vector<std::string> introduced;
    std::string modality;
};

/// Basis-growth curve over the chronological registry order.
std::vector<GrowthPoint> basis_growth(const Registry& reg);

} // namespace opg

#endif
