#include "opgraph/registry.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "opgraph/patterns.hpp"
#include "opgraph/rng.hpp"

namespace opg {

const char* tier_name(Tier t) {
    switch (t) {
        case Tier::full: return "full";
        case Tier::held_out: return "held_out";
        case Tier::exotic: return "exotic";
        case Tier::tmpl: return "template";
        case Tier::nonlinear: return "nonlinear";
    }
    return "?";
}

Tier tier_from_name(const std::string& s) {
    if (s == "full") return Tier::full;
    if (s == "held_out") return Tier::held_out;
    if (s == "exotic") return Tier::exotic;
    if (s == "template") return Tier::tmpl;
    if (s == "nonlinear") return Tier::nonlinear;
    throw ParseError("unknown tier '" + s + "'");
}

const char* carrier_name(Carrier c) {
    switch (c) {
        case Carrier::photon: return "photon";
        case Carrier::electron: return "electron";
        case Carrier::spin: return "spin";
        case Carrier::acoustic: return "acoustic";
        case Carrier::xray: return "xray";
        case Carrier::neutron: return "neutron";
        case Carrier::thz: return "thz";
        case Carrier::rf: return "rf";
        case Carrier::particle: return "particle";
    }
    return "?";
}

Carrier carrier_from_name(const std::string& s) {
    if (s == "photon") return Carrier::photon;
    if (s == "electron") return Carrier::electron;
    if (s == "spin") return Carrier::spin;
    if (s == "acoustic") return Carrier::acoustic;
    if (s == "xray") return Carrier::xray;
    if (s == "neutron") return Carrier::neutron;
    if (s == "thz") return Carrier::thz;
    if (s == "rf") return Carrier::rf;
    if (s == "particle") return Carrier::particle;
    throw ParseError("unknown carrier '" + s + "'");
}

Registry Registry::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open registry file '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    std::vector<YAML::Node> docs;
    try {
        docs = YAML::LoadAll(ss.str());
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("registry: ") + e.what());
    }
    Registry reg;
    for (const auto& doc : docs) {
        if (!doc.IsMap()) continue;
        ModalityRecord r;
        r.name = doc["name"].as<std::string>();
        r.carrier = carrier_from_name(doc["carrier"].as<std::string>());
        r.tier = tier_from_name(doc["tier"].as<std::string>());
        r.closure_member = doc["closure"].as<bool>();
        r.detect_family = doc["detect_family"].as<int>();
        r.intro_order = doc["intro_order"].as<int>();
        if (doc["expected_e_img"] && !doc["expected_e_img"].IsNull())
            r.expected_e_img = doc["expected_e_img"].as<double>();
        for (const auto& k : doc["chain"]) r.chain.push_back(k.as<std::string>());
        r.expected_nodes = doc["nodes"].as<std::size_t>();
        r.expected_depth = doc["depth"].as<std::size_t>();
        if (doc["sizes"])
            for (const auto& kv : doc["sizes"])
                r.default_sizes[kv.first.as<std::string>()] = kv.second.as<std::size_t>();
        reg.records_.push_back(std::move(r));
    }
    // registry-level invariants
    if (reg.records_.size() != 40)
        throw ParseError("registry must list exactly 40 modalities, found " +
                         std::to_string(reg.records_.size()));
    std::set<std::string> names;
    std::set<int> orders;
    std::map<Tier, int> tiers;
    for (const auto& r : reg.records_) {
        names.insert(r.name);
        orders.insert(r.intro_order);
        tiers[r.tier]++;
    }
    if (names.size() != 40) throw ParseError("registry: duplicate modality names");
    if (orders.size() != 40 || *orders.begin() != 1 || *orders.rbegin() != 40)
        throw ParseError("registry: intro_order must be a permutation of 1..40");
    if (tiers[Tier::full] != 7 || tiers[Tier::held_out] != 5 || tiers[Tier::exotic] != 7 ||
        tiers[Tier::tmpl] != 12 || tiers[Tier::nonlinear] != 9)
        throw ParseError("registry: tier counts must be 7+5+7+12 linear and 9 nonlinear");
    return reg;
}

Registry Registry::load_default() { return load_file(std::string(OPGRAPH_DATA_DIR) + "/registry.yaml"); }

bool Registry::has(const std::string& name) const {
    for (const auto& r : records_)
        if (r.name == name) return true;
    return false;
}

const ModalityRecord& Registry::get(const std::string& name) const {
    for (const auto& r : records_)
        if (r.name == name) return r;
    throw Error("unknown modality '" + name + "'");
}

namespace {

using patterns::banded_kernel;
using patterns::binary_mask;
using patterns::complex_map;
using patterns::direction_kernel;
using patterns::gaussian_psf;
using patterns::plane;
using patterns::radon_params;
using patterns::random_psf;
using patterns::random_subset;
using patterns::smooth_pattern;
using patterns::random_subset;

DetectParams detect(int family, double g = 1.0, double x0 = 1.0, double phi = 0.0) {
    DetectParams dp;
    dp.family = static_cast<DetectFamily>(family);
    dp.g = g;
    dp.x0 = x0;
    dp.phi = phi;
    return dp;
}

} // namespace

OperatorGraph build_modality(const Registry& reg, const std::string& name, const Sizes& sizes,
                             std::uint64_t seed) {
    const ModalityRecord& rec = reg.get(name); // throws on unknown name
    Rng rng = Rng(seed).child(name);
    auto sz = [&](const std::string& key, std::size_t fb = 0) {
        auto it = rec.default_sizes.find(key);
        return sizes.get(key, it == rec.default_sizes.end() ? fb : it->second);
    };

    OperatorGraph g;
    const std::size_t n = sz("n", 32);

    if (name == "lensless") {
        ConvolveParams cp;
        cp.h = random_psf(sz("kernel", 15) | 1, rng);
        g = chain_graph(plane(n, n), {make_node(0, Kind::convolve, cp),
                                      make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "ct" || name == "neutron" || name == "pet" ||
               name == "electron_tomography") {
        auto pp = radon_params(n, sz("angles", 30));
        g = chain_graph(plane(n, n), {make_node(0, Kind::project, pp),
                                      make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "spc" || name == "ghost") {
        const std::size_t pix = n * n, T = sz("frames", 128);
        TypeInfo src{{{"pix", pix}}, DType::real64, "au"};
        ModulateParams mp;
        mp.m = Field(TypeInfo{{{"pix", pix}, {"t", T}}, DType::real64, "au"});
        for (std::size_t i = 0; i < mp.m.size(); ++i)
            mp.m[i] = name == "spc" ? (rng.uniform() < 0.5 ? 0.0 : 1.0)
                                    : std::fabs(rng.gaussian()) * 0.5;
        g = chain_graph(src, {make_node(0, Kind::modulate, mp),
                              make_node(0, Kind::accumulate, AccumulateParams{"pix"}),
                              make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "cacti") {
        const std::size_t T = sz("frames", 8);
        TypeInfo src{{{"y", n}, {"x", n}, {"t", T}}, DType::real64, "au"};
        ModulateParams mp;
        mp.m = Field(src);
        Field base = binary_mask(n, n, rng); // one mask, shifted per frame
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix)
                for (std::size_t t = 0; t < T; ++t)
                    mp.m[(iy * n + ix) * T + t] = base[iy * n + (ix + t) % n];
        g = chain_graph(src, {make_node(0, Kind::modulate, mp),
                              make_node(0, Kind::accumulate, AccumulateParams{"t"}),
                              make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "ptychography" || name == "electron_ptycho" || name == "holography" ||
               name == "light_field" || name == "fpm") {
        ModulateParams probe;
        probe.m = complex_map(n, n, rng);
        if (name == "light_field") probe.m = binary_mask(n, n, rng); // microlens mask
        const double lambda = name == "electron_ptycho" ? 0.05 : 0.5;
        const double dist = name == "electron_ptycho" ? 150.0 : 40.0;
        g = chain_graph(plane(n, n, DType::complex128),
                        {make_node(0, Kind::modulate, probe),
                         make_node(0, Kind::propagate, PropagateParams{dist, lambda, 1.0, 1.0}),
                         make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "mri") {
        ModulateParams coil;
        coil.m = complex_map(n, n, rng);
        EncodeParams enc;
        enc.ktraj = full_grid_ktraj(n, n);
        enc.normalize = true;
        SampleParams sp;
        sp.omega = random_subset(n * n, sz("samples", 256), rng);
        g = chain_graph(plane(n, n, DType::complex128),
                        {make_node(0, Kind::modulate, coil), make_node(0, Kind::encode, enc),
                         make_node(0, Kind::sample, sp),
                         make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "cassi") {
        const std::size_t nl = sz("bands", 8);
        TypeInfo src{{{"y", n}, {"x", n}, {"lambda", nl}}, DType::real64, "au"};
        ModulateParams mask;
        mask.m = binary_mask(n, n, rng);
        DisperseParams w;
        w.alpha = 1.0;
        w.a = 0.0;
        w.axis = "x";
        for (std::size_t j = 0; j < nl; ++j) w.lambdas.push_back(double(j));
        g = chain_graph(src, {make_node(0, Kind::modulate, mask), make_node(0, Kind::disperse, w),
                              make_node(0, Kind::accumulate, AccumulateParams{"lambda"}),
                              make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "oct") {
        const std::size_t nl = sz("bands", 4);
        TypeInfo src{{{"y", n}, {"x", n}, {"lambda", nl}}, DType::complex128, "au"};
        g.source_type = src;
        g.add_node(make_node(1, Kind::propagate, PropagateParams{12.0, 0.8, 1.0, 1.0}, src));
        g.add_node(make_node(2, Kind::propagate, PropagateParams{28.0, 0.8, 1.0, 1.0}, src));
        auto acc = make_node(3, Kind::accumulate, AccumulateParams{"lambda"}, src);
        TypeInfo after = infer_output_type(acc, src);
        g.add_node(acc);
        g.add_node(make_node(4, Kind::detect, detect(rec.detect_family, 1.0, 1.0, 0.3), after));
        g.add_edge(kSourceId, 1);
        g.add_edge(kSourceId, 2);
        g.add_edge(1, 3);
        g.add_edge(2, 3);
        g.add_edge(3, 4);
        g.merge_policy[3] = MergeSpec{MergePolicy::sum, ""};
    } else if (name == "photoacoustic") {
        ModulateParams absorb;
        absorb.m = smooth_pattern(n, n, rng);
        g = chain_graph(plane(n, n, DType::complex128),
                        {make_node(0, Kind::modulate, absorb),
                         make_node(0, Kind::propagate, PropagateParams{25.0, 2.0, 1.0, 1.0}),
                         make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "sim") {
        ModulateParams illum;
        illum.m = Field(plane(n, n));
        const double f = 3.0, ph = rng.uniform(0.0, 6.28);
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix)
                illum.m[iy * n + ix] =
                    0.5 * (1.0 + std::cos(2.0 * M_PI * f * double(ix) / double(n) + ph));
        ConvolveParams cp;
        cp.h = gaussian_psf(sz("kernel", 7) | 1, 1.4);
        g = chain_graph(plane(n, n), {make_node(0, Kind::modulate, illum),
                                      make_node(0, Kind::convolve, cp),
                                      make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "phase_contrast") {
        auto pp = radon_params(n, sz("angles", 16));
        TypeInfo src = plane(n, n, DType::complex128);
        auto pi_node = make_node(0, Kind::project, pp);
        ModulateParams mm;
        mm.m = complex_map(pp.thetas.size(), pp.n_det, rng);
        mm.m.set_dtype(DType::complex128);
        // rename the pattern axes to match the sinogram
        {
            TypeInfo t = mm.m.type();
            t.axes[0].name = "theta";
            t.axes[1].name = "t";
            Field renamed(t);
            for (std::size_t i = 0; i < mm.m.size(); ++i) renamed[i] = mm.m[i];
            mm.m = renamed;
        }
        g = chain_graph(src, {pi_node,
                              make_node(0, Kind::propagate, PropagateParams{15.0, 0.5, 1.0, 1.0}),
                              make_node(0, Kind::modulate, mm),
                              make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "thz") {
        const std::size_t nt = sz("n", 128);
        TypeInfo src{{{"t", nt}}, DType::complex128, "au"};
        ConvolveParams cp;
        TypeInfo kt{{{"t", sz("kernel", 15) | 1}}, DType::complex128, "au"};
        cp.h = Field(kt);
        double norm = 0.0;
        for (std::size_t i = 0; i < cp.h.size(); ++i) {
            cp.h[i] = {rng.gaussian(), rng.gaussian()};
            norm += std::abs(cp.h[i]);
        }
        cp.h *= 1.0 / norm;
        g = chain_graph(src, {make_node(0, Kind::convolve, cp),
                              make_node(0, Kind::detect, detect(rec.detect_family, 1.0, 1.0, 0.0))});
    } else if (name == "sted") {
        ConvolveParams cp;
        cp.h = gaussian_psf(sz("kernel", 5) | 1, 0.8);
        g = chain_graph(plane(n, n), {make_node(0, Kind::convolve, cp),
                                      make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "spectral_ct") {
        const std::size_t ne = sz("bins", 4);
        TypeInfo src{{{"y", n}, {"x", n}, {"E", ne}}, DType::real64, "au"};
        auto pp = radon_params(n, sz("angles", 16));
        auto pi_node = make_node(0, Kind::project, pp);
        // keep energy bins 0 and 2 at every sinogram location
        SampleParams sp;
        const std::size_t sino = pp.thetas.size() * pp.n_det;
        for (std::size_t i = 0; i < sino; ++i) {
            sp.omega.push_back(i * ne + 0);
            sp.omega.push_back(i * ne + 2);
        }
        std::sort(sp.omega.begin(), sp.omega.end());
        g = chain_graph(src, {pi_node, make_node(0, Kind::sample, sp),
                              make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "spect") {
        ModulateParams coll;
        coll.m = smooth_pattern(n, n, rng);
        auto pp = radon_params(n, sz("angles", 16));
        g = chain_graph(plane(n, n), {make_node(0, Kind::modulate, coll),
                                      make_node(0, Kind::project, pp),
                                      make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "ultrasound" || name == "sar" || name == "radar" ||
               name == "fdtd_linear") {
        ModulateParams refl;
        refl.m = name == "ultrasound" ? smooth_pattern(n, n, rng) : complex_map(n, n, rng);
        const double lambda = name == "ultrasound" ? 2.0 : 1.0;
        g = chain_graph(plane(n, n, DType::complex128),
                        {make_node(0, Kind::propagate, PropagateParams{20.0, lambda, 1.0, 1.0}),
                         make_node(0, Kind::modulate, refl),
                         make_node(0, Kind::detect, detect(rec.detect_family, 1.0, 1.0, 0.7))});
    } else if (name == "compton" || name == "raman" || name == "fluorescence" ||
               name == "brillouin") {
        const std::size_t ne = sz("bins", 8);
        TypeInfo src{{{"y", n}, {"x", n}, {"E", ne}}, DType::real64, "au"};
        ModulateParams dens;
        dens.m = smooth_pattern(n, n, rng);
        ScatterParams rp;
        if (name == "compton")
            rp = klein_nishina_kernel(ne, 20.0, 140.0);
        else if (name == "raman")
            rp = banded_kernel(ne, 2, 0.7, rng);
        else if (name == "fluorescence")
            rp = banded_kernel(ne, 3, 1.5, rng);
        else
            rp = banded_kernel(ne, 1, 0.5, rng);
        rp.axis = "E";
        g = chain_graph(src, {make_node(0, Kind::modulate, dens),
                              make_node(0, Kind::scatter, rp),
                              make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "dot" || name == "dot_multiple_scattering") {
        const std::size_t nd = sz("dirs", 4);
        TypeInfo src{{{"y", n}, {"x", n}, {"dir", nd}}, DType::complex128, "au"};
        ModulateParams mu;
        mu.m = smooth_pattern(n, n, rng);
        auto mk_scatter = [&]() {
            ScatterParams rp = direction_kernel(nd, 0.9, rng);
            rp.axis = "dir";
            return rp;
        };
        PropagateParams prop{18.0, 2.0, 1.0, 1.0};
        std::vector<PrimitiveNode> chain;
        chain.push_back(make_node(0, Kind::modulate, mu));
        chain.push_back(make_node(0, Kind::scatter, mk_scatter()));
        chain.push_back(make_node(0, Kind::propagate, prop));
        chain.push_back(make_node(0, Kind::scatter, mk_scatter()));
        if (name == "dot_multiple_scattering") {
            chain.push_back(make_node(0, Kind::propagate, prop));
            chain.push_back(make_node(0, Kind::accumulate, AccumulateParams{"dir"}));
        }
        chain.push_back(make_node(0, Kind::detect, detect(rec.detect_family)));
        g = chain_graph(src, std::move(chain));
    } else if (name == "eit") {
        const std::size_t nb = sz("bins", 4);
        TypeInfo src{{{"y", n}, {"x", n}, {"f", nb}}, DType::complex128, "au"};
        ModulateParams cond;
        cond.m = smooth_pattern(n, n, rng);
        PropagateParams prop{10.0, 2.5, 1.0, 1.0};
        // boundary voltages: the frame pixels of the y-x plane
        SampleParams sp;
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix)
                if (iy == 0 || ix == 0 || iy + 1 == n || ix + 1 == n)
                    sp.omega.push_back(iy * n + ix);
        g = chain_graph(src, {make_node(0, Kind::modulate, cond),
                              make_node(0, Kind::propagate, prop),
                              make_node(0, Kind::modulate, cond),
                              make_node(0, Kind::propagate, prop),
                              make_node(0, Kind::modulate, cond),
                              make_node(0, Kind::accumulate, AccumulateParams{"f"}),
                              make_node(0, Kind::sample, sp),
                              make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "beam_hardening_ct") {
        const std::size_t ne = sz("bins", 4);
        TypeInfo src{{{"y", n}, {"x", n}, {"E", ne}}, DType::real64, "au"};
        auto pp = radon_params(n, sz("angles", 16));
        TransformParams expat;
        expat.family = TransformFamily::exp_atten;
        expat.alpha = 0.6;
        TransformParams lg;
        lg.family = TransformFamily::log;
        lg.delta = 1e-8;
        g = chain_graph(src, {make_node(0, Kind::project, pp),
                              make_node(0, Kind::transform, expat),
                              make_node(0, Kind::accumulate, AccumulateParams{"E"}),
                              make_node(0, Kind::transform, lg),
                              make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "phase_wrapped_mri") {
        ModulateParams coil;
        coil.m = complex_map(n, n, rng);
        EncodeParams enc;
        enc.ktraj = full_grid_ktraj(n, n);
        enc.normalize = true;
        SampleParams sp;
        sp.omega = random_subset(n * n, sz("samples", 128), rng);
        TransformParams wrap;
        wrap.family = TransformFamily::wrap;
        g = chain_graph(plane(n, n, DType::complex128),
                        {make_node(0, Kind::modulate, coil), make_node(0, Kind::encode, enc),
                         make_node(0, Kind::sample, sp), make_node(0, Kind::transform, wrap),
                         make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "nonlinear_ultrasound" || name == "fdtd_nonlinear") {
        ModulateParams med;
        med.m = smooth_pattern(n, n, rng);
        TransformParams poly;
        poly.family = TransformFamily::poly;
        poly.coeffs = {0.0, 1.0, 0.15}; // quadratic harmonic generation
        const double lambda = name == "nonlinear_ultrasound" ? 2.0 : 1.0;
        g = chain_graph(plane(n, n, DType::complex128),
                        {make_node(0, Kind::propagate, PropagateParams{14.0, lambda, 1.0, 1.0}),
                         make_node(0, Kind::modulate, med),
                         make_node(0, Kind::transform, poly),
                         make_node(0, Kind::propagate, PropagateParams{14.0, lambda, 1.0, 1.0}),
                         make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "mpi") {
        ModulateParams sens;
        sens.m = smooth_pattern(n, n, rng);
        TransformParams lang;
        lang.family = TransformFamily::poly;
        lang.coeffs = {0.0, 1.0, 0.0, -0.15}; // odd Langevin-style response
        EncodeParams enc;
        enc.normalize = true;
        const std::size_t m = sz("samples", 128);
        for (std::size_t j = 0; j < m; ++j)
            enc.ktraj.push_back({rng.uniform(-double(n) / 2, double(n) / 2),
                                 rng.uniform(-double(n) / 2, double(n) / 2)});
        g = chain_graph(plane(n, n), {make_node(0, Kind::modulate, sens),
                                      make_node(0, Kind::transform, lang),
                                      make_node(0, Kind::encode, enc),
                                      make_node(0, Kind::detect, detect(rec.detect_family))});
    } else if (name == "qst") {
        const std::size_t d = sz("dim", 3), m = sz("meas", 12);
        const std::size_t s = d * d;
        TypeInfo src{{{"s", s}}, DType::real64, "au"};
        ModulateParams phi;
        phi.m = Field(TypeInfo{{{"s", s}, {"meas", m}}, DType::real64, "au"});
        for (std::size_t i = 0; i < phi.m.size(); ++i) phi.m[i] = rng.gaussian() / double(d);
        SampleParams sp;
        sp.omega = random_subset(m, m - 2, rng);
        g = chain_graph(src, {make_node(0, Kind::modulate, phi),
                              make_node(0, Kind::accumulate, AccumulateParams{"s"}),
                              make_node(0, Kind::sample, sp),
                              make_node(0, Kind::detect, detect(rec.detect_family))});
    } else {
        throw Error("unknown modality '" + name + "'");
    }

    // the built graph must agree with the published chain and stats
    {
        auto viol = validate(g);
        if (!viol.empty())
            throw Error("template '" + name + "' failed validation: " + viol.front().detail);
        auto st = stats(g);
        if (st.n_nodes != rec.expected_nodes || st.depth != rec.expected_depth)
            throw Error("template '" + name + "' stats (" + std::to_string(st.n_nodes) + "," +
                        std::to_string(st.depth) + ") do not match the registry row (" +
                        std::to_string(rec.expected_nodes) + "," +
                        std::to_string(rec.expected_depth) + ")");
        std::vector<std::string> letters;
        for (int id : topo_order(g)) letters.push_back(kind_letter(g.nodes.at(id).kind));
        if (letters != rec.chain)
            throw Error("template '" + name + "' chain does not match the registry row");
    }
    return g;
}

OperatorGraph build_modality_default(const Registry& reg, const std::string& name,
                                     std::uint64_t seed) {
    return build_modality(reg, name, Sizes{}, seed);
}

OperatorGraph born_unroll(std::size_t levels, const ScatterParams& scatter,
                          const PropagateParams& prop, const ModulateParams& mod,
                          const TypeInfo& source, std::size_t n_max) {
    const std::size_t n_nodes = 3 * levels + 2;
    if (n_nodes > n_max)
        throw ComplexityError("born_unroll: " + std::to_string(n_nodes) +
                              " nodes exceed N_max = " + std::to_string(n_max));
    if (scatter.n_out != scatter.n_in)
        throw ParamError("born_unroll: scatter kernel must be square");

    OperatorGraph g;
    g.source_type = source;
    auto add_chain_node = [&](int id, Kind kind, Params params, const TypeInfo& in) {
        auto node = make_node(id, kind, std::move(params), in);
        TypeInfo out = infer_output_type(node, in);
        if (!(out == in))
            throw ParamError("born_unroll: stage must preserve the field type");
        g.add_node(std::move(node));
        return out;
    };

    add_chain_node(1, Kind::modulate, mod, source);
    add_chain_node(2, Kind::scatter, scatter, source);
    g.add_edge(kSourceId, 1);
    g.add_edge(1, 2);
    int prev = 2;
    int next_id = 3;
    for (std::size_t l = 0; l < levels; ++l) {
        const int p_id = next_id++, r_id = next_id++, m_id = next_id++;
        add_chain_node(p_id, Kind::propagate, prop, source);
        add_chain_node(r_id, Kind::scatter, scatter, source);
        add_chain_node(m_id, Kind::modulate, mod, source);
        g.add_edge(prev, p_id);
        g.add_edge(kSourceId, p_id); // re-inject the incident field
        g.merge_policy[p_id] = MergeSpec{MergePolicy::sum, ""};
        g.add_edge(p_id, r_id);
        g.add_edge(r_id, m_id);
        prev = m_id;
    }
    return g;
}

std::vector<GrowthPoint> basis_growth(const Registry& reg) {
    std::vector<const ModalityRecord*> ordered;
    for (const auto& r : reg.records()) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const ModalityRecord* a, const ModalityRecord* b) {
                  return a->intro_order < b->intro_order;
              });
    std::vector<GrowthPoint> curve;
    std::set<std::string> seen;
    std::size_t n = 0;
    for (const auto* r : ordered) {
        GrowthPoint p;
        p.n = ++n;
        p.modality = r->name;
        for (const auto& k : r->chain) {
            if (seen.insert(k).second) p.introduced.push_back(k);
        }
        p.k = seen.size();
        curve.push_back(std::move(p));
    }
    return curve;
}

} // namespace opg
