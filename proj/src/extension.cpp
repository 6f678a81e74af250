#include "opgraph/extension.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "opgraph/patterns.hpp"

namespace opg {

namespace {

struct Ctx {
    const std::vector<Field>* objects = nullptr;
    std::vector<Field> targets;
    TypeInfo in_type;
    EdgeType out_edge; // shape + dtype of the target outputs (units ignored)
    const SearchBudget* budget = nullptr;
    double delta_guard = 1e-8;
    std::size_t evals = 0;
    bool exhausted = false;
    double best = std::numeric_limits<double>::infinity();
    std::vector<PrimitiveNode> best_chain;
    std::size_t topologies = 0;
    std::size_t exact_len = 0; // enumerate shortest chains first
    Rng rng{0};
};

bool shapes_match(const TypeInfo& a, const EdgeType& b) {
    auto ea = a.edge_type();
    return ea.shape == b.shape && ea.dtype == b.dtype;
}

/// Intermediates entering node j (prefix nodes 0..j-1 applied to each object).
std::vector<Field> intermediates_at(const std::vector<PrimitiveNode>& chain, std::size_t j,
                                    const std::vector<Field>& objects) {
    std::vector<Field> zs;
    zs.reserve(objects.size());
    for (const auto& x : objects) {
        Field v = x;
        for (std::size_t i = 0; i < j; ++i) v = forward(chain[i], v);
        zs.push_back(std::move(v));
    }
    return zs;
}

/// Mean e_img applying nodes j..end to the cached intermediates zs.
double objective_suffix(Ctx& c, const std::vector<PrimitiveNode>& chain, std::size_t j,
                        const std::vector<Field>& zs) {
    if (c.evals >= c.budget->eval_cap) {
        c.exhausted = true;
        return std::numeric_limits<double>::infinity();
    }
    ++c.evals;
    double sum = 0.0;
    for (std::size_t p = 0; p < zs.size(); ++p) {
        Field v = zs[p];
        try {
            for (std::size_t i = j; i < chain.size(); ++i) v = forward(chain[i], v);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
        const Field& want = c.targets[p];
        if (v.size() != want.size()) return std::numeric_limits<double>::infinity();
        sum += (v - want).norm2() / (want.norm2() + c.delta_guard);
    }
    return sum / double(zs.size());
}

double objective(Ctx& c, const std::vector<PrimitiveNode>& chain) {
    return objective_suffix(c, chain, 0, *c.objects);
}

// -- scalar coordinate descent -------------------------------------------------

struct ScalarParam {
    std::size_t node;
    int which;
    double lo, hi;
    bool log_scale;
};

double get_scalar(const PrimitiveNode& n, int which) {
    switch (n.kind) {
        case Kind::propagate:
            return which == 0 ? n.as<PropagateParams>().d : n.as<PropagateParams>().lambda;
        case Kind::detect: {
            const auto& p = n.as<DetectParams>();
            return which == 0 ? p.g : (which == 1 ? p.x0 : p.phi);
        }
        case Kind::transform: {
            const auto& p = n.as<TransformParams>();
            if (p.family == TransformFamily::exp_atten) return p.alpha;
            if (p.family == TransformFamily::log) return p.delta;
            if (p.family == TransformFamily::poly) return p.coeffs[std::size_t(which)];
            if (p.family == TransformFamily::saturate) return which == 0 ? p.x_min : p.x_max;
            return 0.0;
        }
        case Kind::disperse:
            return which == 0 ? n.as<DisperseParams>().alpha : n.as<DisperseParams>().a;
        default:
            return 0.0;
    }
}

void set_scalar(PrimitiveNode& n, int which, double v) {
    switch (n.kind) {
        case Kind::propagate:
            (which == 0 ? n.as<PropagateParams>().d : n.as<PropagateParams>().lambda) = v;
            break;
        case Kind::detect: {
            auto& p = n.as<DetectParams>();
            (which == 0 ? p.g : (which == 1 ? p.x0 : p.phi)) = v;
            break;
        }
        case Kind::transform: {
            auto& p = n.as<TransformParams>();
            if (p.family == TransformFamily::exp_atten)
                p.alpha = v;
            else if (p.family == TransformFamily::log)
                p.delta = std::max(v, 1e-9);
            else if (p.family == TransformFamily::poly)
                p.coeffs[std::size_t(which)] = v;
            else if (p.family == TransformFamily::saturate)
                (which == 0 ? p.x_min : p.x_max) = v;
            break;
        }
        case Kind::disperse:
            (which == 0 ? n.as<DisperseParams>().alpha : n.as<DisperseParams>().a) = v;
            break;
        default:
            break;
    }
}

std::vector<ScalarParam> scalar_params(const std::vector<PrimitiveNode>& chain) {
    std::vector<ScalarParam> out;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        switch (chain[i].kind) {
            case Kind::propagate:
                out.push_back({i, 0, 0.5, 100.0, true});
                out.push_back({i, 1, 0.2, 4.0, true});
                break;
            case Kind::detect: {
                const auto& p = chain[i].as<DetectParams>();
                out.push_back({i, 0, 1e-3, 1e3, true});
                if (p.family == DetectFamily::logarithmic || p.family == DetectFamily::sigmoid)
                    out.push_back({i, 1, 1e-3, 1e3, true});
                if (p.family == DetectFamily::coherent_field)
                    out.push_back({i, 2, 0.0, 6.283185307, false});
                break;
            }
            case Kind::transform: {
                const auto& p = chain[i].as<TransformParams>();
                if (p.family == TransformFamily::exp_atten)
                    out.push_back({i, 0, 1e-3, 10.0, true});
                else if (p.family == TransformFamily::log)
                    out.push_back({i, 0, 1e-6, 10.0, true});
                else if (p.family == TransformFamily::poly)
                    for (int k = 0; k < int(p.coeffs.size()); ++k)
                        out.push_back({i, k, -3.0, 3.0, false});
                else if (p.family == TransformFamily::saturate) {
                    out.push_back({i, 0, -3.0, 0.0, false});
                    out.push_back({i, 1, 0.0, 3.0, false});
                }
                break;
            }
            case Kind::disperse:
                out.push_back({i, 0, -4.0, 4.0, false});
                out.push_back({i, 1, -4.0, 4.0, false});
                break;
            default:
                break;
        }
    }
    return out;
}

double coordinate_descent(Ctx& c, std::vector<PrimitiveNode>& chain, double current) {
    auto params = scalar_params(chain); // sorted by node index by construction
    if (params.empty()) return current;
    // layered prefix cache: entry j holds the intermediates entering node j;
    // adjusting a parameter at node j invalidates strictly deeper layers only
    std::map<std::size_t, std::vector<Field>> layers;
    auto layer_at = [&](std::size_t j) -> const std::vector<Field>& {
        auto it = layers.upper_bound(j);
        std::size_t from = 0;
        const std::vector<Field>* base = c.objects;
        if (it != layers.begin()) {
            --it;
            from = it->first;
            base = &it->second;
        }
        if (from == j) return *base;
        std::vector<Field> zs;
        zs.reserve(base->size());
        for (const auto& z : *base) {
            Field v = z;
            for (std::size_t i = from; i < j; ++i) v = forward(chain[i], v);
            zs.push_back(std::move(v));
        }
        return layers[j] = std::move(zs);
    };
    for (int round = 0; round < 2 && !c.exhausted; ++round) {
        for (const auto& sp : params) {
            const auto& zs = layer_at(sp.node);
            double lo = sp.lo, hi = sp.hi;
            double best_v = get_scalar(chain[sp.node], sp.which);
            for (int level = 0; level < 3 && !c.exhausted; ++level) {
                double local_v = best_v;
                for (int t = 0; t < 7; ++t) {
                    const double f = double(t) / 6.0;
                    const double v = sp.log_scale ? lo * std::pow(hi / lo, f)
                                                  : lo + (hi - lo) * f;
                    set_scalar(chain[sp.node], sp.which, v);
                    const double e = objective_suffix(c, chain, sp.node, zs);
                    if (e < current) {
                        current = e;
                        local_v = v;
                    }
                }
                best_v = local_v;
                set_scalar(chain[sp.node], sp.which, best_v);
                const double span = sp.log_scale ? std::sqrt(hi / lo) : (hi - lo) * 0.25;
                if (sp.log_scale) {
                    lo = std::max(sp.lo, best_v / span);
                    hi = std::min(sp.hi, best_v * span);
                } else {
                    lo = std::max(sp.lo, best_v - span);
                    hi = std::min(sp.hi, best_v + span);
                }
            }
            // this node's parameters may have moved: drop deeper layers
            layers.erase(layers.upper_bound(sp.node), layers.end());
        }
    }
    return current;
}

// -- closed-form fits for a single free-form node --------------------------------

int freeform_index(const std::vector<PrimitiveNode>& chain) {
    for (std::size_t i = 0; i < chain.size(); ++i)
        if (chain[i].kind == Kind::modulate || chain[i].kind == Kind::convolve ||
            chain[i].kind == Kind::scatter)
            return int(i);
    return -1;
}

bool suffix_is_linear(const std::vector<PrimitiveNode>& chain, std::size_t from) {
    for (std::size_t i = from; i < chain.size(); ++i)
        if (!is_linear(chain[i])) return false;
    return true;
}

/// Per-entry closed forms when Modulate is followed by nothing or only the
/// terminal Detect (families 1/4/5).
bool fit_modulate_pointwise(Ctx& c, std::vector<PrimitiveNode>& chain, std::size_t j) {
    if (chain[j].kind != Kind::modulate) return false;
    const bool bare = j + 1 == chain.size();
    const bool with_d = j + 2 == chain.size() && chain.back().kind == Kind::detect;
    if (!bare && !with_d) return false;
    DetectFamily fam = DetectFamily::linear_field;
    double g = 1.0, phi = 0.0;
    if (with_d) {
        const auto& dp = chain.back().as<DetectParams>();
        fam = dp.family;
        g = dp.g;
        phi = dp.phi;
        if (fam == DetectFamily::logarithmic || fam == DetectFamily::sigmoid) return false;
    }
    auto& mp = chain[j].as<ModulateParams>();
    auto zs = intermediates_at(chain, j, *c.objects);
    const TypeInfo mid_t = infer_output_type(chain[j], zs[0].type());
    const std::size_t o_sz = mid_t.size();
    const std::size_t m_sz = mp.m.size();
    const std::size_t z_n = zs[0].size();
    if (m_sz != o_sz) return false; // search patterns always span the output
    const std::size_t z_rep = o_sz / z_n; // input broadcast factor (expansion)

    for (std::size_t e = 0; e < m_sz; ++e) {
        const std::size_t zi = e / z_rep;
        if (fam == DetectFamily::linear_field) {
            cplx num{0, 0};
            double den = 0.0;
            for (std::size_t p = 0; p < zs.size(); ++p) {
                const cplx z = g * zs[p][zi];
                num += std::conj(z) * c.targets[p][e];
                den += std::norm(z);
            }
            mp.m[e] = den > 0 ? num / den : cplx{0, 0};
        } else if (fam == DetectFamily::intensity_square) {
            double num = 0.0, den = 0.0;
            for (std::size_t p = 0; p < zs.size(); ++p) {
                const double zz = std::norm(zs[p][zi]);
                num += c.targets[p][e].real() * zz;
                den += g * zz * zz;
            }
            mp.m[e] = den > 0 ? std::sqrt(std::max(0.0, num / den)) : 0.0;
        } else { // coherent field: linear in (Re m, Im m)
            double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
            const cplx rot{std::cos(phi), std::sin(phi)};
            for (std::size_t p = 0; p < zs.size(); ++p) {
                const cplx w = g * zs[p][zi] * rot;
                const double c1 = w.real(), c2 = -w.imag();
                const double y = c.targets[p][e].real();
                a11 += c1 * c1;
                a12 += c1 * c2;
                a22 += c2 * c2;
                b1 += c1 * y;
                b2 += c2 * y;
            }
            const double det = a11 * a22 - a12 * a12;
            if (std::fabs(det) > 1e-30)
                mp.m[e] = {(b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det};
        }
    }
    mp.m.set_dtype(mp.m.imag_is_zero() ? DType::real64 : DType::complex128);
    return true;
}

/// Least squares for M/C/R parameters through an all-linear suffix.
bool fit_freeform_ls(Ctx& c, std::vector<PrimitiveNode>& chain, std::size_t j) {
    if (!suffix_is_linear(chain, j + 1)) return false;
    auto zs = intermediates_at(chain, j, *c.objects);
    const TypeInfo mid_t = infer_output_type(chain[j], zs[0].type());

    std::size_t n_par = 0;
    if (chain[j].kind == Kind::modulate)
        n_par = chain[j].as<ModulateParams>().m.size();
    else if (chain[j].kind == Kind::convolve)
        n_par = chain[j].as<ConvolveParams>().h.size();
    else
        n_par = chain[j].as<ScatterParams>().kernel.size();
    if (n_par > 2048) return false;

    // materialize the linear suffix once; basis responses then cost a scaled
    // matrix column (Modulate basis patterns are single-sparse) or one matvec
    const std::size_t mid_dim = mid_t.size();
    bool have_post = j + 1 < chain.size();
    DenseMatrix post_mat;
    if (have_post) {
        std::vector<LinOp> stages;
        TypeInfo cur = mid_t;
        for (std::size_t i = j + 1; i < chain.size(); ++i) {
            PrimitiveNode n = chain[i];
            n.in_type = cur;
            stages.push_back(node_linop(n, cur));
            cur = stages.back().out_type;
        }
        LinOp post = chain_linop(StageChain{stages});
        if (mid_dim > 4096) return false;
        post_mat = materialize(post, 4096);
        c.evals += mid_dim / 4 + 1;
        if (c.evals >= c.budget->eval_cap) c.exhausted = true;
    }
    const std::size_t out_dim = have_post ? post_mat.rows : mid_dim;
    if (out_dim != c.targets[0].size()) return false;

    const std::size_t rows = c.objects->size() * out_dim;
    Eigen::MatrixXcd G(rows, n_par);
    Eigen::VectorXcd y(rows);
    const std::size_t z_rep =
        chain[j].kind == Kind::modulate ? mid_dim / zs[0].size() : 1;
    for (std::size_t p = 0; p < zs.size(); ++p) {
        if (chain[j].kind == Kind::modulate) {
            // basis pattern e_par gives mid = z_broadcast[par] * e_par
            for (std::size_t par = 0; par < n_par; ++par) {
                const cplx zval = zs[p][par / z_rep];
                if (have_post) {
                    for (std::size_t r = 0; r < out_dim; ++r)
                        G(long(p * out_dim + r), long(par)) = zval * post_mat.at(r, par);
                } else {
                    for (std::size_t r = 0; r < out_dim; ++r)
                        G(long(p * out_dim + r), long(par)) = (r == par) ? zval : cplx{0, 0};
                }
            }
        } else {
            for (std::size_t par = 0; par < n_par; ++par) {
                PrimitiveNode probe = chain[j];
                probe.in_type = zs[p].type();
                if (probe.kind == Kind::convolve) {
                    auto& h = probe.as<ConvolveParams>().h;
                    h.set_dtype(DType::real64);
                    for (std::size_t i = 0; i < h.size(); ++i) h[i] = (i == par) ? 1.0 : 0.0;
                } else {
                    auto& k = probe.as<ScatterParams>().kernel;
                    for (auto& v : k) v = 0.0;
                    k[par] = 1.0;
                }
                Field mid = forward(probe, zs[p]);
                if (have_post) {
                    for (std::size_t r = 0; r < out_dim; ++r) {
                        cplx acc{0, 0};
                        for (std::size_t m = 0; m < mid_dim; ++m)
                            acc += post_mat.at(r, m) * mid[m];
                        G(long(p * out_dim + r), long(par)) = acc;
                    }
                } else {
                    for (std::size_t r = 0; r < out_dim; ++r)
                        G(long(p * out_dim + r), long(par)) = mid[r];
                }
            }
        }
        c.evals += n_par / 8 + 1;
        if (c.evals >= c.budget->eval_cap) c.exhausted = true;
        for (std::size_t r = 0; r < out_dim; ++r)
            y(long(p * out_dim + r)) = c.targets[p][r];
    }
    Eigen::VectorXcd theta =
        (G.adjoint() * G +
         1e-12 * Eigen::MatrixXcd::Identity(long(n_par), long(n_par)))
            .ldlt()
            .solve(G.adjoint() * y);

    if (chain[j].kind == Kind::modulate) {
        auto& m = chain[j].as<ModulateParams>().m;
        m.set_dtype(DType::complex128);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = theta(long(i));
        if (m.imag_is_zero()) m.set_dtype(DType::real64);
    } else if (chain[j].kind == Kind::convolve) {
        auto& h = chain[j].as<ConvolveParams>().h;
        h.set_dtype(DType::complex128);
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = theta(long(i));
        if (h.imag_is_zero()) h.set_dtype(DType::real64);
    } else {
        auto& k = chain[j].as<ScatterParams>().kernel;
        for (std::size_t i = 0; i < k.size(); ++i) k[i] = theta(long(i)).real();
    }
    return true;
}

void fit_candidate(Ctx& c, std::vector<PrimitiveNode> chain) {
    ++c.topologies;
    double e = objective(c, chain);
    const int ff = freeform_index(chain);
    auto consider = [&](double val, const std::vector<PrimitiveNode>& ch) {
        if (val < c.best) {
            c.best = val;
            c.best_chain = ch;
        }
    };
    consider(e, chain);
    for (std::size_t restart = 0; restart <= c.budget->restarts && !c.exhausted; ++restart) {
        if (restart > 0) {
            for (auto& sp : scalar_params(chain)) {
                const double f = c.rng.uniform();
                const double v = sp.log_scale ? sp.lo * std::pow(sp.hi / sp.lo, f)
                                              : sp.lo + (sp.hi - sp.lo) * f;
                set_scalar(chain[sp.node], sp.which, v);
            }
        }
        double cur = objective(c, chain);
        for (int round = 0; round < 2 && !c.exhausted; ++round) {
            if (ff >= 0) {
                if (!fit_modulate_pointwise(c, chain, std::size_t(ff)))
                    fit_freeform_ls(c, chain, std::size_t(ff));
                cur = objective(c, chain);
                consider(cur, chain);
            }
            cur = coordinate_descent(c, chain, cur);
            consider(cur, chain);
        }
        const double now = objective(c, chain);
        consider(now, chain);
        if (c.best < 1e-10) break; // essentially exact already
    }
}

std::vector<PrimitiveNode> kind_variants(Ctx& c, Kind kind, const TypeInfo& cur) {
    std::vector<PrimitiveNode> out;
    const EdgeType& target = c.out_edge;
    switch (kind) {
        case Kind::detect: {
            for (int fam : {1, 2, 3, 4, 5}) {
                if (fam != 1 && target.dtype == DType::complex128) continue;
                DetectParams dp;
                dp.family = static_cast<DetectFamily>(fam);
                out.push_back(make_node(0, Kind::detect, dp));
            }
            break;
        }
        case Kind::modulate: {
            ModulateParams mp;
            TypeInfo pt = cur;
            pt.dtype = DType::real64;
            pt.units = "au";
            mp.m = Field(pt);
            for (std::size_t i = 0; i < mp.m.size(); ++i) mp.m[i] = 1.0;
            out.push_back(make_node(0, Kind::modulate, mp));
            if (cur.rank() < target.shape.size()) {
                bool prefix = true;
                for (std::size_t a = 0; a < cur.rank(); ++a)
                    prefix = prefix && cur.axes[a].extent == target.shape[a];
                if (prefix) {
                    TypeInfo et = pt;
                    for (std::size_t a = cur.rank(); a < target.shape.size(); ++a)
                        et.axes.push_back({"b" + std::to_string(a), target.shape[a]});
                    ModulateParams me;
                    me.m = Field(et);
                    for (std::size_t i = 0; i < me.m.size(); ++i) me.m[i] = 1.0;
                    out.push_back(make_node(0, Kind::modulate, me));
                }
            }
            break;
        }
        case Kind::convolve: {
            if (cur.rank() >= 2 && cur.axes[0].extent >= 5 && cur.axes[1].extent >= 5) {
                TypeInfo ht{{{cur.axes[0].name, 5}, {cur.axes[1].name, 5}}, DType::real64, "au"};
                ConvolveParams cp;
                cp.h = Field(ht);
                cp.h[12] = 1.0; // identity kernel
                out.push_back(make_node(0, Kind::convolve, cp));
            } else if (cur.rank() == 1 && cur.axes[0].extent >= 5) {
                TypeInfo ht{{{cur.axes[0].name, 5}}, DType::real64, "au"};
                ConvolveParams cp;
                cp.h = Field(ht);
                cp.h[2] = 1.0;
                out.push_back(make_node(0, Kind::convolve, cp));
            }
            break;
        }
        case Kind::propagate: {
            if (cur.dtype == DType::complex128 && cur.rank() >= 2)
                out.push_back(
                    make_node(0, Kind::propagate, PropagateParams{10.0, 0.5, 1.0, 1.0}));
            break;
        }
        case Kind::project: {
            if (cur.rank() >= 2 && target.shape.size() >= 2) {
                ProjectParams pp;
                const std::size_t na = target.shape[0], nd = target.shape[1];
                for (std::size_t a = 0; a < na; ++a)
                    pp.thetas.push_back(M_PI * double(a) / double(na));
                pp.n_det = nd;
                pp.pixel_size = 2.0 / double(cur.axes[1].extent);
                out.push_back(make_node(0, Kind::project, pp));
            }
            break;
        }
        case Kind::encode: {
            if (cur.rank() == 2 && target.shape.size() == 1 &&
                target.dtype == DType::complex128) {
                EncodeParams ep;
                ep.normalize = true;
                Rng r = c.rng.child("encode-init");
                for (std::size_t jj = 0; jj < target.shape[0]; ++jj)
                    ep.ktraj.push_back(
                        {r.uniform(-double(cur.axes[0].extent) / 2,
                                   double(cur.axes[0].extent) / 2),
                         r.uniform(-double(cur.axes[1].extent) / 2,
                                   double(cur.axes[1].extent) / 2)});
                out.push_back(make_node(0, Kind::encode, ep));
            }
            break;
        }
        case Kind::accumulate: {
            if (cur.rank() > 1)
                for (const auto& ax : cur.axes)
                    out.push_back(make_node(0, Kind::accumulate, AccumulateParams{ax.name}));
            break;
        }
        case Kind::sample: {
            SampleParams sp;
            for (std::size_t i = 0; i < cur.size(); ++i) sp.omega.push_back(i);
            out.push_back(make_node(0, Kind::sample, sp));
            break;
        }
        case Kind::disperse: {
            if (cur.rank() >= 3) {
                DisperseParams wp;
                wp.axis = cur.axes[1].name;
                wp.spectral_axis = cur.axes.back().name;
                for (std::size_t jj = 0; jj < cur.axes.back().extent; ++jj)
                    wp.lambdas.push_back(double(jj));
                wp.alpha = 1.0;
                out.push_back(make_node(0, Kind::disperse, wp));
            }
            break;
        }
        case Kind::scatter: {
            const std::size_t ne = cur.rank() ? cur.axes.back().extent : 0;
            if (cur.rank() >= 2 && ne >= 2 && ne <= 32) {
                ScatterParams rp;
                rp.n_in = ne;
                rp.n_out = ne;
                rp.kernel.assign(ne * ne, 0.0);
                for (std::size_t i = 0; i < ne; ++i) rp.at(i, i) = 1.0;
                out.push_back(make_node(0, Kind::scatter, rp));
            }
            break;
        }
        case Kind::transform: {
            for (int fam : {1, 3, 4, 5}) { // log excluded: sign-indefinite fields
                TransformParams tp;
                tp.family = static_cast<TransformFamily>(fam);
                tp.alpha = 1.0;
                tp.delta = 0.05;
                if (tp.family == TransformFamily::poly) tp.coeffs = {0.0, 1.0, 0.1};
                tp.x_min = -1.0;
                tp.x_max = 1.0;
                out.push_back(make_node(0, Kind::transform, tp));
            }
            break;
        }
        case Kind::linearized:
            break;
    }
    return out;
}

void enumerate(Ctx& c, std::vector<PrimitiveNode>& chain, const TypeInfo& cur, int freeforms) {
    if (c.exhausted) return;
    if (chain.size() == c.exact_len) {
        if (shapes_match(cur, c.out_edge)) fit_candidate(c, chain);
        return;
    }
    if (!chain.empty() && chain.back().kind == Kind::detect) return; // Detect is terminal

    for (Kind kind : c.budget->allowed_kinds) {
        const bool is_ff =
            kind == Kind::modulate || kind == Kind::convolve || kind == Kind::scatter;
        if (is_ff && freeforms >= 1) continue;
        for (auto& cand : kind_variants(c, kind, cur)) {
            TypeInfo next;
            PrimitiveNode node = cand;
            node.id = int(chain.size()) + 1;
            node.in_type = cur;
            try {
                next = infer_output_type(node, cur);
            } catch (const Error&) {
                continue;
            }
            chain.push_back(node);
            enumerate(c, chain, next, freeforms + (is_ff ? 1 : 0));
            chain.pop_back();
            if (c.exhausted) return;
        }
    }
}

} // namespace

SearchResult extension_search(const Apply& target, const TypeInfo& in_type,
                              const std::vector<Field>& objects, const SearchBudget& budget,
                              std::uint64_t seed, double delta_guard) {
    if (budget.allowed_kinds.empty()) throw Error("extension_search: allowed_kinds is empty");
    if (budget.max_nodes > budget.n_max)
        throw Error("extension_search: max_nodes exceeds N_max");
    if (objects.empty()) throw Error("extension_search: empty probe set");
    Ctx c;
    c.objects = &objects;
    c.in_type = in_type;
    c.budget = &budget;
    c.delta_guard = delta_guard;
    c.rng = Rng(seed).child("extension-search");
    for (const auto& x : objects) c.targets.push_back(target(x));
    c.out_edge = c.targets.front().type().edge_type();

    for (std::size_t len = 1; len <= budget.max_nodes && !c.exhausted; ++len) {
        c.exact_len = len;
        std::vector<PrimitiveNode> chain;
        enumerate(c, chain, in_type, 0);
        if (c.best < 1e-10) break; // exact representation found early
    }

    SearchResult res;
    res.min_e_img = c.best;
    res.found = std::isfinite(c.best);
    res.budget_exhausted = c.exhausted;
    res.topologies_tried = c.topologies;
    res.evals_used = c.evals;
    if (res.found && !c.best_chain.empty()) {
        for (const auto& n : c.best_chain) res.best_chain.push_back(kind_letter(n.kind));
        res.best_graph = chain_graph(in_type, c.best_chain);
    }
    return res;
}

} // namespace opg
