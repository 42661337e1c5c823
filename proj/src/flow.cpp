#include "mdmc/flow.hpp"

#include "mdmc/parallel.hpp"
#include "mdmc/spectral.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace mdmc {

Matching sample_state(const ExactDistribution& dist, Rng& rng) {
    double u = rng.uniform();
    auto it = std::upper_bound(dist.cdf.begin(), dist.cdf.end(), u);
    size_t i = static_cast<size_t>(it - dist.cdf.begin());
    if (i >= dist.states.size()) i = dist.states.size() - 1;
    return dist.states[i];
}

Matching approx_sample_matching(const MonomerDimerModel& model, const Pinning& pinning,
                                long burnin, Rng& rng) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Matching x = model.graph.empty_set();
        for (long t = 0; t < burnin; ++t)
            if (rng.uniform() < 0.5) x = js_step(model, Pinning{}, x, rng);
        if (pinning.consistent_with(x)) return x;
    }
    throw std::runtime_error("rejection sampler exhausted its retry budget");
}

namespace {

// Support test for the coupling at e: x xor y must be one alternating
// component (path or even cycle) containing e, with x_e=0, y_e=1.
std::optional<DiffComponent> coupling_support_component(const Graph& g, const Matching& x,
                                                        const Matching& y, int e) {
    if (x.test(e) || !y.test(e)) return std::nullopt;
    auto comps = symmetric_difference_components(g, x, y);
    if (comps.size() != 1 || comps[0].kind == ComponentKind::Other) return std::nullopt;
    if (!comps[0].edges.test(e)) return std::nullopt;
    return comps[0];
}

struct PairKeyHash {
    size_t operator()(const std::pair<Matching, Matching>& p) const {
        return p.first.hash() * 1000003u ^ p.second.hash();
    }
};

Rat conditional_marginal_one(const ExactDistribution& d0, const ExactDistribution& d1) {
    return d1.z / (d0.z + d1.z);
}

}  // namespace

CouplingSampler::CouplingSampler(const MonomerDimerModel& model, const Pinning& pinning, int e,
                                 long cap)
    : graph_(&model.graph), e_(e) {
    Pinning p0, p1;
    try {
        p0 = pinning.extended(model, e, 0);
        p1 = pinning.extended(model, e, 1);
    } catch (const InfeasiblePinningError&) {
        throw std::invalid_argument("coupling edge must be feasible for both spins");
    }
    d0_ = enumerate(model, p0, cap);
    d1_ = enumerate(model, p1, cap);
}

CouplingSample CouplingSampler::sample(Rng& rng) const {
    Matching y = sample_state(d1_, rng);
    Matching z = sample_state(d0_, rng);
    auto comps = symmetric_difference_components(*graph_, y, z);
    auto b = component_containing(comps, e_);
    CouplingSample s;
    s.e = e_;
    s.y = y;
    s.b = *b;  // e always disagrees between y and z
    s.x = y ^ s.b.edges;
    return s;
}

CouplingSample sample_local_flipping_coupling(const MonomerDimerModel& model,
                                              const Pinning& pinning, int e, Rng& rng, long cap) {
    return CouplingSampler(model, pinning, e, cap).sample(rng);
}

namespace {

void apply_move(const Graph& g, TransportPath& path, MoveKind kind, int proposal_edge,
                int expect_removed) {
    const Matching& cur = path.states.back();
    Proposal p = js_propose(g, cur, proposal_edge);
    bool ok = p.move == kind;
    if (kind == MoveKind::Exchange && p.removed_edge != expect_removed) ok = false;
    if (!ok) throw std::logic_error("canonical path step is not a legal transition");
    path.states.push_back(p.candidate);
    path.moves.push_back(kind);
}

}  // namespace

TransportPath canonical_path_between(const MonomerDimerModel& model, const Matching& x,
                                     const Matching& y) {
    const Graph& g = model.graph;
    auto comps = symmetric_difference_components(g, x, y);
    if (comps.size() != 1 || comps[0].kind == ComponentKind::Other)
        throw std::invalid_argument("difference is not a single alternating path or even cycle");
    const DiffComponent& b = comps[0];
    int size = b.edges.count();

    std::vector<int> ordered;
    bool is_cycle = b.kind == ComponentKind::EvenCycle;
    if (!is_cycle) {
        int p = b.endpoint_vertices[0], q = b.endpoint_vertices[1];
        int w_star = g.vertex_greater(p, q) ? p : q;
        ordered = b.ordered_edges(g, w_star);
    } else {
        // Largest vertex of the cycle; its unique x-edge starts the walk.
        int w_star = -1;
        b.edges.for_each([&](int e) {
            for (int v : {g.edge(e).u, g.edge(e).v})
                if (w_star < 0 || g.vertex_greater(v, w_star)) w_star = v;
        });
        int e1 = -1, other_at_wstar = -1;
        for (int e : g.incident_edges(w_star)) {
            if (!b.edges.test(e)) continue;
            (x.test(e) ? e1 : other_at_wstar) = e;
        }
        if (e1 < 0)
            throw std::logic_error(
                "alternating cycle has no x-edge at its largest vertex; decomposition is broken");
        (void)other_at_wstar;
        ordered.push_back(e1);
        int prev = e1;
        int cur = g.edge(e1).other(w_star);  // the direction w_star -> w
        while (cur != w_star) {
            int next = -1;
            for (int e : g.incident_edges(cur))
                if (b.edges.test(e) && e != prev) { next = e; break; }
            ordered.push_back(next);
            prev = next;
            cur = g.edge(next).other(cur);
        }
    }

    TransportPath path;
    path.states.push_back(x);
    if (is_cycle) {
        apply_move(g, path, MoveKind::Down, ordered[0], -1);
        for (int i = 1; i <= size / 2 - 1; ++i)
            apply_move(g, path, MoveKind::Exchange, ordered[2 * i - 1], ordered[2 * i]);
        apply_move(g, path, MoveKind::Up, ordered[size - 1], -1);
    } else if (x.test(ordered[0])) {
        apply_move(g, path, MoveKind::Down, ordered[0], -1);
        for (int i = 1; 2 * i + 1 <= size; ++i)
            apply_move(g, path, MoveKind::Exchange, ordered[2 * i - 1], ordered[2 * i]);
        if (size % 2 == 0) apply_move(g, path, MoveKind::Up, ordered[size - 1], -1);
    } else {
        for (int i = 1; 2 * i <= size; ++i)
            apply_move(g, path, MoveKind::Exchange, ordered[2 * i - 2], ordered[2 * i - 1]);
        if (size % 2 == 1) apply_move(g, path, MoveKind::Up, ordered[size - 1], -1);
    }
    if (!(path.states.back() == y)) throw std::logic_error("canonical path missed its target");
    return path;
}

TransportPath canonical_path(const MonomerDimerModel& model, const Matching& x, const Matching& y,
                             int e) {
    if (!coupling_support_component(model.graph, x, y, e))
        throw std::invalid_argument(
            "canonical_path requires x_e=0, y_e=1 and a single alternating component through e");
    return canonical_path_between(model, x, y);
}

TransportPath sample_transport_flow(const MonomerDimerModel& model, const Pinning& pinning, int e,
                                    Rng& rng, long cap) {
    CouplingSample s = sample_local_flipping_coupling(model, pinning, e, rng, cap);
    return canonical_path_between(model, s.x, s.y);
}

int CouplingLaw::find(const Matching& x, const Matching& y) const {
    for (size_t i = 0; i < pairs.size(); ++i)
        if (pairs[i].first == x && pairs[i].second == y) return static_cast<int>(i);
    return -1;
}

Rat CouplingLaw::prob(const Matching& x, const Matching& y) const {
    int i = find(x, y);
    return i < 0 ? Rat(0) : probs[i];
}

CouplingLaw coupling_law_exact(const MonomerDimerModel& model, const Pinning& pinning, int e,
                               long cap) {
    ExactDistribution d0 = enumerate(model, pinning.extended(model, e, 0), cap);
    ExactDistribution d1 = enumerate(model, pinning.extended(model, e, 1), cap);
    CouplingLaw law;
    law.e = e;
    law.marginal_one = conditional_marginal_one(d0, d1);
    law.marginal_zero = Rat(1) - law.marginal_one;
    // The boundary-window factor depends only on (B, x restricted to B).
    std::unordered_map<std::pair<Matching, Matching>, Rat, PairKeyHash> window_cache;
    for (int xi = 0; xi < d0.size(); ++xi) {
        const Matching& x = d0.states[xi];
        for (int yi = 0; yi < d1.size(); ++yi) {
            const Matching& y = d1.states[yi];
            auto b = coupling_support_component(model.graph, x, y, e);
            if (!b) continue;
            auto key = std::make_pair(b->edges, x & b->edges);
            auto it = window_cache.find(key);
            if (it == window_cache.end()) {
                EdgeSet window = inclusive_boundary(model.graph, b->edges);
                it = window_cache.emplace(key, d0.window_probability(window, x)).first;
            }
            law.pairs.emplace_back(x, y);
            law.probs.push_back(it->second * d1.probs[yi]);
        }
    }
    return law;
}

CouplingLaw coupling_law_by_pair_enumeration(const MonomerDimerModel& model,
                                             const Pinning& pinning, int e, long cap) {
    ExactDistribution d0 = enumerate(model, pinning.extended(model, e, 0), cap);
    ExactDistribution d1 = enumerate(model, pinning.extended(model, e, 1), cap);
    std::unordered_map<std::pair<Matching, Matching>, Rat, PairKeyHash> accum;
    for (int yi = 0; yi < d1.size(); ++yi) {
        const Matching& y = d1.states[yi];
        for (int zi = 0; zi < d0.size(); ++zi) {
            const Matching& z = d0.states[zi];
            auto comps = symmetric_difference_components(model.graph, y, z);
            auto b = component_containing(comps, e);
            Matching x = y ^ b->edges;
            accum[{x, y}] += d1.probs[yi] * d0.probs[zi];
        }
    }
    CouplingLaw law;
    law.e = e;
    law.marginal_one = conditional_marginal_one(d0, d1);
    law.marginal_zero = Rat(1) - law.marginal_one;
    // Order pairs exactly like the direct construction: x-major, y-minor.
    std::vector<std::pair<std::pair<int, int>, std::pair<Matching, Matching>>> ordered;
    for (const auto& [pair, p] : accum) {
        int xi = d0.index_of(pair.first);
        int yi = d1.index_of(pair.second);
        ordered.push_back({{xi, yi}, pair});
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [key, pair] : ordered) {
        law.probs.push_back(accum[pair]);
        law.pairs.push_back(std::move(pair));
    }
    return law;
}

bool coupling_laws_equal(const CouplingLaw& a, const CouplingLaw& b) {
    return a.e == b.e && a.pairs == b.pairs && a.probs == b.probs &&
           a.marginal_zero == b.marginal_zero && a.marginal_one == b.marginal_one;
}

Rat coupling_probability(const MonomerDimerModel& model, const Pinning& pinning, int e,
                         const Matching& x, const Matching& y, long cap) {
    auto b = coupling_support_component(model.graph, x, y, e);
    if (!b) return 0;
    ExactDistribution d0 = enumerate(model, pinning.extended(model, e, 0), cap);
    ExactDistribution d1 = enumerate(model, pinning.extended(model, e, 1), cap);
    int yi = d1.index_of(y);
    int xi = d0.index_of(x);
    if (xi < 0 || yi < 0) return 0;
    EdgeSet window = inclusive_boundary(model.graph, b->edges);
    return d0.window_probability(window, x) * d1.probs[yi];
}

bool verify_coupling_marginals(const MonomerDimerModel& model, const Pinning& pinning, int e,
                               long cap) {
    ExactDistribution d0 = enumerate(model, pinning.extended(model, e, 0), cap);
    ExactDistribution d1 = enumerate(model, pinning.extended(model, e, 1), cap);
    CouplingLaw law = coupling_law_exact(model, pinning, e, cap);
    std::unordered_map<Matching, Rat, EdgeSetHash> mx, my;
    Rat total = 0;
    for (size_t i = 0; i < law.pairs.size(); ++i) {
        mx[law.pairs[i].first] += law.probs[i];
        my[law.pairs[i].second] += law.probs[i];
        total += law.probs[i];
    }
    if (total != 1) return false;
    for (int i = 0; i < d0.size(); ++i)
        if (mx[d0.states[i]] != d0.probs[i]) return false;
    for (int i = 0; i < d1.size(); ++i)
        if (my[d1.states[i]] != d1.probs[i]) return false;
    return true;
}

namespace {

std::string state_str(const Matching& s) {
    std::string out = "{";
    bool first = true;
    s.for_each([&](int e) {
        if (!first) out += " ";
        out += std::to_string(e);
        first = false;
    });
    return out + "}";
}

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::string FlowStats::congestion_csv() const {
    std::ostringstream os;
    os << "alpha,beta,lhs,rhs,ratio\n";
    for (const auto& row : congestion_rows)
        os << state_str(row.alpha) << "," << state_str(row.beta) << "," << rat_str(row.lhs) << ","
           << rat_str(row.rhs) << "," << fmt_double(row.ratio()) << "\n";
    return os.str();
}

std::string FlowStats::to_json() const {
    nlohmann::ordered_json j;
    j["mode"] = mode == StatsMode::Exact ? "exact" : "monte_carlo";
    j["expected_sq_length"] = rat_str(expected_sq_length);
    j["expected_sq_discrepancy"] = rat_str(expected_sq_discrepancy);
    j["congestion_kappa"] = rat_str(congestion_kappa);
    j["strong_kappa"] = rat_str(strong_kappa);
    if (mode == StatsMode::MonteCarlo) {
        j["samples_per_edge"] = samples_per_edge;
        j["sq_length_stderr"] = sq_length_stderr;
        j["kappa_is_lower_bound"] = true;
    }
    j["per_edge"] = nlohmann::ordered_json::array();
    for (const auto& row : per_edge) {
        nlohmann::ordered_json r;
        r["e"] = row.e;
        r["expected_sq_length"] = rat_str(row.expected_sq_length);
        r["expected_sq_discrepancy"] = rat_str(row.expected_sq_discrepancy);
        j["per_edge"].push_back(std::move(r));
    }
    return j.dump(2);
}

FlowStats flow_statistics(const MonomerDimerModel& model, const Pinning& pinning, StatsMode mode,
                          long samples_per_edge, uint64_t seed, long cap) {
    TransitionKernel kernel = transition_kernel(model, pinning, ChainKind::JS, cap);
    EdgeSet two_sided = free_support_edges(model, pinning);
    std::vector<int> edges = two_sided.indices();

    FlowStats stats;
    stats.mode = mode;
    stats.expected_sq_length = 0;
    stats.expected_sq_discrepancy = 0;
    stats.congestion_kappa = 0;
    stats.strong_kappa = 0;
    if (edges.empty()) return stats;

    struct EdgeAccum {
        Rat sq_len = 0, sq_disc = 0;
        std::map<std::pair<int, int>, Rat> weak, strong;  // transition loads
        double mc_mean = 0, mc_err = 0;
    };
    std::vector<EdgeAccum> acc(edges.size());

    parallel_for(edges.size(), [&](size_t idx) {
        int e = edges[idx];
        EdgeAccum& a = acc[idx];
        if (mode == StatsMode::Exact) {
            CouplingLaw law = coupling_law_exact(model, pinning, e, cap);
            Rat mm = law.marginal_zero * law.marginal_one;
            for (size_t i = 0; i < law.pairs.size(); ++i) {
                const auto& [x, y] = law.pairs[i];
                TransportPath path = canonical_path_between(model, x, y);
                Rat len = path.length();
                Rat disc = (x ^ y).count();
                a.sq_len += law.probs[i] * len * len;
                a.sq_disc += law.probs[i] * disc * disc;
                for (int s = 0; s < path.length(); ++s) {
                    int i0 = kernel.dist.index_of(path.states[s]);
                    int i1 = kernel.dist.index_of(path.states[s + 1]);
                    a.weak[{i0, i1}] += mm * law.probs[i] / len;
                    a.strong[{i0, i1}] += mm * law.probs[i] * len;
                }
            }
        } else {
            ExactDistribution d0 = enumerate(model, pinning.extended(model, e, 0), cap);
            ExactDistribution d1 = enumerate(model, pinning.extended(model, e, 1), cap);
            Rat mm = conditional_marginal_one(d0, d1) * (1 - conditional_marginal_one(d0, d1));
            Rng rng(split_seed(seed, 100 + e));
            double s1 = 0, s2 = 0;
            std::map<std::pair<int, int>, std::pair<double, double>> loads;
            for (long t = 0; t < samples_per_edge; ++t) {
                Matching y = sample_state(d1, rng);
                Matching z = sample_state(d0, rng);
                auto comps = symmetric_difference_components(model.graph, y, z);
                auto b = component_containing(comps, e);
                Matching x = y ^ b->edges;
                TransportPath path = canonical_path_between(model, x, y);
                double l2 = static_cast<double>(path.length()) * path.length();
                s1 += l2;
                s2 += l2 * l2;
                for (int s = 0; s < path.length(); ++s) {
                    int i0 = kernel.dist.index_of(path.states[s]);
                    int i1 = kernel.dist.index_of(path.states[s + 1]);
                    auto& l = loads[{i0, i1}];
                    l.first += 1.0 / path.length();
                    l.second += path.length();
                }
            }
            double n = static_cast<double>(samples_per_edge);
            a.mc_mean = s1 / n;
            a.mc_err = std::sqrt(std::max(0.0, s2 / n - (s1 / n) * (s1 / n)) / n);
            // Empirical per-transition loads, dyadic-exact from the doubles.
            for (auto& [key, l] : loads) {
                a.weak[key] = mm * Rat(l.first / n);
                a.strong[key] = mm * Rat(l.second / n);
            }
            a.sq_len = Rat(a.mc_mean);
            double d1s = 0;
            Rng rng2(split_seed(seed, 300 + e));
            for (long t = 0; t < samples_per_edge; ++t) {
                Matching y = sample_state(d1, rng2);
                Matching z = sample_state(d0, rng2);
                auto comps = symmetric_difference_components(model.graph, y, z);
                auto b = component_containing(comps, e);
                double c = b->edges.count();
                d1s += c * c;
            }
            a.sq_disc = Rat(d1s / n);
        }
    });

    std::map<std::pair<int, int>, Rat> weak, strong;
    for (size_t idx = 0; idx < edges.size(); ++idx) {
        stats.per_edge.push_back({edges[idx], acc[idx].sq_len, acc[idx].sq_disc});
        if (acc[idx].sq_len > stats.expected_sq_length) stats.expected_sq_length = acc[idx].sq_len;
        if (acc[idx].sq_disc > stats.expected_sq_discrepancy)
            stats.expected_sq_discrepancy = acc[idx].sq_disc;
        for (const auto& [k, v] : acc[idx].weak) weak[k] += v;
        for (const auto& [k, v] : acc[idx].strong) strong[k] += v;
        stats.samples_per_edge = samples_per_edge;
        stats.sq_length_stderr = std::max(stats.sq_length_stderr, acc[idx].mc_err);
    }
    for (const auto& [key, lhs] : weak) {
        Rat rhs = kernel.dist.probs[key.first] * kernel.matrix.at(key.first, key.second);
        CongestionRow row{kernel.dist.states[key.first], kernel.dist.states[key.second], lhs, rhs};
        if (rhs > 0 && lhs / rhs > stats.congestion_kappa) stats.congestion_kappa = lhs / rhs;
        stats.congestion_rows.push_back(std::move(row));
    }
    for (const auto& [key, lhs] : strong) {
        Rat rhs = kernel.dist.probs[key.first] * kernel.matrix.at(key.first, key.second);
        CongestionRow row{kernel.dist.states[key.first], kernel.dist.states[key.second], lhs, rhs};
        if (rhs > 0 && lhs / rhs > stats.strong_kappa) stats.strong_kappa = lhs / rhs;
        stats.strong_congestion_rows.push_back(std::move(row));
    }
    return stats;
}

double one_sided_moments(const MonomerDimerModel& model, int e, double p, ConditionSide side,
                         StatsMode mode, long samples, uint64_t seed, long cap) {
    if (mode == StatsMode::Exact) {
        CouplingLaw law = coupling_law_exact(model, {}, e, cap);
        std::unordered_map<Matching, std::pair<double, double>, EdgeSetHash> groups;
        for (size_t i = 0; i < law.pairs.size(); ++i) {
            const Matching& key =
                side == ConditionSide::FixX ? law.pairs[i].first : law.pairs[i].second;
            double w = to_double(law.probs[i]);
            double disc = (law.pairs[i].first ^ law.pairs[i].second).count();
            auto& g = groups[key];
            g.first += w * std::pow(disc, p);
            g.second += w;
        }
        double best = 0;
        for (const auto& [key, g] : groups) best = std::max(best, g.first / g.second);
        return best;
    }
    Rng rng(split_seed(seed, 500 + e));
    CouplingSampler sampler(model, {}, e, cap);
    std::unordered_map<Matching, std::pair<double, double>, EdgeSetHash> groups;
    for (long t = 0; t < samples; ++t) {
        CouplingSample s = sampler.sample(rng);
        const Matching& key = side == ConditionSide::FixX ? s.x : s.y;
        auto& g = groups[key];
        g.first += std::pow(static_cast<double>(s.b.edges.count()), p);
        g.second += 1;
    }
    double best = 0;
    for (const auto& [key, g] : groups)
        if (g.second >= 10) best = std::max(best, g.first / g.second);
    return best;
}

namespace {

// Acklam's rational approximation of the standard normal quantile.
double inverse_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    if (p <= 0) return -1e18;
    if (p >= 1) return 1e18;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        double q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

}  // namespace

double geometric_rate_two_sided(const MonomerDimerModel& model) {
    double lam_delta = to_double(model.lambda) * model.graph.max_degree();
    return 2.0 / (1.0 + std::sqrt(1.0 + lam_delta));
}

double geometric_rate_one_sided(const MonomerDimerModel& model) {
    double lam_delta = to_double(model.lambda) * model.graph.max_degree();
    return 1.0 / (1.0 + lam_delta);
}

GeometricTailReport geometric_tail_check(const MonomerDimerModel& model, int e, long samples,
                                         Rng& rng, long min_group, long cap) {
    const Graph& g = model.graph;
    GeometricTailReport rep;
    rep.q = geometric_rate_two_sided(model);

    Pinning none;
    ExactDistribution d0 = enumerate(model, none.extended(model, e, 0), cap);
    ExactDistribution d1 = enumerate(model, none.extended(model, e, 1), cap);

    int u = g.edge(e).u, v = g.edge(e).v;
    // Histograms of |P_u| keyed by the conditioning path P_v.
    std::map<std::vector<int>, std::map<int, long>> hist;
    for (long t = 0; t < samples; ++t) {
        Matching y = sample_state(d1, rng);
        Matching z = sample_state(d0, rng);
        auto comps = symmetric_difference_components(g, y, z);
        auto b = component_containing(comps, e);
        if (b->kind != ComponentKind::Path) continue;
        ++rep.path_samples;
        EdgeSet rest = b->edges;
        rest.set(e, false);
        auto side_of = [&](int start) {
            std::vector<int> edges_out;
            int cur = start, prev = e;
            for (;;) {
                int next = -1;
                for (int f : g.incident_edges(cur))
                    if (rest.test(f) && f != prev) { next = f; break; }
                if (next < 0) break;
                edges_out.push_back(next);
                prev = next;
                cur = g.edge(next).other(cur);
            }
            return edges_out;
        };
        std::vector<int> pu = side_of(u), pv = side_of(v);
        std::sort(pv.begin(), pv.end());
        ++hist[pv][static_cast<int>(pu.size())];
    }

    // Count tests first so the threshold can be Bonferroni-corrected.
    struct Group {
        const std::map<int, long>* h;
        long n;
        int kmax;
    };
    std::vector<Group> groups;
    for (const auto& [key, h] : hist) {
        long n = 0;
        int maxlen = 0;
        for (const auto& [len, cnt] : h) {
            n += cnt;
            maxlen = std::max(maxlen, len);
        }
        if (n < min_group) continue;
        groups.push_back({&h, n, (maxlen + 1) / 2});
    }
    rep.groups_tested = static_cast<int>(groups.size());
    for (const auto& grp : groups) rep.tests += grp.kmax;
    if (groups.empty() || rep.tests == 0) {
        rep.status = groups.empty() ? TailStatus::Inconclusive : TailStatus::Pass;
        if (rep.status == TailStatus::Inconclusive)
            rep.detail = "no conditioning group reached " + std::to_string(min_group) + " samples";
        return rep;
    }
    const double alpha_total = 3.16712418331199e-5;  // two-sided-free mass beyond 4 sigma, one tail
    double z = inverse_normal_cdf(1.0 - alpha_total / rep.tests);
    rep.status = TailStatus::Pass;
    for (const auto& grp : groups) {
        for (int k = 1; k <= grp.kmax; ++k) {
            long exceed = 0;
            for (const auto& [len, cnt] : *grp.h)
                if (len > 2 * k) exceed += cnt;
            double phat = static_cast<double>(exceed) / grp.n;
            double bound = std::pow(1.0 - rep.q, k);
            double slack = z * std::sqrt(std::max(bound * (1 - bound), 1e-12) / grp.n);
            if (phat > bound + slack) {
                rep.status = TailStatus::Violation;
                rep.detail = "tail above geometric bound at k=" + std::to_string(k);
                return rep;
            }
        }
    }
    return rep;
}

namespace {

Rat phi_value(const MonomerDimerModel& model, const PhiSpec& phi, const Matching& x,
              const Matching& y) {
    switch (phi.kind) {
        case PhiSpec::Zero: return 0;
        case PhiSpec::One: return 1;
        case PhiSpec::DiscrepancySize: return (x ^ y).count();
        case PhiSpec::InverseLength: {
            TransportPath p = canonical_path_between(model, x, y);
            return Rat(1) / p.length();
        }
        case PhiSpec::TransitionIndicator: {
            TransportPath p = canonical_path_between(model, x, y);
            for (int s = 0; s < p.length(); ++s)
                if (p.states[s] == phi.alpha && p.states[s + 1] == phi.beta)
                    return Rat(1) / p.length();
            return 0;
        }
    }
    return 0;
}

}  // namespace

bool verify_decoupling(const MonomerDimerModel& model, int e_star, const PhiSpec& phi,
                       StatsMode mode, long cap) {
    (void)mode;
    int m = model.graph.edge_count();
    std::vector<CouplingLaw> laws;
    laws.reserve(m);
    for (int e = 0; e < m; ++e) laws.push_back(coupling_law_exact(model, {}, e, cap));
    const CouplingLaw& lf = laws[e_star];
    Rat mmf = lf.marginal_zero * lf.marginal_one;

    // Detailed identity on shared supports, for every pair of edges.
    std::unordered_map<std::pair<Matching, Matching>, Rat, PairKeyHash> f_index;
    for (size_t i = 0; i < lf.pairs.size(); ++i) f_index[lf.pairs[i]] = lf.probs[i];
    for (int e = 0; e < m; ++e) {
        Rat mme = laws[e].marginal_zero * laws[e].marginal_one;
        for (size_t i = 0; i < laws[e].pairs.size(); ++i) {
            auto it = f_index.find(laws[e].pairs[i]);
            if (it == f_index.end()) continue;
            if (mme * laws[e].probs[i] != mmf * it->second) return false;
        }
    }

    // Summed inequality for the test function.
    Rat lhs = 0;
    for (int e = 0; e < m; ++e) {
        Rat mme = laws[e].marginal_zero * laws[e].marginal_one;
        for (size_t i = 0; i < laws[e].pairs.size(); ++i) {
            const auto& [x, y] = laws[e].pairs[i];
            if (x.test(e_star) == y.test(e_star)) continue;
            lhs += mme * phi_value(model, phi, x, y) * laws[e].probs[i];
        }
    }
    Rat rhs = 0;
    for (size_t i = 0; i < lf.pairs.size(); ++i) {
        const auto& [x, y] = lf.pairs[i];
        Rat both = phi_value(model, phi, x, y) + phi_value(model, phi, y, x);
        rhs += mmf * both * Rat((x ^ y).count()) * lf.probs[i];
    }
    return lhs <= rhs;
}

DecouplingSweepReport verify_decoupling_family(const MonomerDimerModel& model, long cap) {
    int m = model.graph.edge_count();
    DecouplingSweepReport rep;
    std::vector<CouplingLaw> laws(m);
    std::vector<std::vector<TransportPath>> fwd(m), bwd(m);
    EdgeSet ts = free_support_edges(model, {});
    std::vector<int> edges = ts.indices();
    for (int e : edges) {
        laws[e] = coupling_law_exact(model, {}, e, cap);
        for (const auto& [x, y] : laws[e].pairs) {
            fwd[e].push_back(canonical_path_between(model, x, y));
            bwd[e].push_back(canonical_path_between(model, y, x));
        }
    }

    std::unordered_map<std::pair<Matching, Matching>, Rat, PairKeyHash> f_index;
    for (int f : edges) {
        f_index.clear();
        Rat mmf = laws[f].marginal_zero * laws[f].marginal_one;
        for (size_t i = 0; i < laws[f].pairs.size(); ++i)
            f_index[laws[f].pairs[i]] = mmf * laws[f].probs[i];
        for (int e : edges) {
            Rat mme = laws[e].marginal_zero * laws[e].marginal_one;
            for (size_t i = 0; i < laws[e].pairs.size(); ++i) {
                auto it = f_index.find(laws[e].pairs[i]);
                if (it == f_index.end()) continue;
                ++rep.shared_pairs;
                if (mme * laws[e].probs[i] != it->second) rep.identity_ok = false;
            }
        }
    }

    // Test family: constants, 1/length, |B|, and one transition indicator
    // per fixed edge (its own up transition out of the empty matching).
    auto eval = [&](const PhiSpec& phi, const TransportPath& path,
                    const std::pair<Matching, Matching>& pair) -> Rat {
        switch (phi.kind) {
            case PhiSpec::Zero: return 0;
            case PhiSpec::One: return 1;
            case PhiSpec::DiscrepancySize: return (pair.first ^ pair.second).count();
            case PhiSpec::InverseLength: return Rat(1) / path.length();
            case PhiSpec::TransitionIndicator:
                for (int s = 0; s < path.length(); ++s)
                    if (path.states[s] == phi.alpha && path.states[s + 1] == phi.beta)
                        return Rat(1) / path.length();
                return 0;
        }
        return 0;
    };
    for (int f : edges) {
        Rat mmf = laws[f].marginal_zero * laws[f].marginal_one;
        std::vector<PhiSpec> family{PhiSpec::zero(), PhiSpec::one(), PhiSpec::inverse_length(),
                                    PhiSpec::discrepancy()};
        Matching empty = model.graph.empty_set();
        Matching up = empty;
        up.set(f);
        family.push_back(PhiSpec::transition(empty, up));
        for (const PhiSpec& phi : family) {
            Rat lhs = 0;
            for (int e : edges) {
                Rat mme = laws[e].marginal_zero * laws[e].marginal_one;
                for (size_t i = 0; i < laws[e].pairs.size(); ++i) {
                    const auto& pr = laws[e].pairs[i];
                    if (pr.first.test(f) == pr.second.test(f)) continue;
                    lhs += mme * eval(phi, fwd[e][i], pr) * laws[e].probs[i];
                }
            }
            Rat rhs = 0;
            for (size_t i = 0; i < laws[f].pairs.size(); ++i) {
                const auto& pr = laws[f].pairs[i];
                std::pair<Matching, Matching> rev{pr.second, pr.first};
                Rat both = eval(phi, fwd[f][i], pr) + eval(phi, bwd[f][i], rev);
                rhs += mmf * both * Rat((pr.first ^ pr.second).count()) * laws[f].probs[i];
            }
            ++rep.inequality_checks;
            if (lhs > rhs) rep.inequality_ok = false;
        }
    }
    return rep;
}

Matching MergedGraph::proj(const Graph& original, const Matching& x, int gEdge, int hEdge) const {
    if (x.test(gEdge) != x.test(hEdge))
        throw std::invalid_argument("proj requires equal spins on the merged edge pair");
    for (int e = 0; e < original.edge_count(); ++e) {
        if (reverse_map[e] >= 0 || e == gEdge || e == hEdge) continue;
        if (x.test(e))
            throw std::invalid_argument("proj input occupies an edge removed by the merge");
    }
    Matching out(graph.edge_count());
    for (int e = 0; e < graph.edge_count(); ++e) {
        if (e == h_star) out.set(e, x.test(hEdge));
        else out.set(e, x.test(edge_map[e]));
    }
    return out;
}

MergedGraph build_merged_graph(const Graph& g, int w, int gEdge, int hEdge) {
    if (gEdge == hEdge) throw std::invalid_argument("merge requires two distinct edges");
    if (!g.edge(gEdge).incident(w) || !g.edge(hEdge).incident(w))
        throw std::invalid_argument("both edges must be incident to the merge vertex");
    int a = g.edge(gEdge).other(w);
    int b = g.edge(hEdge).other(w);
    if (a == b) throw std::invalid_argument("edges share both endpoints");

    MergedGraph out;
    out.merge_vertex = w;
    out.reverse_map.assign(g.edge_count(), -1);
    std::vector<std::pair<int, int>> edges;
    for (int e = 0; e < g.edge_count(); ++e) {
        if (g.edge(e).incident(w)) continue;
        out.reverse_map[e] = static_cast<int>(edges.size());
        out.edge_map.push_back(e);
        edges.emplace_back(g.edge(e).u, g.edge(e).v);
    }
    out.h_star = static_cast<int>(edges.size());
    out.edge_map.push_back(-1);
    edges.emplace_back(std::min(a, b), std::max(a, b));
    // Merging inside a triangle duplicates an existing edge; the two copies
    // exclude each other in any matching, so the model stays well defined.
    out.graph = Graph(g.vertex_count(), std::move(edges), /*allow_parallel=*/true);
    out.graph.set_vertex_order(g.vertex_order_list());
    return out;
}

EncodedPair encode(const MonomerDimerModel& model, int hEdge, const Matching& alpha,
                   const Matching& beta, const Matching& x, const Matching& y, long cap) {
    const Graph& g = model.graph;
    EdgeSet tdiff = alpha ^ beta;
    if (tdiff.count() != 2)
        throw std::invalid_argument("encode requires an exchange transition (two flipped edges)");
    int added = -1, removed = -1;
    tdiff.for_each([&](int e) { (beta.test(e) ? added : removed) = e; });
    if (added != hEdge)
        throw std::invalid_argument("hEdge must be the edge the exchange inserts");
    int gEdge = removed;
    int w = -1;
    for (int cand : {g.edge(hEdge).u, g.edge(hEdge).v})
        if (g.edge(gEdge).incident(cand)) w = cand;
    if (w < 0) throw std::invalid_argument("exchange edges do not share a vertex");

    auto b = coupling_support_component(g, x, y, hEdge);
    if (!b) throw std::invalid_argument("(x, y) is not in the coupling support at hEdge");
    TransportPath path = canonical_path_between(model, x, y);
    bool on_path = false;
    for (int s = 0; s < path.length(); ++s)
        if (path.states[s] == alpha && path.states[s + 1] == beta) on_path = true;
    if (!on_path)
        throw std::invalid_argument("the transition is not traversed by the canonical path");

    // Arc of the component on h's side of w; for cycles the arc ends at the
    // largest vertex w_star.
    bool is_cycle = b->kind == ComponentKind::EvenCycle;
    int w_star = -1;
    if (is_cycle) {
        b->edges.for_each([&](int e) {
            for (int vv : {g.edge(e).u, g.edge(e).v})
                if (w_star < 0 || g.vertex_greater(vv, w_star)) w_star = vv;
        });
        if (w_star == w)
            throw std::logic_error("merge vertex equals the cycle apex; exchange cannot occur here");
    }
    EdgeSet arc_h(g.edge_count());
    arc_h.set(hEdge);
    int last_edge = hEdge;
    {
        int prev = hEdge, cur = g.edge(hEdge).other(w);
        while (cur != w_star) {
            int next = -1;
            for (int f : g.incident_edges(cur))
                if (b->edges.test(f) && f != prev) { next = f; break; }
            if (next < 0) break;  // path case: ran off the end
            arc_h.set(next);
            last_edge = next;
            prev = next;
            cur = g.edge(next).other(cur);
        }
    }
    EdgeSet arc_g = b->edges.minus(arc_h);

    EncodedPair out;
    out.merged = build_merged_graph(g, w, gEdge, hEdge);
    Matching x_pre = x ^ arc_g;
    if (is_cycle) x_pre.flip(last_edge);
    Matching y_pre = x ^ arc_h;
    out.x_hat = out.merged.proj(g, x_pre, gEdge, hEdge);
    out.y_hat = out.merged.proj(g, y_pre, gEdge, hEdge);

    MonomerDimerModel merged_model(out.merged.graph, model.lambda);
    ExactDistribution merged_dist = enumerate(merged_model, {}, cap);
    ExactDistribution full_dist = enumerate(model, {}, cap);
    out.z_hat = merged_dist.z;
    Rat lb = model.lambda_bar();
    out.eta = (out.z_hat / full_dist.z) * (out.z_hat / full_dist.z) * lb * lb;
    return out;
}

EncodingCheckReport verify_encoding(const MonomerDimerModel& model, long cap) {
    const Graph& g = model.graph;
    TransitionKernel kernel = transition_kernel(model, {}, ChainKind::JS, cap);
    ExactDistribution full = enumerate(model, {}, cap);
    EncodingCheckReport rep;

    // Laws and canonical paths per edge, shared across transitions.
    std::vector<CouplingLaw> laws(g.edge_count());
    std::vector<std::vector<TransportPath>> paths(g.edge_count());
    EdgeSet two_sided = free_support_edges(model, {});
    two_sided.for_each([&](int e) {
        laws[e] = coupling_law_exact(model, {}, e, cap);
        for (const auto& [x, y] : laws[e].pairs)
            paths[e].push_back(canonical_path_between(model, x, y));
    });
    // Merged-model laws cached per (w, g, h).
    std::map<std::tuple<int, int, int>, std::pair<MergedGraph, CouplingLaw>> merged_cache;

    int n = kernel.size();
    for (int i = 0; i < n && rep.holds(); ++i) {
        for (int j = 0; j < n && rep.holds(); ++j) {
            if (i == j || kernel.matrix.at(i, j) == 0) continue;
            const Matching& alpha = kernel.dist.states[i];
            const Matching& beta = kernel.dist.states[j];
            EdgeSet tdiff = alpha ^ beta;
            if (tdiff.count() != 2) continue;  // only exchange transitions encode
            int added = -1, removed = -1;
            tdiff.for_each([&](int e) { (beta.test(e) ? added : removed) = e; });
            int h = added;
            if (!two_sided.test(h)) continue;
            ++rep.transitions_checked;

            std::vector<std::pair<Matching, Matching>> images;
            Rat mm = laws[h].marginal_zero * laws[h].marginal_one;
            for (size_t pi = 0; pi < laws[h].pairs.size(); ++pi) {
                const TransportPath& path = paths[h][pi];
                bool on_path = false;
                for (int s = 0; s < path.length(); ++s)
                    if (path.states[s] == alpha && path.states[s + 1] == beta) on_path = true;
                if (!on_path) continue;
                ++rep.pairs_checked;
                const auto& [x, y] = laws[h].pairs[pi];
                EncodedPair enc = encode(model, h, alpha, beta, x, y, cap);
                images.emplace_back(enc.x_hat, enc.y_hat);

                int w = enc.merged.merge_vertex;
                auto key = std::make_tuple(w, removed, h);
                auto it = merged_cache.find(key);
                if (it == merged_cache.end()) {
                    MonomerDimerModel mm_model(enc.merged.graph, model.lambda);
                    CouplingLaw hat_law =
                        coupling_law_exact(mm_model, {}, enc.merged.h_star, cap);
                    it = merged_cache.emplace(key, std::make_pair(enc.merged, hat_law)).first;
                }
                const CouplingLaw& hat = it->second.second;

                Matching union_ab = alpha | beta;
                Matching proj_ab = enc.merged.proj(g, union_ab, removed, h);
                if (!(enc.y_hat == proj_ab)) rep.codomain_ok = false;

                Rat lhs = mm * laws[h].probs[pi];
                Rat rhs = enc.eta * hat.marginal_zero * hat.marginal_one *
                          hat.prob(enc.x_hat, enc.y_hat);
                if (lhs > rhs) rep.measure_ok = false;
            }
            for (size_t a = 0; a < images.size(); ++a)
                for (size_t b = a + 1; b < images.size(); ++b)
                    if (images[a] == images[b]) rep.injective = false;
        }
    }
    return rep;
}

bool verify_canonical_paths(const MonomerDimerModel& model, const Pinning& pinning, long cap) {
    EdgeSet two_sided = free_support_edges(model, pinning);
    bool ok = true;
    two_sided.for_each([&](int e) {
        if (!ok) return;
        CouplingLaw law = coupling_law_exact(model, pinning, e, cap);
        for (const auto& [x, y] : law.pairs) {
            TransportPath path;
            try {
                path = canonical_path_between(model, x, y);  // validates each step
            } catch (const std::exception&) {
                ok = false;
                return;
            }
            EdgeSet diff = x ^ y;
            int l = path.length(), d = diff.count();
            if (!(path.source() == x) || !(path.target() == y)) ok = false;
            if (l > d || d > 2 * l) ok = false;
            // Each disagreement edge flipped exactly once, nothing else moves.
            EdgeSet flipped(diff.size());
            for (int s = 0; s < l; ++s) {
                EdgeSet step = path.states[s] ^ path.states[s + 1];
                step.for_each([&](int f) {
                    if (flipped.test(f) || !diff.test(f)) ok = false;
                    flipped.set(f);
                });
            }
            if (!(flipped == diff)) ok = false;
            if (!ok) return;
        }
    });
    return ok;
}

bool verify_cycle_path_identity(const MonomerDimerModel& model, int e, long cap) {
    CouplingLaw law = coupling_law_exact(model, {}, e, cap);
    const Graph& g = model.graph;
    int v = g.edge(e).v;
    bool ok = true;
    for (size_t i = 0; i < law.pairs.size(); ++i) {
        const auto& [x, y] = law.pairs[i];
        auto b = coupling_support_component(g, x, y, e);
        if (b->kind != ComponentKind::EvenCycle) continue;
        int f = -1;
        for (int cand : g.incident_edges(v))
            if (cand != e && b->edges.test(cand)) f = cand;
        Matching xp = x, yp = y;
        xp.set(f, false);
        yp.set(f, false);
        if (law.probs[i] != model.lambda * law.prob(xp, yp)) ok = false;
    }
    return ok;
}

bool verify_coupling_symmetry_identity(const MonomerDimerModel& model, int e, long cap) {
    CouplingLaw law = coupling_law_exact(model, {}, e, cap);
    ExactDistribution full = enumerate(model, {}, cap);
    Rat mm = law.marginal_zero * law.marginal_one;
    for (size_t i = 0; i < law.pairs.size(); ++i) {
        const auto& [x, y] = law.pairs[i];
        auto b = coupling_support_component(model.graph, x, y, e);
        EdgeSet window = inclusive_boundary(model.graph, b->edges);
        Rat rhs = full.window_probability(window, x) * full.prob_of(y);
        if (mm * law.probs[i] != rhs) return false;
    }
    return true;
}

FlowTheoremsReport verify_flow_theorems(const MonomerDimerModel& model, const Pinning& pinning,
                                        double pi_tol, double lsi_tol, long cap) {
    FlowTheoremsReport rep;
    FlowStats stats = flow_statistics(model, pinning, StatsMode::Exact, 0, 0, cap);
    rep.kappa = stats.congestion_kappa;
    rep.strong_kappa = stats.strong_kappa;
    rep.sq_length = stats.expected_sq_length;

    // Marginal lower bound of the conditional distribution: min over edges
    // and spins of the nonzero marginals.
    ExactDistribution dist = enumerate(model, pinning, cap);
    bool have_phi = false;
    for (int e = 0; e < model.graph.edge_count(); ++e) {
        Rat one = dist.edge_marginal_one(e);
        for (const Rat& p : {Rat(1) - one, one}) {
            if (p == 0) continue;
            if (!have_phi || p < rep.phi) rep.phi = p, have_phi = true;
        }
    }
    if (!have_phi) rep.phi = 1;

    TransitionKernel kernel = transition_kernel(model, pinning, ChainKind::JS, cap);
    rep.alpha_pi = local_poincare_constant(model, pinning, kernel);
    Rat denom = Rat(8) * rep.kappa * rep.sq_length;
    rep.alpha_pi_bound = denom == 0 ? 0.0 : to_double(Rat(1) / denom);
    rep.pi_holds = rep.alpha_pi >= rep.alpha_pi_bound - pi_tol;

    rep.alpha_lsi_estimate = local_log_sobolev_constant(model, pinning, kernel);
    double factor = two_point_lsi_factor(to_double(rep.phi));
    rep.alpha_lsi_bound =
        rep.strong_kappa == 0 ? 0.0 : to_double(Rat(1) / (Rat(8) * rep.strong_kappa)) * factor;
    rep.lsi_holds = rep.alpha_lsi_estimate >= rep.alpha_lsi_bound - lsi_tol;
    return rep;
}

}  // namespace mdmc
