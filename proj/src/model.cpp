#include "mdmc/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace mdmc {

std::vector<int> Pinning::free_edges(const Graph& g) const {
    std::vector<int> out;
    for (int e = 0; e < g.edge_count(); ++e)
        if (!is_fixed(e)) out.push_back(e);
    return out;
}

bool Pinning::consistent_with(const EdgeSet& s) const {
    for (const auto& [e, c] : fixed_)
        if (s.test(e) != (c == 1)) return false;
    return true;
}

Pinning Pinning::extended_unchecked(int e, int c) const {
    Pinning p = *this;
    p.fixed_[e] = c;
    return p;
}

Pinning Pinning::extended(const MonomerDimerModel& model, int e, int c) const {
    if (is_fixed(e)) throw std::invalid_argument("edge already pinned");
    Pinning p = extended_unchecked(e, c);
    if (!pinning_feasible(model.graph, p))
        throw InfeasiblePinningError("infeasible pinning extension: edge " + std::to_string(e) +
                                     " <- " + std::to_string(c));
    return p;
}

std::string Pinning::to_string() const {
    if (fixed_.empty()) return "none";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : fixed_) {
        if (!first) os << ";";
        os << "e" << e << "<-" << c;
        first = false;
    }
    return os.str();
}

namespace {

// Backtracking over edge indices: spin 0 first, then spin 1 where legal.
// `visit` returns false to abort the search.
template <typename Visit>
bool for_each_matching(const Graph& g, const Pinning& pinning, Visit&& visit) {
    int m = g.edge_count();
    std::vector<int> saturated(g.vertex_count(), 0);
    EdgeSet current(m);

    auto rec = [&](auto&& self, int e) -> bool {
        if (e == m) return visit(current);
        const Edge& ed = g.edge(e);
        bool can_zero = !pinning.is_fixed(e) || pinning.value(e) == 0;
        bool can_one = (!pinning.is_fixed(e) || pinning.value(e) == 1) && !saturated[ed.u] &&
                       !saturated[ed.v];
        if (can_zero) {
            if (!self(self, e + 1)) return false;
        }
        if (can_one) {
            current.set(e);
            saturated[ed.u] = saturated[ed.v] = 1;
            bool cont = self(self, e + 1);
            current.set(e, false);
            saturated[ed.u] = saturated[ed.v] = 0;
            if (!cont) return false;
        }
        return true;
    };
    return rec(rec, 0);
}

}  // namespace

bool pinning_feasible(const Graph& g, const Pinning& pinning) {
    bool found = false;
    for_each_matching(g, pinning, [&](const EdgeSet&) {
        found = true;
        return false;  // stop at the first witness
    });
    return found;
}

Rat ExactDistribution::min_prob() const {
    Rat m = probs.empty() ? Rat(0) : probs[0];
    for (const Rat& p : probs)
        if (p < m) m = p;
    return m;
}

Rat ExactDistribution::edge_marginal_one(int e) const {
    Rat s = 0;
    for (int i = 0; i < size(); ++i)
        if (states[i].test(e)) s += probs[i];
    return s;
}

Rat ExactDistribution::window_probability(const EdgeSet& window, const EdgeSet& values) const {
    Rat s = 0;
    for (int i = 0; i < size(); ++i) {
        bool agree = true;
        window.for_each([&](int e) {
            if (states[i].test(e) != values.test(e)) agree = false;
        });
        if (agree) s += probs[i];
    }
    return s;
}

std::string ExactDistribution::to_json() const {
    nlohmann::ordered_json j;
    j["lambda"] = rat_str(lambda);
    j["Z"] = rat_str(z);
    j["states"] = nlohmann::ordered_json::array();
    for (int i = 0; i < size(); ++i) {
        nlohmann::ordered_json s;
        s["edges"] = states[i].indices();
        s["prob"] = rat_str(probs[i]);
        j["states"].push_back(std::move(s));
    }
    return j.dump(2);
}

ExactDistribution enumerate(const MonomerDimerModel& model, const Pinning& pinning, long cap) {
    ExactDistribution dist;
    dist.lambda = model.lambda;
    dist.pinning = pinning;
    dist.z = 0;
    long count = 0;
    bool ok = for_each_matching(model.graph, pinning, [&](const EdgeSet& matching) {
        if (++count > cap) return false;
        Rat w = rat_pow(model.lambda, static_cast<unsigned>(matching.count()));
        dist.states.push_back(matching);
        dist.weights.push_back(w);
        dist.z += w;
        return true;
    });
    if (!ok)
        throw OversizeError("enumeration exceeded cap of " + std::to_string(cap) +
                                " states (attempted > " + std::to_string(count) + ")",
                            count);
    if (dist.states.empty()) throw InfeasiblePinningError("pinning has empty support");
    dist.probs.reserve(dist.states.size());
    for (const Rat& w : dist.weights) dist.probs.push_back(w / dist.z);
    dist.cdf.reserve(dist.states.size());
    double acc = 0;
    for (const Rat& p : dist.probs) dist.cdf.push_back(acc += to_double(p));
    for (int i = 0; i < dist.size(); ++i) dist.index.emplace(dist.states[i], i);
    return dist;
}

std::pair<Rat, Rat> marginal(const MonomerDimerModel& model, const Pinning& pinning, int e,
                             long cap) {
    if (pinning.is_fixed(e)) throw std::invalid_argument("marginal of a pinned edge");
    ExactDistribution dist = enumerate(model, pinning, cap);
    Rat one = dist.edge_marginal_one(e);
    return {Rat(1) - one, one};
}

Pinning pin(const MonomerDimerModel& model, const Pinning& pinning, int e, int c) {
    return pinning.extended(model, e, c);
}

EdgeSet free_support_edges(const MonomerDimerModel& model, const Pinning& pinning) {
    EdgeSet s(model.graph.edge_count());
    for (int e : pinning.free_edges(model.graph)) {
        bool zero_ok = pinning_feasible(model.graph, pinning.extended_unchecked(e, 0));
        bool one_ok = pinning_feasible(model.graph, pinning.extended_unchecked(e, 1));
        if (zero_ok && one_ok) s.set(e);
    }
    return s;
}

MarginalBoundReport marginal_lower_bound_check(const MonomerDimerModel& model, long cap) {
    ExactDistribution dist = enumerate(model, {}, cap);
    MarginalBoundReport r;
    const Rat& lam = model.lambda;
    Rat delta = model.graph.max_degree();
    r.bound_zero = Rat(1) / (1 + lam);
    Rat d2 = (1 + lam * delta) * (1 + lam * delta);
    r.bound_one = lam / (lam + d2);
    r.holds = true;
    bool have_phi = false;
    for (int e = 0; e < model.graph.edge_count(); ++e) {
        Rat one = dist.edge_marginal_one(e);
        Rat zero = Rat(1) - one;
        for (const Rat& p : {zero, one}) {
            if (p == 0) continue;
            if (!have_phi || p < r.phi) r.phi = p, have_phi = true;
        }
        if (zero < r.bound_zero) r.holds = false;
        if (one != 0 && one < r.bound_one) r.holds = false;
    }
    if (!have_phi) r.phi = 1;
    return r;
}

EdgeSet FreeReduction::lift(const EdgeSet& reduced) const {
    EdgeSet out = forced_one;
    reduced.for_each([&](int e) { out.set(edge_map[e]); });
    return out;
}

EdgeSet FreeReduction::restrict(const EdgeSet& original) const {
    EdgeSet out(static_cast<int>(edge_map.size()));
    for (size_t i = 0; i < edge_map.size(); ++i)
        if (original.test(edge_map[i])) out.set(static_cast<int>(i));
    return out;
}

FreeReduction reduce_to_free(const MonomerDimerModel& model, const Pinning& pinning) {
    const Graph& g = model.graph;
    EdgeSet free_mask = free_support_edges(model, pinning);
    EdgeSet forced_one(g.edge_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        if (free_mask.test(e)) continue;
        if (pinning.is_fixed(e)) {
            if (pinning.value(e) == 1) forced_one.set(e);
        } else {
            // Free but one-sided: the unique feasible spin.
            if (!pinning_feasible(g, pinning.extended_unchecked(e, 0))) forced_one.set(e);
        }
    }
    std::vector<std::pair<int, int>> edges;
    std::vector<int> edge_map;
    free_mask.for_each([&](int e) {
        edges.emplace_back(g.edge(e).u, g.edge(e).v);
        edge_map.push_back(e);
    });
    Graph sub(g.vertex_count(), std::move(edges));
    FreeReduction red{MonomerDimerModel(std::move(sub), model.lambda), std::move(edge_map),
                      forced_one, free_mask};
    return red;
}

}  // namespace mdmc
