#include "mdmc/chains.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace mdmc {

std::string chain_kind_name(ChainKind k) {
    switch (k) {
        case ChainKind::JS: return "js";
        case ChainKind::LazyJS: return "lazy-js";
        case ChainKind::Glauber: return "glauber";
    }
    return "?";
}

ChainKind chain_kind_from_name(const std::string& s) {
    if (s == "js") return ChainKind::JS;
    if (s == "lazy-js" || s == "lazy_js") return ChainKind::LazyJS;
    if (s == "glauber") return ChainKind::Glauber;
    throw std::invalid_argument("unknown chain kind: " + s);
}

namespace {

int saturating_edge(const Graph& g, const Matching& state, int v) {
    for (int f : g.incident_edges(v))
        if (state.test(f)) return f;
    return -1;
}

}  // namespace

Proposal js_propose(const Graph& g, const Matching& state, int e) {
    Proposal p;
    p.candidate = state;
    const Edge& ed = g.edge(e);
    if (state.test(e)) {
        p.candidate.set(e, false);
        p.move = MoveKind::Down;
        return p;
    }
    int fu = saturating_edge(g, state, ed.u);
    int fv = saturating_edge(g, state, ed.v);
    if (fu < 0 && fv < 0) {
        p.candidate.set(e);
        p.move = MoveKind::Up;
        return p;
    }
    if (fu >= 0 && fv >= 0) {
        p.move = MoveKind::None;
        return p;
    }
    int f = fu >= 0 ? fu : fv;
    p.candidate.set(e);
    p.candidate.set(f, false);
    p.move = MoveKind::Exchange;
    p.removed_edge = f;
    return p;
}

Matching js_propose(const MonomerDimerModel& model, const Pinning& pinning, const Matching& state,
                    int e) {
    if (pinning.is_fixed(e)) throw std::invalid_argument("proposal edge is pinned");
    if (!pinning.consistent_with(state)) throw std::invalid_argument("state violates pinning");
    return js_propose(model.graph, state, e).candidate;
}

namespace {

// Acceptance probability min{1, mu^tau(M)/mu^tau(X)} as an exact rational.
Rat js_accept_prob(const MonomerDimerModel& model, const Pinning& pinning, const Matching& state,
                   const Matching& candidate) {
    if (candidate == state) return 1;
    if (!pinning.consistent_with(candidate)) return 0;
    int dm = candidate.count() - state.count();
    if (dm <= 0) {
        // down move: ratio lambda^-1
        Rat r = dm == 0 ? Rat(1) : Rat(1) / model.lambda;
        return r < 1 ? r : Rat(1);
    }
    return model.lambda < 1 ? model.lambda : Rat(1);
}

}  // namespace

Matching js_step(const MonomerDimerModel& model, const Pinning& pinning, const Matching& state,
                 Rng& rng) {
    std::vector<int> free = pinning.free_edges(model.graph);
    if (free.empty()) return state;
    int e = free[rng.below(free.size())];
    Proposal p = js_propose(model.graph, state, e);
    Rat a = js_accept_prob(model, pinning, state, p.candidate);
    if (a == 1 || rng.uniform() < to_double(a)) return p.candidate;
    return state;
}

Matching glauber_step(const MonomerDimerModel& model, const Pinning& pinning,
                      const Matching& state, Rng& rng) {
    std::vector<int> free = pinning.free_edges(model.graph);
    if (free.empty()) return state;
    int e = free[rng.below(free.size())];
    const Edge& ed = model.graph.edge(e);
    Matching next = state;
    next.set(e, false);
    bool blocked = saturating_edge(model.graph, next, ed.u) >= 0 ||
                   saturating_edge(model.graph, next, ed.v) >= 0;
    if (!blocked) {
        double p_occ = to_double(model.lambda / (1 + model.lambda));
        if (rng.uniform() < p_occ) next.set(e);
    }
    return next;
}

Matching glauber_step(const MonomerDimerModel& model, const Matching& state, Rng& rng) {
    return glauber_step(model, Pinning{}, state, rng);
}

bool TransitionKernel::detailed_balance() const {
    int n = size();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dist.probs[i] * matrix.at(i, j) != dist.probs[j] * matrix.at(j, i)) return false;
    return true;
}

bool TransitionKernel::irreducible() const {
    int n = size();
    if (n == 0) return false;
    std::vector<int> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int y = 0; y < n; ++y)
            if (y != x && !seen[y] && matrix.at(x, y) > 0) {
                seen[y] = 1;
                stack.push_back(y);
            }
    }
    // Reversibility makes reachability symmetric, so one sweep suffices.
    return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

std::string TransitionKernel::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = chain_kind_name(spec.kind);
    j["lambda"] = rat_str(dist.lambda);
    j["pinning"] = spec.pinning.to_string();
    j["states"] = nlohmann::ordered_json::array();
    for (const auto& s : dist.states) j["states"].push_back(s.indices());
    j["rows"] = nlohmann::ordered_json::array();
    for (int i = 0; i < size(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int k = 0; k < size(); ++k) row.push_back(rat_str(matrix.at(i, k)));
        j["rows"].push_back(std::move(row));
    }
    return j.dump(2);
}

TransitionKernel transition_kernel(const MonomerDimerModel& model, const Pinning& pinning,
                                   ChainKind kind, long cap) {
    TransitionKernel k;
    k.dist = enumerate(model, pinning, cap);
    k.spec = ChainSpec{kind, pinning};
    k.proposal_set = pinning.free_edges(model.graph);
    int n = k.dist.size();
    k.matrix = RatMatrix(n);
    if (k.proposal_set.empty()) {
        for (int i = 0; i < n; ++i) k.matrix.at(i, i) = 1;
        return k;
    }
    Rat pick = Rat(1) / Rat(static_cast<long>(k.proposal_set.size()));

    for (int i = 0; i < n; ++i) {
        const Matching& x = k.dist.states[i];
        Rat diag = 0;
        for (int e : k.proposal_set) {
            if (kind == ChainKind::Glauber) {
                const Edge& ed = model.graph.edge(e);
                Matching off = x;
                off.set(e, false);
                bool blocked = false;
                for (int f : model.graph.incident_edges(ed.u))
                    if (f != e && off.test(f)) blocked = true;
                for (int f : model.graph.incident_edges(ed.v))
                    if (f != e && off.test(f)) blocked = true;
                if (blocked) {
                    diag += pick;  // conditional support is {0}; state keeps e = 0
                    continue;
                }
                Rat p_occ = model.lambda / (1 + model.lambda);
                Matching on = off;
                on.set(e);
                int j_on = k.dist.index_of(on);
                int j_off = k.dist.index_of(off);
                if (x.test(e)) {
                    k.matrix.at(i, j_off) += pick * (1 - p_occ);
                    diag += pick * p_occ;
                } else {
                    k.matrix.at(i, j_on) += pick * p_occ;
                    diag += pick * (1 - p_occ);
                }
            } else {
                Proposal p = js_propose(model.graph, x, e);
                Rat a = js_accept_prob(model, pinning, x, p.candidate);
                if (p.candidate == x || a == 0) {
                    diag += pick;
                } else {
                    int j = k.dist.index_of(p.candidate);
                    k.matrix.at(i, j) += pick * a;
                    diag += pick * (1 - a);
                }
            }
        }
        k.matrix.at(i, i) += diag;
    }
    if (kind == ChainKind::LazyJS) {
        k.matrix = k.matrix.scaled(Rat(1, 2)).plus(RatMatrix::identity(n).scaled(Rat(1, 2)));
    }
    return k;
}

TrajectorySummary simulate(const MonomerDimerModel& model, const ChainSpec& spec,
                           const Matching& start, long steps, Rng& rng) {
    if (!spec.pinning.consistent_with(start))
        throw std::invalid_argument("start state violates pinning");
    if (!is_matching(model.graph, start)) throw std::invalid_argument("start is not a matching");
    TrajectorySummary out;
    out.occupancy.assign(model.graph.edge_count(), 0);
    out.steps = steps;
    Matching x = start;
    for (long t = 0; t < steps; ++t) {
        switch (spec.kind) {
            case ChainKind::JS:
                x = js_step(model, spec.pinning, x, rng);
                break;
            case ChainKind::LazyJS:
                if (rng.uniform() < 0.5) x = js_step(model, spec.pinning, x, rng);
                break;
            case ChainKind::Glauber:
                x = glauber_step(model, spec.pinning, x, rng);
                break;
        }
        x.for_each([&](int e) { ++out.occupancy[e]; });
    }
    out.final_state = x;
    return out;
}

}  // namespace mdmc
