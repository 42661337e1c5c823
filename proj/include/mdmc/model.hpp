#pragma once

#include "mdmc/graph.hpp"
#include "mdmc/rational.hpp"

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace mdmc {

inline constexpr long kDefaultEnumerationCap = 200000;

// Enumeration or kernel construction would exceed the state cap.
class OversizeError : public std::runtime_error {
public:
    OversizeError(const std::string& what, long attempted)
        : std::runtime_error(what), attempted_count(attempted) {}
    long attempted_count;
};

class InfeasiblePinningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Monomer-dimer model: matchings weighted lambda^{|M|}.  lambda is an exact
// rational so every distribution identity can be checked without tolerances;
// lambda_bar = max(1, lambda).
struct MonomerDimerModel {
    Graph graph;
    Rat lambda;

    MonomerDimerModel(Graph g, Rat lam) : graph(std::move(g)), lambda(std::move(lam)) {
        if (lambda <= 0) throw std::invalid_argument("edge weight must be positive");
    }
    Rat lambda_bar() const { return lambda < 1 ? Rat(1) : lambda; }
};

// Partial assignment of edge spins; the free set is the complement of the
// fixed domain.  Feasibility (some matching agrees) is decided by search.
class Pinning {
public:
    Pinning() = default;

    bool is_fixed(int e) const { return fixed_.count(e) > 0; }
    int value(int e) const { return fixed_.at(e); }
    const std::map<int, int>& fixed() const { return fixed_; }
    size_t fixed_count() const { return fixed_.size(); }

    std::vector<int> free_edges(const Graph& g) const;
    int free_count(const Graph& g) const { return g.edge_count() - static_cast<int>(fixed_.size()); }

    bool consistent_with(const EdgeSet& s) const;

    // Extension by e <- c; feasibility is checked against the model.
    Pinning extended(const MonomerDimerModel& model, int e, int c) const;
    // Extension without a feasibility check (used by sweeps that check later).
    Pinning extended_unchecked(int e, int c) const;

    std::string to_string() const;

    bool operator==(const Pinning& o) const { return fixed_ == o.fixed_; }

private:
    std::map<int, int> fixed_;
};

// Whether some matching of g agrees with the pinning.
bool pinning_feasible(const Graph& g, const Pinning& pinning);

// Enumerated conditional distribution mu^tau with exact rational weights.
// Support order is the enumeration order (DFS over edge indices, spin 0
// before spin 1), recorded in all exports.
struct ExactDistribution {
    Rat lambda;
    Pinning pinning;
    std::vector<Matching> states;
    std::vector<Rat> weights;  // lambda^{|M|}
    std::vector<Rat> probs;
    std::vector<double> cdf;  // inclusive prefix sums of probs, for sampling
    Rat z;  // partition function
    std::unordered_map<EdgeSet, int, EdgeSetHash> index;

    int size() const { return static_cast<int>(states.size()); }
    int index_of(const EdgeSet& s) const {
        auto it = index.find(s);
        return it == index.end() ? -1 : it->second;
    }
    Rat prob_of(const EdgeSet& s) const {
        int i = index_of(s);
        return i < 0 ? Rat(0) : probs[i];
    }
    Rat min_prob() const;

    // Exact marginal P[X_e = 1].
    Rat edge_marginal_one(int e) const;
    // Exact probability that X agrees with `values` on every edge of `window`.
    Rat window_probability(const EdgeSet& window, const EdgeSet& values) const;

    std::string to_json() const;
};

ExactDistribution enumerate(const MonomerDimerModel& model, const Pinning& pinning = {},
                            long cap = kDefaultEnumerationCap);

// (mu_e(0), mu_e(1)) for a free edge e.
std::pair<Rat, Rat> marginal(const MonomerDimerModel& model, const Pinning& pinning, int e,
                             long cap = kDefaultEnumerationCap);

Pinning pin(const MonomerDimerModel& model, const Pinning& pinning, int e, int c);

// Free edges whose conditional support is {0,1}.
EdgeSet free_support_edges(const MonomerDimerModel& model, const Pinning& pinning);

struct MarginalBoundReport {
    Rat phi;          // min over edges and spins of the nonzero marginals
    Rat bound_zero;   // 1/(1+lambda)
    Rat bound_one;    // lambda/(lambda+(1+lambda*Delta)^2)
    bool holds;
};

MarginalBoundReport marginal_lower_bound_check(const MonomerDimerModel& model,
                                               long cap = kDefaultEnumerationCap);

// Reduction of a pinned model to the subgraph induced by the two-sided free
// edges S: the reduced model, the map reduced edge index -> original index,
// and the forced configuration on the complement of S.
struct FreeReduction {
    MonomerDimerModel model;
    std::vector<int> edge_map;   // reduced index -> original index
    EdgeSet forced_one;          // original edges forced/pinned to 1
    EdgeSet free_mask;           // original edges in S

    EdgeSet lift(const EdgeSet& reduced) const;
    EdgeSet restrict(const EdgeSet& original) const;
};

FreeReduction reduce_to_free(const MonomerDimerModel& model, const Pinning& pinning);

}  // namespace mdmc
