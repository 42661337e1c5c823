#pragma once

#include "mdmc/model.hpp"
#include "mdmc/rng.hpp"

#include <string>

namespace mdmc {

enum class ChainKind { JS, LazyJS, Glauber };

std::string chain_kind_name(ChainKind k);
ChainKind chain_kind_from_name(const std::string& s);

// Chain selector: kind + pinning.  Proposals are uniform over the free set.
struct ChainSpec {
    ChainKind kind = ChainKind::JS;
    Pinning pinning;
};

enum class MoveKind { Down, Up, Exchange, None };

struct Proposal {
    Matching candidate;
    MoveKind move = MoveKind::None;
    int removed_edge = -1;  // for exchanges
};

// The unique candidate for proposal edge e: down if e is occupied, up if both
// endpoints are free, exchange if exactly one endpoint is saturated, no-op
// otherwise.  The candidate ignores the pinning; an infeasible candidate is
// rejected by the Metropolis filter (conditional weight zero).
Proposal js_propose(const Graph& g, const Matching& state, int e);

Matching js_propose(const MonomerDimerModel& model, const Pinning& pinning, const Matching& state,
                    int e);

// One full transition: uniform proposal over the free set, candidate, accept
// with min{1, lambda^(|M|-|X|)} (zero if the candidate violates the pinning).
Matching js_step(const MonomerDimerModel& model, const Pinning& pinning, const Matching& state,
                 Rng& rng);

// Heat-bath update of a uniformly chosen free edge from its conditional
// marginal: occupied with probability lambda/(1+lambda) iff unblocked.
Matching glauber_step(const MonomerDimerModel& model, const Matching& state, Rng& rng);
Matching glauber_step(const MonomerDimerModel& model, const Pinning& pinning,
                      const Matching& state, Rng& rng);

// Exact row-stochastic transition matrix over the enumerated support.
struct TransitionKernel {
    ExactDistribution dist;
    RatMatrix matrix;
    ChainSpec spec;
    std::vector<int> proposal_set;

    int size() const { return dist.size(); }
    bool detailed_balance() const;
    bool irreducible() const;
    std::string to_json() const;
};

TransitionKernel transition_kernel(const MonomerDimerModel& model, const Pinning& pinning,
                                   ChainKind kind, long cap = kDefaultEnumerationCap);

struct TrajectorySummary {
    Matching final_state;
    std::vector<long> occupancy;  // per edge: steps with the edge occupied
    long steps = 0;
};

TrajectorySummary simulate(const MonomerDimerModel& model, const ChainSpec& spec,
                           const Matching& start, long steps, Rng& rng);

}  // namespace mdmc
