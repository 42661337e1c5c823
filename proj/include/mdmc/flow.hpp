#pragma once

#include "mdmc/chains.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace mdmc {

// Draws a state from an enumerated distribution by inverse CDF in support
// order.  Exact probabilities, float uniform draw.
Matching sample_state(const ExactDistribution& dist, Rng& rng);

// Approximate sampler for graphs beyond enumeration scale: long run of the
// 1/2-lazy chain, rejected until consistent with the pinning.  Approximate;
// use sample_state wherever enumeration is possible.
Matching approx_sample_matching(const MonomerDimerModel& model, const Pinning& pinning,
                                long burnin, Rng& rng);

// One draw of the local flipping coupling at edge e: (x, y) with x_e = 0,
// y_e = 1, differing exactly on the component b of the (Y, Z) difference
// containing e.
struct CouplingSample {
    Matching x;
    Matching y;
    DiffComponent b;
    int e;
};

CouplingSample sample_local_flipping_coupling(const MonomerDimerModel& model,
                                              const Pinning& pinning, int e, Rng& rng,
                                              long cap = kDefaultEnumerationCap);

// Repeated-draw variant: the two conditional distributions are enumerated
// once at construction.
class CouplingSampler {
public:
    CouplingSampler(const MonomerDimerModel& model, const Pinning& pinning, int e,
                    long cap = kDefaultEnumerationCap);
    CouplingSample sample(Rng& rng) const;
    const ExactDistribution& dist_zero() const { return d0_; }
    const ExactDistribution& dist_one() const { return d1_; }

private:
    const Graph* graph_;
    int e_;
    ExactDistribution d0_, d1_;
};

// Deterministic path from x to y flipping one alternating component, using
// down/up/exchange transitions; ties broken by the graph's vertex order.
struct TransportPath {
    std::vector<Matching> states;
    std::vector<MoveKind> moves;

    const Matching& source() const { return states.front(); }
    const Matching& target() const { return states.back(); }
    int length() const { return static_cast<int>(states.size()) - 1; }
};

// Requires x_e = 0, y_e = 1 and x xor y a single alternating path or even
// cycle containing e.
TransportPath canonical_path(const MonomerDimerModel& model, const Matching& x, const Matching& y,
                             int e);
// Same construction without the e-precondition (any single-component pair).
TransportPath canonical_path_between(const MonomerDimerModel& model, const Matching& x,
                                     const Matching& y);

TransportPath sample_transport_flow(const MonomerDimerModel& model, const Pinning& pinning, int e,
                                    Rng& rng, long cap = kDefaultEnumerationCap);

// Exact law of the local flipping coupling at edge e, materialized from the
// boundary-window product formula.  Pairs are ordered by (x, y) support
// indices of the two conditional distributions.
struct CouplingLaw {
    int e = -1;
    Rat marginal_zero;  // mu^tau_e(0)
    Rat marginal_one;   // mu^tau_e(1)
    std::vector<std::pair<Matching, Matching>> pairs;
    std::vector<Rat> probs;

    int find(const Matching& x, const Matching& y) const;
    Rat prob(const Matching& x, const Matching& y) const;
};

CouplingLaw coupling_law_exact(const MonomerDimerModel& model, const Pinning& pinning, int e,
                               long cap = kDefaultEnumerationCap);

// Independent oracle: the same law by enumerating all (Y, Z) sample pairs of
// the defining construction and accumulating outcome probabilities.
CouplingLaw coupling_law_by_pair_enumeration(const MonomerDimerModel& model,
                                             const Pinning& pinning, int e,
                                             long cap = kDefaultEnumerationCap);

bool coupling_laws_equal(const CouplingLaw& a, const CouplingLaw& b);

// Exact probability of (x, y) under the coupling at e; zero off support.
Rat coupling_probability(const MonomerDimerModel& model, const Pinning& pinning, int e,
                         const Matching& x, const Matching& y,
                         long cap = kDefaultEnumerationCap);

// Both endpoint marginals of the exact law against the conditional
// distributions, as exact rational identities.
bool verify_coupling_marginals(const MonomerDimerModel& model, const Pinning& pinning, int e,
                               long cap = kDefaultEnumerationCap);

enum class StatsMode { Exact, MonteCarlo };

struct CongestionRow {
    Matching alpha, beta;
    Rat lhs, rhs;  // rhs = mu(alpha) Q(alpha,beta)
    double ratio() const { return rhs == 0 ? 0.0 : to_double(lhs / rhs); }
};

struct EdgeMomentRow {
    int e;
    Rat expected_sq_length;       // E[l(gamma)^2]
    Rat expected_sq_discrepancy;  // E[|x xor y|^2]
};

struct FlowStats {
    StatsMode mode = StatsMode::Exact;
    Rat expected_sq_length;       // max over e
    Rat expected_sq_discrepancy;  // max over e
    Rat congestion_kappa;         // max over transitions of lhs/rhs
    Rat strong_kappa;
    std::vector<EdgeMomentRow> per_edge;
    std::vector<CongestionRow> congestion_rows;        // transitions with lhs > 0
    std::vector<CongestionRow> strong_congestion_rows;
    // Monte Carlo metadata (kappas are lower bounds in that mode).
    long samples_per_edge = 0;
    double sq_length_stderr = 0;

    std::string congestion_csv() const;
    std::string to_json() const;
};

FlowStats flow_statistics(const MonomerDimerModel& model, const Pinning& pinning, StatsMode mode,
                          long samples_per_edge = 20000, uint64_t seed = 7,
                          long cap = kDefaultEnumerationCap);

enum class ConditionSide { FixX, FixY };

// max over conditioning states of E[|X xor Y|^p | side].
double one_sided_moments(const MonomerDimerModel& model, int e, double p, ConditionSide side,
                         StatsMode mode, long samples = 20000, uint64_t seed = 7,
                         long cap = kDefaultEnumerationCap);

// Two distinct geometric success rates govern the discrepancy tails; they
// are deliberately named apart so they cannot be conflated.  The two-sided
// rate bounds |P_u| given P_v under the coupling; the one-sided rate bounds
// the revealing walk when one endpoint of the coupling is fixed.
double geometric_rate_two_sided(const MonomerDimerModel& model);  // 2/(1+sqrt(1+lambda*Delta))
double geometric_rate_one_sided(const MonomerDimerModel& model);  // 1/(1+lambda*Delta)

enum class TailStatus { Pass, Violation, Inconclusive };

struct GeometricTailReport {
    TailStatus status = TailStatus::Inconclusive;
    double q;             // 2/(1 + sqrt(1 + lambda*Delta))
    long path_samples = 0;
    int groups_tested = 0;
    int tests = 0;
    std::string detail;
};

GeometricTailReport geometric_tail_check(const MonomerDimerModel& model, int e, long samples,
                                         Rng& rng, long min_group = 50,
                                         long cap = kDefaultEnumerationCap);

// Test-function family for the decoupling inequality.
struct PhiSpec {
    enum Kind { Zero, One, InverseLength, DiscrepancySize, TransitionIndicator } kind = Zero;
    Matching alpha, beta;  // for TransitionIndicator: 1[(a->b) in path]/length
    static PhiSpec zero() { return {}; }
    static PhiSpec one() { return {One, {}, {}}; }
    static PhiSpec inverse_length() { return {InverseLength, {}, {}}; }
    static PhiSpec discrepancy() { return {DiscrepancySize, {}, {}}; }
    static PhiSpec transition(const Matching& a, const Matching& b) {
        return {TransitionIndicator, a, b};
    }
};

// Checks (a) the pairwise detailed identity between couplings at every pair
// of edges on shared supports, exactly, and (b) the summed inequality for
// the given test function.
bool verify_decoupling(const MonomerDimerModel& model, int e_star, const PhiSpec& phi,
                       StatsMode mode = StatsMode::Exact, long cap = kDefaultEnumerationCap);

struct DecouplingSweepReport {
    bool identity_ok = true;
    bool inequality_ok = true;
    long shared_pairs = 0;
    long inequality_checks = 0;
    bool holds() const { return identity_ok && inequality_ok; }
};

// Model-wide sweep: the detailed identity across every pair of two-sided
// edges, and the summed inequality for the built-in test family at every
// fixed edge.
DecouplingSweepReport verify_decoupling_family(const MonomerDimerModel& model,
                                               long cap = kDefaultEnumerationCap);

// Merged graph for the flow encoding: all edges at w removed except g and h,
// which fuse into h_star = {other end of g, other end of h}.  May contain a
// parallel edge pair when the fused endpoints were already adjacent.
struct MergedGraph {
    Graph graph;
    int h_star = -1;              // edge index of the fused edge in the merged graph
    int merge_vertex = -1;        // w
    std::vector<int> edge_map;    // merged index -> original index (-1 for h_star)
    std::vector<int> reverse_map; // original index -> merged index (-1 if removed)

    // Configuration transfer; requires x_g = x_h and zero on removed edges.
    Matching proj(const Graph& original, const Matching& x, int gEdge, int hEdge) const;
};

MergedGraph build_merged_graph(const Graph& g, int w, int gEdge, int hEdge);

struct EncodedPair {
    MergedGraph merged;
    Matching x_hat, y_hat;
    Rat z_hat;  // partition function of the merged model
    Rat eta;    // (z_hat/z)^2 * lambda_bar^2
};

// The flow encoding for an exchange transition (alpha -> beta) adding hEdge
// and removing gEdge, applied to a coupled pair (x, y) whose canonical path
// traverses the transition.
EncodedPair encode(const MonomerDimerModel& model, int hEdge, const Matching& alpha,
                   const Matching& beta, const Matching& x, const Matching& y,
                   long cap = kDefaultEnumerationCap);

struct EncodingCheckReport {
    long transitions_checked = 0;
    long pairs_checked = 0;
    bool injective = true;
    bool codomain_ok = true;   // y_hat = merged image of alpha union beta
    bool measure_ok = true;    // exact eta-relative domination
    bool holds() const { return injective && codomain_ok && measure_ok; }
};

// Exhaustive encoding check over every exchange transition of the chain.
EncodingCheckReport verify_encoding(const MonomerDimerModel& model,
                                    long cap = kDefaultEnumerationCap);

// Exhaustive path legality over the whole coupling support of every two-sided
// free edge: legal JS steps, exact endpoints, l <= |x xor y| <= 2l, each
// disagreement edge flipped exactly once.
bool verify_canonical_paths(const MonomerDimerModel& model, const Pinning& pinning = {},
                            long cap = kDefaultEnumerationCap);

// P[B = C] = lambda * P[B = C minus the off-e edge at e.v], exactly, for
// every even-cycle component in the support of the coupling at e.
bool verify_cycle_path_identity(const MonomerDimerModel& model, int e,
                                long cap = kDefaultEnumerationCap);

// mu_e(0) mu_e(1) P_{C_e}(x,y) equals the e-independent boundary-window
// product mu_{dB}(x_dB) mu(y), exactly, across the support.
bool verify_coupling_symmetry_identity(const MonomerDimerModel& model, int e,
                                       long cap = kDefaultEnumerationCap);

struct FlowTheoremsReport {
    Rat kappa, strong_kappa, sq_length;  // exact flow statistics
    Rat phi;                             // marginal lower bound
    double alpha_pi;                     // exact-form eigensolve value
    double alpha_pi_bound;               // 1/(8 kappa L)
    double alpha_lsi_estimate;           // descent upper estimate
    double alpha_lsi_bound;              // (1/(8 kappa_strong)) * (1-2phi)/log(1/phi-1)
    bool pi_holds, lsi_holds;
};

// Exact flow statistics feeding the local-inequality bounds, for the chain
// under the given pinning (free-set proposals; flows on the free support).
FlowTheoremsReport verify_flow_theorems(const MonomerDimerModel& model,
                                        const Pinning& pinning = {}, double pi_tol = 1e-9,
                                        double lsi_tol = 1e-6,
                                        long cap = kDefaultEnumerationCap);

}  // namespace mdmc
