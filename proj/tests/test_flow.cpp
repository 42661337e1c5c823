#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mdmc/flow.hpp"
#include "mdmc/generators.hpp"
#include "mdmc/spectral.hpp"

#include <cmath>
#include <map>

using namespace mdmc;

TEST_CASE("coupling law on P3 and K2") {
    MonomerDimerModel p3(path_graph(3), 1);
    CouplingLaw law = coupling_law_exact(p3, {}, 0);
    REQUIRE(law.pairs.size() == 2);
    Matching y = EdgeSet::of(2, {0});
    CHECK(law.prob(EdgeSet(2), y) == Rat(1, 2));
    CHECK(law.prob(EdgeSet::of(2, {1}), y) == Rat(1, 2));
    CHECK(law.marginal_zero == Rat(2, 3));
    CHECK(law.marginal_one == Rat(1, 3));

    MonomerDimerModel k2(path_graph(2), 1);
    CouplingLaw lk = coupling_law_exact(k2, {}, 0);
    REQUIRE(lk.pairs.size() == 1);
    CHECK(lk.probs[0] == 1);

    // a disconnected difference is Case 2: probability zero
    MonomerDimerModel p4(path_graph(4), 1);
    Matching disconnected_x = EdgeSet::of(3, {2});
    Matching disconnected_y = EdgeSet::of(3, {0});
    CHECK(coupling_probability(p4, {}, 0, disconnected_x, disconnected_y) == Rat(0));
    CHECK(coupling_probability(p3, {}, 0, EdgeSet(2), y) == Rat(1, 2));
    CHECK(coupling_probability(p3, {}, 0, EdgeSet::of(2, {1}), y) == Rat(1, 2));
}

TEST_CASE("coupling sampling") {
    MonomerDimerModel k2(path_graph(2), 1);
    Rng rng(3);
    CouplingSample s = sample_local_flipping_coupling(k2, {}, 0, rng);
    CHECK(s.x == EdgeSet(1));
    CHECK(s.y == EdgeSet::of(1, {0}));
    CHECK(s.b.edges == EdgeSet::of(1, {0}));

    // C4: the support contains an even-cycle component
    MonomerDimerModel c4(cycle_graph(4), 1);
    bool saw_cycle = false;
    Rng rng2(17);
    for (int t = 0; t < 500 && !saw_cycle; ++t) {
        CouplingSample sc = sample_local_flipping_coupling(c4, {}, 0, rng2);
        CHECK((sc.x ^ sc.y) == sc.b.edges);
        CHECK(sc.b.edges.test(0));
        CHECK(!sc.x.test(0));
        CHECK(sc.y.test(0));
        if (sc.b.kind == ComponentKind::EvenCycle) saw_cycle = true;
    }
    CHECK(saw_cycle);

    // infeasible two-sided edge is rejected
    MonomerDimerModel p3(path_graph(3), 1);
    Pinning p = pin(p3, {}, 0, 1);
    CHECK_THROWS_AS(sample_local_flipping_coupling(p3, p, 1, rng), std::invalid_argument);
}

TEST_CASE("coupling validity: marginals and pair-enumeration oracle") {
    for (const Graph& g : {path_graph(4), cycle_graph(4), star_graph(3), complete_graph(3)}) {
        for (const Rat& lam : {Rat(1, 2), Rat(2)}) {
            MonomerDimerModel model(g, lam);
            EdgeSet ts = free_support_edges(model, {});
            ts.for_each([&](int e) {
                CHECK(verify_coupling_marginals(model, {}, e));
                CouplingLaw a = coupling_law_exact(model, {}, e);
                CouplingLaw b = coupling_law_by_pair_enumeration(model, {}, e);
                CHECK(coupling_laws_equal(a, b));
            });
        }
    }
}

TEST_CASE("coupling validity under pinnings") {
    MonomerDimerModel c4(cycle_graph(4), Rat(1, 2));
    Pinning p = pin(c4, {}, 3, 0);
    EdgeSet ts = free_support_edges(c4, p);
    ts.for_each([&](int e) {
        CHECK(verify_coupling_marginals(c4, p, e));
        CHECK(coupling_laws_equal(coupling_law_exact(c4, p, e),
                                  coupling_law_by_pair_enumeration(c4, p, e)));
    });
}

TEST_CASE("symmetry identity independent of the edge") {
    for (const Graph& g : {path_graph(4), cycle_graph(4), complete_graph(3)}) {
        MonomerDimerModel model(g, Rat(2));
        for (int e = 0; e < g.edge_count(); ++e)
            CHECK(verify_coupling_symmetry_identity(model, e));
    }
}

TEST_CASE("canonical path examples") {
    MonomerDimerModel p3(path_graph(3), 1);
    // single up
    TransportPath up = canonical_path(p3, EdgeSet(2), EdgeSet::of(2, {0}), 0);
    CHECK(up.length() == 1);
    CHECK(up.moves == std::vector<MoveKind>{MoveKind::Up});

    // x={e1}, y={e0}: the larger endpoint (vertex 2) starts the walk; its
    // edge is in x, so the path goes down then up.
    TransportPath dd = canonical_path(p3, EdgeSet::of(2, {1}), EdgeSet::of(2, {0}), 0);
    CHECK(dd.length() == 2);
    CHECK(dd.moves == std::vector<MoveKind>{MoveKind::Down, MoveKind::Up});
    CHECK(dd.states[1] == EdgeSet(2));

    // reversed orientation: single exchange
    TransportPath ex = canonical_path(p3, EdgeSet::of(2, {0}), EdgeSet::of(2, {1}), 1);
    CHECK(ex.length() == 1);
    CHECK(ex.moves == std::vector<MoveKind>{MoveKind::Exchange});

    // full 4-cycle: down, exchange, up
    Graph c4g = cycle_graph(4);
    MonomerDimerModel c4(c4g, 1);
    Matching x = EdgeSet::of(4, {*c4g.find_edge(1, 2), *c4g.find_edge(0, 3)});
    Matching y = EdgeSet::of(4, {*c4g.find_edge(0, 1), *c4g.find_edge(2, 3)});
    TransportPath cyc = canonical_path(c4, x, y, *c4g.find_edge(0, 1));
    CHECK(cyc.length() == 3);
    CHECK(cyc.moves ==
          std::vector<MoveKind>{MoveKind::Down, MoveKind::Exchange, MoveKind::Up});
    CHECK((x ^ y).count() == 4);

    CHECK_THROWS_AS(canonical_path(p3, EdgeSet::of(2, {0}), EdgeSet::of(2, {0}), 0),
                    std::invalid_argument);
}

TEST_CASE("canonical path tie-break follows the graph's vertex order") {
    // Reversing the total order swaps which endpoint starts the walk, so the
    // down-up route above becomes a single exchange.
    Graph g = path_graph(3);
    g.set_vertex_order({2, 1, 0});
    MonomerDimerModel p3(g, 1);
    TransportPath ex = canonical_path(p3, EdgeSet::of(2, {1}), EdgeSet::of(2, {0}), 0);
    CHECK(ex.length() == 1);
    CHECK(ex.moves == std::vector<MoveKind>{MoveKind::Exchange});
}

TEST_CASE("path legality corpus sweep") {
    for (const Graph& g :
         {path_graph(4), cycle_graph(4), cycle_graph(6), star_graph(4), complete_graph(4)})
        for (const Rat& lam : {Rat(1, 2), Rat(1), Rat(2)})
            CHECK(verify_canonical_paths(MonomerDimerModel(g, lam)));
    // pinned variant
    MonomerDimerModel c6(cycle_graph(6), 2);
    CHECK(verify_canonical_paths(c6, pin(c6, {}, 0, 0)));
}

TEST_CASE("transport flow sampling and endpoint marginals") {
    MonomerDimerModel k2(path_graph(2), 1);
    Rng rngk(5);
    for (int t = 0; t < 20; ++t) {
        TransportPath g = sample_transport_flow(k2, {}, 0, rngk);
        CHECK(g.length() == 1);
        CHECK(g.source() == EdgeSet(1));
        CHECK(g.target() == EdgeSet::of(1, {0}));
    }

    // chi-square endpoint test on P3 at 1e5 samples
    MonomerDimerModel p3(path_graph(3), 1);
    ExactDistribution d0 = enumerate(p3, pin(p3, {}, 0, 0));
    std::map<std::vector<int>, long> counts;
    const long n = 100000;
    Rng rng(1234);
    CouplingSampler sampler(p3, {}, 0);
    for (long t = 0; t < n; ++t) {
        CouplingSample s = sampler.sample(rng);
        ++counts[canonical_path_between(p3, s.x, s.y).source().indices()];
    }
    double chi2 = 0;
    for (int i = 0; i < d0.size(); ++i) {
        double expect = to_double(d0.probs[i]) * n;
        double got = static_cast<double>(counts[d0.states[i].indices()]);
        chi2 += (got - expect) * (got - expect) / expect;
    }
    CHECK(chi2 < 18.9);  // df=1 quantile at the 4-sigma level (Wilson-Hilferty)

    // pinned flow lives on the free subgraph, extended by the pinning
    Pinning pe1 = pin(p3, {}, 1, 0);
    Rng rngp(9);
    for (int t = 0; t < 10; ++t) {
        TransportPath g = sample_transport_flow(p3, pe1, 0, rngp);
        CHECK(g.length() == 1);
        CHECK(!g.source().test(1));
        CHECK(!g.target().test(1));
    }
}

TEST_CASE("flow statistics exact") {
    MonomerDimerModel p3(path_graph(3), 1);
    FlowStats s = flow_statistics(p3, {}, StatsMode::Exact);
    CHECK(s.congestion_kappa == Rat(1));
    // transition (empty -> {e0}) carries lhs 1/6 = mu(empty) Q(empty, {e0})
    bool found = false;
    for (const auto& row : s.congestion_rows) {
        if (row.alpha == EdgeSet(2) && row.beta == EdgeSet::of(2, {0})) {
            CHECK(row.lhs == Rat(1, 6));
            CHECK(row.rhs == Rat(1, 6));
            found = true;
        }
    }
    CHECK(found);

    MonomerDimerModel k2(path_graph(2), 1);
    FlowStats sk = flow_statistics(k2, {}, StatsMode::Exact);
    CHECK(sk.expected_sq_length == Rat(1));
    CHECK(sk.expected_sq_discrepancy == Rat(1));
    // single path of length one; the definitional max-ratio congestion is 1/2
    CHECK(sk.congestion_kappa == Rat(1, 2));
    CHECK(sk.strong_kappa == Rat(1, 2));

    // E[l^2] <= E[|B|^2] edge by edge
    for (const Graph& g : {path_graph(4), cycle_graph(6), star_graph(4), complete_graph(4)}) {
        FlowStats st = flow_statistics(MonomerDimerModel(g, Rat(2)), {}, StatsMode::Exact);
        for (const auto& row : st.per_edge)
            CHECK(row.expected_sq_length <= row.expected_sq_discrepancy);
    }
}

TEST_CASE("flow statistics monte carlo tracks exact moments") {
    MonomerDimerModel c4(cycle_graph(4), 1);
    FlowStats exact = flow_statistics(c4, {}, StatsMode::Exact);
    FlowStats mc = flow_statistics(c4, {}, StatsMode::MonteCarlo, 20000, 99);
    CHECK(mc.samples_per_edge == 20000);
    double ex = to_double(exact.expected_sq_length);
    double emp = to_double(mc.expected_sq_length);
    CHECK(std::abs(ex - emp) < std::max(5 * mc.sq_length_stderr, 0.05));
    // Monte Carlo congestion is a lower-bound estimate
    CHECK(to_double(mc.congestion_kappa) <= to_double(exact.congestion_kappa) * 1.2);
}

TEST_CASE("one sided moments") {
    MonomerDimerModel k2(path_graph(2), 1);
    CHECK(one_sided_moments(k2, 0, 2.0, ConditionSide::FixY, StatsMode::Exact) ==
          doctest::Approx(1.0));
    CHECK(one_sided_moments(k2, 0, 0.0, ConditionSide::FixX, StatsMode::Exact) ==
          doctest::Approx(1.0));

    MonomerDimerModel p3(path_graph(3), 1);
    // conditioned on Y = {e0}: |B| is 1 or 2 with probability 1/2 each
    CHECK(one_sided_moments(p3, 0, 2.0, ConditionSide::FixY, StatsMode::Exact) ==
          doctest::Approx(2.5));
    CHECK(one_sided_moments(p3, 0, 0.0, ConditionSide::FixY, StatsMode::Exact) ==
          doctest::Approx(1.0));

    double mc = one_sided_moments(p3, 0, 2.0, ConditionSide::FixY, StatsMode::MonteCarlo, 20000, 7);
    CHECK(std::abs(mc - 2.5) < 0.1);
}

TEST_CASE("geometric tail checks") {
    MonomerDimerModel k2(path_graph(2), 1);
    Rng rng(11);
    GeometricTailReport r = geometric_tail_check(k2, 0, 2000, rng);
    CHECK(r.status == TailStatus::Pass);  // |P_u| = 0 always

    MonomerDimerModel star5(star_graph(5), 1);
    Rng rng2(12);
    GeometricTailReport rs = geometric_tail_check(star5, 0, 20000, rng2);
    CHECK(rs.status == TailStatus::Pass);
    CHECK(rs.q == doctest::Approx(2.0 / (1.0 + std::sqrt(6.0))));
    CHECK(geometric_rate_two_sided(star5) == rs.q);
    CHECK(geometric_rate_one_sided(star5) == doctest::Approx(1.0 / 6.0));

    MonomerDimerModel p20(path_graph(20), 2);
    Rng rng3(13);
    GeometricTailReport rp = geometric_tail_check(p20, 9, 20000, rng3);
    CHECK(rp.status == TailStatus::Pass);
    CHECK(rp.tests > 0);

    // too few samples for any conditioning group
    Rng rng4(14);
    GeometricTailReport ri = geometric_tail_check(p20, 9, 10, rng4, 1000);
    CHECK(ri.status == TailStatus::Inconclusive);
}

TEST_CASE("decoupling lemma") {
    MonomerDimerModel p3(path_graph(3), 1);
    CHECK(verify_decoupling(p3, 0, PhiSpec::zero()));
    Matching empty(2), up0 = EdgeSet::of(2, {0});
    CHECK(verify_decoupling(p3, 0, PhiSpec::transition(empty, up0)));
    CHECK(verify_decoupling(p3, 0, PhiSpec::inverse_length()));
    CHECK(verify_decoupling(p3, 1, PhiSpec::discrepancy()));
    CHECK(verify_decoupling(p3, 1, PhiSpec::one()));

    MonomerDimerModel c4(cycle_graph(4), Rat(1, 2));
    for (int f = 0; f < 4; ++f) {
        CHECK(verify_decoupling(c4, f, PhiSpec::discrepancy()));
        CHECK(verify_decoupling(c4, f, PhiSpec::inverse_length()));
    }
}

TEST_CASE("cycle vs path probability identity") {
    for (const Graph& g : {cycle_graph(4), cycle_graph(6)}) {
        for (const Rat& lam : {Rat(1, 2), Rat(1), Rat(2)}) {
            MonomerDimerModel model(g, lam);
            for (int e = 0; e < g.edge_count(); ++e)
                CHECK(verify_cycle_path_identity(model, e));
        }
    }
}

TEST_CASE("merged graph construction") {
    Graph p3 = path_graph(3);
    MergedGraph m = build_merged_graph(p3, 1, 1, 0);
    CHECK(m.graph.edge_count() == 1);
    CHECK(m.h_star == 0);
    CHECK(m.graph.edge(0).u == 0);
    CHECK(m.graph.edge(0).v == 2);

    Graph p4 = path_graph(4);
    MergedGraph m4 = build_merged_graph(p4, 1, 0, 1);
    CHECK(m4.graph.edge_count() == 2);

    // proj demands equal spins on the fused pair
    Matching bad = EdgeSet::of(2, {0});
    CHECK_THROWS_AS(m.proj(p3, bad, 1, 0), std::invalid_argument);
    Matching good = EdgeSet::of(2, {});
    CHECK(m.proj(p3, good, 1, 0) == EdgeSet(1));

    CHECK_THROWS_AS(build_merged_graph(p3, 0, 0, 1), std::invalid_argument);

    // triangle case: the fused edge duplicates an existing one
    Graph paw = Graph::canonical(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}});
    int g01 = *paw.find_edge(0, 1), g12 = *paw.find_edge(1, 2);
    MergedGraph mp = build_merged_graph(paw, 1, g01, g12);
    CHECK(mp.graph.has_parallel_edges());
    CHECK(is_matching(mp.graph, EdgeSet::of(mp.graph.edge_count(), {mp.h_star})));
}

TEST_CASE("encoding checks on small graphs") {
    for (const Rat& lam : {Rat(1, 2), Rat(1), Rat(2)}) {
        for (const Graph& g : {path_graph(4), cycle_graph(4)}) {
            EncodingCheckReport rep = verify_encoding(MonomerDimerModel(g, lam));
            CHECK(rep.transitions_checked > 0);
            CHECK(rep.holds());
        }
    }
}

TEST_CASE("encode validates its preconditions") {
    MonomerDimerModel p4(path_graph(4), 1);
    TransitionKernel k = transition_kernel(p4, {}, ChainKind::JS);
    // exchange transition: {e0} -> {e1} adds edge 1, removes edge 0
    Matching alpha = EdgeSet::of(3, {0}), beta = EdgeSet::of(3, {1});
    REQUIRE(k.matrix.at(k.dist.index_of(alpha), k.dist.index_of(beta)) > 0);
    CHECK_THROWS_AS(encode(p4, 0, alpha, beta, EdgeSet(3), EdgeSet::of(3, {1})),
                    std::invalid_argument);  // hEdge must be the inserted edge
    CHECK_THROWS_AS(encode(p4, 1, alpha, alpha, EdgeSet(3), EdgeSet::of(3, {1})),
                    std::invalid_argument);  // not an exchange
    // (x, y) whose canonical path skips the transition
    Matching x = EdgeSet(3), y = EdgeSet::of(3, {1});
    CHECK_THROWS_AS(encode(p4, 1, alpha, beta, x, y), std::invalid_argument);
}

TEST_CASE("flow theorems on the small corpus") {
    FlowTheoremsReport k2 = verify_flow_theorems(MonomerDimerModel(path_graph(2), 1));
    CHECK(k2.sq_length == Rat(1));
    CHECK(k2.pi_holds);
    CHECK(k2.lsi_holds);
    CHECK(k2.alpha_pi == doctest::Approx(2.0).epsilon(1e-9));
    // with kappa = L = 1 the bound would read 1/8 <= alpha; the exact
    // max-ratio kappa = 1/2 sharpens it to 1/4
    CHECK(k2.alpha_pi_bound == doctest::Approx(0.25));
    CHECK(k2.alpha_pi >= 0.125 - 1e-9);

    CHECK(verify_flow_theorems(MonomerDimerModel(path_graph(3), 1)).pi_holds);
    CHECK(verify_flow_theorems(MonomerDimerModel(path_graph(3), 1)).lsi_holds);
    FlowTheoremsReport tri = verify_flow_theorems(MonomerDimerModel(complete_graph(3), 2));
    CHECK(tri.pi_holds);
    CHECK(tri.lsi_holds);
}

TEST_CASE("flow theorems under pinnings") {
    MonomerDimerModel c6(cycle_graph(6), Rat(1, 2));
    for (int e : {0, 3}) {
        for (int c : {0, 1}) {
            Pinning p = pin(c6, {}, e, c);
            FlowTheoremsReport rep = verify_flow_theorems(c6, p);
            CHECK(rep.pi_holds);
            CHECK(rep.lsi_holds);
        }
    }
    MonomerDimerModel k4(complete_graph(4), 2);
    Pinning two = pin(k4, pin(k4, {}, 0, 0), 5, 0);
    FlowTheoremsReport rep = verify_flow_theorems(k4, two);
    CHECK(rep.pi_holds);
    CHECK(rep.lsi_holds);
}

TEST_CASE("approximate sampler is consistent with the pinning") {
    MonomerDimerModel c4(cycle_graph(4), 1);
    Pinning p = pin(c4, {}, 0, 0);
    Rng rng(21);
    for (int t = 0; t < 50; ++t) {
        Matching x = approx_sample_matching(c4, p, 50, rng);
        CHECK(is_matching(c4.graph, x));
        CHECK(p.consistent_with(x));
    }
}
