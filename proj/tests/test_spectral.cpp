#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mdmc/generators.hpp"
#include "mdmc/spectral.hpp"

#include <cmath>

using namespace mdmc;

namespace {

std::vector<Rat> rat_vec(std::initializer_list<long> v) {
    std::vector<Rat> out;
    for (long x : v) out.emplace_back(x);
    return out;
}

}  // namespace

TEST_CASE("dirichlet matrix values") {
    MonomerDimerModel k2(path_graph(2), 1);
    TransitionKernel q = transition_kernel(k2, {}, ChainKind::JS);
    QuadraticForm a = dirichlet_matrix(q);
    CHECK(a.value(rat_vec({0, 1})) == Rat(1, 2));
    CHECK(a.value(rat_vec({3, 3})) == 0);  // constants annihilated

    MonomerDimerModel p3(path_graph(3), 1);
    QuadraticForm ap = dirichlet_matrix(transition_kernel(p3, {}, ChainKind::JS));
    CHECK(ap.value(rat_vec({1, 0, 0})) == Rat(1, 3));

    // lazy Dirichlet matrix is exactly half the non-lazy one
    QuadraticForm lazy = dirichlet_matrix(transition_kernel(p3, {}, ChainKind::LazyJS));
    CHECK(lazy.mat == ap.mat.scaled(Rat(1, 2)));

    TransitionKernel bad = q;
    bad.matrix.at(0, 1) -= Rat(1, 4);
    bad.matrix.at(0, 0) += Rat(1, 4);
    CHECK_THROWS_AS(dirichlet_matrix(bad), std::invalid_argument);
}

TEST_CASE("local variance form values") {
    MonomerDimerModel k2(path_graph(2), 1);
    ExactDistribution d = enumerate(k2);
    QuadraticForm b = local_variance_form(d);
    CHECK(b.value(rat_vec({0, 1})) == Rat(1, 4));  // X determined by X_e
    CHECK(b.value(rat_vec({5, 5})) == 0);

    MonomerDimerModel p3(path_graph(3), 1);
    ExactDistribution dp = enumerate(p3);
    QuadraticForm bp = local_variance_form(dp);
    // indicator of the empty matching: each edge contributes Var of a
    // (2/3, 1/3)-split of conditional means (1/2, 0)
    int empty_idx = dp.index_of(p3.graph.empty_set());
    std::vector<Rat> f(3, Rat(0));
    f[empty_idx] = 1;
    CHECK(bp.value(f) == Rat(1, 9));
}

TEST_CASE("forms are PSD and annihilate constants") {
    for (const Graph& g : {path_graph(4), cycle_graph(4), star_graph(3)}) {
        MonomerDimerModel model(g, Rat(2));
        TransitionKernel js = transition_kernel(model, {}, ChainKind::JS);
        TransitionKernel gd = transition_kernel(model, {}, ChainKind::Glauber);
        for (const QuadraticForm& form :
             {dirichlet_matrix(js), dirichlet_matrix(gd), variance_form(js.dist),
              local_variance_form(js.dist)}) {
            CHECK(form.mat.is_symmetric());
            CHECK(form.mat.annihilates_constants());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form.to_eigen());
            CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        }
    }
}

TEST_CASE("poincare constant examples") {
    MonomerDimerModel k2(path_graph(2), 1);
    TransitionKernel q = transition_kernel(k2, {}, ChainKind::JS);
    CHECK(poincare_constant(q) == doctest::Approx(2.0).epsilon(1e-9));

    MonomerDimerModel p3(path_graph(3), 1);
    TransitionKernel qp = transition_kernel(p3, {}, ChainKind::JS);
    CHECK(poincare_constant(qp) == doctest::Approx(1.5).epsilon(1e-9));

    TransitionKernel lazy = transition_kernel(p3, {}, ChainKind::LazyJS);
    CHECK(poincare_constant(lazy) == doctest::Approx(0.75).epsilon(1e-9));

    // gamma(lazy) = gamma/2 exactly, across models
    for (const Graph& g : {cycle_graph(4), star_graph(3), complete_graph(4)}) {
        MonomerDimerModel model(g, Rat(1, 2));
        double full = poincare_constant(transition_kernel(model, {}, ChainKind::JS));
        double half = poincare_constant(transition_kernel(model, {}, ChainKind::LazyJS));
        CHECK(half == doctest::Approx(full / 2).epsilon(1e-9));
    }

    // a frozen chain has one state and no spectral gap to report
    TransitionKernel frozen = transition_kernel(p3, pin(p3, {}, 0, 1), ChainKind::JS);
    CHECK(poincare_constant(frozen) == kInfiniteConstant);

    // reducible kernels are rejected (identity on two or more states)
    TransitionKernel stuck = transition_kernel(k2, {}, ChainKind::JS);
    stuck.matrix = RatMatrix::identity(stuck.size());
    CHECK_THROWS_AS(poincare_constant(stuck), std::invalid_argument);
}

TEST_CASE("local poincare constant") {
    MonomerDimerModel k2(path_graph(2), 1);
    TransitionKernel q = transition_kernel(k2, {}, ChainKind::JS);
    CHECK(local_poincare_constant(k2, {}, q) == doctest::Approx(2.0).epsilon(1e-9));

    // fully forced pinning: the local form vanishes -> sentinel
    MonomerDimerModel p3(path_graph(3), 1);
    Pinning frozen = pin(p3, {}, 0, 1);
    TransitionKernel qf = transition_kernel(p3, frozen, ChainKind::JS);
    CHECK(local_poincare_constant(p3, frozen, qf) == kInfiniteConstant);

    // mismatched kernel is rejected
    TransitionKernel qp = transition_kernel(p3, {}, ChainKind::JS);
    CHECK_THROWS_AS(local_poincare_constant(p3, frozen, qp), std::invalid_argument);
}

TEST_CASE("local poincare eigensolve lower-bounds every sampled quotient") {
    for (const Graph& g : {path_graph(3), cycle_graph(4), star_graph(3)}) {
        MonomerDimerModel model(g, Rat(2));
        TransitionKernel k = transition_kernel(model, {}, ChainKind::JS);
        double alpha = local_poincare_constant(model, {}, k);
        QuadraticForm a = dirichlet_matrix(k);
        QuadraticForm b = local_variance_form(k.dist);
        Rng rng(55);
        double sampled_min = kInfiniteConstant;
        for (int t = 0; t < 400; ++t) {
            std::vector<Rat> f(k.size());
            for (auto& x : f) x = static_cast<long>(rng.below(41)) - 20;
            Rat den = b.value(f);
            if (den == 0) continue;
            double q = to_double(a.value(f)) / to_double(den);
            sampled_min = std::min(sampled_min, q);
            CHECK(alpha <= q + 1e-9);
        }
        CHECK(alpha <= sampled_min + 1e-9);
    }
}

TEST_CASE("rayleigh quotients are scale invariant") {
    MonomerDimerModel p3(path_graph(3), 1);
    TransitionKernel q = transition_kernel(p3, {}, ChainKind::JS);
    QuadraticForm a = dirichlet_matrix(q);
    QuadraticForm v = variance_form(q.dist);
    QuadraticForm b = local_variance_form(q.dist);
    std::vector<Rat> f = rat_vec({3, -1, 2});
    for (const Rat& c : {Rat(2), Rat(-5), Rat(1, 7)}) {
        std::vector<Rat> cf = f;
        for (auto& x : cf) x *= c;
        CHECK(a.value(cf) * v.value(f) == a.value(f) * v.value(cf));
        CHECK(a.value(cf) * b.value(f) == a.value(f) * b.value(cf));
    }
}

TEST_CASE("log-sobolev estimates") {
    MonomerDimerModel k2(path_graph(2), 1);
    TransitionKernel q = transition_kernel(k2, {}, ChainKind::JS);
    LogSobolevEstimate est = log_sobolev_constant(q, 8, 1e-12, 5);
    // symmetric two-point chain: rho = gamma/2 = 1 exactly
    CHECK(est.rho_lower == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(est.rho_upper == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(est.rho_upper >= est.rho_lower - 1e-6);

    // asymmetric two-point chain: floor matches the closed form
    MonomerDimerModel k2two(path_graph(2), 2);
    TransitionKernel q2 = transition_kernel(k2two, {}, ChainKind::JS);
    LogSobolevEstimate est2 = log_sobolev_constant(q2, 8, 1e-12, 5);
    double gamma2 = poincare_constant(q2);
    double p = 1.0 / 3.0;  // mu_min
    CHECK(est2.rho_lower ==
          doctest::Approx(gamma2 * (1 - 2 * p) / std::log(1 / p - 1)).epsilon(1e-9));
    CHECK(est2.rho_upper >= est2.rho_lower - 1e-6);

    MonomerDimerModel p3(path_graph(3), 1);
    TransitionKernel qp = transition_kernel(p3, {}, ChainKind::JS);
    LogSobolevEstimate estp = log_sobolev_constant(qp, 8, 1e-12, 5);
    double gp = poincare_constant(qp);
    CHECK(estp.rho_upper >= estp.rho_lower - 1e-6);
    CHECK(estp.rho_upper <= gp + 1e-6);  // rho <= gamma via Ent(f^2) >= 2 Var(f) near constants
}

TEST_CASE("local log-sobolev estimate") {
    // single edge: the local sum collapses to the global entropy
    MonomerDimerModel k2(path_graph(2), 1);
    TransitionKernel q = transition_kernel(k2, {}, ChainKind::JS);
    double local = local_log_sobolev_constant(k2, {}, q, 8, 5);
    LogSobolevEstimate global = log_sobolev_constant(q, 8, 1e-12, 5);
    CHECK(local == doctest::Approx(global.rho_upper).epsilon(1e-6));

    MonomerDimerModel p3(path_graph(3), 1);
    Pinning frozen = pin(p3, {}, 0, 1);
    TransitionKernel qf = transition_kernel(p3, frozen, ChainKind::JS);
    CHECK(local_log_sobolev_constant(p3, frozen, qf) == kInfiniteConstant);
}

TEST_CASE("entropy rayleigh quotient is scale invariant") {
    MonomerDimerModel p3(path_graph(3), 1);
    TransitionKernel k = transition_kernel(p3, {}, ChainKind::JS);
    QuadraticForm a = dirichlet_matrix(k);
    std::vector<double> mu(k.size()), f{1.7, -0.4, 0.9};
    for (int i = 0; i < k.size(); ++i) mu[i] = to_double(k.dist.probs[i]);
    auto quotient = [&](double c) {
        std::vector<Rat> fr;
        double e2 = 0, ent = 0;
        for (int i = 0; i < k.size(); ++i) {
            double v = c * f[i];
            fr.emplace_back(v);
            e2 += mu[i] * v * v;
            ent += mu[i] * v * v * std::log(v * v);
        }
        ent -= e2 * std::log(e2);
        return to_double(a.value(fr)) / ent;
    };
    CHECK(quotient(1.0) == doctest::Approx(quotient(3.0)).epsilon(1e-9));
    CHECK(quotient(1.0) == doctest::Approx(quotient(0.2)).epsilon(1e-9));
}

TEST_CASE("two point lsi factor") {
    CHECK(two_point_lsi_factor(0.5) == doctest::Approx(0.5));
    CHECK(two_point_lsi_factor(0.25) == doctest::Approx(0.5 / std::log(3.0)));
    // increasing on (0, 1/2)
    CHECK(two_point_lsi_factor(0.1) < two_point_lsi_factor(0.3));
}

TEST_CASE("mixing time") {
    const double eps = 1.0 / (2.0 * std::exp(1.0));
    MonomerDimerModel k2(path_graph(2), 1);
    TransitionKernel lazy = transition_kernel(k2, {}, ChainKind::LazyJS);
    CHECK(mixing_time_exact(lazy, eps, MixingMethod::Scan) == 1);
    CHECK(mixing_time_exact(lazy, eps, MixingMethod::Bracket) == 1);
    CHECK(mixing_time_exact(lazy, 1.0, MixingMethod::Scan) == 0);

    MonomerDimerModel p3(path_graph(3), 1);
    TransitionKernel lp = transition_kernel(p3, {}, ChainKind::LazyJS);
    long t_scan = mixing_time_exact(lp, eps, MixingMethod::Scan);
    long t_bracket = mixing_time_exact(lp, eps, MixingMethod::Bracket);
    CHECK(t_scan == t_bracket);
    // classical ceiling: t <= (1/gamma) log(1/(mu_min * eps))
    double gamma = poincare_constant(lp);
    double mu_min = to_double(lp.dist.min_prob());
    CHECK(t_scan <= std::ceil(std::log(1.0 / (mu_min * eps)) / gamma));

    for (const Graph& g : {cycle_graph(4), star_graph(3)}) {
        MonomerDimerModel model(g, Rat(1, 2));
        TransitionKernel k = transition_kernel(model, {}, ChainKind::LazyJS);
        CHECK(mixing_time_exact(k, eps, MixingMethod::Scan) ==
              mixing_time_exact(k, eps, MixingMethod::Bracket));
    }
}

TEST_CASE("one-step decomposition identities") {
    MonomerDimerModel p3(path_graph(3), 1);
    ExactDistribution d = enumerate(p3);
    CHECK(verify_one_step_decomposition(d, {7, 7, 7}));  // constants: 0 = 0 + 0
    std::vector<double> ind(d.size(), 0.0);
    ind[d.index_of(EdgeSet::of(2, {0}))] = 1.0;
    CHECK(verify_one_step_decomposition(d, ind));

    MonomerDimerModel c4(cycle_graph(4), 2);
    ExactDistribution dc = enumerate(c4);
    Rng rng(31);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> f(dc.size());
        for (auto& x : f) x = rng.uniform() * 3 - 1;
        CHECK(verify_one_step_decomposition(dc, f));
    }

    // pinned variant: the average runs over the free edges only
    ExactDistribution dp = enumerate(c4, pin(c4, {}, 0, 0));
    for (int t = 0; t < 10; ++t) {
        std::vector<double> f(dp.size());
        for (auto& x : f) x = rng.uniform() * 3 - 1;
        CHECK(verify_one_step_decomposition(dp, f));
    }
}

TEST_CASE("local-to-global theorem") {
    MonomerDimerModel k2(path_graph(2), 1);
    LocalToGlobalReport rep = verify_local_to_global(k2);
    CHECK(rep.holds);
    REQUIRE(rep.table.size() == 1);
    CHECK(rep.table[0].alpha == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(rep.bound == doctest::Approx(rep.gamma).epsilon(1e-9));  // tight on one edge

    CHECK(verify_local_to_global(MonomerDimerModel(path_graph(3), 1)).holds);
    CHECK(verify_local_to_global(MonomerDimerModel(complete_graph(3), Rat(1, 2))).holds);

    CHECK_THROWS_AS(verify_local_to_global(MonomerDimerModel(grid_graph(3, 3), 1)),
                    OversizeError);

    std::string csv = verify_local_to_global(MonomerDimerModel(path_graph(3), 1)).alpha_table_csv();
    CHECK(csv.find("k,alpha_k,argmin_pinning") != std::string::npos);
}

TEST_CASE("concavity of the pinned family") {
    MonomerDimerModel k2(path_graph(2), 1);
    CHECK(verify_concavity(k2, {}));  // |free|=1: left side vanishes

    MonomerDimerModel p3(path_graph(3), 1);
    CHECK(verify_concavity(p3, {}));

    MonomerDimerModel c4(cycle_graph(4), Rat(1, 2));
    CHECK(verify_concavity(c4, pin(c4, {}, 0, 0)));
}

TEST_CASE("glauber comparison") {
    GlauberComparisonReport k2 = compare_js_glauber(MonomerDimerModel(path_graph(2), 1));
    CHECK(k2.factor_checked == doctest::Approx(8.0));
    CHECK(k2.holds);
    CHECK(k2.min_eig >= -1e-9);

    CHECK(compare_js_glauber(MonomerDimerModel(path_graph(3), 1)).holds);
    CHECK(compare_js_glauber(MonomerDimerModel(star_graph(4), 2)).holds);
}

TEST_CASE("constants report serialization") {
    MonomerDimerModel p3(path_graph(3), 1);
    ConstantsReport rep = constants_report(p3, {}, 6, true, 5);
    CHECK(rep.gamma == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(rep.rho_lower <= rep.rho_upper + 1e-6);
    std::string j = rep.to_json();
    CHECK(j.find("\"gamma\"") != std::string::npos);
    CHECK(j.find("\"alpha_table\"") != std::string::npos);
}
