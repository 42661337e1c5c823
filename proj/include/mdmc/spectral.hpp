#pragma once

#include "mdmc/chains.hpp"

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace mdmc {

inline constexpr double kInfiniteConstant = std::numeric_limits<double>::infinity();

enum class FormLabel { Dirichlet, Variance, LocalVarianceSum };

// Symmetric PSD quadratic form f -> f^T A f over the support of a
// distribution, built in exact rationals.  All three labels annihilate
// constant vectors.
struct QuadraticForm {
    RatMatrix mat;
    FormLabel label = FormLabel::Dirichlet;

    Rat value(const std::vector<Rat>& f) const { return mat.quad(f); }
    Eigen::MatrixXd to_eigen() const;
};

Eigen::MatrixXd to_eigen(const RatMatrix& m);
Eigen::VectorXd to_eigen(const std::vector<Rat>& v);

// 1/2 sum mu(x) Q(x,y) (f(x)-f(y))^2, i.e. diag(mu)(I - Q) symmetrized.
QuadraticForm dirichlet_matrix(const TransitionKernel& kernel);

// diag(mu) - mu mu^T.
QuadraticForm variance_form(const ExactDistribution& dist);

// sum over free edges e of Var(E[F | X_e]) as a quadratic form.
QuadraticForm local_variance_form(const ExactDistribution& dist);
QuadraticForm local_variance_form(const MonomerDimerModel& model, const Pinning& pinning,
                                  long cap = kDefaultEnumerationCap);

// Smallest nonzero generalized eigenvalue of (Dirichlet, Variance): the
// worst-case ratio E(f,f)/Var(f).  Errors on reducible kernels.
double poincare_constant(const TransitionKernel& kernel);

// Largest alpha with alpha * sum_e Var(E[F|X_e]) <= E(f,f); +infinity when
// the local form is identically zero (fully pinned models).
double local_poincare_constant(const MonomerDimerModel& model, const Pinning& pinning,
                               const TransitionKernel& kernel);

struct LogSobolevEstimate {
    double rho_lower;  // gamma * (1-2*mu_min)/log(1/mu_min - 1), a sanity floor
    double rho_upper;  // best Rayleigh quotient found by projected descent
};

LogSobolevEstimate log_sobolev_constant(const TransitionKernel& kernel, int restarts = 12,
                                        double tol = 1e-12, uint64_t seed = 12345);

// Upper estimate of the best constant in alpha * sum_e Ent(E[F^2|X_e]) <= E(f,f).
double local_log_sobolev_constant(const MonomerDimerModel& model, const Pinning& pinning,
                                  const TransitionKernel& kernel, int restarts = 12,
                                  uint64_t seed = 12345);

// (1-2*phi)/log(1/phi - 1), continuously extended to 1/2 at phi = 1/2.
double two_point_lsi_factor(double phi);

enum class MixingMethod { Scan, Bracket };

// Least t with worst-start total variation distance <= eps, by dense matrix
// powering in doubles.  Scan multiplies step by step from t=0; Bracket finds
// a power-of-two bracket by repeated squaring, then scans inside it.
long mixing_time_exact(const TransitionKernel& kernel, double eps,
                       MixingMethod method = MixingMethod::Scan, long step_cap = 2000000);

// Law of total variance / entropy across free edges, checked on one function
// to 1e-12 relative accuracy.
bool verify_one_step_decomposition(const ExactDistribution& dist,
                                   const std::vector<double>& f, double rel_tol = 1e-12);

struct AlphaTableRow {
    int k = 0;
    double alpha = kInfiniteConstant;
    std::string argmin_pinning = "none";
};

struct LocalToGlobalReport {
    double gamma = 0;
    double bound = 0;  // (sum_k 1/(k alpha_k))^-1
    bool holds = false;
    std::vector<AlphaTableRow> table;
    std::string alpha_table_csv() const;
};

// Exhaustive sweep over all feasible pinnings: alpha_k tables and the
// local-to-global Poincare bound check.
LocalToGlobalReport verify_local_to_global(const MonomerDimerModel& model, double tol = 1e-9,
                                           int max_edges = 7);

// Transition-level concavity of the pinned-chain family, checked exactly in
// rationals for all state pairs, plus the implied Dirichlet-form inequality
// on random integer-valued functions.
bool verify_concavity(const MonomerDimerModel& model, const Pinning& pinning,
                      uint64_t seed = 999, int random_functions = 8);

struct GlauberComparisonReport {
    double factor_checked;  // 4 * Delta * (lambda_bar + 1)
    double min_eig;         // of factor * A_GD - A_JS
    bool holds;
};

GlauberComparisonReport compare_js_glauber(const MonomerDimerModel& model,
                                           long cap = kDefaultEnumerationCap);

struct ConstantsReport {
    double gamma = 0;
    double rho_lower = 0;
    double rho_upper = 0;
    double alpha_local_pi = 0;
    double alpha_local_lsi_estimate = 0;
    std::vector<AlphaTableRow> alpha_table;  // filled when a pinning sweep ran

    std::string to_json() const;
};

ConstantsReport constants_report(const MonomerDimerModel& model, const Pinning& pinning,
                                 int restarts = 12, bool with_alpha_table = false,
                                 uint64_t seed = 12345);

}  // namespace mdmc
