#include "mdmc/spectral.hpp"

#include "mdmc/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mdmc {

namespace {

std::string fmt_double(double x) {
    if (x == kInfiniteConstant) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double xlogx(double x) { return x <= 0 ? 0.0 : x * std::log(x); }

}  // namespace

Eigen::MatrixXd to_eigen(const RatMatrix& m) {
    Eigen::MatrixXd out(m.size(), m.size());
    for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.size(); ++j) out(i, j) = to_double(m.at(i, j));
    return out;
}

Eigen::VectorXd to_eigen(const std::vector<Rat>& v) {
    Eigen::VectorXd out(static_cast<long>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out[static_cast<long>(i)] = to_double(v[i]);
    return out;
}

Eigen::MatrixXd QuadraticForm::to_eigen() const { return mdmc::to_eigen(mat); }

QuadraticForm dirichlet_matrix(const TransitionKernel& kernel) {
    if (!kernel.detailed_balance())
        throw std::invalid_argument("dirichlet_matrix requires a reversible kernel");
    int n = kernel.size();
    QuadraticForm form;
    form.label = FormLabel::Dirichlet;
    form.mat = RatMatrix(n);
    // diag(mu)(I - Q); symmetric exactly because detailed balance holds.
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Rat dq = kernel.dist.probs[i] * kernel.matrix.at(i, j);
            form.mat.at(i, j) = (i == j ? kernel.dist.probs[i] : Rat(0)) - dq;
        }
    }
    return form;
}

QuadraticForm variance_form(const ExactDistribution& dist) {
    int n = dist.size();
    QuadraticForm form;
    form.label = FormLabel::Variance;
    form.mat = RatMatrix(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            form.mat.at(i, j) = (i == j ? dist.probs[i] : Rat(0)) - dist.probs[i] * dist.probs[j];
        }
    }
    return form;
}

QuadraticForm local_variance_form(const ExactDistribution& dist) {
    int n = dist.size();
    QuadraticForm form;
    form.label = FormLabel::LocalVarianceSum;
    form.mat = RatMatrix(n);
    int free_edges = 0;
    int m = n > 0 ? dist.states[0].size() : 0;
    for (int e = 0; e < m; ++e) {
        if (dist.pinning.is_fixed(e)) continue;
        ++free_edges;
        // Var(E[F|X_e]) = sum_c mu_e(c) v_c v_c^T - mu mu^T with
        // v_c(x) = mu(x) 1[x_e = c] / mu_e(c).
        for (int c = 0; c < 2; ++c) {
            Rat mass = 0;
            for (int i = 0; i < n; ++i)
                if (dist.states[i].test(e) == (c == 1)) mass += dist.probs[i];
            if (mass == 0) continue;
            std::vector<int> members;
            for (int i = 0; i < n; ++i)
                if (dist.states[i].test(e) == (c == 1)) members.push_back(i);
            for (int a : members)
                for (int b : members)
                    form.mat.at(a, b) += dist.probs[a] * dist.probs[b] / mass;
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            form.mat.at(i, j) -= Rat(free_edges) * dist.probs[i] * dist.probs[j];
    return form;
}

QuadraticForm local_variance_form(const MonomerDimerModel& model, const Pinning& pinning,
                                  long cap) {
    return local_variance_form(enumerate(model, pinning, cap));
}

double poincare_constant(const TransitionKernel& kernel) {
    if (!kernel.irreducible()) throw std::invalid_argument("kernel is reducible");
    int n = kernel.size();
    if (n == 1) return kInfiniteConstant;
    // Symmetric similarity transform: M = D^{1/2} (I-Q) D^{-1/2}; gamma is the
    // second-smallest eigenvalue.
    Eigen::VectorXd mu = to_eigen(kernel.dist.probs);
    Eigen::MatrixXd q = to_eigen(kernel.matrix);
    Eigen::MatrixXd msym(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double iq = (i == j ? 1.0 : 0.0) - q(i, j);
            msym(i, j) = std::sqrt(mu[i]) * iq / std::sqrt(mu[j]);
        }
    msym = 0.5 * (msym + msym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(msym);
    return es.eigenvalues()[1];
}

namespace {

// inf over f with f^T B f > 0 of (f^T A f)/(f^T B f) for symmetric PSD A, B.
// The null space of B is eliminated by a Schur complement so functions may
// use null directions to lower the numerator.  Returns +inf when B ~ 0.
double psd_pencil_minimum(const Eigen::MatrixXd& a_in, const Eigen::MatrixXd& b_in) {
    int n = static_cast<int>(a_in.rows());
    Eigen::MatrixXd a = 0.5 * (a_in + a_in.transpose());
    Eigen::MatrixXd b = 0.5 * (b_in + b_in.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esb(b);
    double bmax = esb.eigenvalues().cwiseAbs().maxCoeff();
    double tol = 1e-11 * std::max(1.0, bmax);
    std::vector<int> null_idx, pos_idx;
    for (int i = 0; i < n; ++i)
        (esb.eigenvalues()[i] > tol ? pos_idx : null_idx).push_back(i);
    if (pos_idx.empty()) return kInfiniteConstant;
    Eigen::MatrixXd v0(n, static_cast<int>(null_idx.size()));
    Eigen::MatrixXd v1(n, static_cast<int>(pos_idx.size()));
    for (size_t i = 0; i < null_idx.size(); ++i) v0.col(static_cast<int>(i)) = esb.eigenvectors().col(null_idx[i]);
    for (size_t i = 0; i < pos_idx.size(); ++i) v1.col(static_cast<int>(i)) = esb.eigenvectors().col(pos_idx[i]);

    Eigen::MatrixXd a11 = v1.transpose() * a * v1;
    Eigen::MatrixXd b11 = v1.transpose() * b * v1;
    if (v0.cols() > 0) {
        Eigen::MatrixXd a00 = v0.transpose() * a * v0;
        Eigen::MatrixXd a01 = v0.transpose() * a * v1;
        // Pseudo-inverse of a00 (PSD).
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esa(a00);
        double amax = esa.eigenvalues().cwiseAbs().maxCoeff();
        double atol = 1e-11 * std::max(1.0, amax);
        Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(v0.cols(), v0.cols());
        for (int i = 0; i < v0.cols(); ++i)
            if (esa.eigenvalues()[i] > atol)
                pinv += esa.eigenvectors().col(i) * esa.eigenvectors().col(i).transpose() /
                        esa.eigenvalues()[i];
        a11 -= a01.transpose() * pinv * a01;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
        0.5 * (a11 + a11.transpose()).eval(), 0.5 * (b11 + b11.transpose()).eval());
    double lo = ges.eigenvalues().minCoeff();
    return lo < 0 ? std::max(lo, -0.0) : lo;  // forms are PSD; clamp roundoff
}

}  // namespace

double local_poincare_constant(const MonomerDimerModel& model, const Pinning& pinning,
                               const TransitionKernel& kernel) {
    (void)model;  // signature mirrors the pinned-family operations
    if (!(kernel.spec.pinning == pinning))
        throw std::invalid_argument("kernel pinning does not match");
    QuadraticForm a = dirichlet_matrix(kernel);
    QuadraticForm b = local_variance_form(kernel.dist);
    return psd_pencil_minimum(a.to_eigen(), b.to_eigen());
}

double two_point_lsi_factor(double phi) {
    if (std::abs(phi - 0.5) < 1e-12) return 0.5;
    return (1 - 2 * phi) / std::log(1.0 / phi - 1.0);
}

namespace {

struct EntropyObjective {
    // Rayleigh quotient num/den with num = f^T A f and den either the global
    // entropy Ent(f^2) or the local sum over free edges of Ent(E[F^2|X_e]).
    const Eigen::MatrixXd& a;
    const Eigen::VectorXd& mu;
    // Edge slices: for local objectives, per (e,c) the member state indices.
    struct Slice {
        double marginal;
        std::vector<int> members;
    };
    std::vector<std::array<Slice, 2>> edge_slices;  // empty => global entropy
    bool local = false;

    double denominator(const Eigen::VectorXd& f, Eigen::VectorXd* grad) const {
        int n = static_cast<int>(f.size());
        double e_total = 0;
        for (int i = 0; i < n; ++i) e_total += mu[i] * f[i] * f[i];
        if (grad) grad->setZero(n);
        if (!local) {
            double ent = 0;
            for (int i = 0; i < n; ++i) ent += mu[i] * xlogx(f[i] * f[i]);
            ent -= xlogx(e_total);
            if (grad)
                for (int i = 0; i < n; ++i) {
                    double fs = f[i] * f[i];
                    if (fs > 0 && e_total > 0)
                        (*grad)[i] = 2 * mu[i] * f[i] * std::log(fs / e_total);
                }
            return ent;
        }
        double total = 0;
        for (const auto& slices : edge_slices) {
            double gvals[2] = {0, 0};
            for (int c = 0; c < 2; ++c) {
                if (slices[c].marginal <= 0) continue;
                double s = 0;
                for (int i : slices[c].members) s += mu[i] * f[i] * f[i];
                gvals[c] = s / slices[c].marginal;
            }
            double ent = 0;
            for (int c = 0; c < 2; ++c)
                if (slices[c].marginal > 0) ent += slices[c].marginal * xlogx(gvals[c]);
            ent -= xlogx(e_total);
            total += ent;
            if (grad) {
                for (int c = 0; c < 2; ++c) {
                    if (slices[c].marginal <= 0 || gvals[c] <= 0 || e_total <= 0) continue;
                    double lg = std::log(gvals[c] / e_total);
                    for (int i : slices[c].members) (*grad)[i] += 2 * mu[i] * f[i] * lg;
                }
            }
        }
        return total;
    }

    double quotient(const Eigen::VectorXd& f, Eigen::VectorXd* grad) const {
        Eigen::VectorXd dgrad;
        double den = denominator(f, grad ? &dgrad : nullptr);
        // Callers normalize E[f^2] = 1.  Near constant functions both forms
        // vanish quadratically and the float ratio is meaningless, so stay
        // clear of that region; the quotient there is a limit approached
        // from den > 0 and the floor only costs O(sqrt(floor)) in the
        // reported upper estimate.
        if (den <= 1e-9) {
            if (grad) grad->setZero(f.size());
            return kInfiniteConstant;
        }
        Eigen::VectorXd af = a * f;
        double num = f.dot(af);
        double q = num / den;
        if (grad) *grad = (2.0 * af - q * dgrad) / den;
        return q;
    }
};

double descend(const EntropyObjective& obj, Eigen::VectorXd f, int iters) {
    auto normalize = [&](Eigen::VectorXd& v) {
        double s = 0;
        for (int i = 0; i < v.size(); ++i) s += obj.mu[i] * v[i] * v[i];
        if (s > 0) v /= std::sqrt(s);
    };
    normalize(f);
    Eigen::VectorXd grad;
    double q = obj.quotient(f, &grad);
    if (q == kInfiniteConstant) return q;
    double step = 0.5;
    for (int it = 0; it < iters; ++it) {
        double gnorm2 = grad.squaredNorm();
        if (gnorm2 < 1e-24) break;
        bool improved = false;
        for (int bt = 0; bt < 40; ++bt) {
            Eigen::VectorXd cand = f - step * grad;
            normalize(cand);
            Eigen::VectorXd cgrad;
            double cq = obj.quotient(cand, &cgrad);
            if (cq < q - 1e-15) {
                f = cand;
                q = cq;
                grad = cgrad;
                improved = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    return q;
}

double entropy_descent_minimum(const EntropyObjective& obj, int n, int restarts, uint64_t seed,
                               const Eigen::VectorXd* warm_start) {
    double best = kInfiniteConstant;
    std::vector<Eigen::VectorXd> starts;
    if (warm_start) starts.push_back(*warm_start);
    for (int r = 0; r < restarts; ++r) {
        Rng rng(split_seed(seed, 1000 + r));
        Eigen::VectorXd f(n);
        if (r % 3 == 2) {
            for (int i = 0; i < n; ++i) f[i] = rng.bernoulli(0.5) ? 1.0 : -1.0;
        } else {
            // Box-Muller gaussian start.
            for (int i = 0; i < n; ++i) {
                double u1 = std::max(rng.uniform(), 1e-12), u2 = rng.uniform();
                f[i] = std::sqrt(-2 * std::log(u1)) * std::cos(6.283185307179586 * u2);
            }
        }
        starts.push_back(std::move(f));
    }
    std::vector<double> results(starts.size(), kInfiniteConstant);
    parallel_for(starts.size(), [&](size_t i) { results[i] = descend(obj, starts[i], 500); });
    for (double r : results) best = std::min(best, r);
    return best;
}

}  // namespace

LogSobolevEstimate log_sobolev_constant(const TransitionKernel& kernel, int restarts, double tol,
                                        uint64_t seed) {
    (void)tol;
    if (!kernel.irreducible()) throw std::invalid_argument("kernel is reducible");
    int n = kernel.size();
    LogSobolevEstimate est{kInfiniteConstant, kInfiniteConstant};
    if (n == 1) return est;
    double gamma = poincare_constant(kernel);
    double mu_min = to_double(kernel.dist.min_prob());
    est.rho_lower = gamma * two_point_lsi_factor(mu_min);

    Eigen::MatrixXd a = dirichlet_matrix(kernel).to_eigen();
    Eigen::VectorXd mu = to_eigen(kernel.dist.probs);
    EntropyObjective obj{a, mu, {}, false};
    // Warm start from the spectral-gap eigenvector, shifted positive.
    Eigen::VectorXd msqrt(n);
    Eigen::MatrixXd msym(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            msym(i, j) = std::sqrt(mu[i]) * ((i == j ? 1.0 : 0.0) - to_double(kernel.matrix.at(i, j))) /
                         std::sqrt(mu[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (msym + msym.transpose()).eval());
    Eigen::VectorXd warm(n);
    for (int i = 0; i < n; ++i) warm[i] = es.eigenvectors().col(1)[i] / std::sqrt(mu[i]) + 1.0;
    est.rho_upper = entropy_descent_minimum(obj, n, restarts, seed, &warm);
    if (est.rho_upper == kInfiniteConstant) {
        // All starts had nonpositive entropy, which cannot happen for n > 1.
        throw std::runtime_error("log-Sobolev descent failed: entropy vanished at every start");
    }
    return est;
}

double local_log_sobolev_constant(const MonomerDimerModel& model, const Pinning& pinning,
                                  const TransitionKernel& kernel, int restarts, uint64_t seed) {
    if (!(kernel.spec.pinning == pinning))
        throw std::invalid_argument("kernel pinning does not match");
    int n = kernel.size();
    if (n == 1) return kInfiniteConstant;
    Eigen::MatrixXd a = dirichlet_matrix(kernel).to_eigen();
    Eigen::VectorXd mu = to_eigen(kernel.dist.probs);
    EntropyObjective obj{a, mu, {}, true};
    const ExactDistribution& dist = kernel.dist;
    int m = model.graph.edge_count();
    for (int e = 0; e < m; ++e) {
        if (pinning.is_fixed(e)) continue;
        std::array<EntropyObjective::Slice, 2> slices;
        for (int c = 0; c < 2; ++c) {
            double mass = 0;
            for (int i = 0; i < n; ++i)
                if (dist.states[i].test(e) == (c == 1)) {
                    slices[c].members.push_back(i);
                    mass += to_double(dist.probs[i]);
                }
            slices[c].marginal = mass;
        }
        obj.edge_slices.push_back(std::move(slices));
    }
    if (obj.edge_slices.empty()) return kInfiniteConstant;
    double best = entropy_descent_minimum(obj, n, restarts, seed, nullptr);
    return best;
}

long mixing_time_exact(const TransitionKernel& kernel, double eps, MixingMethod method,
                       long step_cap) {
    int n = kernel.size();
    Eigen::MatrixXd p = to_eigen(kernel.matrix);
    Eigen::VectorXd mu = to_eigen(kernel.dist.probs);
    auto tv = [&](const Eigen::MatrixXd& pt) {
        double worst = 0;
        for (int x = 0; x < n; ++x) {
            double d = 0;
            for (int y = 0; y < n; ++y) d += std::abs(pt(x, y) - mu[y]);
            worst = std::max(worst, 0.5 * d);
        }
        return worst;
    };
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    if (tv(id) <= eps) return 0;

    if (method == MixingMethod::Scan) {
        Eigen::MatrixXd pt = p;
        for (long t = 1; t <= step_cap; ++t) {
            if (tv(pt) <= eps) return t;
            pt = pt * p;
        }
        throw std::runtime_error("mixing time exceeds step cap");
    }
    // Bracket by repeated squaring, then scan inside the bracket.
    Eigen::MatrixXd lo_mat = id;
    long lo = 0;
    Eigen::MatrixXd sq = p;
    long sq_t = 1;
    while (tv(sq) > eps) {
        lo_mat = sq;
        lo = sq_t;
        if (sq_t * 2 > step_cap) throw std::runtime_error("mixing time exceeds step cap");
        sq = sq * sq;
        sq_t *= 2;
    }
    Eigen::MatrixXd pt = lo_mat * p;
    for (long t = lo + 1;; ++t) {
        if (tv(pt) <= eps) return t;
        pt = pt * p;
    }
}

bool verify_one_step_decomposition(const ExactDistribution& dist, const std::vector<double>& f,
                                   double rel_tol) {
    int n = dist.size();
    if (static_cast<int>(f.size()) != n) throw std::invalid_argument("function size mismatch");
    int m = n > 0 ? dist.states[0].size() : 0;
    std::vector<int> free;
    for (int e = 0; e < m; ++e)
        if (!dist.pinning.is_fixed(e)) free.push_back(e);
    if (free.empty()) return true;

    std::vector<double> mu(n);
    for (int i = 0; i < n; ++i) mu[i] = to_double(dist.probs[i]);

    auto moments = [&](auto&& weight) {  // E[w], over mu
        double s = 0;
        for (int i = 0; i < n; ++i) s += mu[i] * weight(i);
        return s;
    };
    double ef = moments([&](int i) { return f[i]; });
    double var = moments([&](int i) { return (f[i] - ef) * (f[i] - ef); });
    double ef2 = moments([&](int i) { return f[i] * f[i]; });
    double ent = moments([&](int i) { return xlogx(f[i] * f[i]); }) - xlogx(ef2);

    double var_of_cond = 0, mean_of_condvar = 0;
    double ent_of_cond = 0, mean_of_condent = 0;
    for (int e : free) {
        for (int c = 0; c < 2; ++c) {
            double mass = 0, s1 = 0, s2 = 0, sl = 0;
            for (int i = 0; i < n; ++i) {
                if (dist.states[i].test(e) != (c == 1)) continue;
                mass += mu[i];
                s1 += mu[i] * f[i];
                s2 += mu[i] * f[i] * f[i];
                sl += mu[i] * xlogx(f[i] * f[i]);
            }
            if (mass <= 0) continue;
            double cm = s1 / mass, cm2 = s2 / mass;
            var_of_cond += mass * (cm - ef) * (cm - ef);
            mean_of_condvar += mass * (cm2 - cm * cm);
            ent_of_cond += mass * xlogx(cm2);
            mean_of_condent += sl - mass * xlogx(cm2);
        }
        ent_of_cond -= xlogx(ef2);
    }
    double k = static_cast<double>(free.size());
    double rhs_var = (var_of_cond + mean_of_condvar) / k;
    double rhs_ent = (ent_of_cond + mean_of_condent) / k;
    double scale_v = std::max({1.0, std::abs(var), std::abs(rhs_var)});
    double scale_e = std::max({1.0, std::abs(ent), std::abs(rhs_ent)});
    return std::abs(var - rhs_var) <= rel_tol * scale_v &&
           std::abs(ent - rhs_ent) <= rel_tol * scale_e;
}

std::string LocalToGlobalReport::alpha_table_csv() const {
    std::ostringstream os;
    os << "k,alpha_k,argmin_pinning\n";
    for (const auto& row : table)
        os << row.k << "," << fmt_double(row.alpha) << "," << row.argmin_pinning << "\n";
    return os.str();
}

namespace {

struct PinningCell {
    Pinning pinning;
    int free_count;
};

// All feasible pinnings of the model, every nonempty free set.
std::vector<PinningCell> all_feasible_pinnings(const MonomerDimerModel& model) {
    int m = model.graph.edge_count();
    std::vector<PinningCell> cells;
    for (uint32_t free_mask = 1; free_mask < (1u << m); ++free_mask) {
        std::vector<int> fixed_edges;
        for (int e = 0; e < m; ++e)
            if (!(free_mask & (1u << e))) fixed_edges.push_back(e);
        int nf = static_cast<int>(fixed_edges.size());
        for (uint32_t assign = 0; assign < (1u << nf); ++assign) {
            Pinning p;
            for (int i = 0; i < nf; ++i)
                p = p.extended_unchecked(fixed_edges[i], (assign >> i) & 1 ? 1 : 0);
            if (!pinning_feasible(model.graph, p)) continue;
            cells.push_back({std::move(p), m - nf});
        }
    }
    return cells;
}

}  // namespace

LocalToGlobalReport verify_local_to_global(const MonomerDimerModel& model, double tol,
                                           int max_edges) {
    int m = model.graph.edge_count();
    if (m > max_edges)
        throw OversizeError("pinning sweep limited to " + std::to_string(max_edges) + " edges", m);
    std::vector<PinningCell> cells = all_feasible_pinnings(model);
    std::vector<double> alphas(cells.size());
    parallel_for(cells.size(), [&](size_t i) {
        TransitionKernel k = transition_kernel(model, cells[i].pinning, ChainKind::JS);
        alphas[i] = local_poincare_constant(model, cells[i].pinning, k);
    });

    LocalToGlobalReport rep;
    rep.table.resize(m);
    for (int k = 1; k <= m; ++k) rep.table[k - 1].k = k;
    for (size_t i = 0; i < cells.size(); ++i) {
        auto& row = rep.table[cells[i].free_count - 1];
        if (alphas[i] < row.alpha) {
            row.alpha = alphas[i];
            row.argmin_pinning = cells[i].pinning.to_string();
        }
    }
    TransitionKernel q = transition_kernel(model, {}, ChainKind::JS);
    rep.gamma = poincare_constant(q);
    double harmonic = 0;
    for (const auto& row : rep.table)
        if (row.alpha != kInfiniteConstant) harmonic += 1.0 / (row.k * row.alpha);
    rep.bound = harmonic > 0 ? 1.0 / harmonic : kInfiniteConstant;
    rep.holds = rep.gamma >= rep.bound - tol;
    return rep;
}

bool verify_concavity(const MonomerDimerModel& model, const Pinning& pinning, uint64_t seed,
                      int random_functions) {
    TransitionKernel base = transition_kernel(model, pinning, ChainKind::JS);
    int n = base.size();
    std::vector<int> free = pinning.free_edges(model.graph);
    if (free.empty()) return true;
    Rat lam_count = static_cast<long>(free.size());

    // Accumulate LHS(alpha,beta) = (1/|free|) sum_{e,c} 1[alpha_e=beta_e=c] Q^{pin+e<-c}(alpha,beta).
    RatMatrix lhs(n);
    std::vector<std::array<Rat, 2>> cond_marginals(free.size());
    std::vector<std::array<TransitionKernel, 2>> sub(free.size());
    std::vector<std::array<bool, 2>> sub_ok(free.size(), {false, false});
    for (size_t fi = 0; fi < free.size(); ++fi) {
        int e = free[fi];
        Rat one = base.dist.edge_marginal_one(e);
        cond_marginals[fi] = {Rat(1) - one, one};
        for (int c = 0; c < 2; ++c) {
            if (cond_marginals[fi][c] == 0) continue;
            sub[fi][c] = transition_kernel(model, pinning.extended_unchecked(e, c), ChainKind::JS);
            sub_ok[fi][c] = true;
        }
    }
    for (size_t fi = 0; fi < free.size(); ++fi) {
        for (int c = 0; c < 2; ++c) {
            if (!sub_ok[fi][c]) continue;
            const TransitionKernel& s = sub[fi][c];
            for (int a = 0; a < s.size(); ++a) {
                int ga = base.dist.index_of(s.dist.states[a]);
                for (int b = 0; b < s.size(); ++b) {
                    if (a == b) continue;
                    if (s.matrix.at(a, b) == 0) continue;
                    int gb = base.dist.index_of(s.dist.states[b]);
                    lhs.at(ga, gb) += s.matrix.at(a, b);
                }
            }
        }
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            if (lhs.at(a, b) / lam_count > base.matrix.at(a, b)) return false;
        }

    // Implied Dirichlet-form inequality on random integer-valued functions,
    // checked exactly in rationals.
    Rng rng(seed);
    for (int trial = 0; trial < random_functions; ++trial) {
        std::vector<Rat> f(n);
        for (int i = 0; i < n; ++i) f[i] = static_cast<long>(rng.below(21)) - 10;
        Rat rhs_form = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (a == b) continue;
                Rat d = f[a] - f[b];
                rhs_form += base.dist.probs[a] * base.matrix.at(a, b) * d * d;
            }
        rhs_form /= 2;
        Rat lhs_form = 0;
        for (size_t fi = 0; fi < free.size(); ++fi) {
            for (int c = 0; c < 2; ++c) {
                if (!sub_ok[fi][c]) continue;
                const TransitionKernel& s = sub[fi][c];
                Rat form = 0;
                for (int a = 0; a < s.size(); ++a) {
                    int ga = base.dist.index_of(s.dist.states[a]);
                    for (int b = 0; b < s.size(); ++b) {
                        if (s.matrix.at(a, b) == 0 || a == b) continue;
                        int gb = base.dist.index_of(s.dist.states[b]);
                        Rat d = f[ga] - f[gb];
                        form += s.dist.probs[a] * s.matrix.at(a, b) * d * d;
                    }
                }
                lhs_form += cond_marginals[fi][c] * form / 2;
            }
        }
        if (lhs_form / lam_count > rhs_form) return false;
    }
    return true;
}

GlauberComparisonReport compare_js_glauber(const MonomerDimerModel& model, long cap) {
    TransitionKernel js = transition_kernel(model, {}, ChainKind::JS, cap);
    TransitionKernel gd = transition_kernel(model, {}, ChainKind::Glauber, cap);
    Eigen::MatrixXd a_js = dirichlet_matrix(js).to_eigen();
    Eigen::MatrixXd a_gd = dirichlet_matrix(gd).to_eigen();
    GlauberComparisonReport rep;
    rep.factor_checked =
        4.0 * model.graph.max_degree() * (to_double(model.lambda_bar()) + 1.0);
    Eigen::MatrixXd diff = rep.factor_checked * a_gd - a_js;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (diff + diff.transpose()).eval());
    rep.min_eig = es.eigenvalues().minCoeff();
    rep.holds = rep.min_eig >= -1e-9;
    return rep;
}

std::string ConstantsReport::to_json() const {
    nlohmann::ordered_json j;
    j["gamma"] = fmt_double(gamma);
    j["rho_lower"] = fmt_double(rho_lower);
    j["rho_upper"] = fmt_double(rho_upper);
    j["alpha_local_pi"] = fmt_double(alpha_local_pi);
    j["alpha_local_lsi_estimate"] = fmt_double(alpha_local_lsi_estimate);
    if (!alpha_table.empty()) {
        j["alpha_table"] = nlohmann::ordered_json::array();
        for (const auto& row : alpha_table) {
            nlohmann::ordered_json r;
            r["k"] = row.k;
            r["alpha_k"] = fmt_double(row.alpha);
            r["argmin_pinning"] = row.argmin_pinning;
            j["alpha_table"].push_back(std::move(r));
        }
    }
    return j.dump(2);
}

ConstantsReport constants_report(const MonomerDimerModel& model, const Pinning& pinning,
                                 int restarts, bool with_alpha_table, uint64_t seed) {
    ConstantsReport rep;
    TransitionKernel kernel = transition_kernel(model, pinning, ChainKind::JS);
    rep.gamma = poincare_constant(kernel);
    LogSobolevEstimate lsi = log_sobolev_constant(kernel, restarts, 1e-12, seed);
    rep.rho_lower = lsi.rho_lower;
    rep.rho_upper = lsi.rho_upper;
    rep.alpha_local_pi = local_poincare_constant(model, pinning, kernel);
    rep.alpha_local_lsi_estimate =
        local_log_sobolev_constant(model, pinning, kernel, restarts, seed);
    if (with_alpha_table) {
        LocalToGlobalReport l2g = verify_local_to_global(model);
        rep.alpha_table = l2g.table;
    }
    return rep;
}

}  // namespace mdmc
