#pragma once

#include "conehk/measure.hpp"
#include "conehk/metric_space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace conehk {

/// Transport cost L_delta(R) = -2 log(cos(R delta)) for R delta < pi/2,
/// +infinity otherwise.
inline double let_cost(double delta, double R) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (R < 0.0) throw std::invalid_argument("distance must be nonnegative");
    const double x = delta * R;
    if (x >= 0.5 * pi) return std::numeric_limits<double>::infinity();
    return -2.0 * std::log(std::cos(x));
}

/// Logarithmic entropy density F(s) = s log s - s + 1 (F(0) = 1).
inline double entropy_density(double s) {
    if (s < 0.0) throw std::invalid_argument("density must be nonnegative");
    if (s == 0.0) return 1.0;
    return s * std::log(s) - s + 1.0;
}

struct LetProblem {
    Mat dist;  // n0 x n1 base distances between the two supports
    Vec w0, w1;
    double delta = 1.0;
};

inline LetProblem make_let_problem(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double delta) {
    if (mu0.space != mu1.space) throw std::invalid_argument("measures live on different spaces");
    return LetProblem{cross_distances(mu0, mu1), mu0.weights, mu1.weights, delta};
}

inline LetProblem make_let_problem(const AtomCloud& mu0, const AtomCloud& mu1, double delta) {
    if (mu0.space != mu1.space) throw std::invalid_argument("clouds live on different spaces");
    return LetProblem{cross_distances(mu0, mu1), mu0.weights, mu1.weights, delta};
}

enum class SolveStatus { converged, max_iterations };

struct LetDiagnostics {
    int levels = 0;
    int sweeps = 0;
    int newton_steps = 0;
    double final_epsilon = 0.0;
    double fixed_point_residual = 0.0;
    double raw_value = 0.0;           // primal value at the last epsilon level
    double extrapolated_value = 0.0;  // Richardson over the last two levels
    SolveStatus status = SolveStatus::converged;
};

struct LetSolution {
    Mat plan;     // n0 x n1, zero on pairs with delta * d >= pi/2
    Vec sigma0;   // marginal densities eta_i / mu_i; exactly 0 on unmatched atoms
    Vec sigma1;
    std::vector<char> matched0;  // atom belongs to the reduced part mu_i'
    std::vector<char> matched1;
    std::vector<std::pair<int, int>> support;  // pairs carrying plan mass
    double value = 0.0;                        // HK_delta^2
    double plan_total = 0.0;
    LetDiagnostics diag;

    // problem copy, kept for the verification operations
    Mat dist;
    Vec w0, w1;
    double delta = 1.0;

    double mass0() const { return w0.size() ? w0.sum() : 0.0; }
    double mass1() const { return w1.size() ? w1.sum() : 0.0; }
};

namespace detail {

/// Log-domain generalized scaling solver for the discrete logarithmic
/// entropy-transport problem
///   min_H  KL(eta0|mu0) + KL(eta1|mu1) + sum L_ij H_ij,
/// run over a geometric schedule of entropic regularization levels, each
/// finished by a damped Newton solve of the two-potential fixed point.
/// Pairs with infinite cost are excluded from every sum; the value is
/// Richardson-extrapolated over the last two levels.
class LetScalingSolver {
public:
    LetScalingSolver(const LetProblem& p, double tol)
        : dist_(p.dist), w0_(p.w0), w1_(p.w1), delta_(p.delta), tol_(tol) {
        n0_ = static_cast<int>(w0_.size());
        n1_ = static_cast<int>(w1_.size());
        if (dist_.rows() != n0_ || dist_.cols() != n1_)
            throw std::invalid_argument("distance matrix shape does not match the weights");
        for (int i = 0; i < n0_; ++i)
            if (!(w0_[i] > 0.0)) throw std::invalid_argument("weights must be positive");
        for (int j = 0; j < n1_; ++j)
            if (!(w1_[j] > 0.0)) throw std::invalid_argument("weights must be positive");
        if (!(tol_ > 0.0)) throw std::invalid_argument("tolerance must be positive");
        build_mask();
    }

    LetSolution solve() {
        LetSolution sol;
        sol.dist = dist_;
        sol.w0 = w0_;
        sol.w1 = w1_;
        sol.delta = delta_;
        sol.plan.setZero(n0_, n1_);
        sol.sigma0.setZero(n0_);
        sol.sigma1.setZero(n1_);
        sol.matched0.assign(n0_, 0);
        sol.matched1.assign(n1_, 0);

        const double m0 = n0_ ? w0_.sum() : 0.0;
        const double m1 = n1_ ? w1_.sum() : 0.0;

        if (rows_.empty()) {
            // no admissible pair: pure creation/annihilation, exact value
            sol.value = m0 + m1;
            sol.diag.raw_value = sol.value;
            sol.diag.extrapolated_value = sol.value;
            sol.diag.status = SolveStatus::converged;
            return sol;
        }
        for (int i : rows_) sol.matched0[i] = 1;
        for (int j : cols_) sol.matched1[j] = 1;

        log_a_.resize(rows_.size());
        log_b_.resize(cols_.size());
        for (size_t r = 0; r < rows_.size(); ++r) log_a_[r] = std::log(w0_[rows_[r]]);
        for (size_t c = 0; c < cols_.size(); ++c) log_b_[c] = std::log(w1_[cols_[c]]);

        u_.setZero(rows_.size());
        v_.setZero(cols_.size());

        // below ~1e-8 the exponent quotients lose too many digits for the
        // Newton fixed point to be meaningful; the quadratic bias plus the
        // extrapolation already puts the value error well under any sensible
        // tolerance at this floor
        const double eps_final = std::clamp(tol_, 1e-8, 0.5);
        std::vector<double> levels;
        for (double e = 1.0; e > eps_final * 4.0; e *= 0.25) levels.push_back(e);
        levels.push_back(eps_final);

        double val_prev = 0.0, eps_prev = 0.0;
        Mat plan_prev;
        bool have_prev = false;
        bool converged = true;
        for (size_t li = 0; li < levels.size(); ++li) {
            const double eps = levels[li];
            converged = run_level(eps) && converged;
            if (li + 2 == levels.size()) {
                val_prev = primal_value(eps);
                plan_prev = current_plan(eps);
                eps_prev = eps;
                have_prev = true;
            } else if (li + 1 == levels.size()) {
                sol.diag.raw_value = primal_value(eps);
                sol.plan = current_plan(eps);
                if (have_prev) {
                    // the value bias is quadratic in eps, the plan bias linear
                    const double wv = eps * eps / (eps_prev * eps_prev - eps * eps);
                    sol.diag.extrapolated_value =
                        sol.diag.raw_value + (sol.diag.raw_value - val_prev) * wv;
                    const double wp = eps / (eps_prev - eps);
                    sol.plan = (sol.plan + wp * (sol.plan - plan_prev)).cwiseMax(0.0);
                } else {
                    sol.diag.extrapolated_value = sol.diag.raw_value;
                }
            }
        }

        const double eps = levels.back();
        fill_marginals(sol);
        sol.value = sol.diag.extrapolated_value;
        sol.diag.levels = static_cast<int>(levels.size());
        sol.diag.sweeps = total_sweeps_;
        sol.diag.newton_steps = total_newton_;
        sol.diag.final_epsilon = eps;
        sol.diag.fixed_point_residual = residual_inf(eps);
        sol.diag.status = converged ? SolveStatus::converged : SolveStatus::max_iterations;
        return sol;
    }

private:
    void build_mask() {
        cost_.setConstant(n0_, n1_, std::numeric_limits<double>::infinity());
        feas_row_.assign(n0_, {});
        feas_col_.assign(n1_, {});
        for (int i = 0; i < n0_; ++i)
            for (int j = 0; j < n1_; ++j) {
                const double x = delta_ * dist_(i, j);
                if (x < 0.5 * pi) {
                    cost_(i, j) = -2.0 * std::log(std::cos(x));
                    feas_row_[i].push_back(j);
                    feas_col_[j].push_back(i);
                }
            }
        for (int i = 0; i < n0_; ++i)
            if (!feas_row_[i].empty()) rows_.push_back(i);
        for (int j = 0; j < n1_; ++j)
            if (!feas_col_[j].empty()) cols_.push_back(j);
        rpos_.assign(n0_, -1);
        cpos_.assign(n1_, -1);
        for (size_t r = 0; r < rows_.size(); ++r) rpos_[rows_[r]] = static_cast<int>(r);
        for (size_t c = 0; c < cols_.size(); ++c) cpos_[cols_[c]] = static_cast<int>(c);
    }

    // log-sum-exp of log_b[c] + (v[c] - L(i, j)) / eps over feasible j of row i
    double lse_row(int i, double eps) const {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j : feas_row_[i]) {
            const int c = cpos_[j];
            mx = std::max(mx, log_b_[c] + (v_[c] - cost_(i, j)) / eps);
        }
        double s = 0.0;
        for (int j : feas_row_[i]) {
            const int c = cpos_[j];
            s += std::exp(log_b_[c] + (v_[c] - cost_(i, j)) / eps - mx);
        }
        return mx + std::log(s);
    }

    double lse_col(int j, double eps) const {
        double mx = -std::numeric_limits<double>::infinity();
        for (int i : feas_col_[j]) {
            const int r = rpos_[i];
            mx = std::max(mx, log_a_[r] + (u_[r] - cost_(i, j)) / eps);
        }
        double s = 0.0;
        for (int i : feas_col_[j]) {
            const int r = rpos_[i];
            s += std::exp(log_a_[r] + (u_[r] - cost_(i, j)) / eps - mx);
        }
        return mx + std::log(s);
    }

    Vec map_u(double eps) const {
        Vec out(rows_.size());
        const double f = eps / (1.0 + eps);
        for (size_t r = 0; r < rows_.size(); ++r) out[r] = -f * lse_row(rows_[r], eps);
        return out;
    }

    Vec map_v(double eps) const {
        Vec out(cols_.size());
        const double f = eps / (1.0 + eps);
        for (size_t c = 0; c < cols_.size(); ++c) out[c] = -f * lse_col(cols_[c], eps);
        return out;
    }

    double residual_inf(double eps) const {
        const Vec ru = u_ - map_u(eps);
        const Vec rv = v_ - map_v(eps);
        double m = 0.0;
        if (ru.size()) m = std::max(m, ru.cwiseAbs().maxCoeff());
        if (rv.size()) m = std::max(m, rv.cwiseAbs().maxCoeff());
        return m;
    }

    bool run_level(double eps) {
        // warm-started alternating sweeps, then Newton on the fixed point;
        // plain sweeps contract like 1/(1+eps) and are only worth running at
        // the coarse levels
        const int max_sweeps = eps >= 1e-2 ? 200 : (eps >= 1e-4 ? 40 : 8);
        double change = 0.0;
        for (int it = 0; it < max_sweeps; ++it) {
            const Vec un = map_u(eps);
            u_ = un;
            const Vec vn = map_v(eps);
            change = (vn - v_).cwiseAbs().maxCoeff();
            v_ = vn;
            ++total_sweeps_;
            if (change < std::max(0.02 * eps, 1e-13)) break;
        }
        return newton_polish(eps);
    }

    bool newton_polish(double eps) {
        const int nr = static_cast<int>(rows_.size());
        const int nc = static_cast<int>(cols_.size());
        const double f = 1.0 / (1.0 + eps);
        const double target = 3e-14;
        double lambda = 0.0;
        Mat J(nr + nc, nr + nc);
        for (int it = 0; it < 50; ++it) {
            const Vec mu = map_u(eps);
            const Vec mv = map_v(eps);
            Vec res(nr + nc);
            res.head(nr) = u_ - mu;
            res.tail(nc) = v_ - mv;
            const double rn = res.cwiseAbs().maxCoeff();
            if (rn < target) return true;
            ++total_newton_;

            // softmax weight blocks of the two scaling maps
            J.setIdentity();
            for (int r = 0; r < nr; ++r) {
                const int i = rows_[r];
                const double l = lse_row(i, eps);
                for (int j : feas_row_[i]) {
                    const int c = cpos_[j];
                    J(r, nr + c) = f * std::exp(log_b_[c] + (v_[c] - cost_(i, j)) / eps - l);
                }
            }
            for (int c = 0; c < nc; ++c) {
                const int j = cols_[c];
                const double l = lse_col(j, eps);
                for (int i : feas_col_[j]) {
                    const int r = rpos_[i];
                    J(nr + c, r) = f * std::exp(log_a_[r] + (u_[r] - cost_(i, j)) / eps - l);
                }
            }

            const double base_norm = res.squaredNorm();
            const Vec u0 = u_, v0 = v_;
            bool accepted = false;
            while (!accepted) {
                Mat Jd = J;
                for (int k = 0; k < nr + nc; ++k) Jd(k, k) += lambda;
                const Vec step = Jd.partialPivLu().solve(-res);
                for (double alpha = 1.0; alpha > 1.0 / 64.0; alpha *= 0.5) {
                    u_ = u0 + alpha * step.head(nr);
                    v_ = v0 + alpha * step.tail(nc);
                    Vec r2(nr + nc);
                    r2.head(nr) = u_ - map_u(eps);
                    r2.tail(nc) = v_ - map_v(eps);
                    if (r2.squaredNorm() < (1.0 - 1e-4 * alpha) * base_norm) {
                        accepted = true;
                        break;
                    }
                }
                if (accepted) {
                    lambda *= 0.25;
                    if (lambda < 1e-12) lambda = 0.0;
                } else {
                    u_ = u0;
                    v_ = v0;
                    lambda = lambda == 0.0 ? 1e-6 : lambda * 16.0;
                    if (lambda > 1e4) return residual_inf(eps) < 1e-11;
                }
            }
        }
        return residual_inf(eps) < 1e-11;
    }

    double plan_entry(int i, int j, double eps) const {
        const int r = rpos_[i], c = cpos_[j];
        return std::exp(log_a_[r] + log_b_[c] + (u_[r] + v_[c] - cost_(i, j)) / eps);
    }

    /// Unregularized objective evaluated at the current plan.
    double primal_value(double eps) const {
        double value = 0.0;
        Vec eta0 = Vec::Zero(n0_), eta1 = Vec::Zero(n1_);
        for (int i : rows_)
            for (int j : feas_row_[i]) {
                const double h = plan_entry(i, j, eps);
                eta0[i] += h;
                eta1[j] += h;
                value += cost_(i, j) * h;
            }
        for (int i = 0; i < n0_; ++i) value += w0_[i] * entropy_density(eta0[i] / w0_[i]);
        for (int j = 0; j < n1_; ++j) value += w1_[j] * entropy_density(eta1[j] / w1_[j]);
        return value;
    }

    Mat current_plan(double eps) const {
        Mat plan = Mat::Zero(n0_, n1_);
        for (int i : rows_)
            for (int j : feas_row_[i]) plan(i, j) = plan_entry(i, j, eps);
        return plan;
    }

    void fill_marginals(LetSolution& sol) const {
        Vec eta0 = Vec::Zero(n0_), eta1 = Vec::Zero(n1_);
        double hmax = 0.0;
        for (int i : rows_)
            for (int j : feas_row_[i]) {
                const double h = sol.plan(i, j);
                eta0[i] += h;
                eta1[j] += h;
                hmax = std::max(hmax, h);
            }
        for (int i : rows_) sol.sigma0[i] = eta0[i] / w0_[i];
        for (int j : cols_) sol.sigma1[j] = eta1[j] / w1_[j];
        sol.plan_total = eta0.sum();
        const double thresh = std::max(1e-13, 1e-9 * hmax);
        for (int i : rows_)
            for (int j : feas_row_[i])
                if (sol.plan(i, j) >= thresh) sol.support.emplace_back(i, j);
    }

    Mat dist_;
    Vec w0_, w1_;
    double delta_;
    double tol_;
    int n0_ = 0, n1_ = 0;

    Mat cost_;
    std::vector<std::vector<int>> feas_row_, feas_col_;
    std::vector<int> rows_, cols_;   // atoms of the reduced parts mu_i'
    std::vector<int> rpos_, cpos_;
    Vec u_, v_;
    std::vector<double> log_a_, log_b_;
    int total_sweeps_ = 0, total_newton_ = 0;
};

}  // namespace detail

/// Solves the logarithmic entropy-transport problem; the value equals
/// HK_delta^2 of the two weighted supports.
inline LetSolution solve_let(const LetProblem& p, double tol) {
    return detail::LetScalingSolver(p, tol).solve();
}

inline LetSolution solve_let(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double delta,
                             double tol) {
    return solve_let(make_let_problem(mu0, mu1, delta), tol);
}

inline LetSolution solve_let(const AtomCloud& mu0, const AtomCloud& mu1, double delta, double tol) {
    return solve_let(make_let_problem(mu0, mu1, delta), tol);
}

/// cos^2_{pi/2}(x): squared cosine with the pi/2 cut-off.
inline double cos_cutoff_sq(double x) {
    if (x >= 0.5 * pi) return 0.0;
    const double c = std::cos(x);
    return c * c;
}

struct OptimalityReport {
    bool zeros_exact = true;          // sigma_i == 0 exactly on unmatched atoms
    double min_offdiag_slack = 0.0;   // min of sigma0 sigma1 - cos^2 over all pairs
    double max_support_residual = 0.0;  // max |sigma0 sigma1 - cos^2| on supp H
    double value_identity_residual = 0.0;  // value - (m0 + m1 - 2 H(total))
    bool pass(double tol) const {
        return zeros_exact && min_offdiag_slack >= -tol && max_support_residual <= tol;
    }
};

/// Checks the optimality conditions of a solved instance: vanishing densities
/// on the unmatched parts, the calibration inequality sigma0 sigma1 >=
/// cos^2_{pi/2}(delta d) everywhere, equality on the plan support, and the
/// value identity value = m0 + m1 - 2 H(total).
inline OptimalityReport verify_optimality(const LetSolution& sol) {
    OptimalityReport rep;
    const int n0 = static_cast<int>(sol.w0.size());
    const int n1 = static_cast<int>(sol.w1.size());
    for (int i = 0; i < n0; ++i)
        if (!sol.matched0[i] && sol.sigma0[i] != 0.0) rep.zeros_exact = false;
    for (int j = 0; j < n1; ++j)
        if (!sol.matched1[j] && sol.sigma1[j] != 0.0) rep.zeros_exact = false;

    rep.min_offdiag_slack = std::numeric_limits<double>::infinity();
    if (n0 == 0 || n1 == 0) rep.min_offdiag_slack = 0.0;
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) {
            const double c = cos_cutoff_sq(sol.delta * sol.dist(i, j));
            rep.min_offdiag_slack =
                std::min(rep.min_offdiag_slack, sol.sigma0[i] * sol.sigma1[j] - c);
        }
    for (const auto& [i, j] : sol.support) {
        const double c = cos_cutoff_sq(sol.delta * sol.dist(i, j));
        rep.max_support_residual =
            std::max(rep.max_support_residual, std::abs(sol.sigma0[i] * sol.sigma1[j] - c));
    }
    rep.value_identity_residual = sol.value - (sol.mass0() + sol.mass1() - 2.0 * sol.plan_total);
    return rep;
}

struct ReducedCouple {
    std::vector<int> near0, far0;  // atom indices of mu0 within / beyond pi/(2 delta)
    std::vector<int> near1, far1;
    double far_mass0 = 0.0, far_mass1 = 0.0;
};

/// Partitions the atoms of each measure by the distance test
/// delta * dist(x, supp(other)) < pi/2.
inline ReducedCouple reduced_couple(const Mat& dist, const Vec& w0, const Vec& w1, double delta) {
    ReducedCouple rc;
    const int n0 = static_cast<int>(w0.size());
    const int n1 = static_cast<int>(w1.size());
    for (int i = 0; i < n0; ++i) {
        bool near = false;
        for (int j = 0; j < n1 && !near; ++j) near = delta * dist(i, j) < 0.5 * pi;
        (near ? rc.near0 : rc.far0).push_back(i);
        if (!near) rc.far_mass0 += w0[i];
    }
    for (int j = 0; j < n1; ++j) {
        bool near = false;
        for (int i = 0; i < n0 && !near; ++i) near = delta * dist(i, j) < 0.5 * pi;
        (near ? rc.near1 : rc.far1).push_back(j);
        if (!near) rc.far_mass1 += w1[j];
    }
    return rc;
}

inline ReducedCouple reduced_couple(const LetProblem& p) {
    return reduced_couple(p.dist, p.w0, p.w1, p.delta);
}

struct ReducedMeasures {
    DiscreteMeasure mu0_near, mu0_far, mu1_near, mu1_far;
};

inline ReducedMeasures reduced_couple(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                      double delta) {
    const auto rc = reduced_couple(cross_distances(mu0, mu1), mu0.weights, mu1.weights, delta);
    auto restrict = [](const DiscreteMeasure& mu, const std::vector<int>& atoms) {
        DiscreteMeasure out;
        out.space = mu.space;
        out.weights.resize(atoms.size());
        for (size_t k = 0; k < atoms.size(); ++k) {
            out.support.push_back(mu.support[atoms[k]]);
            out.weights[k] = mu.weights[atoms[k]];
        }
        return out;
    };
    return ReducedMeasures{restrict(mu0, rc.near0), restrict(mu0, rc.far0), restrict(mu1, rc.near1),
                           restrict(mu1, rc.far1)};
}

struct PlanMassReport {
    double plan_total = 0.0;
    double total_bound = 0.0;  // sqrt(mu0'(X) mu1'(X))
    double subset_mass = 0.0;  // H(A x X)
    double subset_bound = 0.0;  // sqrt(mu0'(A) mu1'(A enlarged by pi/(2 delta)))
    double total_slack() const { return total_bound - plan_total; }
    double subset_slack() const { return subset_bound - subset_mass; }
};

/// Calibration-mass bounds for an optimal plan: H(XxX) <= sqrt(mu0' mu1')
/// and, for a subset A of mu0 atoms, H(AxX) <= sqrt(mu0'(A) mu1'(A_b)) with
/// b = pi/(2 delta) the closed enlargement radius.
inline PlanMassReport plan_mass_bounds(const LetSolution& sol, const std::vector<int>& subset) {
    PlanMassReport rep;
    rep.plan_total = sol.plan_total;
    double m0p = 0.0, m1p = 0.0;
    for (int i = 0; i < sol.w0.size(); ++i)
        if (sol.matched0[i]) m0p += sol.w0[i];
    for (int j = 0; j < sol.w1.size(); ++j)
        if (sol.matched1[j]) m1p += sol.w1[j];
    rep.total_bound = std::sqrt(m0p * m1p);

    const double radius = 0.5 * pi / sol.delta;
    double massA = 0.0, massEnl = 0.0;
    std::vector<char> in_subset(sol.w0.size(), 0);
    for (int i : subset) {
        if (i < 0 || i >= sol.w0.size()) throw std::out_of_range("subset index");
        in_subset[i] = 1;
        if (sol.matched0[i]) massA += sol.w0[i];
        rep.subset_mass += sol.plan.row(i).sum();
    }
    for (int j = 0; j < sol.w1.size(); ++j) {
        if (!sol.matched1[j]) continue;
        for (int i : subset)
            if (sol.dist(i, j) <= radius) {
                massEnl += sol.w1[j];
                break;
            }
    }
    rep.subset_bound = std::sqrt(massA * massEnl);
    return rep;
}

}  // namespace conehk
