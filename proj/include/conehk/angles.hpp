#pragma once

#include "conehk/cone.hpp"
#include "conehk/metric_space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace conehk {

namespace detail {

inline double clamp_cos(double c, const char* what) {
    if (c > 1.0 + 1e-12 || c < -1.0 - 1e-12)
        throw std::domain_error(std::string(what) + ": cosine argument overshoots [-1,1]");
    return std::clamp(c, -1.0, 1.0);
}

}  // namespace detail

/// Cosine of the comparison angle at the vertex of a triangle with side
/// lengths (d01, d02, d12) in the model space of curvature kappa.
inline double comparison_cos(double kappa, double d01, double d02, double d12) {
    if (!(d01 > 0.0) || !(d02 > 0.0)) throw std::invalid_argument("comparison angle needs nondegenerate legs");
    if (d12 > d01 + d02 + 1e-12 || d12 < std::abs(d01 - d02) - 1e-12)
        throw std::invalid_argument("side lengths violate the triangle inequality");
    double a;
    if (kappa == 0.0) {
        a = (d01 * d01 + d02 * d02 - d12 * d12) / (2.0 * d01 * d02);
    } else if (kappa > 0.0) {
        const double k = std::sqrt(kappa);
        if (k * d01 >= pi || k * d02 >= pi || k * d12 >= pi)
            throw std::invalid_argument("side length reaches pi/sqrt(kappa) in the spherical model");
        a = (std::cos(k * d12) - std::cos(k * d01) * std::cos(k * d02)) /
            (std::sin(k * d01) * std::sin(k * d02));
    } else {
        const double k = std::sqrt(-kappa);
        a = (std::cosh(k * d01) * std::cosh(k * d02) - std::cosh(k * d12)) /
            (std::sinh(k * d01) * std::sinh(k * d02));
    }
    return detail::clamp_cos(a, "comparison_cos");
}

inline double comparison_angle(double kappa, double d01, double d02, double d12) {
    return std::acos(comparison_cos(kappa, d01, d02, d12));
}

inline void require_common_vertex(const MetricSpace& Y, const BaseGeodesic& g1, const BaseGeodesic& g2) {
    if (Y.distance_free(g1.a, g2.a) > 1e-12)
        throw std::invalid_argument("geodesics do not share their vertex");
}

/// Comparison cosine a_kappa(x0; g1(at arclength s), g2(at arclength t)).
inline double comparison_cos_at(const MetricSpace& Y, const BaseGeodesic& g1, const BaseGeodesic& g2,
                                double kappa, double s, double t) {
    const Vec p = g1.at_arclength(s);
    const Vec q = g2.at_arclength(t);
    return comparison_cos(kappa, s, t, Y.distance_free(p, q));
}

struct KappaGapReport {
    double max_gap = 0.0;
    double fitted_constant = 0.0;  // smallest C with gap <= C*(s+t) on the grid
};

/// Measures |a_0 - a_kappa| for two unit-speed geodesics from a common vertex
/// over a grid of arclength pairs; the gap vanishes as the grid scale does.
inline KappaGapReport kappa_independence_gap(const MetricSpace& Y, const BaseGeodesic& g1,
                                             const BaseGeodesic& g2, double kappa,
                                             const std::vector<std::pair<double, double>>& grid) {
    require_common_vertex(Y, g1, g2);
    KappaGapReport rep;
    for (const auto& [s, t] : grid) {
        if (!(s > 0.0 && t > 0.0)) throw std::invalid_argument("grid arclengths must be positive");
        const double gap = std::abs(comparison_cos_at(Y, g1, g2, 0.0, s, t) -
                                    comparison_cos_at(Y, g1, g2, kappa, s, t));
        rep.max_gap = std::max(rep.max_gap, gap);
        rep.fitted_constant = std::max(rep.fitted_constant, gap / (s + t));
    }
    return rep;
}

struct AngleSample {
    double s, t, a0;
};

struct AngleSchedule {
    double tau = 0.0;  // coarsest arclength; 0 = auto (half the shorter leg)
    int levels = 18;   // arclengths tau * 2^-k, k = 0..levels
    int tail = 4;      // extrema are taken over the finest `tail` levels
};

struct AngleReport {
    double lower = 0.0;  // radians
    double upper = 0.0;
    double tau = 0.0;
    int levels = 0;
    std::vector<AngleSample> samples;  // full refinement history
    std::vector<double> accumulation;  // a_0 extremes per refinement level
};

/// Upper/lower angle estimate between two geodesics from a common vertex.
/// Samples a_0 on the geometric schedule s, t in {2^-k} tau and reports
/// arccos of the extremal sampled values over the finest levels.
inline AngleReport local_angles(const MetricSpace& Y, const BaseGeodesic& g1, const BaseGeodesic& g2,
                                AngleSchedule sched = {}) {
    require_common_vertex(Y, g1, g2);
    if (!(g1.length > 0.0) || !(g2.length > 0.0))
        throw std::invalid_argument("local angles need nontrivial geodesics");
    AngleReport rep;
    rep.tau = sched.tau > 0.0 ? sched.tau : 0.5 * std::min(g1.length, g2.length);
    rep.levels = sched.levels;
    if (rep.tau > std::min(g1.length, g2.length))
        throw std::invalid_argument("schedule tau exceeds a geodesic length");

    double fine_min = std::numeric_limits<double>::infinity();
    double fine_max = -std::numeric_limits<double>::infinity();
    const int tail_start = std::max(0, sched.levels - sched.tail);
    for (int k = 0; k <= sched.levels; ++k) {
        double level_min = std::numeric_limits<double>::infinity();
        double level_max = -level_min;
        for (int l = std::max(0, k - 1); l <= std::min(sched.levels, k + 1); ++l) {
            const double s = rep.tau * std::ldexp(1.0, -k);
            const double t = rep.tau * std::ldexp(1.0, -l);
            const double a0 = comparison_cos_at(Y, g1, g2, 0.0, s, t);
            rep.samples.push_back({s, t, a0});
            level_min = std::min(level_min, a0);
            level_max = std::max(level_max, a0);
            if (k >= tail_start && l >= tail_start) {
                fine_min = std::min(fine_min, a0);
                fine_max = std::max(fine_max, a0);
            }
        }
        rep.accumulation.push_back(level_min);
        rep.accumulation.push_back(level_max);
    }
    rep.upper = std::acos(std::clamp(fine_min, -1.0, 1.0));
    rep.lower = std::acos(std::clamp(fine_max, -1.0, 1.0));
    return rep;
}

struct CopositivityResult {
    bool satisfied = true;
    double min_value = 0.0;          // min of b^T G b over the probability simplex
    Eigen::VectorXd certificate;     // violating weights when not satisfied
};

/// Decides nonnegativity of b^T G b over the nonnegative orthant (scaled to
/// the probability simplex) by grid search plus projected-gradient descent.
/// A returned violation certificate is exact; a pass is up to grid resolution.
inline CopositivityResult copositive_min(const Mat& G, double tol, int grid_step_denominator = 64) {
    const int m = static_cast<int>(G.rows());
    if (m == 0) throw std::invalid_argument("empty quadratic form");
    CopositivityResult res;
    res.min_value = std::numeric_limits<double>::infinity();

    // keep the simplex enumeration near ~2e6 points for larger m
    int denom = grid_step_denominator;
    auto count = [&](int d) {
        double c = 1.0;
        for (int i = 1; i < m; ++i) c *= static_cast<double>(d + i) / i;
        return c;
    };
    while (denom > 4 && count(denom) > 2e6) denom /= 2;

    Eigen::VectorXd best = Eigen::VectorXd::Zero(m);
    std::vector<int> comp(m, 0);
    // enumerate compositions of `denom` into m parts
    std::vector<int> stack;
    std::function<void(int, int)> rec = [&](int idx, int left) {
        if (idx == m - 1) {
            comp[idx] = left;
            Eigen::VectorXd b(m);
            for (int i = 0; i < m; ++i) b[i] = static_cast<double>(comp[i]) / denom;
            const double v = b.dot(G * b);
            if (v < res.min_value) {
                res.min_value = v;
                best = b;
            }
            return;
        }
        for (int c = 0; c <= left; ++c) {
            comp[idx] = c;
            rec(idx + 1, left - c);
        }
    };
    rec(0, denom);

    // projected-gradient polish on the simplex from the best grid point
    auto project_simplex = [&](Eigen::VectorXd b) {
        // Euclidean projection onto {b >= 0, sum b = 1}
        Eigen::VectorXd s = b;
        std::sort(s.data(), s.data() + m, std::greater<double>());
        double cum = 0.0, theta = 0.0;
        int k = 0;
        for (int i = 0; i < m; ++i) {
            cum += s[i];
            const double th = (cum - 1.0) / (i + 1);
            if (s[i] - th > 0.0) {
                theta = th;
                k = i + 1;
            }
        }
        (void)k;
        for (int i = 0; i < m; ++i) b[i] = std::max(0.0, b[i] - theta);
        return b;
    };
    Eigen::VectorXd b = best;
    double fv = res.min_value;
    double step = 0.5 / std::max(1.0, G.cwiseAbs().maxCoeff());
    for (int it = 0; it < 400; ++it) {
        Eigen::VectorXd g = 2.0 * (G * b);
        Eigen::VectorXd cand = project_simplex(b - step * g);
        const double fc = cand.dot(G * cand);
        if (fc < fv - 1e-16) {
            b = cand;
            fv = fc;
        } else {
            step *= 0.5;
            if (step < 1e-12) break;
        }
    }
    if (fv < res.min_value) {
        res.min_value = fv;
        best = b;
    }
    res.certificate = best;
    res.satisfied = res.min_value >= -tol;
    return res;
}

struct MlacReport {
    bool satisfied = true;
    int m = 0;
    Mat upper_angles;          // pairwise upper angles (radians)
    double angle_sum = 0.0;    // m = 3 only: sum of the three upper angles
    double min_quadratic = 0.0;
    Eigen::VectorXd certificate;  // violating b >= 0 when not satisfied
};

/// m-local-angle-condition check for geodesics emanating from a common
/// vertex. For m = 3 the equivalent angle-sum test (<= 2 pi) is used; for
/// other m the Gram matrix of upper-angle cosines is tested for
/// copositivity.
inline MlacReport mlac_check(const MetricSpace& Y, const std::vector<BaseGeodesic>& geos, double tol,
                             AngleSchedule sched = {}) {
    const int m = static_cast<int>(geos.size());
    if (m == 0) throw std::invalid_argument("m-LAC requires at least one geodesic");
    MlacReport rep;
    rep.m = m;
    rep.upper_angles.setZero(m, m);
    if (m <= 2) return rep;  // trivially satisfied

    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const double ang = local_angles(Y, geos[i], geos[j], sched).upper;
            rep.upper_angles(i, j) = rep.upper_angles(j, i) = ang;
        }

    if (m == 3) {
        rep.angle_sum = rep.upper_angles(0, 1) + rep.upper_angles(1, 2) + rep.upper_angles(2, 0);
        rep.satisfied = rep.angle_sum <= 2.0 * pi + tol;
        return rep;
    }

    Mat G(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) G(i, j) = i == j ? 1.0 : std::cos(rep.upper_angles(i, j));
    const auto cop = copositive_min(G, tol);
    rep.satisfied = cop.satisfied;
    rep.min_quadratic = cop.min_value;
    if (!cop.satisfied) rep.certificate = cop.certificate;
    return rep;
}

/// Upper-angle cosine between the lifted geodesics on the cone in terms of
/// the base data at the common vertex [x0, r0]:
///   ((r0 - r1 cos phi01)(r0 - r2 cos phi02) + r1 r2 sin phi01 sin phi02 cos_base)
///     / (d_C(z0,z1) d_C(z0,z2)).
inline double cone_angle_from_base(double r0, double r1, double r2, double phi01, double phi02,
                                   double cos_base) {
    if (!(r0 > 0.0)) throw std::invalid_argument("vertex radius must be positive");
    const double D01 = cone_distance(r0, r1, phi01);
    const double D02 = cone_distance(r0, r2, phi02);
    if (D01 <= 1e-15 || D02 <= 1e-15) throw std::invalid_argument("coincident cone points");
    const double num = (r0 - r1 * std::cos(phi01)) * (r0 - r2 * std::cos(phi02)) +
                       r1 * r2 * std::sin(phi01) * std::sin(phi02) * cos_base;
    return detail::clamp_cos(num / (D01 * D02), "cone_angle_from_base");
}

/// Inverse relation: recovers the base upper-angle cosine from the cone one.
inline double base_angle_from_cone(double r0, double r1, double r2, double phi01, double phi02,
                                   double cos_cone) {
    if (!(r0 > 0.0)) throw std::invalid_argument("vertex radius must be positive");
    if (!(phi01 > 0.0 && phi01 < pi && phi02 > 0.0 && phi02 < pi))
        throw std::invalid_argument("base angles must lie in (0, pi)");
    const double D01 = cone_distance(r0, r1, phi01);
    const double D02 = cone_distance(r0, r2, phi02);
    const double den = r1 * r2 * std::sin(phi01) * std::sin(phi02);
    const double num =
        D01 * D02 * cos_cone - (r0 - r1 * std::cos(phi01)) * (r0 - r2 * std::cos(phi02));
    return detail::clamp_cos(num / den, "base_angle_from_cone");
}

}  // namespace conehk
