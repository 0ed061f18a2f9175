#pragma once

#include "conehk/cone.hpp"
#include "conehk/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace conehk {

/// C = sum_{n>=1} 4 n pi^(2n-2) / (2n+1)!, the constant in the
/// sine-interpolation bound |sin(xt) - t sin(x)| <= C t (1-t) x^3.
/// The series is summed until the terms drop below 1e-15.
inline double sine_series_constant() {
    double sum = 0.0;
    double term = 4.0 / 6.0;  // n = 1: 4 * pi^0 / 3!
    int n = 1;
    while (term >= 1e-15) {
        sum += term;
        // ratio t(n+1)/t(n) = (n+1)/n * pi^2 / ((2n+2)(2n+3))
        term *= (static_cast<double>(n + 1) / n) * pi * pi /
                ((2.0 * n + 2.0) * (2.0 * n + 3.0));
        ++n;
    }
    return sum;
}

/// max_{y in [0, 2D]} y / sin(y); increasing on (0, pi), so the max sits at 2D.
inline double sine_ratio_bound(double D) {
    if (!(D >= 0.0 && D < 0.5 * pi)) throw std::domain_error("ball radius must lie in [0, pi/2)");
    if (D == 0.0) return 1.0;
    return 2.0 * D / std::sin(2.0 * D);
}

struct TransferConstants {
    double C;      // sine-series constant
    double M;      // max y/sin(y) over [0, 2D]
    double r_min;  // lower bound on the geodesic radius
    double D;      // ball radius, < pi/2
};

/// Lower bound on the radius along the cone geodesic between [., r0] and
/// [., r1] when the base distance is at most 2D. For 2D <= pi/2 this is the
/// min(r0,r1)/sqrt(2) bound; otherwise the exact distance from the apex to
/// the comparison segment with opening angle 2D.
inline double geodesic_radius_lower_bound(double r0, double r1, double D) {
    if (!(r0 > 0.0 && r1 > 0.0)) throw std::invalid_argument("radii must be positive");
    if (!(D >= 0.0 && D < 0.5 * pi)) throw std::domain_error("ball radius must lie in [0, pi/2)");
    const double phi = 2.0 * D;
    if (phi <= 0.5 * pi) return std::min(r0, r1) / std::sqrt(2.0);
    const double c = std::cos(phi);
    const double denom = r0 * r0 + r1 * r1 - 2.0 * r0 * r1 * c;
    double t = std::clamp((r0 * r0 - r0 * r1 * c) / denom, 0.0, 1.0);
    const double a = (1.0 - t) * r0, b = t * r1;
    return std::sqrt(std::max(0.0, a * a + b * b + 2.0 * a * b * c));
}

struct SemiconcTriple {
    double t1 = 0.0, t2 = 1.0, t = 0.5;
};

struct SemiconcReport {
    /// Smallest K with f~(t) + (K+1) t(1-t) d^2(x~0, x~1) >= (1-t) f~(0) + t f~(1)
    /// over all sampled restrictions; normalized so an exact parabola
    /// f(t) = t^2 d^2 reports K = 0.
    double k_estimate = 0.0;
    SemiconcTriple worst;
    int grid = 0;
    double base_distance = 0.0;
    std::vector<double> f;  // sampled observer function
};

/// Core estimator over precomputed samples: f[i] on the uniform grid and
/// dist2(i, j) the squared distance between the curve points at nodes i, j.
inline SemiconcReport estimate_k_from_samples(const std::vector<double>& f,
                                              const std::function<double(int, int)>& dist2) {
    const int n = static_cast<int>(f.size());
    if (n < 3) throw std::invalid_argument("semiconcavity grid needs at least 3 nodes");
    SemiconcReport rep;
    rep.grid = n;
    rep.f = f;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i1 = 0; i1 < n; ++i1) {
        for (int i2 = i1 + 2; i2 < n; ++i2) {
            const double d2 = dist2(i1, i2);
            if (d2 <= 1e-30) continue;
            for (int k = i1 + 1; k < i2; ++k) {
                const double t = static_cast<double>(k - i1) / (i2 - i1);
                const double gap = (1.0 - t) * f[i1] + t * f[i2] - f[k];
                const double ratio = gap / (t * (1.0 - t) * d2);
                if (ratio > worst) {
                    worst = ratio;
                    rep.worst = {static_cast<double>(i1) / (n - 1), static_cast<double>(i2) / (n - 1),
                                 static_cast<double>(k) / (n - 1)};
                }
            }
        }
    }
    if (!std::isfinite(worst)) throw std::invalid_argument("no admissible restriction triple on the grid");
    rep.k_estimate = worst - 1.0;
    return rep;
}

enum class SemiconcVariant { one_minus_cos, squared_distance };  // f1 and f2

/// Semiconcavity constant of t -> f(d(x2, gamma(t))) along a base geodesic
/// with respect to the observer x2, estimated on a uniform grid of
/// restriction triples.
inline SemiconcReport estimate_K(const MetricSpace& Y, const BaseGeodesic& g01, const Vec& x2,
                                 SemiconcVariant variant, int grid = 33) {
    if (!(g01.length > 0.0)) throw std::invalid_argument("zero-length geodesic");
    if (grid < 33) throw std::invalid_argument("grid resolution must be at least 33");
    std::vector<Vec> pts(grid);
    std::vector<double> f(grid);
    for (int i = 0; i < grid; ++i) {
        const double t = static_cast<double>(i) / (grid - 1);
        pts[i] = g01.eval(t);
        const double d = Y.distance_free(x2, pts[i]);
        f[i] = variant == SemiconcVariant::squared_distance ? d * d : 1.0 - std::cos(d);
    }
    auto dist2 = [&](int i, int j) {
        const double d = Y.distance_free(pts[i], pts[j]);
        return d * d;
    };
    SemiconcReport rep = estimate_k_from_samples(f, dist2);
    rep.base_distance = g01.length;
    return rep;
}

/// If f1 = 1 - cos(d(x2, .)) is d^2 K-semiconcave inside a ball of radius
/// D < pi/2, then f2 = d^2(x2, .) is K2-semiconcave with
/// K2 = (1 + (1+K)/(pi - 2D)) d01^2.
inline double transfer_f1_to_f2(double K, double D, double d01) {
    if (!(D < 0.5 * pi)) throw std::domain_error("ball radius must be below pi/2");
    if (!(K > 0.0)) throw std::invalid_argument("transfer requires K > 0");
    return (1.0 + (1.0 + K) / (pi - 2.0 * D)) * d01 * d01;
}

/// Converse direction: K1 = (1 + K) d01^2.
inline double transfer_f2_to_f1(double K, double d01) {
    if (!(K > 0.0)) throw std::invalid_argument("transfer requires K > 0");
    return (1.0 + K) * d01 * d01;
}

/// Base-to-cone transfer of the semiconcavity constant for points
/// [x_i, r_i] with base points inside a ball of radius D < pi/2:
///   K' = r2 (4 C M^3 + (K+1) M^2) / (4 r_min) + 1.
inline double cone_transfer_A(double K, double r0, double r1, double r2, double D) {
    if (!(r2 > 0.0)) throw std::invalid_argument("observer radius must be positive");
    const double C = sine_series_constant();
    const double M = sine_ratio_bound(D);
    const double r_min = geodesic_radius_lower_bound(r0, r1, D);
    return r2 * (4.0 * C * M * M * M + (K + 1.0) * M * M) / (4.0 * r_min) + 1.0;
}

/// Cone-to-base transfer; requires equal endpoint radii r0 = r1:
///   K' = 2 C M + (K-1) M^2 / (r_min r2 cos^4 D).
inline double cone_transfer_B(double K, double r0, double r2, double D) {
    if (!(r2 > 0.0)) throw std::invalid_argument("observer radius must be positive");
    const double C = sine_series_constant();
    const double M = sine_ratio_bound(D);
    const double r_min = geodesic_radius_lower_bound(r0, r0, D);
    const double c = std::cos(D);
    return 2.0 * C * M + (K - 1.0) * M * M / (r_min * r2 * c * c * c * c);
}

inline TransferConstants transfer_constants(double r0, double r1, double D) {
    return TransferConstants{sine_series_constant(), sine_ratio_bound(D),
                             geodesic_radius_lower_bound(r0, r1, D), D};
}

}  // namespace conehk
