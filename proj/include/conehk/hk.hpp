#pragma once

#include "conehk/cone.hpp"
#include "conehk/let.hpp"
#include "conehk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace conehk {

/// Hellinger-Kantorovich distance HK_delta(mu0, mu1) = sqrt(LET value).
inline double hk_distance(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double delta,
                          double tol) {
    return std::sqrt(std::max(0.0, solve_let(mu0, mu1, delta, tol).value));
}

inline double hk_distance(const AtomCloud& mu0, const AtomCloud& mu1, double delta, double tol) {
    return std::sqrt(std::max(0.0, solve_let(mu0, mu1, delta, tol).value));
}

inline double shk_from_hk2(double hk2) {
    return std::acos(std::clamp(1.0 - 0.5 * hk2, -1.0, 1.0));
}

/// Spherical Hellinger-Kantorovich distance on probability measures,
/// arccos(1 - HK^2/2), with values in [0, pi/2].
inline double shk_distance(const DiscreteMeasure& nu0, const DiscreteMeasure& nu1, double delta,
                           double tol) {
    if (!nu0.is_probability() || !nu1.is_probability())
        throw std::invalid_argument("shk needs probability measures");
    return shk_from_hk2(solve_let(nu0, nu1, delta, tol).value);
}

inline double shk_distance(const AtomCloud& nu0, const AtomCloud& nu1, double delta, double tol) {
    if (std::abs(nu0.total() - 1.0) > 1e-10 || std::abs(nu1.total() - 1.0) > 1e-10)
        throw std::invalid_argument("shk needs probability measures");
    return shk_from_hk2(solve_let(nu0, nu1, delta, tol).value);
}

struct ScalingCheck {
    double residual = 0.0;  // HK^2(r0^2 mu0, r1^2 mu1) minus the scaling prediction
    double plan_gap = 0.0;  // sup-norm gap between the scaled plan and r0 r1 H
};

/// Residual of HK^2(r0^2 mu0, r1^2 mu1) =
///   r0 r1 HK^2 + (r0^2 - r0 r1) mu0(X) + (r1^2 - r0 r1) mu1(X),
/// together with the optimal-plan scaling H -> r0 r1 H.
inline ScalingCheck scaling_residual(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                     double r0, double r1, double delta, double tol) {
    if (r0 < 0.0 || r1 < 0.0) throw std::invalid_argument("scale factors must be nonnegative");
    const auto base = solve_let(mu0, mu1, delta, tol);
    const auto scaled = solve_let(mu0.scaled(r0 * r0), mu1.scaled(r1 * r1), delta, tol);
    ScalingCheck out;
    out.residual = scaled.value - (r0 * r1 * base.value + (r0 * r0 - r0 * r1) * mu0.total() +
                                   (r1 * r1 - r0 * r1) * mu1.total());
    if (r0 > 0.0 && r1 > 0.0) {
        out.plan_gap = (scaled.plan - r0 * r1 * base.plan).cwiseAbs().maxCoeff();
    } else {
        out.plan_gap = scaled.plan_total;  // the scaled problem must carry no plan mass
    }
    return out;
}

/// One transported pair of a measure geodesic: plan mass h rides the cone
/// geodesic between [x0, 1/sqrt(sigma0)] and [x1, 1/sqrt(sigma1)] over the
/// delta-scaled base metric, contributing mass h rho^2(t) at the interpolated
/// point.
struct GeodesicRay {
    Vec x0, x1;
    double weight = 0.0;
    ConeGeodesic geo;
};

/// Explicit discrete HK geodesic: transported rays plus pure annihilation
/// ((1-t)^2 mass decay) and creation (t^2 growth) atoms.
class MeasureGeodesic {
public:
    MeasureGeodesic(const MetricSpace* space, double delta, double m0, double m1, double hk2)
        : space_(space), delta_(delta), m0_(m0), m1_(m1), hk2_(hk2) {}

    const MetricSpace& space() const { return *space_; }
    double delta() const { return delta_; }
    double mass0() const { return m0_; }
    double mass1() const { return m1_; }
    double hk2() const { return hk2_; }

    std::vector<GeodesicRay> rays;
    std::vector<std::pair<Vec, double>> annihilated;  // (point, initial mass)
    std::vector<std::pair<Vec, double>> created;      // (point, final mass)

    /// Total mass at time t; quadratic in t by construction.
    double mass(double t) const {
        double m = 0.0;
        for (const auto& r : rays) m += r.weight * r.geo.rho_sq(t);
        for (const auto& [x, w] : annihilated) m += (1.0 - t) * (1.0 - t) * w;
        for (const auto& [x, w] : created) m += t * t * w;
        return m;
    }

    /// Measure at time t (atoms at coinciding points merged).
    AtomCloud at(double t) const {
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("curve parameter outside [0,1]");
        AtomCloud c;
        c.space = space_;
        std::vector<double> w;
        for (const auto& r : rays) {
            c.points.push_back(r.geo.base_point(t));
            w.push_back(r.weight * r.geo.rho_sq(t));
        }
        for (const auto& [x, m] : annihilated) {
            c.points.push_back(x);
            w.push_back((1.0 - t) * (1.0 - t) * m);
        }
        for (const auto& [x, m] : created) {
            c.points.push_back(x);
            w.push_back(t * t * m);
        }
        c.weights = Eigen::Map<Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
        return merged(c);
    }

private:
    const MetricSpace* space_;
    double delta_;
    double m0_, m1_, hk2_;
};

/// Builds the explicit geodesic between the two solved measures. Every plan
/// pair (x0, x1, h) becomes a ray from [x0, 1/sqrt(sigma0)] to
/// [x1, 1/sqrt(sigma1)]; unmatched atoms shrink or grow quadratically in
/// place. Endpoint measures are reproduced exactly.
inline MeasureGeodesic geodesic_from_solution(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                              const LetSolution& sol) {
    if (mu0.space != mu1.space) throw std::invalid_argument("measures live on different spaces");
    const MetricSpace& X = *mu0.space;
    if (!X.supports_interpolation())
        throw std::invalid_argument("geodesic synthesis needs a base space with interpolation");
    if (mu0.atoms() != sol.w0.size() || mu1.atoms() != sol.w1.size())
        throw std::invalid_argument("solution does not match the measures");

    MeasureGeodesic g(&X, sol.delta, sol.mass0(), sol.mass1(), sol.value);

    Vec eta0 = sol.plan.rows() ? Vec(sol.plan.rowwise().sum()) : Vec();
    Vec eta1 = sol.plan.cols() ? Vec(sol.plan.colwise().sum()) : Vec();
    for (int i = 0; i < mu0.atoms(); ++i)
        for (int j = 0; j < mu1.atoms(); ++j) {
            const double h = sol.plan(i, j);
            if (h <= 0.0) continue;
            if (!(sol.sigma0[i] > 0.0) || !(sol.sigma1[j] > 0.0))
                throw std::logic_error("plan mass on an atom with vanishing density");
            GeodesicRay ray;
            ray.x0 = mu0.point(i);
            ray.x1 = mu1.point(j);
            ray.weight = h;
            // radii from the marginal ratios keep the endpoints exact
            const double r0 = std::sqrt(sol.w0[i] / eta0[i]);
            const double r1 = std::sqrt(sol.w1[j] / eta1[j]);
            const auto base = X.geodesic_free(ray.x0, ray.x1);
            ray.geo = lift_geodesic(base, r0, r1, sol.delta * base.length);
            g.rays.push_back(std::move(ray));
        }
    for (int i = 0; i < mu0.atoms(); ++i)
        if (!sol.matched0[i]) g.annihilated.emplace_back(mu0.point(i), sol.w0[i]);
    for (int j = 0; j < mu1.atoms(); ++j)
        if (!sol.matched1[j]) g.created.emplace_back(mu1.point(j), sol.w1[j]);
    return g;
}

inline MeasureGeodesic hk_geodesic(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                   double delta, double tol) {
    return geodesic_from_solution(mu0, mu1, solve_let(mu0, mu1, delta, tol));
}

/// Projection of an HK geodesic to the probability sphere: the SHK geodesic
/// nu(t) = mu(sigma(t)) / m(sigma(t)) with the sine reparametrization built
/// from the endpoint masses.
class SphericalGeodesic {
public:
    explicit SphericalGeodesic(MeasureGeodesic inner) : inner_(std::move(inner)) {
        if (!(inner_.mass0() > 0.0) || !(inner_.mass1() > 0.0))
            throw std::invalid_argument("projection needs endpoints of positive mass");
        r0_ = std::sqrt(inner_.mass0());
        r1_ = std::sqrt(inner_.mass1());
        const double c = (r0_ * r0_ + r1_ * r1_ - inner_.hk2()) / (2.0 * r0_ * r1_);
        phi_ = std::acos(std::clamp(c, -1.0, 1.0));
    }

    /// SHK distance between the normalized endpoints.
    double angle() const { return phi_; }

    double sigma(double t) const {
        if (phi_ < 1e-12) return t;
        const double den = r1_ * std::sin((1.0 - t) * phi_) + r0_ * std::sin(t * phi_);
        return r0_ * std::sin(t * phi_) / den;
    }

    AtomCloud at(double t) const {
        const double s = sigma(t);
        AtomCloud c = inner_.at(s);
        const double m = c.total();
        if (!(m > 0.0)) throw std::logic_error("zero mass along the projected geodesic");
        return c.scaled(1.0 / m);
    }

    const MeasureGeodesic& inner() const { return inner_; }

private:
    MeasureGeodesic inner_;
    double r0_, r1_, phi_;
};

inline SphericalGeodesic project_geodesic_to_sphere(MeasureGeodesic g) {
    return SphericalGeodesic(std::move(g));
}

/// Pair of cone points with a weight; source atom indices are kept (-1 marks
/// the apex side of a creation/annihilation pair).
struct LiftedPair {
    Vec x0, x1;
    double r0 = 0.0, r1 = 0.0;
    double weight = 0.0;
    int atom0 = -1, atom1 = -1;
};

/// Discrete plan on the cone certifying HK^2 as a transport cost; uses the
/// pi/2 cut-off cone metric over (X, delta d_X).
struct LiftedPlan {
    const MetricSpace* space = nullptr;
    double delta = 1.0;
    Cutoff cutoff = Cutoff::half_pi;
    std::vector<LiftedPair> pairs;

    double cost() const {
        double c = 0.0;
        for (const auto& p : pairs) {
            const double phi = (p.r0 > 0.0 && p.r1 > 0.0)
                                   ? delta * space->distance_free(p.x0, p.x1)
                                   : 0.0;
            c += p.weight * cone_distance_sq(p.r0, p.r1, phi, cutoff);
        }
        return c;
    }

    /// Projected marginal masses per source atom index.
    Vec projected_marginal(int side, int atoms) const {
        Vec m = Vec::Zero(atoms);
        for (const auto& p : pairs) {
            const int idx = side == 0 ? p.atom0 : p.atom1;
            const double r = side == 0 ? p.r0 : p.r1;
            if (idx >= 0) m[idx] += p.weight * r * r;
        }
        return m;
    }
};

/// Lifts an optimal solution to a plan on the cone: matched plan mass rides
/// between [x0, 1/sqrt(sigma0)] and [x1, 1/sqrt(sigma1)], unmatched mass is
/// paired with the apex. The projected marginals reproduce the inputs
/// atom-wise and the cost equals the LET value.
inline LiftedPlan cone_lift_certificate(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                        const LetSolution& sol) {
    if (mu0.space != mu1.space) throw std::invalid_argument("measures live on different spaces");
    LiftedPlan plan;
    plan.space = mu0.space;
    plan.delta = sol.delta;
    Vec eta0 = sol.plan.rows() ? Vec(sol.plan.rowwise().sum()) : Vec();
    Vec eta1 = sol.plan.cols() ? Vec(sol.plan.colwise().sum()) : Vec();
    for (int i = 0; i < mu0.atoms(); ++i)
        for (int j = 0; j < mu1.atoms(); ++j) {
            const double h = sol.plan(i, j);
            if (h <= 0.0) continue;
            LiftedPair p;
            p.x0 = mu0.point(i);
            p.x1 = mu1.point(j);
            p.r0 = std::sqrt(sol.w0[i] / eta0[i]);
            p.r1 = std::sqrt(sol.w1[j] / eta1[j]);
            p.weight = h;
            p.atom0 = i;
            p.atom1 = j;
            plan.pairs.push_back(std::move(p));
        }
    for (int i = 0; i < mu0.atoms(); ++i)
        if (!sol.matched0[i]) {
            LiftedPair p;
            p.x0 = mu0.point(i);
            p.x1 = mu0.point(i);
            p.r0 = std::sqrt(sol.w0[i]);
            p.r1 = 0.0;
            p.weight = 1.0;
            p.atom0 = i;
            plan.pairs.push_back(std::move(p));
        }
    for (int j = 0; j < mu1.atoms(); ++j)
        if (!sol.matched1[j]) {
            LiftedPair p;
            p.x0 = mu1.point(j);
            p.x1 = mu1.point(j);
            p.r0 = 0.0;
            p.r1 = std::sqrt(sol.w1[j]);
            p.weight = 1.0;
            p.atom1 = j;
            plan.pairs.push_back(std::move(p));
        }
    return plan;
}

/// Radius/weight dilation with one positive factor per pair: radii are
/// divided by theta, weights multiplied by theta^2. Transport cost and
/// projected marginals are invariant.
inline LiftedPlan dilate(const LiftedPlan& plan, const std::vector<double>& theta) {
    if (theta.size() != plan.pairs.size())
        throw std::invalid_argument("one dilation factor per pair required");
    LiftedPlan out = plan;
    for (size_t k = 0; k < out.pairs.size(); ++k) {
        if (!(theta[k] > 0.0)) throw std::invalid_argument("dilation factors must be positive");
        out.pairs[k].r0 /= theta[k];
        out.pairs[k].r1 /= theta[k];
        out.pairs[k].weight *= theta[k] * theta[k];
    }
    return out;
}

/// Two-parameter rescaling of a measure geodesic, t -> A(t)^2 mu(B(t)) with
/// A(t) = s0 + (s1 - s0) t and B(t) = s1 t / A(t); traces the geodesic
/// between s0^2 mu0 and s1^2 mu1.
inline AtomCloud rescaled_measure_curve(const MeasureGeodesic& g, double s0, double s1, double t) {
    if (s0 < 0.0 || s1 < 0.0) throw std::invalid_argument("scale factors must be nonnegative");
    const double A = s0 + (s1 - s0) * t;
    const double B = A == 0.0 ? 0.0 : s1 * t / A;
    return g.at(B).scaled(A * A);
}

}  // namespace conehk
