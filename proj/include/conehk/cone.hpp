#pragma once

#include "conehk/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace conehk {

/// Cut-off used inside the cone distance: cos_a(b) = cos(min(a, b)).
enum class Cutoff { pi, half_pi };

inline double cutoff_value(Cutoff c) { return c == Cutoff::pi ? pi : 0.5 * pi; }

inline double cos_cutoff(double angle, Cutoff c) {
    return std::cos(std::min(angle, cutoff_value(c)));
}

/// d_C^2 over the radii/base-angle parametrization.
inline double cone_distance_sq(double r0, double r1, double phi, Cutoff c = Cutoff::pi) {
    if (r0 < 0.0 || r1 < 0.0) throw std::invalid_argument("cone radii must be nonnegative");
    return r0 * r0 + r1 * r1 - 2.0 * r0 * r1 * cos_cutoff(phi, c);
}

inline double cone_distance(double r0, double r1, double phi, Cutoff c = Cutoff::pi) {
    return std::sqrt(std::max(0.0, cone_distance_sq(r0, r1, phi, c)));
}

/// Point [x, r] on the cone over an analytic base space. All points with
/// r = 0 are identified (the apex).
struct ConePoint {
    Vec x;
    double r = 0.0;
};

inline double cone_distance(const MetricSpace& base, const ConePoint& z0, const ConePoint& z1,
                            Cutoff c = Cutoff::pi) {
    const double phi = (z0.r == 0.0 || z1.r == 0.0) ? 0.0 : base.distance_free(z0.x, z1.x);
    return cone_distance(z0.r, z1.r, phi, c);
}

/// Apex-identified equality with absolute tolerance 1e-12 on the radius.
inline bool cone_points_equal(const MetricSpace& base, const ConePoint& z0, const ConePoint& z1) {
    constexpr double tol = 1e-12;
    if (z0.r <= tol && z1.r <= tol) return true;
    if (std::abs(z0.r - z1.r) > tol) return false;
    return base.distance_free(z0.x, z1.x) <= tol;
}

/// Recovers the spherical-space angle from the cone distance of two unit-radius
/// points: arccos(1 - D^2/2). Requires 0 <= D^2 <= 4.
inline double spherical_from_cone(double D) {
    const double D2 = D * D;
    if (D < 0.0 || D2 > 4.0 + 1e-12) throw std::domain_error("cone distance exceeds the unit-radius bound 2");
    return std::acos(std::clamp(1.0 - 0.5 * D2, -1.0, 1.0));
}

/// Residual of the two-parameter scaling identity
///   d_C^2([x0, r0*s0],[x1, r1*s1]) = s0 s1 d_C^2 + (s0^2 - s0 s1) r0^2 + (s1^2 - s0 s1) r1^2.
/// Zero (to roundoff) for every input.
inline double scaling_identity_residual(double r0, double r1, double phi, double s0, double s1,
                                        Cutoff c = Cutoff::pi) {
    if (s0 < 0.0 || s1 < 0.0) throw std::invalid_argument("scale factors must be nonnegative");
    const double lhs = cone_distance_sq(r0 * s0, r1 * s1, phi, c);
    const double rhs = s0 * s1 * cone_distance_sq(r0, r1, phi, c) +
                       (s0 * s0 - s0 * s1) * r0 * r0 + (s1 * s1 - s0 * s1) * r1 * r1;
    return lhs - rhs;
}

inline double scaling_identity_residual(const MetricSpace& base, const ConePoint& z0,
                                        const ConePoint& z1, double s0, double s1,
                                        Cutoff c = Cutoff::pi) {
    const double phi = (z0.r == 0.0 || z1.r == 0.0) ? 0.0 : base.distance_free(z0.x, z1.x);
    return scaling_identity_residual(z0.r, z1.r, phi, s0, s1, c);
}

/// Constant-speed geodesic on the cone between [x0, r0] and [x1, r1].
///
/// Regular case (r0, r1 > 0 and 0 < phi < pi): the radius follows the
/// quadratic law rho^2(t) = (1-t)^2 r0^2 + t^2 r1^2 + 2t(1-t) r0 r1 cos(phi)
/// and the base point is gamma(zeta(t)) with the arctan reparametrization.
/// Degenerate cases (an endpoint at the apex, phi = 0, or phi >= pi) are the
/// radial curves; for phi >= pi the curve passes through the apex and the
/// base point jumps from x0 to x1 at t* = r0/(r0+r1).
class ConeGeodesic {
public:
    enum class Mode { regular, radial, through_apex };

    /// Lifts a base geodesic to the cone. `phi` is the opening angle between
    /// the endpoints; it defaults to the base length and may be overridden
    /// when the cone is built over a rescaled metric (the base path itself is
    /// always traversed by arclength fraction).
    static ConeGeodesic lift(const BaseGeodesic& base, double r0, double r1, double phi = -1.0) {
        if (r0 < 0.0 || r1 < 0.0) throw std::invalid_argument("cone radii must be nonnegative");
        if (phi < 0.0) phi = base.length;
        if (phi >= pi && r0 > 0.0 && r1 > 0.0)
            throw std::invalid_argument("use through_apex for opening angles of pi or more");
        ConeGeodesic g;
        g.base_ = base;
        g.x0_ = base.a;
        g.x1_ = base.b;
        g.r0_ = r0;
        g.r1_ = r1;
        g.phi_ = phi;
        if (r0 == 0.0 || r1 == 0.0 || phi <= 0.0) {
            g.mode_ = Mode::radial;
            g.phi_ = (r0 == 0.0 || r1 == 0.0) ? 0.0 : phi;
        } else {
            g.mode_ = Mode::regular;
        }
        g.finish();
        return g;
    }

    /// Degenerate geodesic through the apex for base distance >= pi (no base
    /// path is needed; the curve lives on the two radial segments).
    static ConeGeodesic through_apex(const Vec& x0, const Vec& x1, double phi, double r0, double r1) {
        if (phi < pi) throw std::invalid_argument("apex crossing requires base distance >= pi");
        if (!(r0 > 0.0 && r1 > 0.0)) throw std::invalid_argument("apex crossing requires positive radii");
        ConeGeodesic g;
        g.x0_ = x0;
        g.x1_ = x1;
        g.r0_ = r0;
        g.r1_ = r1;
        g.phi_ = phi;
        g.mode_ = Mode::through_apex;
        g.finish();
        return g;
    }

    Mode mode() const { return mode_; }
    double r0() const { return r0_; }
    double r1() const { return r1_; }
    double phi() const { return phi_; }
    double length() const { return len_; }
    double length_sq() const { return len2_; }
    const Vec& x0() const { return x0_; }
    const Vec& x1() const { return x1_; }
    const BaseGeodesic& base() const {
        if (mode_ == Mode::through_apex) throw std::logic_error("apex-crossing geodesic has no base path");
        return base_;
    }

    double rho_sq(double t) const {
        // identical to (1-t) r0^2 + t r1^2 - t(1-t) d_C^2 in every mode
        const double a = (1.0 - t) * r0_, b = t * r1_;
        if (mode_ == Mode::through_apex) {
            const double v = r0_ - t * (r0_ + r1_);
            return v * v;
        }
        return a * a + b * b + 2.0 * a * b * std::cos(phi_);
    }

    double rho(double t) const { return std::sqrt(std::max(0.0, rho_sq(t))); }

    /// Base reparametrization zeta: [0,1] -> [0,1]; the base point of the
    /// geodesic at time t is base(zeta(t)).
    double zeta(double t) const {
        switch (mode_) {
            case Mode::regular: {
                const double num = t * r1_ * std::sin(phi_);
                const double den = (1.0 - t) * r0_ + t * r1_ * std::cos(phi_);
                return std::atan2(num, den) / phi_;
            }
            case Mode::radial:
                return 0.0;
            case Mode::through_apex:
                return t < apex_time() ? 0.0 : 1.0;
        }
        throw std::logic_error("bad mode");
    }

    Vec base_point(double t) const {
        switch (mode_) {
            case Mode::regular:
                return base_.eval(zeta(t));
            case Mode::radial:
                return r0_ > 0.0 ? x0_ : x1_;
            case Mode::through_apex:
                return t < apex_time() ? x0_ : x1_;
        }
        throw std::logic_error("bad mode");
    }

    ConePoint eval(double t) const { return ConePoint{base_point(t), rho(t)}; }

    /// Parameter at which an apex crossing occurs.
    double apex_time() const { return r0_ / (r0_ + r1_); }

    /// Inverse reparametrization sigma = zeta^{-1} (regular mode only):
    /// sigma(t) = r0 sin(t phi) / (r1 sin((1-t) phi) + r0 sin(t phi)).
    double sigma(double t) const {
        require_regular();
        const double den = r1_ * std::sin((1.0 - t) * phi_) + r0_ * std::sin(t * phi_);
        return r0_ * std::sin(t * phi_) / den;
    }

    /// rho(sigma(t)) = r0 r1 sin(phi) / (r1 sin((1-t) phi) + r0 sin(t phi)).
    double rho_at_sigma(double t) const {
        require_regular();
        const double den = r1_ * std::sin((1.0 - t) * phi_) + r0_ * std::sin(t * phi_);
        return r0_ * r1_ * std::sin(phi_) / den;
    }

private:
    void finish() {
        const double c = mode_ == Mode::through_apex ? -1.0 : std::cos(std::min(phi_, pi));
        len2_ = r0_ * r0_ + r1_ * r1_ - 2.0 * r0_ * r1_ * c;
        len_ = std::sqrt(std::max(0.0, len2_));
    }

    void require_regular() const {
        if (mode_ != Mode::regular)
            throw std::invalid_argument("projection requires a nondegenerate cone geodesic");
    }

    BaseGeodesic base_;
    Vec x0_, x1_;
    double r0_ = 0.0, r1_ = 0.0, phi_ = 0.0;
    double len_ = 0.0, len2_ = 0.0;
    Mode mode_ = Mode::radial;
};

inline ConeGeodesic lift_geodesic(const BaseGeodesic& base, double r0, double r1, double phi = -1.0) {
    if (phi < 0.0) phi = base.length;
    if (phi >= pi && r0 > 0.0 && r1 > 0.0)
        return ConeGeodesic::through_apex(base.a, base.b, phi, r0, r1);
    return ConeGeodesic::lift(base, r0, r1, phi);
}

/// Projection of a cone geodesic back to the base: the constant-speed base
/// geodesic together with sigma = zeta^{-1} and rho o sigma.
struct ProjectedGeodesic {
    BaseGeodesic base;
    const ConeGeodesic* source;
    double sigma(double t) const { return source->sigma(t); }
    double rho_at(double t) const { return source->rho_at_sigma(t); }
    Vec eval(double t) const { return base.eval(sigma(t)); }
};

inline ProjectedGeodesic project_geodesic(const ConeGeodesic& g) {
    if (g.mode() != ConeGeodesic::Mode::regular)
        throw std::invalid_argument("projection requires a nondegenerate cone geodesic");
    return ProjectedGeodesic{g.base(), &g};
}

/// Two-parameter rescaling of a cone geodesic: t -> A(t) z(B(t)) with
/// A(t) = s0 + (s1 - s0) t and B(t) = s1 t / A(t). Connects s0 z0 to s1 z1
/// and is again a constant-speed geodesic.
class RescaledConeGeodesic {
public:
    RescaledConeGeodesic(const ConeGeodesic& inner, double s0, double s1)
        : inner_(&inner), s0_(s0), s1_(s1) {
        if (s0 < 0.0 || s1 < 0.0) throw std::invalid_argument("scale factors must be nonnegative");
        if (s0 == 0.0 && s1 == 0.0) throw std::invalid_argument("at least one scale factor must be positive");
    }

    double amplitude(double t) const { return s0_ + (s1_ - s0_) * t; }
    double inner_time(double t) const {
        const double a = amplitude(t);
        return a == 0.0 ? 0.0 : s1_ * t / a;
    }

    double rho(double t) const { return amplitude(t) * inner_->rho(inner_time(t)); }
    Vec base_point(double t) const { return inner_->base_point(inner_time(t)); }
    ConePoint eval(double t) const { return ConePoint{base_point(t), rho(t)}; }

    double r0() const { return s0_ * inner_->r0(); }
    double r1() const { return s1_ * inner_->r1(); }

private:
    const ConeGeodesic* inner_;
    double s0_, s1_;
};

inline RescaledConeGeodesic rescale_geodesic(const ConeGeodesic& g, double s0, double s1) {
    return RescaledConeGeodesic(g, s0, s1);
}

}  // namespace conehk
