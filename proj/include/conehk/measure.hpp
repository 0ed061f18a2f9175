#pragma once

#include "conehk/metric_space.hpp"

#include <Eigen/Dense>

#include <set>
#include <stdexcept>
#include <vector>

namespace conehk {

/// Finitely supported nonnegative measure on a MetricSpace: positive weights
/// on distinct support points.
struct DiscreteMeasure {
    const MetricSpace* space = nullptr;
    std::vector<int> support;
    Vec weights;

    int atoms() const { return static_cast<int>(support.size()); }
    double total() const { return atoms() == 0 ? 0.0 : weights.sum(); }

    const Vec& point(int k) const { return space->point(support.at(k)); }

    bool is_probability(double tol = 1e-10) const { return std::abs(total() - 1.0) <= tol; }

    DiscreteMeasure scaled(double factor) const {
        if (!(factor >= 0.0)) throw std::invalid_argument("scale factor must be nonnegative");
        if (factor == 0.0) return DiscreteMeasure{space, {}, Vec()};
        DiscreteMeasure m = *this;
        m.weights *= factor;
        return m;
    }

    DiscreteMeasure normalized() const {
        const double m = total();
        if (m <= 0.0) throw std::invalid_argument("cannot normalize the zero measure");
        return scaled(1.0 / m);
    }
};

inline DiscreteMeasure make_measure(const MetricSpace& space, std::vector<int> support, Vec weights) {
    if (static_cast<int>(support.size()) != weights.size())
        throw std::invalid_argument("support/weight length mismatch");
    std::set<int> seen;
    for (int idx : support) {
        if (idx < 0 || idx >= space.size()) throw std::out_of_range("support index outside the space");
        if (!seen.insert(idx).second) throw std::invalid_argument("duplicate support index");
    }
    for (int k = 0; k < weights.size(); ++k)
        if (!(weights[k] > 0.0)) throw std::invalid_argument("weights must be positive");
    return DiscreteMeasure{&space, std::move(support), std::move(weights)};
}

/// Measure on free (off-list) points of an analytic space; used for
/// interpolated geodesic samples.
struct AtomCloud {
    const MetricSpace* space = nullptr;
    std::vector<Vec> points;
    Vec weights;

    int atoms() const { return static_cast<int>(points.size()); }
    double total() const { return atoms() == 0 ? 0.0 : weights.sum(); }

    AtomCloud scaled(double factor) const {
        AtomCloud c = *this;
        c.weights *= factor;
        return c;
    }
};

inline AtomCloud to_cloud(const DiscreteMeasure& mu) {
    AtomCloud c;
    c.space = mu.space;
    c.points.reserve(mu.atoms());
    for (int k = 0; k < mu.atoms(); ++k) c.points.push_back(mu.point(k));
    c.weights = mu.weights;
    return c;
}

/// Merges coinciding atoms (base distance below tol) and drops atoms of
/// negligible mass.
inline AtomCloud merged(const AtomCloud& c, double tol = 1e-12, double mass_floor = 1e-15) {
    AtomCloud out;
    out.space = c.space;
    std::vector<double> w;
    for (int k = 0; k < c.atoms(); ++k) {
        if (c.weights[k] <= mass_floor) continue;
        bool placed = false;
        for (size_t j = 0; j < out.points.size() && !placed; ++j) {
            if (c.space->distance_free(out.points[j], c.points[k]) <= tol) {
                w[j] += c.weights[k];
                placed = true;
            }
        }
        if (!placed) {
            out.points.push_back(c.points[k]);
            w.push_back(c.weights[k]);
        }
    }
    out.weights = Eigen::Map<Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
    return out;
}

inline Mat cross_distances(const AtomCloud& a, const AtomCloud& b) {
    Mat d(a.atoms(), b.atoms());
    for (int i = 0; i < a.atoms(); ++i)
        for (int j = 0; j < b.atoms(); ++j) d(i, j) = a.space->distance_free(a.points[i], b.points[j]);
    return d;
}

inline Mat cross_distances(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    Mat d(a.atoms(), b.atoms());
    for (int i = 0; i < a.atoms(); ++i)
        for (int j = 0; j < b.atoms(); ++j) d(i, j) = a.space->distance(a.support[i], b.support[j]);
    return d;
}

}  // namespace conehk
