#pragma once

#include "conehk/measure.hpp"
#include "conehk/metric_space.hpp"

#include <random>
#include <vector>

namespace conehk {

/// Seeded generator; every randomized run records its seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double a, double b) {
        std::uniform_real_distribution<double> d(a, b);
        return d(eng_);
    }

    int uniform_int(int a, int b) {
        std::uniform_int_distribution<int> d(a, b);
        return d(eng_);
    }

    Vec box_point(int dim, double scale) {
        Vec p(dim);
        for (int k = 0; k < dim; ++k) p[k] = uniform(-scale, scale);
        return p;
    }

    Vec sphere_point() {
        std::normal_distribution<double> g(0.0, 1.0);
        Vec p(3);
        do {
            for (int k = 0; k < 3; ++k) p[k] = g(eng_);
        } while (p.norm() < 1e-6);
        p.normalize();
        return p;
    }

    /// Point on the unit sphere within geodesic radius `cap` of `center`.
    Vec sphere_cap_point(const Vec& center, double cap) {
        std::normal_distribution<double> g(0.0, 1.0);
        Vec t(3);
        do {
            for (int k = 0; k < 3; ++k) t[k] = g(eng_);
            t -= t.dot(center) * center;
        } while (t.norm() < 1e-9);
        t.normalize();
        const double ang = uniform(0.0, cap);
        return std::cos(ang) * center + std::sin(ang) * t;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

inline MetricSpace random_euclidean_space(Rng& rng, int n, int dim, double scale) {
    std::vector<Vec> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) pts.push_back(rng.box_point(dim, scale));
    return MetricSpace::euclidean(std::move(pts));
}

inline MetricSpace random_sphere_space(Rng& rng, int n) {
    std::vector<Vec> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) pts.push_back(rng.sphere_point());
    return MetricSpace::sphere(std::move(pts));
}

inline MetricSpace random_circle_space(Rng& rng, int n) {
    std::vector<double> ang;
    ang.reserve(n);
    for (int i = 0; i < n; ++i) ang.push_back(rng.uniform(0.0, 2.0 * pi));
    return MetricSpace::circle(ang);
}

/// Random measure supported on `atoms` distinct points of the space.
inline DiscreteMeasure random_measure(Rng& rng, const MetricSpace& space, int atoms, double wmin,
                                      double wmax) {
    if (atoms > space.size()) throw std::invalid_argument("more atoms than space points");
    std::vector<int> idx(space.size());
    for (int i = 0; i < space.size(); ++i) idx[i] = i;
    for (int i = 0; i < atoms; ++i) {
        const int j = rng.uniform_int(i, space.size() - 1);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(atoms);
    Vec w(atoms);
    for (int k = 0; k < atoms; ++k) w[k] = rng.uniform(wmin, wmax);
    return make_measure(space, std::move(idx), std::move(w));
}

}  // namespace conehk
