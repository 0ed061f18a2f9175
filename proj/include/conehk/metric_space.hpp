#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace conehk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;

enum class SpaceKind { euclidean, circle, sphere, graph };

inline std::string to_string(SpaceKind k) {
    switch (k) {
        case SpaceKind::euclidean: return "euclidean";
        case SpaceKind::circle: return "circle";
        case SpaceKind::sphere: return "sphere";
        case SpaceKind::graph: return "graph";
    }
    return "?";
}

namespace detail {

inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * pi);
    if (a < 0.0) a += 2.0 * pi;
    return a;
}

// signed arc from a to b in (-pi, pi]
inline double circle_signed_delta(double a, double b) {
    double d = wrap_angle(b - a);
    if (d > pi) d -= 2.0 * pi;
    return d;
}

inline double sphere_distance(const Vec& a, const Vec& b) {
    const double dot = a.dot(b);
    const double cx = a[1] * b[2] - a[2] * b[1];
    const double cy = a[2] * b[0] - a[0] * b[2];
    const double cz = a[0] * b[1] - a[1] * b[0];
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

}  // namespace detail

/// Constant-speed geodesic on one of the analytic base spaces, defined on
/// t in [0,1] with speed equal to d(a,b).
struct BaseGeodesic {
    SpaceKind kind = SpaceKind::euclidean;
    Vec a, b;
    double length = 0.0;
    double circle_delta = 0.0;  // signed arc (circle kind only)

    Vec eval(double t) const {
        switch (kind) {
            case SpaceKind::euclidean:
                return (1.0 - t) * a + t * b;
            case SpaceKind::circle: {
                Vec p(1);
                p[0] = detail::wrap_angle(a[0] + t * circle_delta);
                return p;
            }
            case SpaceKind::sphere: {
                if (length < 1e-15) return a;
                const double s = std::sin(length);
                Vec p = (std::sin((1.0 - t) * length) * a + std::sin(t * length) * b) / s;
                p.normalize();
                return p;
            }
            case SpaceKind::graph:
                throw std::invalid_argument("graph geodesics cannot be evaluated");
        }
        throw std::logic_error("bad kind");
    }

    /// Point at arclength s from the start (s in [0, length]).
    Vec at_arclength(double s) const {
        if (length <= 0.0) return a;
        return eval(s / length);
    }
};

struct MetricValidation {
    double max_asymmetry = 0.0;
    double max_diagonal = 0.0;
    double min_offdiag = 0.0;
    double worst_triangle_slack = 0.0;  // min over triples of d(i,k)+d(k,j)-d(i,j)
    double max_analytic_deviation = 0.0;

    bool ok(double tol = 1e-12) const {
        return max_asymmetry <= tol && max_diagonal <= tol &&
               worst_triangle_slack >= -tol && max_analytic_deviation <= tol;
    }
};

/// A finite base space (X, d_X). Distances are precomputed into a dense
/// matrix at construction; the analytic kinds additionally expose exact
/// distances and geodesic interpolation for free (off-list) points.
/// Immutable after construction.
class MetricSpace {
public:
    static MetricSpace euclidean(std::vector<Vec> pts) {
        if (pts.empty()) throw std::invalid_argument("empty point list");
        const auto dim = pts.front().size();
        for (const auto& p : pts)
            if (p.size() != dim) throw std::invalid_argument("inconsistent point dimension");
        MetricSpace s(SpaceKind::euclidean, std::move(pts));
        s.fill_analytic();
        return s;
    }

    /// Circle of circumference 2*pi; points are angles, distance is arc length.
    static MetricSpace circle(const std::vector<double>& angles) {
        if (angles.empty()) throw std::invalid_argument("empty point list");
        std::vector<Vec> pts;
        pts.reserve(angles.size());
        for (double a : angles) {
            Vec p(1);
            p[0] = detail::wrap_angle(a);
            pts.push_back(p);
        }
        MetricSpace s(SpaceKind::circle, std::move(pts));
        s.fill_analytic();
        return s;
    }

    /// Unit sphere S^2 with great-circle distance; points are normalized.
    static MetricSpace sphere(std::vector<Vec> pts) {
        if (pts.empty()) throw std::invalid_argument("empty point list");
        for (auto& p : pts) {
            if (p.size() != 3) throw std::invalid_argument("sphere points must be 3d");
            const double n = p.norm();
            if (n < 1e-12) throw std::invalid_argument("sphere point too close to origin");
            p /= n;
        }
        MetricSpace s(SpaceKind::sphere, std::move(pts));
        s.fill_analytic();
        return s;
    }

    /// Finite graph with shortest-path distances (Floyd-Warshall). Edges are
    /// (i, j, weight) with weight > 0; the graph must be connected.
    static MetricSpace graph(int n, const std::vector<std::tuple<int, int, double>>& edges) {
        if (n <= 0) throw std::invalid_argument("graph needs at least one node");
        std::vector<Vec> pts(n);
        for (int i = 0; i < n; ++i) {
            pts[i] = Vec(1);
            pts[i][0] = i;
        }
        MetricSpace s(SpaceKind::graph, std::move(pts));
        const double inf = std::numeric_limits<double>::infinity();
        s.dist_.setConstant(n, n, inf);
        for (int i = 0; i < n; ++i) s.dist_(i, i) = 0.0;
        for (const auto& [i, j, w] : edges) {
            if (i < 0 || i >= n || j < 0 || j >= n) throw std::invalid_argument("edge index out of range");
            if (!(w > 0.0)) throw std::invalid_argument("edge weight must be positive");
            s.dist_(i, j) = std::min(s.dist_(i, j), w);
            s.dist_(j, i) = s.dist_(i, j);
        }
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    s.dist_(i, j) = std::min(s.dist_(i, j), s.dist_(i, k) + s.dist_(k, j));
        if (!s.dist_.allFinite()) throw std::invalid_argument("graph is disconnected");
        return s;
    }

    SpaceKind kind() const { return kind_; }
    int size() const { return static_cast<int>(points_.size()); }
    const Vec& point(int i) const { return points_.at(i); }
    const std::vector<Vec>& points() const { return points_; }
    const Mat& dist_matrix() const { return dist_; }

    double distance(int i, int j) const {
        check_index(i);
        check_index(j);
        return dist_(i, j);
    }

    bool supports_interpolation() const { return kind_ != SpaceKind::graph; }

    /// Exact distance between arbitrary (off-list) points of an analytic kind.
    double distance_free(const Vec& a, const Vec& b) const {
        switch (kind_) {
            case SpaceKind::euclidean:
                return (a - b).norm();
            case SpaceKind::circle:
                return std::abs(detail::circle_signed_delta(a[0], b[0]));
            case SpaceKind::sphere:
                return detail::sphere_distance(a, b);
            case SpaceKind::graph:
                throw std::invalid_argument("graph kind has no free-point distance");
        }
        throw std::logic_error("bad kind");
    }

    BaseGeodesic geodesic_free(const Vec& a, const Vec& b) const {
        BaseGeodesic g;
        g.kind = kind_;
        g.a = a;
        g.b = b;
        switch (kind_) {
            case SpaceKind::euclidean:
                g.length = (a - b).norm();
                break;
            case SpaceKind::circle:
                g.circle_delta = detail::circle_signed_delta(a[0], b[0]);
                g.length = std::abs(g.circle_delta);
                if (g.length > pi - 1e-9)
                    throw std::invalid_argument("antipodal circle points: geodesic not unique");
                break;
            case SpaceKind::sphere:
                g.length = detail::sphere_distance(a, b);
                if (g.length > pi - 1e-9)
                    throw std::invalid_argument("antipodal sphere points: geodesic not unique");
                break;
            case SpaceKind::graph:
                throw std::invalid_argument("interpolation unavailable on graph spaces");
        }
        return g;
    }

    BaseGeodesic geodesic(int i, int j) const {
        check_index(i);
        check_index(j);
        return geodesic_free(points_[i], points_[j]);
    }

    Vec interpolate(int i, int j, double t) const {
        check_param(t);
        return geodesic(i, j).eval(t);
    }

    Vec interpolate_free(const Vec& a, const Vec& b, double t) const {
        check_param(t);
        return geodesic_free(a, b).eval(t);
    }

    /// Indices of listed points within distance r of x (closed ball).
    std::vector<int> ball(int center, double r) const {
        check_index(center);
        std::vector<int> out;
        for (int j = 0; j < size(); ++j)
            if (dist_(center, j) <= r) out.push_back(j);
        return out;
    }

    double diameter() const { return dist_.maxCoeff(); }

    /// Diagnostic check of the metric axioms and (for analytic kinds)
    /// agreement of the stored matrix with the closed-form distance.
    MetricValidation validate() const {
        MetricValidation v;
        const int n = size();
        v.min_offdiag = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            v.max_diagonal = std::max(v.max_diagonal, std::abs(dist_(i, i)));
            for (int j = 0; j < n; ++j) {
                v.max_asymmetry = std::max(v.max_asymmetry, std::abs(dist_(i, j) - dist_(j, i)));
                if (i != j) v.min_offdiag = std::min(v.min_offdiag, dist_(i, j));
            }
        }
        v.worst_triangle_slack = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    v.worst_triangle_slack =
                        std::min(v.worst_triangle_slack, dist_(i, k) + dist_(k, j) - dist_(i, j));
        if (kind_ != SpaceKind::graph) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    v.max_analytic_deviation = std::max(
                        v.max_analytic_deviation,
                        std::abs(dist_(i, j) - distance_free(points_[i], points_[j])));
        }
        if (n == 1) v.worst_triangle_slack = 0.0;
        return v;
    }

    /// Replaces the stored matrix verbatim (diagnostic inputs only; the
    /// result may fail validate()).
    void override_distances(Mat d) {
        if (d.rows() != size() || d.cols() != size())
            throw std::invalid_argument("distance override has wrong shape");
        dist_ = std::move(d);
    }

private:
    MetricSpace(SpaceKind k, std::vector<Vec> pts) : kind_(k), points_(std::move(pts)) {
        dist_.setZero(points_.size(), points_.size());
    }

    void fill_analytic() {
        const int n = size();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                dist_(i, j) = dist_(j, i) = distance_free(points_[i], points_[j]);
    }

    void check_index(int i) const {
        if (i < 0 || i >= size()) throw std::out_of_range("point index " + std::to_string(i));
    }

    static void check_param(double t) {
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("interpolation parameter outside [0,1]");
    }

    SpaceKind kind_;
    std::vector<Vec> points_;
    Mat dist_;
};

}  // namespace conehk
