#include "conehk/instances.hpp"
#include "conehk/metric_space.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace conehk;

namespace {

Vec v2(double x, double y) {
    Vec p(2);
    p << x, y;
    return p;
}

Vec v3(double x, double y, double z) {
    Vec p(3);
    p << x, y, z;
    return p;
}

}  // namespace

TEST_CASE("euclidean distances") {
    auto s = MetricSpace::euclidean({v2(0, 0), v2(3, 4), v2(1, 0)});
    CHECK(s.distance(0, 1) == Catch::Approx(5.0).margin(1e-14));
    CHECK(s.distance(1, 1) == 0.0);
    CHECK(s.distance(0, 2) == Catch::Approx(1.0).margin(1e-14));
    CHECK(s.distance(0, 1) == s.distance(1, 0));
    CHECK_THROWS_AS(s.distance(0, 3), std::out_of_range);
}

TEST_CASE("sphere great-circle distances") {
    auto s = MetricSpace::sphere({v3(0, 0, 1), v3(1, 0, 0), v3(0, 1, 0)});
    // north pole to a point on the equator: a quarter great circle
    CHECK(s.distance(0, 1) == Catch::Approx(pi / 2).margin(1e-14));
    CHECK(s.distance(1, 2) == Catch::Approx(pi / 2).margin(1e-14));
}

TEST_CASE("circle arc distances") {
    auto s = MetricSpace::circle({0.0, pi / 2, 3 * pi / 2});
    CHECK(s.distance(0, 1) == Catch::Approx(pi / 2).margin(1e-14));
    CHECK(s.distance(0, 2) == Catch::Approx(pi / 2).margin(1e-14));  // wraps around
    CHECK(s.distance(1, 2) == Catch::Approx(pi).margin(1e-14));
}

TEST_CASE("graph shortest paths") {
    auto s = MetricSpace::graph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 10.0}});
    CHECK(s.distance(0, 3) == Catch::Approx(3.0));
    CHECK(s.distance(0, 2) == Catch::Approx(2.0));
    CHECK_THROWS_AS(s.interpolate(0, 1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(MetricSpace::graph(3, {{0, 1, 1.0}}), std::invalid_argument);  // disconnected
}

TEST_CASE("interpolation endpoints and midpoints") {
    auto s = MetricSpace::euclidean({v2(0, 0), v2(2, 0)});
    CHECK((s.interpolate(0, 1, 0.5) - v2(1, 0)).norm() < 1e-14);
    CHECK((s.interpolate(0, 1, 0.0) - s.point(0)).norm() == 0.0);
    CHECK((s.interpolate(0, 1, 1.0) - s.point(1)).norm() == 0.0);
    CHECK_THROWS_AS(s.interpolate(0, 1, 1.5), std::invalid_argument);

    auto c = MetricSpace::circle({0.0, pi / 2});
    const Vec mid = c.interpolate(0, 1, 0.5);
    CHECK(c.distance_free(mid, c.point(0)) == Catch::Approx(pi / 4).margin(1e-12));
    CHECK(c.distance_free(mid, c.point(1)) == Catch::Approx(pi / 4).margin(1e-12));
}

TEST_CASE("antipodal interpolation is rejected") {
    auto s = MetricSpace::sphere({v3(0, 0, 1), v3(0, 0, -1), v3(1, 0, 0)});
    CHECK_THROWS_AS(s.interpolate(0, 1, 0.5), std::invalid_argument);
    CHECK_NOTHROW(s.interpolate(0, 2, 0.5));
    auto c = MetricSpace::circle({0.0, pi});
    CHECK_THROWS_AS(c.interpolate(0, 1, 0.3), std::invalid_argument);
}

TEST_CASE("triangle inequality holds on random spaces") {
    Rng rng(7);
    for (int rep = 0; rep < 3; ++rep) {
        auto se = random_euclidean_space(rng, 24, 3, 2.0);
        auto ss = random_sphere_space(rng, 24);
        auto sc = random_circle_space(rng, 24);
        for (const MetricSpace* s : {&se, &ss, &sc}) {
            const auto val = s->validate();
            CHECK(val.worst_triangle_slack >= -1e-12);
            CHECK(val.max_asymmetry <= 1e-12);
            CHECK(val.max_analytic_deviation <= 1e-12);
            CHECK(val.ok());
        }
    }
}

TEST_CASE("geodesics have constant speed on an 11-point grid") {
    Rng rng(11);
    auto se = random_euclidean_space(rng, 8, 2, 1.5);
    auto ss = random_sphere_space(rng, 8);
    auto sc = random_circle_space(rng, 8);
    for (const MetricSpace* s : {&se, &ss, &sc}) {
        for (int i = 0; i < s->size(); ++i)
            for (int j = 0; j < s->size(); ++j) {
                if (i == j) continue;
                BaseGeodesic g;
                try {
                    g = s->geodesic(i, j);
                } catch (const std::invalid_argument&) {
                    continue;  // antipodal pair
                }
                for (int a = 0; a <= 10; ++a)
                    for (int b = 0; b <= 10; ++b) {
                        const double ta = a / 10.0, tb = b / 10.0;
                        const double d = s->distance_free(g.eval(ta), g.eval(tb));
                        CHECK(d == Catch::Approx(std::abs(tb - ta) * g.length).margin(1e-9));
                    }
            }
    }
}

TEST_CASE("validate flags a corrupted distance matrix") {
    auto s = MetricSpace::euclidean({v2(0, 0), v2(1, 0), v2(0, 1)});
    Mat bad = s.dist_matrix();
    bad(0, 1) = 10.0;
    bad(1, 0) = 10.0;  // breaks the triangle inequality
    s.override_distances(bad);
    const auto val = s.validate();
    CHECK(val.worst_triangle_slack < -1e-6);
    CHECK_FALSE(val.ok());
}
