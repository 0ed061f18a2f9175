#include "conehk/angles.hpp"
#include "conehk/instances.hpp"

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

// comparison cosine on the cone between two lifted geodesics at curve
// parameters (s, t)
double cone_comparison_cos(const MetricSpace& Y, const ConeGeodesic& g1, const ConeGeodesic& g2,
                           double s, double t) {
    const ConePoint z0{g1.x0(), g1.r0()};
    const ConePoint zs = g1.eval(s);
    const ConePoint zt = g2.eval(t);
    const double d1 = cone_distance(Y, z0, zs);
    const double d2 = cone_distance(Y, z0, zt);
    const double d12 = cone_distance(Y, zs, zt);
    return comparison_cos(0.0, d1, d2, d12);
}

}  // namespace

TEST_CASE("comparison angle closed forms") {
    // equilateral flat triangle
    CHECK(comparison_cos(0.0, 1.0, 1.0, 1.0) == Catch::Approx(0.5));
    // spherical octant
    CHECK(comparison_cos(1.0, pi / 2, pi / 2, pi / 2) == Catch::Approx(0.0).margin(1e-15));
    // collinear
    CHECK(comparison_cos(0.0, 1.0, 1.0, 2.0) == Catch::Approx(-1.0));
    // hyperbolic branch agrees with the flat one for tiny triangles
    CHECK(comparison_cos(-1.0, 1e-4, 1e-4, 1e-4) == Catch::Approx(0.5).margin(1e-6));

    CHECK_THROWS_AS(comparison_cos(0.0, 0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(comparison_cos(1.0, pi, 1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(comparison_cos(0.0, 1.0, 1.0, 2.5), std::invalid_argument);
}

TEST_CASE("model-space independence of small comparison angles") {
    auto plane = MetricSpace::euclidean({v2(0, 0), v2(1, 0), v2(0, 1)});
    auto g1 = plane.geodesic(0, 1);
    auto g2 = plane.geodesic(0, 2);

    SECTION("plane rays at kappa = 1") {
        const auto rep = kappa_independence_gap(plane, g1, g2, 1.0, {{1e-3, 1e-3}});
        CHECK(rep.max_gap <= 1e-5);
    }

    SECTION("identical geodesics give zero gap") {
        const auto rep = kappa_independence_gap(plane, g1, g1, 1.0, {{1e-2, 1e-2}, {1e-2, 5e-3}});
        CHECK(rep.max_gap <= 1e-12);
    }

    SECTION("sphere meridians: gap decays with the grid scale") {
        auto sph = MetricSpace::sphere({v3(0, 0, 1), v3(1, 0, 0),
                                        v3(std::cos(pi / 3), std::sin(pi / 3), 0)});
        auto m1 = sph.geodesic(0, 1);
        auto m2 = sph.geodesic(0, 2);
        double prev = 1.0;
        for (double scale : {1e-2, 1e-3, 1e-4}) {
            const auto rep = kappa_independence_gap(sph, m1, m2, 1.0, {{scale, scale}});
            CHECK(rep.max_gap < prev);
            prev = rep.max_gap;
        }
        CHECK(prev <= 1e-7);
        // fitted first-order constant stays bounded across scales
        const auto rep = kappa_independence_gap(
            sph, m1, m2, 1.0, {{1e-2, 1e-2}, {1e-3, 1e-3}, {1e-4, 1e-4}, {1e-3, 1e-4}});
        CHECK(rep.max_gap <= rep.fitted_constant * 2e-2 + 1e-15);
    }
}

TEST_CASE("local angle estimates") {
    auto plane = MetricSpace::euclidean({v2(0, 0), v2(1, 0), v2(0, 1), v2(1, 1)});

    SECTION("perpendicular rays in the plane") {
        const auto rep = local_angles(plane, plane.geodesic(0, 1), plane.geodesic(0, 2));
        CHECK(rep.upper == Catch::Approx(pi / 2).margin(1e-6));
        CHECK(rep.lower == Catch::Approx(pi / 2).margin(1e-6));
        CHECK(rep.lower <= rep.upper);
        CHECK_FALSE(rep.samples.empty());
    }

    SECTION("a geodesic against itself") {
        const auto rep = local_angles(plane, plane.geodesic(0, 3), plane.geodesic(0, 3));
        CHECK(rep.upper == Catch::Approx(0.0).margin(1e-6));
    }

    SECTION("sphere meridians meet at the equatorial angle") {
        for (double theta : {0.3, 1.0, 2.0}) {
            auto sph = MetricSpace::sphere(
                {v3(0, 0, 1), v3(1, 0, 0), v3(std::cos(theta), std::sin(theta), 0)});
            const auto rep = local_angles(sph, sph.geodesic(0, 1), sph.geodesic(0, 2));
            CHECK(rep.upper == Catch::Approx(theta).margin(1e-4));
            CHECK(rep.lower == Catch::Approx(theta).margin(1e-4));
        }
    }

    SECTION("vertex mismatch is rejected") {
        CHECK_THROWS_AS(local_angles(plane, plane.geodesic(0, 1), plane.geodesic(1, 2)),
                        std::invalid_argument);
    }

    SECTION("invariance under reparametrization of the legs") {
        auto sph = MetricSpace::sphere({v3(0, 0, 1), v3(1, 0, 0), v3(0, 1, 0)});
        auto g1 = sph.geodesic(0, 1);
        auto g2 = sph.geodesic(0, 2);
        // shorter constant-speed legs along the same rays
        auto h1 = sph.geodesic_free(sph.point(0), g1.eval(0.35));
        auto h2 = sph.geodesic_free(sph.point(0), g2.eval(0.6));
        const auto a = local_angles(sph, g1, g2);
        const auto b = local_angles(sph, h1, h2);
        CHECK(a.upper == Catch::Approx(b.upper).margin(1e-6));
    }
}

TEST_CASE("m-LAC checks") {
    SECTION("three planar rays at mutual angle 2pi/3 sit on the boundary") {
        auto plane = MetricSpace::euclidean(
            {v2(0, 0), v2(1, 0), v2(std::cos(2 * pi / 3), std::sin(2 * pi / 3)),
             v2(std::cos(4 * pi / 3), std::sin(4 * pi / 3))});
        const auto rep = mlac_check(
            plane, {plane.geodesic(0, 1), plane.geodesic(0, 2), plane.geodesic(0, 3)}, 1e-6);
        CHECK(rep.satisfied);
        CHECK(std::abs(rep.angle_sum - 2 * pi) <= 1e-6);
    }

    SECTION("one or two geodesics are trivially fine") {
        auto plane = MetricSpace::euclidean({v2(0, 0), v2(1, 0), v2(0, 1)});
        CHECK(mlac_check(plane, {plane.geodesic(0, 1)}, 1e-9).satisfied);
        CHECK(mlac_check(plane, {plane.geodesic(0, 1), plane.geodesic(0, 2)}, 1e-9).satisfied);
        CHECK_THROWS_AS(mlac_check(plane, {}, 1e-9), std::invalid_argument);
    }

    SECTION("orthogonal rays in R^3 give the identity Gram matrix") {
        auto space = MetricSpace::euclidean(
            {v3(0, 0, 0), v3(1, 0, 0), v3(0, 1, 0), v3(0, 0, 1)});
        const auto rep = mlac_check(
            space, {space.geodesic(0, 1), space.geodesic(0, 2), space.geodesic(0, 3)}, 1e-6);
        CHECK(rep.satisfied);
        CHECK(rep.angle_sum == Catch::Approx(1.5 * pi).margin(1e-5));
    }

    SECTION("four geodesics go through the copositivity search") {
        auto space = MetricSpace::euclidean(
            {v3(0, 0, 0), v3(1, 0, 0), v3(0, 1, 0), v3(0, 0, 1), v3(-1, 0, 0)});
        const auto rep = mlac_check(space,
                                    {space.geodesic(0, 1), space.geodesic(0, 2),
                                     space.geodesic(0, 3), space.geodesic(0, 4)},
                                    1e-6);
        CHECK(rep.satisfied);
        CHECK(rep.min_quadratic >= -1e-6);
    }
}

TEST_CASE("copositivity decision on raw Gram matrices") {
    SECTION("identity passes") {
        const auto res = copositive_min(Mat::Identity(4, 4), 1e-9);
        CHECK(res.satisfied);
        CHECK(res.min_value >= 0.0);
    }

    SECTION("too-negative off-diagonals are caught with a certificate") {
        Mat G = Mat::Identity(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (i != j) G(i, j) = -0.4;
        const auto res = copositive_min(G, 1e-9);
        CHECK_FALSE(res.satisfied);
        REQUIRE(res.certificate.size() == 4);
        CHECK(res.certificate.minCoeff() >= 0.0);
        CHECK(res.certificate.dot(G * res.certificate) == Catch::Approx(res.min_value));
        CHECK(res.min_value < -1e-9);
    }

    SECTION("apex condition: diameter below pi/2 makes every m pass") {
        Rng rng(51);
        const Vec center = v3(0, 0, 1);
        for (int m : {3, 4, 5}) {
            std::vector<Vec> pts;
            for (int k = 0; k < m; ++k) pts.push_back(rng.sphere_cap_point(center, pi / 4));
            auto sph = MetricSpace::sphere(pts);
            Mat G(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    G(i, j) = std::cos(std::min(sph.distance(i, j), pi));
            CHECK(G.minCoeff() >= 0.0);  // all angles at the apex are acute
            CHECK(copositive_min(G, 1e-9).satisfied);
        }
    }
}

TEST_CASE("cone angle from base data") {
    SECTION("plug-in evaluation") {
        CHECK(cone_angle_from_base(1.0, 1.0, 1.0, pi / 2, pi / 2, 0.0) == Catch::Approx(0.5));
    }

    SECTION("coincident directions with equal data give angle zero") {
        CHECK(cone_angle_from_base(1.0, 0.7, 0.7, 0.9, 0.9, 1.0) == Catch::Approx(1.0));
    }

    SECTION("vanishing first leg reduces to the radial formula") {
        const double r0 = 1.0, r1 = 0.4, r2 = 0.8, phi02 = 1.1;
        const double got = cone_angle_from_base(r0, r1, r2, 0.0, phi02, 0.123);
        const double dc = cone_distance(r0, r2, phi02);
        CHECK(got ==
              Catch::Approx((r0 - r1) * (r0 - r2 * std::cos(phi02)) / (std::abs(r0 - r1) * dc)));
    }

    SECTION("round trip with the inverse relation") {
        Rng rng(53);
        for (int rep = 0; rep < 200; ++rep) {
            const double r0 = rng.uniform(0.2, 3.0), r1 = rng.uniform(0.2, 3.0),
                         r2 = rng.uniform(0.2, 3.0);
            const double p1 = rng.uniform(0.05, pi - 0.05), p2 = rng.uniform(0.05, pi - 0.05);
            const double cb = rng.uniform(-1.0, 1.0);
            const double cc = cone_angle_from_base(r0, r1, r2, p1, p2, cb);
            CHECK(base_angle_from_cone(r0, r1, r2, p1, p2, cc) ==
                  Catch::Approx(cb).margin(1e-12));
        }
    }

    SECTION("coincident cone points are rejected") {
        CHECK_THROWS_AS(cone_angle_from_base(1.0, 1.0, 1.0, 0.0, 0.5, 0.3),
                        std::invalid_argument);
    }
}

TEST_CASE("cone angles agree with lifted-geodesic measurements on the sphere") {
    const double theta = 0.8;  // equatorial separation of two meridians
    auto sph = MetricSpace::sphere(
        {v3(0, 0, 1), v3(1, 0, 0), v3(std::cos(theta), std::sin(theta), 0)});
    auto b1 = sph.geodesic(0, 1);
    auto b2 = sph.geodesic(0, 2);
    const double r0 = 1.3, r1 = 0.9, r2 = 1.7;
    // both lifted geodesics start from the same cone point [x0, r0]
    auto g1 = lift_geodesic(b1, r0, r1);
    auto g2 = lift_geodesic(b2, r0, r2);

    // measured base angle at refinement 1e-3
    const double s = 1e-3;
    const double base_cos = comparison_cos_at(sph, b1, b2, 0.0, s, s);
    const double predicted = cone_angle_from_base(r0, r1, r2, b1.length, b2.length, base_cos);
    const double measured = cone_comparison_cos(sph, g1, g2, s, s);
    CHECK(measured == Catch::Approx(predicted).margin(2e-3));
    CHECK(base_cos == Catch::Approx(std::cos(theta)).margin(1e-3));
}
