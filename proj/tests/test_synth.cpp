#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fragscale/synth.hpp"
#include "support.hpp"

using namespace fragscale;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("density-2 sampling lands on the region corners") {
    const SyntheticSurface s =
        SyntheticSurface::make_plane(PlaneSurface{0.0, 0.0, 0.0}, Region{1.0, 2.0, 3.0, 5.0}, 2);
    const PointCloud cloud = sample_cloud(s, 42);
    REQUIRE(cloud.points.size() == 4);
    CHECK(cloud.points[0] == Eigen::Vector3d(1.0, 2.0, 0.0));
    CHECK(cloud.points[1] == Eigen::Vector3d(3.0, 2.0, 0.0));
    CHECK(cloud.points[2] == Eigen::Vector3d(1.0, 5.0, 0.0));
    CHECK(cloud.points[3] == Eigen::Vector3d(3.0, 5.0, 0.0));
}

TEST_CASE("plane samples sit exactly on the surface") {
    const SyntheticSurface s =
        SyntheticSurface::make_plane(PlaneSurface{1.0, 0.0, 0.0}, Region{-2.0, -2.0, 2.0, 2.0}, 9);
    const PointCloud cloud = sample_cloud(s, 7);
    REQUIRE(cloud.points.size() == 81);
    for (const Eigen::Vector3d& p : cloud.points) {
        CHECK(p.z() == p.x());
    }
}

TEST_CASE("sampling is seed-deterministic") {
    const SyntheticSurface s = SyntheticSurface::make_sinusoid(SinusoidSurface{0.3, 1.5, 1.0},
                                                               Region{0.0, 0.0, 4.0, 4.0}, 12);
    const PointCloud a = sample_cloud(s, 99);
    const PointCloud b = sample_cloud(s, 99);
    const PointCloud c = sample_cloud(s, 100);
    REQUIRE(a.points.size() == b.points.size());
    bool all_equal = true;
    bool any_differs = false;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        if (a.points[i] != b.points[i]) all_equal = false;
        if (a.points[i] != c.points[i]) any_differs = true;
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("boundary samples stay on the region edge") {
    const SyntheticSurface s =
        SyntheticSurface::make_plane(PlaneSurface{0.0, 0.0, 1.0}, Region{0.0, 0.0, 1.0, 1.0}, 7);
    const PointCloud cloud = sample_cloud(s, 5);
    double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
    for (const Eigen::Vector3d& p : cloud.points) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
    }
    CHECK(xmin == 0.0);
    CHECK(xmax == 1.0);
    CHECK(ymin == 0.0);
    CHECK(ymax == 1.0);
    // Jitter must actually move interior samples off the lattice.
    bool moved = false;
    for (const Eigen::Vector3d& p : cloud.points) {
        const double fx = p.x() * 6.0;
        if (std::abs(fx - std::round(fx)) > 1e-9) moved = true;
    }
    CHECK(moved);
}

TEST_CASE("surface validation") {
    CHECK_THROWS_AS(SyntheticSurface::make_plane(PlaneSurface{}, Region{0, 0, 1, 1}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(SyntheticSurface::make_plane(PlaneSurface{}, Region{1, 0, 0, 1}, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(SyntheticSurface::make_sinusoid(SinusoidSurface{1.0, 0.0, 0.0},
                                                    Region{0, 0, 1, 1}, 4),
                    std::invalid_argument);
    SyntheticSurface s = SyntheticSurface::make_plane(PlaneSurface{}, Region{0, 0, 1, 1}, 4);
    s.jitter = 0.5;
    CHECK_THROWS_AS(sample_cloud(s, 1), std::invalid_argument);
    s.jitter = 0.25;
    s.noise_sigma = -1.0;
    CHECK_THROWS_AS(sample_cloud(s, 1), std::invalid_argument);
}

TEST_CASE("flat-plane intersection reduces to the ground-plane solve") {
    std::mt19937_64 rng(53);
    const PlaneSurface flat{};
    for (int i = 0; i < 200; ++i) {
        WorldRay ray;
        ray.origin = Eigen::Vector3d(testsupport::uniform(rng, -5.0, 5.0),
                                     testsupport::uniform(rng, -5.0, 5.0),
                                     testsupport::uniform(rng, 0.5, 5.0));
        ray.direction = Eigen::Vector3d(testsupport::uniform(rng, -1.0, 1.0),
                                        testsupport::uniform(rng, -1.0, 1.0),
                                        testsupport::uniform(rng, -1.0, -0.05));
        const auto a = analytic_corner_hit(flat, ray);
        const auto g = intersect_ground_plane(ray);
        REQUIRE(a.has_value());
        REQUIRE(g.has_value());
        CHECK(a->alpha == g->alpha);
        CHECK(a->point == g->point);
    }
}

TEST_CASE("plane intersection hand values") {
    const auto level = analytic_corner_hit(PlaneSurface{0.0, 0.0, 0.5},
                                           WorldRay{{0.0, 0.0, 1.0}, {0.0, 0.0, -1.0}});
    REQUIRE(level.has_value());
    CHECK(level->alpha == 0.5);
    CHECK(level->point == Eigen::Vector3d(0.0, 0.0, 0.5));

    const auto ramp = analytic_corner_hit(PlaneSurface{1.0, 0.0, 0.0},
                                          WorldRay{{0.0, 0.0, 1.0}, {1.0, 0.0, -1.0}});
    REQUIRE(ramp.has_value());
    CHECK(ramp->alpha == 0.5);
    CHECK(ramp->point == Eigen::Vector3d(0.5, 0.0, 0.5));

    CHECK_FALSE(analytic_corner_hit(PlaneSurface{1.0, 0.0, 0.0},
                                    WorldRay{{0.0, 0.0, 1.0}, {1.0, 0.0, 1.0}})
                    .has_value());
}

TEST_CASE("plane intersections satisfy the surface equation") {
    std::mt19937_64 rng(61);
    for (int i = 0; i < 200; ++i) {
        const PlaneSurface plane{testsupport::uniform(rng, -0.5, 0.5),
                                 testsupport::uniform(rng, -0.5, 0.5),
                                 testsupport::uniform(rng, -1.0, 1.0)};
        WorldRay ray;
        ray.origin = Eigen::Vector3d(testsupport::uniform(rng, -3.0, 3.0),
                                     testsupport::uniform(rng, -3.0, 3.0),
                                     testsupport::uniform(rng, 2.0, 6.0));
        ray.direction = Eigen::Vector3d(testsupport::uniform(rng, -0.6, 0.6),
                                        testsupport::uniform(rng, -0.6, 0.6),
                                        testsupport::uniform(rng, -1.0, -0.2));
        const auto hit = analytic_corner_hit(plane, ray);
        REQUIRE(hit.has_value());
        CHECK(std::abs(hit->point.z() - plane.height(hit->point.x(), hit->point.y())) < 1e-12);
    }
}

TEST_CASE("oracle scales for a nadir camera reduce to focal over height") {
    ImageGeometry g;
    g.image_id = "ora";
    g.width = 1280;
    g.height = 720;
    g.intrinsics = CameraIntrinsics(800.0, 800.0, 640.0, 360.0);
    Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
    c(0, 0) = 1.0;
    c(1, 1) = -1.0;
    c(2, 2) = -1.0;
    g.pose = CameraPose(c, Eigen::Vector3d(0.0, 0.0, 0.5));
    const OracleScales o = oracle_scale(PlaneSurface{}, g);
    CHECK(o.top == doctest::Approx(1600.0).epsilon(1e-12));
    CHECK(o.bottom == doctest::Approx(1600.0).epsilon(1e-12));

    g.pose = CameraPose(c, Eigen::Vector3d(0.0, 0.0, -0.5));
    CHECK_THROWS_AS(oracle_scale(PlaneSurface{}, g), std::runtime_error);
}

TEST_CASE("oracle scales under tilt favor the bottom edge") {
    ImageGeometry g;
    g.image_id = "tilt";
    g.width = 1280;
    g.height = 720;
    g.intrinsics = CameraIntrinsics(1000.0, 1000.0, 640.0, 360.0);
    g.pose = make_tilted_pose(Eigen::Vector3d(0.0, 0.0, 1.0), 83.0 * kPi / 180.0);
    const OracleScales o = oracle_scale(PlaneSurface{}, g);
    CHECK(o.bottom > o.top);
    for (const Eigen::Vector3d& corner : o.corners) {
        CHECK(std::abs(corner.z()) < 1e-12);
    }
}

TEST_CASE("pipeline matches the plane oracle on a dense tilted sample") {
    const PlaneSurface plane{0.1, -0.15, 0.25};
    ImageGeometry g;
    g.image_id = "pipe";
    g.width = 1280;
    g.height = 720;
    g.intrinsics = CameraIntrinsics(900.0, 900.0, 640.0, 360.0, 0.4);
    g.pose = make_tilted_pose(Eigen::Vector3d(0.1, -0.4, 1.6), 75.0 * kPi / 180.0);
    const OracleScales oracle = oracle_scale(plane, g);

    const SyntheticSurface s =
        SyntheticSurface::make_plane(plane, Region{-4.0, -4.0, 4.0, 6.0}, 14);
    const TerrainMesh mesh = triangulate(sample_cloud(s, 3), MeshOptions{});
    const ImageScaleRecord rec = compute_image_scale(g, mesh);
    CHECK_FALSE(rec.any_fallback);
    CHECK(std::abs(rec.top_scale - oracle.top) <= 1e-6 * oracle.top);
    CHECK(std::abs(rec.bottom_scale - oracle.bottom) <= 1e-6 * oracle.bottom);
}

TEST_CASE("ray march agrees with the closed form on planes") {
    const PlaneSurface plane{0.2, 0.1, 0.4};
    const SyntheticSurface s =
        SyntheticSurface::make_plane(plane, Region{-5.0, -5.0, 5.0, 5.0}, 4);
    std::mt19937_64 rng(71);
    for (int i = 0; i < 30; ++i) {
        WorldRay ray;
        ray.origin = Eigen::Vector3d(testsupport::uniform(rng, -2.0, 2.0),
                                     testsupport::uniform(rng, -2.0, 2.0),
                                     testsupport::uniform(rng, 2.0, 4.0));
        ray.direction = Eigen::Vector3d(testsupport::uniform(rng, -0.5, 0.5),
                                        testsupport::uniform(rng, -0.5, 0.5),
                                        testsupport::uniform(rng, -1.0, -0.3));
        const auto marched = march_surface_hit(s, ray, 1e-3, 1e-12);
        const auto exact = analytic_corner_hit(plane, ray);
        REQUIRE(marched.has_value());
        REQUIRE(exact.has_value());
        CHECK((*marched - exact->point).norm() < 1e-9);
    }
}

TEST_CASE("ray march lands on the sinusoid surface") {
    const SyntheticSurface s = SyntheticSurface::make_sinusoid(SinusoidSurface{0.2, 1.3, 0.5},
                                                               Region{-4.0, -4.0, 4.0, 4.0}, 8);
    std::mt19937_64 rng(73);
    for (int i = 0; i < 20; ++i) {
        WorldRay ray;
        ray.origin = Eigen::Vector3d(testsupport::uniform(rng, -2.0, 2.0),
                                     testsupport::uniform(rng, -2.0, 2.0), 3.0);
        ray.direction = Eigen::Vector3d(testsupport::uniform(rng, -0.4, 0.4),
                                        testsupport::uniform(rng, -0.4, 0.4), -1.0);
        const auto hit = march_surface_hit(s, ray, 1e-4, 1e-12);
        REQUIRE(hit.has_value());
        CHECK(std::abs(hit->z() - s.height(hit->x(), hit->y())) < 1e-9);
    }
}

TEST_CASE("ray march reports a miss when pointed away") {
    const SyntheticSurface s =
        SyntheticSurface::make_plane(PlaneSurface{}, Region{0.0, 0.0, 1.0, 1.0}, 4);
    const WorldRay up{Eigen::Vector3d(0.5, 0.5, 1.0), Eigen::Vector3d(0.0, 0.0, 1.0)};
    CHECK_FALSE(march_surface_hit(s, up, 1e-2, 1e-9).has_value());
}

TEST_CASE("tilted pose construction") {
    const CameraPose nadir = make_tilted_pose(Eigen::Vector3d(1.0, 2.0, 3.0), kPi / 2.0);
    const Eigen::Matrix3d& r = nadir.rotation();
    CHECK(r(0, 0) == 1.0);
    CHECK(r(1, 1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r(2, 2) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(nadir.translation() == Eigen::Vector3d(1.0, 2.0, 3.0));

    const CameraPose tilted = make_tilted_pose(Eigen::Vector3d::Zero(), 1.1);
    CHECK(tilted.rotation().determinant() == doctest::Approx(1.0).epsilon(1e-12));
}
