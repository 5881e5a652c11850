#pragma once

#include <cstdint>
#include <optional>

#include "fragscale/camera.hpp"
#include "fragscale/mesh.hpp"
#include "fragscale/scale.hpp"

namespace fragscale {

struct PlaneSurface {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double height(double x, double y) const { return a * x + b * y + c; }
};

struct SinusoidSurface {
    double amplitude = 1.0;
    double wavelength = 1.0;
    double base = 0.0;

    double height(double x, double y) const;
};

struct Region {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 1.0;
    double y1 = 1.0;
};

/// Analytic test surface over a rectangular sampling region. `density` is the
/// number of sample points per axis; `jitter` is the in-plane perturbation as
/// a fraction of grid spacing (boundary samples stay put so the sampled hull
/// equals the region). `noise_sigma` adds Gaussian height noise when nonzero.
struct SyntheticSurface {
    enum class Kind { plane, sinusoid };

    Kind kind = Kind::plane;
    PlaneSurface plane;
    SinusoidSurface sinusoid;
    Region region;
    int density = 2;
    double jitter = 0.25;
    double noise_sigma = 0.0;

    double height(double x, double y) const;

    static SyntheticSurface make_plane(const PlaneSurface& p, const Region& r, int density);
    static SyntheticSurface make_sinusoid(const SinusoidSurface& s, const Region& r, int density);
};

PointCloud sample_cloud(const SyntheticSurface& surface, std::uint64_t seed);

struct PlaneHit {
    Eigen::Vector3d point;
    double alpha = 0.0;
};

/// Closed-form intersection with z = ax + by + c. Returns nullopt when the
/// ray direction is parallel to the plane (denominator < 1e-12 * |d|).
std::optional<PlaneHit> analytic_corner_hit(const PlaneSurface& surface, const WorldRay& ray);

struct OracleScales {
    double top = 0.0;
    double bottom = 0.0;
    std::array<Eigen::Vector3d, 4> corners;
};

/// Edge scales from analytic plane hits of the four corner rays. Throws when
/// a corner ray is parallel to the plane or hits behind the camera.
OracleScales oracle_scale(const PlaneSurface& surface, const ImageGeometry& geometry);

/// First ray/surface crossing by fixed-step march plus bisection refinement.
/// Returns nullopt when no sign change occurs within the step budget.
std::optional<Eigen::Vector3d> march_surface_hit(const SyntheticSurface& surface,
                                                 const WorldRay& ray, double step, double tol);

/// Pose looking toward +y, pitched down by `tilt_rad` from horizontal;
/// pi/2 is straight down.
CameraPose make_tilted_pose(const Eigen::Vector3d& position, double tilt_rad);

}  // namespace fragscale
