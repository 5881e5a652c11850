#include "fragscale/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fragscale {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform in [0, 1) from the generator's top 53 bits; identical across
// platforms, unlike the distribution adaptors.
double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

void validate(const SyntheticSurface& s) {
    if (!(s.region.x1 > s.region.x0 && s.region.y1 > s.region.y0)) {
        throw std::invalid_argument("synthetic surface: empty region");
    }
    if (s.density < 2) {
        throw std::invalid_argument("synthetic surface: density must be at least 2");
    }
    if (!(s.jitter >= 0.0 && s.jitter < 0.5)) {
        throw std::invalid_argument("synthetic surface: jitter must lie in [0, 0.5)");
    }
    if (s.noise_sigma < 0.0) {
        throw std::invalid_argument("synthetic surface: noise sigma must be non-negative");
    }
    if (s.kind == SyntheticSurface::Kind::sinusoid && !(s.sinusoid.wavelength > 0.0)) {
        throw std::invalid_argument("synthetic surface: wavelength must be positive");
    }
}

}  // namespace

double SinusoidSurface::height(double x, double y) const {
    return base + amplitude * std::sin(kTwoPi * x / wavelength) * std::sin(kTwoPi * y / wavelength);
}

double SyntheticSurface::height(double x, double y) const {
    return kind == Kind::plane ? plane.height(x, y) : sinusoid.height(x, y);
}

SyntheticSurface SyntheticSurface::make_plane(const PlaneSurface& p, const Region& r, int density) {
    SyntheticSurface s;
    s.kind = Kind::plane;
    s.plane = p;
    s.region = r;
    s.density = density;
    validate(s);
    return s;
}

SyntheticSurface SyntheticSurface::make_sinusoid(const SinusoidSurface& sin_surface, const Region& r,
                                                 int density) {
    SyntheticSurface s;
    s.kind = Kind::sinusoid;
    s.sinusoid = sin_surface;
    s.region = r;
    s.density = density;
    validate(s);
    return s;
}

PointCloud sample_cloud(const SyntheticSurface& surface, std::uint64_t seed) {
    validate(surface);
    std::mt19937_64 rng(seed);
    const int n = surface.density;
    const double dx = (surface.region.x1 - surface.region.x0) / (n - 1);
    const double dy = (surface.region.y1 - surface.region.y0) / (n - 1);

    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(n) * n);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double ux = unit_double(rng);
            const double uy = unit_double(rng);
            double x = surface.region.x0 + ix * dx;
            double y = surface.region.y0 + iy * dy;
            if (ix > 0 && ix < n - 1) x += surface.jitter * dx * (2.0 * ux - 1.0);
            if (iy > 0 && iy < n - 1) y += surface.jitter * dy * (2.0 * uy - 1.0);
            double z = surface.height(x, y);
            if (surface.noise_sigma > 0.0) {
                const double u1 = std::max(unit_double(rng), 1e-300);
                const double u2 = unit_double(rng);
                z += surface.noise_sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
            }
            cloud.points.emplace_back(x, y, z);
        }
    }
    return cloud;
}

std::optional<PlaneHit> analytic_corner_hit(const PlaneSurface& surface, const WorldRay& ray) {
    const Eigen::Vector3d& r = ray.origin;
    const Eigen::Vector3d& d = ray.direction;
    const double denom = d.z() - surface.a * d.x() - surface.b * d.y();
    if (std::abs(denom) < 1e-12 * d.norm()) return std::nullopt;
    const double alpha = (surface.a * r.x() + surface.b * r.y() + surface.c - r.z()) / denom;
    return PlaneHit{r + alpha * d, alpha};
}

OracleScales oracle_scale(const PlaneSurface& surface, const ImageGeometry& geometry) {
    const auto pixels = corner_pixels(geometry.width, geometry.height);
    OracleScales out;
    for (int k = 0; k < 4; ++k) {
        const Eigen::Vector3d dir_cam = pixel_to_camera_ray(geometry.intrinsics, pixels[k]);
        const WorldRay ray = camera_ray_to_world(geometry.pose, dir_cam);
        const auto hit = analytic_corner_hit(surface, ray);
        if (!hit) throw std::runtime_error("oracle scale: corner ray parallel to surface plane");
        if (hit->alpha < 0.0) throw std::runtime_error("oracle scale: corner ray hits behind the camera");
        out.corners[k] = hit->point;
    }
    const double w = static_cast<double>(geometry.width);
    out.top = edge_scale(w, out.corners[0], out.corners[1]);
    out.bottom = edge_scale(w, out.corners[2], out.corners[3]);
    return out;
}

std::optional<Eigen::Vector3d> march_surface_hit(const SyntheticSurface& surface,
                                                 const WorldRay& ray, double step, double tol) {
    if (!(step > 0.0) || !(tol > 0.0)) {
        throw std::invalid_argument("march_surface_hit: step and tol must be positive");
    }
    const auto above = [&](double t) {
        const Eigen::Vector3d p = ray.origin + t * ray.direction;
        return p.z() - surface.height(p.x(), p.y());
    };

    const long budget = 20'000'000;
    double lo = 0.0;
    double flo = above(lo);
    if (flo == 0.0) return ray.origin;
    double hi = lo;
    bool bracketed = false;
    for (long i = 1; i <= budget; ++i) {
        hi = i * step;
        const double fhi = above(hi);
        if ((flo > 0.0) != (fhi > 0.0)) {
            bracketed = true;
            break;
        }
        lo = hi;
        flo = fhi;
    }
    if (!bracketed) return std::nullopt;

    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = above(mid);
        if (fm == 0.0) return ray.origin + mid * ray.direction;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return ray.origin + 0.5 * (lo + hi) * ray.direction;
}

CameraPose make_tilted_pose(const Eigen::Vector3d& position, double tilt_rad) {
    const double st = std::sin(tilt_rad);
    const double ct = std::cos(tilt_rad);
    Eigen::Matrix3d c;
    c.col(0) = Eigen::Vector3d(1.0, 0.0, 0.0);
    c.col(1) = Eigen::Vector3d(0.0, -st, -ct);
    c.col(2) = Eigen::Vector3d(0.0, ct, -st);
    return CameraPose(c, position);
}

}  // namespace fragscale
