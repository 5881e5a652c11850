#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fragscale/mesh.hpp"

namespace testsupport {

inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit_double(rng);
}

struct Circumcircle {
    long double cx, cy, r;
};

// Circumcenter from perpendicular bisectors, solved in extended precision.
inline std::optional<Circumcircle> circumcircle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                                const Eigen::Vector3d& c) {
    const long double ax = a.x(), ay = a.y();
    const long double bx = b.x(), by = b.y();
    const long double cx = c.x(), cy = c.y();
    const long double d = 2.0L * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    if (d == 0.0L) return std::nullopt;
    const long double a2 = ax * ax + ay * ay;
    const long double b2 = bx * bx + by * by;
    const long double c2 = cx * cx + cy * cy;
    const long double ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
    const long double uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
    const long double r = std::sqrt((ux - ax) * (ux - ax) + (uy - ay) * (uy - ay));
    return Circumcircle{ux, uy, r};
}

// Signed double area of the xy convex hull (Andrew monotone chain).
inline double hull_area_xy(std::vector<Eigen::Vector3d> pts) {
    std::sort(pts.begin(), pts.end(), [](const Eigen::Vector3d& p, const Eigen::Vector3d& q) {
        return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Eigen::Vector3d& p, const Eigen::Vector3d& q) {
                              return p.x() == q.x() && p.y() == q.y();
                          }),
              pts.end());
    const auto cross = [](const Eigen::Vector3d& o, const Eigen::Vector3d& p,
                          const Eigen::Vector3d& q) {
        return (p.x() - o.x()) * (q.y() - o.y()) - (p.y() - o.y()) * (q.x() - o.x());
    };
    if (pts.size() < 3) return 0.0;
    std::vector<Eigen::Vector3d> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : 0);
    double area2 = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Eigen::Vector3d& p = hull[i];
        const Eigen::Vector3d& q = hull[(i + 1) % hull.size()];
        area2 += p.x() * q.y() - p.y() * q.x();
    }
    return 0.5 * area2;
}

// Total xy area of the triangulation's faces.
inline double mesh_area_xy(const fragscale::TerrainMesh& mesh) {
    double area = 0.0;
    for (const auto& t : mesh.triangles()) {
        const Eigen::Vector3d& p0 = mesh.vertices()[t[0]];
        const Eigen::Vector3d& p1 = mesh.vertices()[t[1]];
        const Eigen::Vector3d& p2 = mesh.vertices()[t[2]];
        area += 0.5 * std::abs((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                               (p1.y() - p0.y()) * (p2.x() - p0.x()));
    }
    return area;
}

}  // namespace testsupport
