#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "fragscale/camera.hpp"

namespace fragscale {

struct PointCloud {
    std::vector<Eigen::Vector3d> points;
};

struct MeshOptions {
    /// Points whose xy-projections are closer than this are merged, keeping
    /// the highest point (the surface the camera sees).
    double dedup_tolerance = 1e-9;
    /// Cells per axis of the acceleration grid; 0 picks a resolution from the
    /// triangle count.
    int grid_resolution = 0;
};

/// Solution of the line/plane parameterization: the line point is
/// a + (b - a) t, the plane point is p0 + (p1 - p0) eta + (p2 - p0) mu.
struct TriIntersection {
    double t = 0.0;
    double eta = 0.0;
    double mu = 0.0;
};

/// Solves the 3x3 line/plane system by Gaussian elimination with partial
/// pivoting. Returns nullopt when the system is singular (pivot below
/// 1e-12 of the matrix magnitude), i.e. the line is parallel to the plane.
std::optional<TriIntersection> intersect_triangle(const Eigen::Vector3d& a,
                                                  const Eigen::Vector3d& b,
                                                  const Eigen::Vector3d& p0,
                                                  const Eigen::Vector3d& p1,
                                                  const Eigen::Vector3d& p2);

struct RayHit {
    /// Index of the hit triangle, -1 when the ground-plane fallback was used.
    int triangle = -1;
    /// Parameter along the ray direction (origin + t * direction).
    double t = 0.0;
    double eta = 0.0;
    double mu = 0.0;
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    bool fallback = false;
};

/// 2.5D triangulated surface with a uniform xy grid over triangle bounding
/// boxes for accelerated ray queries. Immutable after construction.
class TerrainMesh {
  public:
    TerrainMesh(std::vector<Eigen::Vector3d> vertices,
                std::vector<std::array<int, 3>> triangles, int grid_resolution = 0);

    const std::vector<Eigen::Vector3d>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    int grid_resolution() const { return nx_; }

    /// Collects indices of every triangle whose xy bounding box the forward
    /// ray can touch, sorted ascending. A conservative superset: the caller
    /// still tests each candidate.
    void collect_candidates(const WorldRay& ray, std::vector<int>& out) const;

  private:
    std::vector<Eigen::Vector3d> vertices_;
    std::vector<std::array<int, 3>> triangles_;

    // uniform grid (CSR layout)
    double gx0_ = 0.0, gy0_ = 0.0, gx1_ = 0.0, gy1_ = 0.0;
    double cell_dx_ = 1.0, cell_dy_ = 1.0;
    double pad_ = 0.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::int32_t> cell_offsets_;
    std::vector<std::int32_t> cell_items_;

    void build_grid(int grid_resolution);
};

/// Delaunay-triangulates the xy-projection of the cloud (Bowyer-Watson,
/// extended-precision predicates) and lifts it back to 3D. Duplicate xy
/// points keep the max-z sample. Throws std::invalid_argument on degenerate
/// input (<3 distinct points, or all collinear).
TerrainMesh triangulate(const PointCloud& cloud, const MeshOptions& options = {});

/// Casts the ray against the mesh through the spatial index: among triangles
/// with t >= 0, eta, mu in [0,1], eta + mu <= 1 returns the smallest-t hit.
/// Falls back to the z = 0 ground plane when no triangle accepts; nullopt
/// when the fallback is parallel too.
std::optional<RayHit> cast_ray(const TerrainMesh& mesh, const WorldRay& ray);

/// Reference implementation testing every triangle. Same results as
/// cast_ray, bit for bit; kept as the oracle for the accelerated path.
std::optional<RayHit> cast_ray_linear(const TerrainMesh& mesh, const WorldRay& ray);

}  // namespace fragscale
