#include "fragscale/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fragscale {

std::optional<TriIntersection> intersect_triangle(const Eigen::Vector3d& a,
                                                  const Eigen::Vector3d& b,
                                                  const Eigen::Vector3d& p0,
                                                  const Eigen::Vector3d& p1,
                                                  const Eigen::Vector3d& p2) {
    // Columns: a - b, p1 - p0, p2 - p0. Right-hand side: a - p0.
    double m[3][3];
    double r[3];
    for (int i = 0; i < 3; ++i) {
        m[i][0] = a[i] - b[i];
        m[i][1] = p1[i] - p0[i];
        m[i][2] = p2[i] - p0[i];
        r[i] = a[i] - p0[i];
    }

    double scale = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) scale = std::max(scale, std::abs(m[i][j]));
    if (scale == 0.0) return std::nullopt;

    int perm[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row) {
            if (std::abs(m[perm[row]][col]) > std::abs(m[perm[piv]][col])) piv = row;
        }
        std::swap(perm[col], perm[piv]);
        const double pivot = m[perm[col]][col];
        if (std::abs(pivot) < scale * 1e-12) return std::nullopt;
        for (int row = col + 1; row < 3; ++row) {
            const double f = m[perm[row]][col] / pivot;
            if (f == 0.0) continue;
            for (int j = col + 1; j < 3; ++j) m[perm[row]][j] -= f * m[perm[col]][j];
            r[perm[row]] -= f * r[perm[col]];
        }
    }

    double x[3];
    for (int col = 2; col >= 0; --col) {
        double acc = r[perm[col]];
        for (int j = col + 1; j < 3; ++j) acc -= m[perm[col]][j] * x[j];
        x[col] = acc / m[perm[col]][col];
    }
    return TriIntersection{x[0], x[1], x[2]};
}

TerrainMesh::TerrainMesh(std::vector<Eigen::Vector3d> vertices,
                         std::vector<std::array<int, 3>> triangles, int grid_resolution)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    if (vertices_.empty() || triangles_.empty()) {
        throw std::invalid_argument("terrain mesh: needs at least one triangle");
    }
    const int nv = static_cast<int>(vertices_.size());
    for (const auto& t : triangles_) {
        for (int k = 0; k < 3; ++k) {
            if (t[k] < 0 || t[k] >= nv) throw std::invalid_argument("terrain mesh: bad vertex index");
        }
        const Eigen::Vector3d& p0 = vertices_[t[0]];
        const Eigen::Vector3d& p1 = vertices_[t[1]];
        const Eigen::Vector3d& p2 = vertices_[t[2]];
        const double area2 = std::abs((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                                      (p1.y() - p0.y()) * (p2.x() - p0.x()));
        if (!(area2 * 0.5 > 1e-12)) {
            throw std::invalid_argument("terrain mesh: degenerate triangle (xy area <= 1e-12)");
        }
    }
    build_grid(grid_resolution);
}

void TerrainMesh::build_grid(int grid_resolution) {
    gx0_ = gy0_ = std::numeric_limits<double>::infinity();
    gx1_ = gy1_ = -std::numeric_limits<double>::infinity();
    for (const Eigen::Vector3d& v : vertices_) {
        gx0_ = std::min(gx0_, v.x());
        gx1_ = std::max(gx1_, v.x());
        gy0_ = std::min(gy0_, v.y());
        gy1_ = std::max(gy1_, v.y());
    }
    const double ext = std::max({gx1_ - gx0_, gy1_ - gy0_, 1e-12});
    pad_ = 1e-9 * ext;
    gx0_ -= pad_;
    gy0_ -= pad_;
    gx1_ += pad_;
    gy1_ += pad_;

    int res = grid_resolution;
    if (res <= 0) {
        res = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(triangles_.size()))));
        res = std::clamp(res, 1, 1024);
    }
    nx_ = ny_ = res;
    cell_dx_ = (gx1_ - gx0_) / nx_;
    cell_dy_ = (gy1_ - gy0_) / ny_;

    const auto clamp_cell = [](int c, int n) { return std::clamp(c, 0, n - 1); };
    const auto cell_range = [&](double lo, double hi, double origin, double step, int n, int& c0,
                                int& c1) {
        c0 = clamp_cell(static_cast<int>(std::floor((lo - origin) / step)), n);
        c1 = clamp_cell(static_cast<int>(std::floor((hi - origin) / step)), n);
    };

    const std::size_t ncells = static_cast<std::size_t>(nx_) * ny_;
    std::vector<std::int32_t> counts(ncells, 0);
    for (const auto& t : triangles_) {
        double bx0 = vertices_[t[0]].x(), bx1 = bx0, by0 = vertices_[t[0]].y(), by1 = by0;
        for (int k = 1; k < 3; ++k) {
            bx0 = std::min(bx0, vertices_[t[k]].x());
            bx1 = std::max(bx1, vertices_[t[k]].x());
            by0 = std::min(by0, vertices_[t[k]].y());
            by1 = std::max(by1, vertices_[t[k]].y());
        }
        int cx0, cx1, cy0, cy1;
        cell_range(bx0 - pad_, bx1 + pad_, gx0_, cell_dx_, nx_, cx0, cx1);
        cell_range(by0 - pad_, by1 + pad_, gy0_, cell_dy_, ny_, cy0, cy1);
        for (int cy = cy0; cy <= cy1; ++cy)
            for (int cx = cx0; cx <= cx1; ++cx) ++counts[static_cast<std::size_t>(cy) * nx_ + cx];
    }
    cell_offsets_.assign(ncells + 1, 0);
    for (std::size_t i = 0; i < ncells; ++i) cell_offsets_[i + 1] = cell_offsets_[i] + counts[i];
    cell_items_.assign(static_cast<std::size_t>(cell_offsets_[ncells]), 0);
    std::vector<std::int32_t> cursor(cell_offsets_.begin(), cell_offsets_.end() - 1);
    for (std::size_t ti = 0; ti < triangles_.size(); ++ti) {
        const auto& t = triangles_[ti];
        double bx0 = vertices_[t[0]].x(), bx1 = bx0, by0 = vertices_[t[0]].y(), by1 = by0;
        for (int k = 1; k < 3; ++k) {
            bx0 = std::min(bx0, vertices_[t[k]].x());
            bx1 = std::max(bx1, vertices_[t[k]].x());
            by0 = std::min(by0, vertices_[t[k]].y());
            by1 = std::max(by1, vertices_[t[k]].y());
        }
        int cx0, cx1, cy0, cy1;
        cell_range(bx0 - pad_, bx1 + pad_, gx0_, cell_dx_, nx_, cx0, cx1);
        cell_range(by0 - pad_, by1 + pad_, gy0_, cell_dy_, ny_, cy0, cy1);
        for (int cy = cy0; cy <= cy1; ++cy)
            for (int cx = cx0; cx <= cx1; ++cx)
                cell_items_[cursor[static_cast<std::size_t>(cy) * nx_ + cx]++] =
                    static_cast<std::int32_t>(ti);
    }
}

void TerrainMesh::collect_candidates(const WorldRay& ray, std::vector<int>& out) const {
    out.clear();
    const double ox = ray.origin.x(), oy = ray.origin.y();
    const double dx = ray.direction.x(), dy = ray.direction.y();

    // Clip the forward half-line [0, inf) against the padded grid box.
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
    const auto clip_axis = [&](double o, double d, double lo, double hi) {
        if (d == 0.0) return o >= lo && o <= hi;
        double ta = (lo - o) / d;
        double tb = (hi - o) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        return true;
    };
    if (!clip_axis(ox, dx, gx0_, gx1_) || !clip_axis(oy, dy, gy0_, gy1_)) return;
    if (t0 > t1) return;

    if (dx == 0.0 && dy == 0.0) {
        // Vertical ray: a single cell column.
        const int cx = std::clamp(static_cast<int>(std::floor((ox - gx0_) / cell_dx_)), 0, nx_ - 1);
        const int cy = std::clamp(static_cast<int>(std::floor((oy - gy0_) / cell_dy_)), 0, ny_ - 1);
        const std::size_t c = static_cast<std::size_t>(cy) * nx_ + cx;
        out.assign(cell_items_.begin() + cell_offsets_[c], cell_items_.begin() + cell_offsets_[c + 1]);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return;
    }

    // Row-span walk: for each grid row the segment crosses, visit the column
    // range it covers there. Conservative (never misses a touched cell).
    const double eps = pad_;
    const double ay = oy + t0 * dy;
    const double by = oy + t1 * dy;
    const double ylo = std::min(ay, by) - eps, yhi = std::max(ay, by) + eps;
    const int r0 = std::clamp(static_cast<int>(std::floor((ylo - gy0_) / cell_dy_)), 0, ny_ - 1);
    const int r1 = std::clamp(static_cast<int>(std::floor((yhi - gy0_) / cell_dy_)), 0, ny_ - 1);

    for (int row = r0; row <= r1; ++row) {
        double u0 = t0, u1 = t1;
        if (dy != 0.0) {
            const double slab_lo = gy0_ + row * cell_dy_ - eps;
            const double slab_hi = gy0_ + (row + 1) * cell_dy_ + eps;
            double ta = (slab_lo - oy) / dy;
            double tb = (slab_hi - oy) / dy;
            if (ta > tb) std::swap(ta, tb);
            u0 = std::max(t0, ta);
            u1 = std::min(t1, tb);
            if (u0 > u1) continue;
        }
        const double xa = ox + u0 * dx, xb = ox + u1 * dx;
        const double xlo = std::min(xa, xb) - eps, xhi = std::max(xa, xb) + eps;
        const int c0 = std::clamp(static_cast<int>(std::floor((xlo - gx0_) / cell_dx_)), 0, nx_ - 1);
        const int c1 = std::clamp(static_cast<int>(std::floor((xhi - gx0_) / cell_dx_)), 0, nx_ - 1);
        for (int col = c0; col <= c1; ++col) {
            const std::size_t c = static_cast<std::size_t>(row) * nx_ + col;
            out.insert(out.end(), cell_items_.begin() + cell_offsets_[c],
                       cell_items_.begin() + cell_offsets_[c + 1]);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

namespace {

std::optional<RayHit> best_hit(const TerrainMesh& mesh, const WorldRay& ray, const int* idx,
                               std::size_t count) {
    const Eigen::Vector3d a = ray.origin;
    const Eigen::Vector3d b = ray.origin + ray.direction;
    std::optional<RayHit> best;
    for (std::size_t k = 0; k < count; ++k) {
        const int ti = idx[k];
        const auto& t = mesh.triangles()[ti];
        const auto sol = intersect_triangle(a, b, mesh.vertices()[t[0]], mesh.vertices()[t[1]],
                                            mesh.vertices()[t[2]]);
        if (!sol) continue;
        if (!(sol->t >= 0.0 && sol->eta >= 0.0 && sol->eta <= 1.0 && sol->mu >= 0.0 &&
              sol->mu <= 1.0 && sol->eta + sol->mu <= 1.0)) {
            continue;
        }
        if (!best || sol->t < best->t) {
            RayHit h;
            h.triangle = ti;
            h.t = sol->t;
            h.eta = sol->eta;
            h.mu = sol->mu;
            h.point = a + (b - a) * sol->t;
            h.fallback = false;
            best = h;
        }
    }
    return best;
}

std::optional<RayHit> with_ground_fallback(const WorldRay& ray, std::optional<RayHit> best) {
    if (best) return best;
    const auto ground = intersect_ground_plane(ray);
    if (!ground) return std::nullopt;
    RayHit h;
    h.triangle = -1;
    h.t = ground->alpha;
    h.eta = 0.0;
    h.mu = 0.0;
    h.point = ground->point;
    h.fallback = true;
    return h;
}

}  // namespace

std::optional<RayHit> cast_ray(const TerrainMesh& mesh, const WorldRay& ray) {
    std::vector<int> candidates;
    mesh.collect_candidates(ray, candidates);
    return with_ground_fallback(ray, best_hit(mesh, ray, candidates.data(), candidates.size()));
}

std::optional<RayHit> cast_ray_linear(const TerrainMesh& mesh, const WorldRay& ray) {
    std::vector<int> all(mesh.triangles().size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return with_ground_fallback(ray, best_hit(mesh, ray, all.data(), all.size()));
}

}  // namespace fragscale
