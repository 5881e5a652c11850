#include "fragscale/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace fragscale {
namespace {

// Predicates evaluated in long double with a rounding-error bound; results
// within the bound are reported as exact ties (0). Ties never enlarge a
// cavity, so cocircular configurations resolve by insertion order.
constexpr long double kLongDoubleEps = 1.0842e-19L;
constexpr long double kOrientEps = 16.0L * kLongDoubleEps;
constexpr long double kIncircleEps = 64.0L * kLongDoubleEps;

int orient2d(double ax, double ay, double bx, double by, double cx, double cy) {
    const long double abx = static_cast<long double>(bx) - ax;
    const long double aby = static_cast<long double>(by) - ay;
    const long double acx = static_cast<long double>(cx) - ax;
    const long double acy = static_cast<long double>(cy) - ay;
    const long double det = abx * acy - aby * acx;
    const long double mag = std::abs(abx * acy) + std::abs(aby * acx);
    if (std::abs(det) <= mag * kOrientEps) return 0;
    return det > 0 ? 1 : -1;
}

// Positive when d is strictly inside the circumcircle of CCW triangle (a,b,c).
int incircle(double ax, double ay, double bx, double by, double cx, double cy, double dx,
             double dy) {
    const long double adx = static_cast<long double>(ax) - dx;
    const long double ady = static_cast<long double>(ay) - dy;
    const long double bdx = static_cast<long double>(bx) - dx;
    const long double bdy = static_cast<long double>(by) - dy;
    const long double cdx = static_cast<long double>(cx) - dx;
    const long double cdy = static_cast<long double>(cy) - dy;

    const long double ad2 = adx * adx + ady * ady;
    const long double bd2 = bdx * bdx + bdy * bdy;
    const long double cd2 = cdx * cdx + cdy * cdy;

    const long double bxcy = bdx * cdy;
    const long double bycx = bdy * cdx;
    const long double axcy = adx * cdy;
    const long double aycx = ady * cdx;
    const long double axby = adx * bdy;
    const long double aybx = ady * bdx;

    const long double det = ad2 * (bxcy - bycx) - bd2 * (axcy - aycx) + cd2 * (axby - aybx);
    const long double mag = ad2 * (std::abs(bxcy) + std::abs(bycx)) +
                            bd2 * (std::abs(axcy) + std::abs(aycx)) +
                            cd2 * (std::abs(axby) + std::abs(aybx));
    if (std::abs(det) <= mag * kIncircleEps) return 0;
    return det > 0 ? 1 : -1;
}

struct Tri {
    std::array<int, 3> v;  // CCW
    std::array<int, 3> n;  // neighbor across the edge opposite v[i], -1 if none
    bool alive = true;
};

class Triangulator {
  public:
    explicit Triangulator(const std::vector<Eigen::Vector3d>& pts) {
        const std::size_t n = pts.size();
        xs_.resize(n + 3);
        ys_.resize(n + 3);
        for (std::size_t i = 0; i < n; ++i) {
            xs_[i] = pts[i].x();
            ys_[i] = pts[i].y();
        }
        double minx = xs_[0], maxx = xs_[0], miny = ys_[0], maxy = ys_[0];
        for (std::size_t i = 1; i < n; ++i) {
            minx = std::min(minx, xs_[i]);
            maxx = std::max(maxx, xs_[i]);
            miny = std::min(miny, ys_[i]);
            maxy = std::max(maxy, ys_[i]);
        }
        const double cx = 0.5 * (minx + maxx);
        const double cy = 0.5 * (miny + maxy);
        const double ext = std::max({maxx - minx, maxy - miny, 1e-30});
        const double m = 256.0 * ext;
        const int s0 = static_cast<int>(n);
        xs_[s0] = cx - 3.0 * m;
        ys_[s0] = cy - m;
        xs_[s0 + 1] = cx + 3.0 * m;
        ys_[s0 + 1] = cy - m;
        xs_[s0 + 2] = cx;
        ys_[s0 + 2] = cy + 3.0 * m;
        tris_.push_back({{s0, s0 + 1, s0 + 2}, {-1, -1, -1}, true});
        hint_ = 0;
        num_points_ = static_cast<int>(n);
    }

    void insert_all() {
        for (int p = 0; p < num_points_; ++p) insert(p);
    }

    std::vector<std::array<int, 3>> real_triangles() const {
        std::vector<std::array<int, 3>> out;
        for (const Tri& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= num_points_ || t.v[1] >= num_points_ || t.v[2] >= num_points_) continue;
            out.push_back(t.v);
        }
        return out;
    }

  private:
    std::vector<double> xs_, ys_;
    std::vector<Tri> tris_;
    std::vector<int> bad_stack_;
    std::vector<int> bad_list_;
    // generation-stamped marks: 0 unseen, 1 queued/rejected, 2 in cavity
    std::vector<std::uint32_t> mark_gen_;
    std::vector<char> mark_state_;
    std::uint32_t gen_ = 0;
    int hint_ = 0;
    int num_points_ = 0;

    char mark(int i) const {
        return mark_gen_[i] == gen_ ? mark_state_[i] : char(0);
    }
    void set_mark(int i, char s) {
        mark_gen_[i] = gen_;
        mark_state_[i] = s;
    }

    int edge_orient(const Tri& t, int e, double px, double py) const {
        const int u = t.v[(e + 1) % 3];
        const int v = t.v[(e + 2) % 3];
        return orient2d(xs_[u], ys_[u], xs_[v], ys_[v], px, py);
    }

    int locate(double px, double py) const {
        int cur = hint_;
        std::size_t steps = 0;
        const std::size_t max_steps = 4 * tris_.size() + 64;
        while (steps++ < max_steps) {
            bool moved = false;
            for (int e = 0; e < 3; ++e) {
                if (edge_orient(tris_[cur], e, px, py) < 0) {
                    const int nb = tris_[cur].n[e];
                    if (nb < 0) break;  // outside the super triangle; fall through to scan
                    cur = nb;
                    moved = true;
                    break;
                }
            }
            if (!moved) return cur;
        }
        // Walk failed to settle; scan every live triangle.
        for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
            const Tri& t = tris_[i];
            if (!t.alive) continue;
            if (edge_orient(t, 0, px, py) >= 0 && edge_orient(t, 1, px, py) >= 0 &&
                edge_orient(t, 2, px, py) >= 0) {
                return i;
            }
        }
        throw std::runtime_error("delaunay: point location failed");
    }

    bool circumcircle_contains(int ti, double px, double py) const {
        const Tri& t = tris_[ti];
        return incircle(xs_[t.v[0]], ys_[t.v[0]], xs_[t.v[1]], ys_[t.v[1]], xs_[t.v[2]],
                        ys_[t.v[2]], px, py) > 0;
    }

    void insert(int p) {
        const double px = xs_[p];
        const double py = ys_[p];
        const int seed = locate(px, py);

        ++gen_;
        mark_gen_.resize(tris_.size() + 8, 0);
        mark_state_.resize(tris_.size() + 8, 0);
        bad_stack_.clear();
        bad_list_.clear();
        bad_stack_.push_back(seed);
        set_mark(seed, 1);
        while (!bad_stack_.empty()) {
            const int ti = bad_stack_.back();
            bad_stack_.pop_back();
            if (!circumcircle_contains(ti, px, py)) continue;
            bad_list_.push_back(ti);
            set_mark(ti, 2);
            for (int e = 0; e < 3; ++e) {
                const int nb = tris_[ti].n[e];
                if (nb >= 0 && mark(nb) == 0) {
                    set_mark(nb, 1);
                    bad_stack_.push_back(nb);
                }
            }
        }
        // The located triangle always has p inside its circumcircle; an empty
        // cavity means p effectively coincides with an existing vertex.
        if (bad_list_.empty()) {
            throw std::runtime_error("delaunay: empty cavity (duplicate point after dedup?)");
        }

        // Directed boundary edges (u -> v) of the cavity, interior on the left.
        struct BoundaryEdge {
            int v;
            int outside;
        };
        std::unordered_map<int, BoundaryEdge> ring;
        ring.reserve(bad_list_.size() * 2 + 4);
        std::size_t edge_count = 0;
        for (const int ti : bad_list_) {
            for (int e = 0; e < 3; ++e) {
                const int nb = tris_[ti].n[e];
                if (nb >= 0 && mark(nb) == 2) continue;
                const int u = tris_[ti].v[(e + 1) % 3];
                const int v = tris_[ti].v[(e + 2) % 3];
                ring[u] = {v, nb};
                ++edge_count;
            }
        }
        if (edge_count != ring.size()) {
            throw std::runtime_error("delaunay: non-simple insertion cavity");
        }
        for (const int ti : bad_list_) tris_[ti].alive = false;

        std::unordered_map<int, int> tri_starting_at;
        tri_starting_at.reserve(ring.size() * 2);
        for (const auto& [u, edge] : ring) {
            const int ni = static_cast<int>(tris_.size());
            tris_.push_back({{u, edge.v, p}, {-1, -1, edge.outside}, true});
            tri_starting_at[u] = ni;
            if (edge.outside >= 0) {
                Tri& out = tris_[edge.outside];
                for (int e = 0; e < 3; ++e) {
                    if (out.v[(e + 1) % 3] == edge.v && out.v[(e + 2) % 3] == u) {
                        out.n[e] = ni;
                        break;
                    }
                }
            }
        }
        for (const auto& [u, edge] : ring) {
            const int ti = tri_starting_at[u];
            const int next = tri_starting_at[edge.v];
            tris_[ti].n[0] = next;    // shared edge (v, p)
            tris_[next].n[1] = ti;    // same edge seen from the other triangle
        }
        hint_ = static_cast<int>(tris_.size()) - 1;
    }
};

}  // namespace

namespace detail {

std::vector<Eigen::Vector3d> dedup_xy_keep_max_z(const std::vector<Eigen::Vector3d>& points,
                                                 double tolerance) {
    const std::size_t n = points.size();
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (points[a].x() != points[b].x()) return points[a].x() < points[b].x();
        if (points[a].y() != points[b].y()) return points[a].y() < points[b].y();
        return points[a].z() < points[b].z();
    });

    // keeper[i] = index of the representative of i's duplicate group
    std::vector<int> keeper(n);
    for (std::size_t i = 0; i < n; ++i) keeper[i] = static_cast<int>(i);
    const double tol2 = tolerance * tolerance;
    for (std::size_t i = 0; i < n; ++i) {
        const int a = order[i];
        if (keeper[a] != a) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            const int b = order[j];
            if (points[b].x() - points[a].x() > tolerance) break;
            if (keeper[b] != b) continue;
            const double dx = points[b].x() - points[a].x();
            const double dy = points[b].y() - points[a].y();
            if (dx * dx + dy * dy <= tol2) keeper[b] = a;
        }
    }

    std::vector<double> group_z(n, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        group_z[keeper[i]] = std::max(group_z[keeper[i]], points[i].z());
    }
    std::vector<Eigen::Vector3d> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (keeper[i] != static_cast<int>(i)) continue;
        out.emplace_back(points[i].x(), points[i].y(), group_z[i]);
    }
    return out;
}

}  // namespace detail

TerrainMesh triangulate(const PointCloud& cloud, const MeshOptions& options) {
    for (const Eigen::Vector3d& p : cloud.points) {
        if (!p.allFinite()) throw std::invalid_argument("triangulate: non-finite point");
    }
    std::vector<Eigen::Vector3d> verts =
        detail::dedup_xy_keep_max_z(cloud.points, options.dedup_tolerance);
    if (verts.size() < 3) {
        throw std::invalid_argument("triangulate: degenerate input, fewer than 3 distinct points");
    }
    bool has_area = false;
    for (std::size_t k = 2; k < verts.size() && !has_area; ++k) {
        has_area = orient2d(verts[0].x(), verts[0].y(), verts[1].x(), verts[1].y(), verts[k].x(),
                            verts[k].y()) != 0;
    }
    if (!has_area) {
        throw std::invalid_argument("triangulate: degenerate input, all points collinear in xy");
    }

    Triangulator tr(verts);
    tr.insert_all();
    return TerrainMesh(std::move(verts), tr.real_triangles(), options.grid_resolution);
}

}  // namespace fragscale
