#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fragscale/camera.hpp"
#include "fragscale/mesh.hpp"
#include "fragscale/scale.hpp"
#include "fragscale/stats.hpp"

namespace fragscale {

/// PLY point cloud, ASCII or binary little-endian. The vertex element must
/// carry scalar float32/float64 x, y, z; other properties and elements are
/// skipped.
PointCloud read_point_cloud(const std::string& path);

void write_point_cloud_ply(const PointCloud& cloud, const std::string& path);
void write_mesh_ply(const TerrainMesh& mesh, const std::string& path);

struct PoseLogEntry {
    std::string image_id;
    CameraPose pose = CameraPose::identity();
    double timestamp = 0.0;
    bool has_timestamp = false;
};

/// Comma-separated pose log: id,x,y,z,qw,qx,qy,qz with optional trailing
/// timestamp, or id,x,y,z plus 9 rotation-matrix entries (row major), again
/// with optional timestamp. Layout is picked per line by field count; an
/// optional header line is skipped.
std::vector<PoseLogEntry> read_pose_log(const std::string& path);

SieveSeries read_sieve_csv(const std::string& path);
std::vector<Group> read_groups_csv(const std::string& path);

void write_scale_report(const std::vector<ImageScaleRecord>& records, const std::string& path);

/// Flat key=value configuration with `#` comments and dotted key namespaces.
class Config {
  public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text, const std::string& origin = "<config>");

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  private:
    std::string origin_;
    std::vector<std::pair<std::string, std::string>> entries_;

    const std::string* find(const std::string& key) const;
};

}  // namespace fragscale
