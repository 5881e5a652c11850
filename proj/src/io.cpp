#include "fragscale/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace fragscale {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

bool parse_double(const std::string& token, double& out) {
    if (token.empty()) return false;
    char* end = nullptr;
    out = std::strtod(token.c_str(), &end);
    return end == token.c_str() + token.size() && std::isfinite(out);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (std::string& s : out) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

// ---- PLY ----

struct PlyProperty {
    std::string name;
    std::string type;
    bool is_list = false;
    std::string count_type;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::size_t header_offset = 0;
    std::vector<PlyProperty> props;
};

int scalar_size(const std::string& type) {
    if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
    if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
    if (type == "int" || type == "int32" || type == "uint" || type == "uint32") return 4;
    if (type == "float" || type == "float32") return 4;
    if (type == "double" || type == "float64") return 8;
    return 0;
}

bool is_float_type(const std::string& type) {
    return type == "float" || type == "float32" || type == "double" || type == "float64";
}

bool is_integer_type(const std::string& type) {
    return scalar_size(type) != 0 && !is_float_type(type);
}

struct PlyReader {
    const std::string& path;
    const std::string& buf;
    std::size_t pos = 0;

    [[noreturn]] void fail_at(std::size_t at, const std::string& what) const {
        fail("point cloud '" + path + "': " + what + " (byte " + std::to_string(at) + ")");
    }

    std::string header_line() {
        const std::size_t start = pos;
        const std::size_t nl = buf.find('\n', pos);
        if (nl == std::string::npos) fail_at(start, "malformed header: unterminated line");
        std::string line = buf.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = nl + 1;
        return line;
    }

    std::string ascii_token() {
        while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
        if (pos >= buf.size()) fail_at(pos, "truncated payload: expected another value");
        const std::size_t start = pos;
        while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
        return buf.substr(start, pos - start);
    }

    double ascii_number() {
        const std::size_t at = pos;
        double v;
        if (!parse_double(ascii_token(), v)) fail_at(at, "malformed payload: expected a number");
        return v;
    }

    const unsigned char* take(std::size_t n) {
        if (pos + n > buf.size()) {
            fail_at(pos, "truncated payload: need " + std::to_string(pos + n - buf.size()) +
                             " more bytes");
        }
        const auto* p = reinterpret_cast<const unsigned char*>(buf.data()) + pos;
        pos += n;
        return p;
    }

    std::uint64_t binary_uint(int size) {
        const unsigned char* p = take(size);
        std::uint64_t v = 0;
        for (int i = 0; i < size; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        return v;
    }

    double binary_float(const std::string& type) {
        if (scalar_size(type) == 4) {
            return std::bit_cast<float>(static_cast<std::uint32_t>(binary_uint(4)));
        }
        return std::bit_cast<double>(binary_uint(8));
    }
};

}  // namespace

PointCloud read_point_cloud(const std::string& path) {
    const std::string buf = slurp(path);
    PlyReader rd{path, buf};

    if (rd.header_line() != "ply") rd.fail_at(0, "malformed header: missing 'ply' magic");
    bool binary = false;
    bool format_seen = false;
    std::vector<PlyElement> elements;

    for (;;) {
        const std::size_t line_at = rd.pos;
        const std::string line = rd.header_line();
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
        if (keyword == "format") {
            std::string kind, version;
            ls >> kind >> version;
            if (kind == "ascii") {
                binary = false;
            } else if (kind == "binary_little_endian") {
                binary = true;
            } else if (kind == "binary_big_endian") {
                rd.fail_at(line_at, "big-endian payload is not supported");
            } else {
                rd.fail_at(line_at, "malformed header: unknown format '" + kind + "'");
            }
            format_seen = true;
        } else if (keyword == "element") {
            PlyElement el;
            long long count = -1;
            ls >> el.name >> count;
            if (el.name.empty() || count < 0 || ls.fail()) {
                rd.fail_at(line_at, "malformed header: bad element declaration");
            }
            el.count = static_cast<std::size_t>(count);
            el.header_offset = line_at;
            elements.push_back(std::move(el));
        } else if (keyword == "property") {
            if (elements.empty()) {
                rd.fail_at(line_at, "malformed header: property before any element");
            }
            PlyProperty prop;
            std::string first;
            ls >> first;
            if (first == "list") {
                prop.is_list = true;
                ls >> prop.count_type >> prop.type >> prop.name;
                if (!is_integer_type(prop.count_type)) {
                    rd.fail_at(line_at, "malformed header: list count type must be integral");
                }
            } else {
                prop.type = first;
                ls >> prop.name;
            }
            if (prop.name.empty() || scalar_size(prop.type) == 0 || ls.fail()) {
                rd.fail_at(line_at, "malformed header: bad property declaration");
            }
            elements.back().props.push_back(std::move(prop));
        } else if (keyword == "end_header") {
            break;
        } else {
            rd.fail_at(line_at, "malformed header: unknown keyword '" + keyword + "'");
        }
    }
    if (!format_seen) rd.fail_at(rd.pos, "malformed header: missing format line");

    const PlyElement* vertex = nullptr;
    for (const PlyElement& el : elements) {
        if (el.name == "vertex") {
            vertex = &el;
            break;
        }
    }
    if (!vertex) rd.fail_at(rd.pos, "missing xyz: no vertex element");
    int xyz_idx[3] = {-1, -1, -1};
    for (std::size_t i = 0; i < vertex->props.size(); ++i) {
        const PlyProperty& p = vertex->props[i];
        if (p.is_list || !is_float_type(p.type)) continue;
        if (p.name == "x") xyz_idx[0] = static_cast<int>(i);
        if (p.name == "y") xyz_idx[1] = static_cast<int>(i);
        if (p.name == "z") xyz_idx[2] = static_cast<int>(i);
    }
    if (xyz_idx[0] < 0 || xyz_idx[1] < 0 || xyz_idx[2] < 0) {
        rd.fail_at(vertex->header_offset, "missing xyz: vertex element lacks float x/y/z properties");
    }

    PointCloud cloud;
    for (const PlyElement& el : elements) {
        const bool capture = &el == vertex;
        if (capture) cloud.points.reserve(el.count);
        for (std::size_t row = 0; row < el.count; ++row) {
            double xyz[3] = {0.0, 0.0, 0.0};
            for (std::size_t pi = 0; pi < el.props.size(); ++pi) {
                const PlyProperty& prop = el.props[pi];
                if (prop.is_list) {
                    std::uint64_t n;
                    if (binary) {
                        n = rd.binary_uint(scalar_size(prop.count_type));
                        rd.take(n * scalar_size(prop.type));
                    } else {
                        const std::size_t at = rd.pos;
                        const double nv = rd.ascii_number();
                        if (nv < 0.0 || nv != std::floor(nv)) {
                            rd.fail_at(at, "malformed payload: bad list count");
                        }
                        n = static_cast<std::uint64_t>(nv);
                        for (std::uint64_t k = 0; k < n; ++k) rd.ascii_token();
                    }
                    continue;
                }
                double value = 0.0;
                if (binary) {
                    if (is_float_type(prop.type)) {
                        value = rd.binary_float(prop.type);
                    } else {
                        rd.take(scalar_size(prop.type));
                    }
                } else {
                    value = rd.ascii_number();
                }
                if (capture) {
                    for (int k = 0; k < 3; ++k) {
                        if (static_cast<int>(pi) == xyz_idx[k]) xyz[k] = value;
                    }
                }
            }
            if (capture) cloud.points.emplace_back(xyz[0], xyz[1], xyz[2]);
        }
    }
    return cloud;
}

void write_point_cloud_ply(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open file '" + path + "' for writing");
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << cloud.points.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\nend_header\n";
    char line[128];
    for (const Eigen::Vector3d& p : cloud.points) {
        std::snprintf(line, sizeof line, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << line;
    }
    if (!out.good()) fail("write failed for '" + path + "'");
}

void write_mesh_ply(const TerrainMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open file '" + path + "' for writing");
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.vertices().size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "element face " << mesh.triangles().size() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    char line[160];
    for (const Eigen::Vector3d& p : mesh.vertices()) {
        std::snprintf(line, sizeof line, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << line;
    }
    for (const auto& t : mesh.triangles()) {
        out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    }
    if (!out.good()) fail("write failed for '" + path + "'");
}

namespace {

[[noreturn]] void fail_line(const std::string& path, std::size_t line_no, const std::string& what) {
    fail("'" + path + "' line " + std::to_string(line_no) + ": " + what);
}

double field_number(const std::string& path, std::size_t line_no, const std::vector<std::string>& f,
                    std::size_t col) {
    if (col >= f.size() || f[col].empty()) {
        fail_line(path, line_no, "column " + std::to_string(col + 1) + ": missing field");
    }
    double v;
    if (!parse_double(f[col], v)) {
        fail_line(path, line_no,
                  "column " + std::to_string(col + 1) + ": expected a number, got '" + f[col] + "'");
    }
    return v;
}

}  // namespace

std::vector<PoseLogEntry> read_pose_log(const std::string& path) {
    const std::vector<std::string> lines = split_lines(slurp(path));
    std::vector<PoseLogEntry> entries;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> f = split_csv(lines[i]);
        if (i == 0 && f.size() >= 2) {
            double probe;
            if (!parse_double(f[1], probe)) continue;  // header line
        }
        if (f.size() != 8 && f.size() != 9 && f.size() != 13 && f.size() != 14) {
            fail_line(path, line_no,
                      "expected 8, 9, 13, or 14 comma-separated fields, got " +
                          std::to_string(f.size()));
        }
        PoseLogEntry entry;
        entry.image_id = f[0];
        if (entry.image_id.empty()) fail_line(path, line_no, "column 1: missing image id");
        const Eigen::Vector3d t(field_number(path, line_no, f, 1), field_number(path, line_no, f, 2),
                                field_number(path, line_no, f, 3));
        if (f.size() <= 9) {
            const double qw = field_number(path, line_no, f, 4);
            const double qx = field_number(path, line_no, f, 5);
            const double qy = field_number(path, line_no, f, 6);
            const double qz = field_number(path, line_no, f, 7);
            const double norm = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
            if (std::abs(norm - 1.0) > 1e-3) {
                fail_line(path, line_no, "quaternion norm drifts beyond 1e-3 from unit");
            }
            entry.pose = CameraPose::from_quaternion(qw, qx, qy, qz, t);
            if (f.size() == 9) {
                entry.timestamp = field_number(path, line_no, f, 8);
                entry.has_timestamp = true;
            }
        } else {
            Eigen::Matrix3d m;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    m(r, c) = field_number(path, line_no, f, 4 + 3 * r + c);
            if (m.determinant() < 0.0) {
                fail_line(path, line_no, "rotation matrix is improper (negative determinant)");
            }
            const Eigen::Matrix3d r = nearest_rotation(m);
            if ((m - r).cwiseAbs().maxCoeff() > 1e-3) {
                fail_line(path, line_no, "rotation matrix drifts beyond 1e-3 from orthonormal");
            }
            entry.pose = CameraPose(r, t);
            if (f.size() == 14) {
                entry.timestamp = field_number(path, line_no, f, 13);
                entry.has_timestamp = true;
            }
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

SieveSeries read_sieve_csv(const std::string& path) {
    const std::vector<std::string> lines = split_lines(slurp(path));
    SieveSeries series;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> f = split_csv(lines[i]);
        if (i == 0 && !f.empty()) {
            double probe;
            if (!parse_double(f[0], probe)) continue;  // header line
        }
        if (f.size() != 2) {
            fail_line(path, i + 1, "expected 2 comma-separated fields, got " + std::to_string(f.size()));
        }
        SievePoint p;
        p.size_mm = field_number(path, i + 1, f, 0);
        p.percent_passing = field_number(path, i + 1, f, 1);
        series.push_back(p);
    }
    return series;
}

std::vector<Group> read_groups_csv(const std::string& path) {
    const std::vector<std::string> lines = split_lines(slurp(path));
    std::vector<Group> groups;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> f = split_csv(lines[i]);
        if (i == 0 && f.size() >= 2) {
            double probe;
            if (!parse_double(f[1], probe)) continue;  // header line
        }
        if (f.size() != 2) {
            fail_line(path, i + 1, "expected 2 comma-separated fields, got " + std::to_string(f.size()));
        }
        if (f[0].empty()) fail_line(path, i + 1, "column 1: missing group id");
        const double value = field_number(path, i + 1, f, 1);
        auto [it, inserted] = index.try_emplace(f[0], groups.size());
        if (inserted) groups.push_back(Group{f[0], {}});
        groups[it->second].values.push_back(value);
    }
    return groups;
}

void write_scale_report(const std::vector<ImageScaleRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open file '" + path + "' for writing");
    out << "image_id,top_scale_px_per_m,bottom_scale_px_per_m,fallback_used,"
        << "tl_x,tl_y,tl_z,tr_x,tr_y,tr_z,bl_x,bl_y,bl_z,br_x,br_y,br_z\n";
    char num[64];
    for (const ImageScaleRecord& rec : records) {
        out << rec.image_id;
        std::snprintf(num, sizeof num, ",%.9g,%.9g,%d", rec.top_scale, rec.bottom_scale,
                      rec.any_fallback ? 1 : 0);
        out << num;
        for (const RayHit& corner : rec.corners) {
            std::snprintf(num, sizeof num, ",%.9g,%.9g,%.9g", corner.point.x(), corner.point.y(),
                          corner.point.z());
            out << num;
        }
        out << "\n";
    }
    if (!out.good()) fail("write failed for '" + path + "'");
}

Config Config::from_file(const std::string& path) { return from_string(slurp(path), path); }

Config Config::from_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    const std::vector<std::string> lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const std::size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            fail_line(origin, i + 1, "expected key=value");
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto trim = [](std::string& s) {
            const std::size_t sb = s.find_first_not_of(" \t");
            const std::size_t se = s.find_last_not_of(" \t");
            s = sb == std::string::npos ? std::string() : s.substr(sb, se - sb + 1);
        };
        trim(key);
        trim(value);
        if (key.empty()) fail_line(origin, i + 1, "empty key");
        cfg.set(key, value);
    }
    return cfg;
}

const std::string* Config::find(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return &v;
    }
    return nullptr;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

void Config::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

std::string Config::get_string(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) fail("config " + origin_ + ": missing key '" + key + "'");
    return *v;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

double Config::get_double(const std::string& key) const {
    const std::string s = get_string(key);
    double v;
    if (!parse_double(s, v)) fail("config " + origin_ + ": key '" + key + "' is not a number");
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
    const double v = get_double(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
        fail("config " + origin_ + ": key '" + key + "' is not an integer");
    }
    return i;
}

int Config::get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}

}  // namespace fragscale
