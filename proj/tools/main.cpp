#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fragscale/camera.hpp"
#include "fragscale/io.hpp"
#include "fragscale/mesh.hpp"
#include "fragscale/scale.hpp"
#include "fragscale/stats.hpp"
#include "fragscale/synth.hpp"

namespace {

using namespace fragscale;

constexpr double kPi = 3.14159265358979323846;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flag > config > default; a setting with no default must come from one of them.
struct Merged {
    const Config& cfg;

    std::string path(const CLI::Option* opt, const std::string& flag_value, const char* key) const {
        if (opt->count() > 0) return flag_value;
        if (cfg.has(key)) return cfg.get_string(key);
        throw UsageError(std::string("missing required setting '") + key + "' (config key or " +
                         opt->get_name() + ")");
    }

    double number(const CLI::Option* opt, double flag_value, const char* key,
                  std::optional<double> fallback = std::nullopt) const {
        if (opt->count() > 0) return flag_value;
        if (cfg.has(key)) return cfg.get_double(key);
        if (fallback) return *fallback;
        throw UsageError(std::string("missing required setting '") + key + "' (config key or " +
                         opt->get_name() + ")");
    }

    int integer(const CLI::Option* opt, int flag_value, const char* key,
                std::optional<int> fallback = std::nullopt) const {
        if (opt->count() > 0) return flag_value;
        if (cfg.has(key)) return cfg.get_int(key);
        if (fallback) return *fallback;
        throw UsageError(std::string("missing required setting '") + key + "' (config key or " +
                         opt->get_name() + ")");
    }
};

void print_kv(const char* key, double value) {
    std::printf("%s=%.17g\n", key, value);
}

struct MeshFlags {
    std::string config, cloud, mesh_out;
    double dedup_tol = 1e-9;
    int grid_res = 0;
    CLI::Option *cloud_opt, *dedup_opt, *grid_opt, *mesh_out_opt;
};

struct ScaleFlags {
    std::string config, cloud, poses, output;
    double fx = 0, fy = 0, cx = 0, cy = 0, skew = 0;
    int width = 0, height = 0;
    double dedup_tol = 1e-9;
    int grid_res = 0;
    CLI::Option *cloud_opt, *poses_opt, *output_opt;
    CLI::Option *fx_opt, *fy_opt, *cx_opt, *cy_opt, *skew_opt, *width_opt, *height_opt;
    CLI::Option *dedup_opt, *grid_opt;
};

struct FitFlags {
    std::string config, sieve;
    CLI::Option* sieve_opt;
};

struct AnovaFlags {
    std::string config, groups;
    double alpha = 0.05;
    CLI::Option *groups_opt, *alpha_opt;
};

struct SynthFlags {
    std::string config, cloud_out, poses_out;
    std::uint64_t seed = 1;
    int density = 0;
    CLI::Option *cloud_out_opt, *poses_out_opt, *density_opt;
};

void add_camera_flags(CLI::App* sub, ScaleFlags& f) {
    f.fx_opt = sub->add_option("--fx", f.fx, "focal length x (px)");
    f.fy_opt = sub->add_option("--fy", f.fy, "focal length y (px)");
    f.cx_opt = sub->add_option("--cx", f.cx, "principal point x (px)");
    f.cy_opt = sub->add_option("--cy", f.cy, "principal point y (px)");
    f.skew_opt = sub->add_option("--skew", f.skew, "axis skew (px)");
    f.width_opt = sub->add_option("--width", f.width, "image width (px)");
    f.height_opt = sub->add_option("--height", f.height, "image height (px)");
}

CameraIntrinsics merged_intrinsics(const Merged& m, const ScaleFlags& f) {
    return CameraIntrinsics(m.number(f.fx_opt, f.fx, "camera.fx"),
                            m.number(f.fy_opt, f.fy, "camera.fy"),
                            m.number(f.cx_opt, f.cx, "camera.cx"),
                            m.number(f.cy_opt, f.cy, "camera.cy"),
                            m.number(f.skew_opt, f.skew, "camera.s", 0.0));
}

TerrainMesh load_mesh(const std::string& cloud_path, double dedup_tol, int grid_res) {
    const PointCloud cloud = read_point_cloud(cloud_path);
    MeshOptions options;
    options.dedup_tolerance = dedup_tol;
    options.grid_resolution = grid_res;
    return triangulate(cloud, options);
}

int run_mesh(const Config& cfg, const MeshFlags& f) {
    const Merged m{cfg};
    const std::string cloud_path = m.path(f.cloud_opt, f.cloud, "cloud");
    const double dedup = m.number(f.dedup_opt, f.dedup_tol, "mesh.dedup_tolerance", 1e-9);
    const int grid = m.integer(f.grid_opt, f.grid_res, "mesh.grid_resolution", 0);
    const TerrainMesh mesh = load_mesh(cloud_path, dedup, grid);

    std::printf("vertices=%zu\n", mesh.vertices().size());
    std::printf("triangles=%zu\n", mesh.triangles().size());
    std::printf("grid_resolution=%d\n", mesh.grid_resolution());
    Eigen::Vector3d lo = mesh.vertices().front(), hi = lo;
    for (const Eigen::Vector3d& v : mesh.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    std::printf("bbox_min=%.9g %.9g %.9g\n", lo.x(), lo.y(), lo.z());
    std::printf("bbox_max=%.9g %.9g %.9g\n", hi.x(), hi.y(), hi.z());

    std::string mesh_out = f.mesh_out;
    if (f.mesh_out_opt->count() == 0) mesh_out = cfg.get_string("mesh.out", "");
    if (!mesh_out.empty()) write_mesh_ply(mesh, mesh_out);
    return 0;
}

std::vector<ImageGeometry> geometries_from_log(const std::string& poses_path,
                                               const CameraIntrinsics& intrinsics, int width,
                                               int height) {
    std::vector<ImageGeometry> images;
    for (const PoseLogEntry& entry : read_pose_log(poses_path)) {
        ImageGeometry g;
        g.image_id = entry.image_id;
        g.width = width;
        g.height = height;
        g.intrinsics = intrinsics;
        g.pose = entry.pose;
        images.push_back(std::move(g));
    }
    return images;
}

int run_scale(const Config& cfg, const ScaleFlags& f) {
    const Merged m{cfg};
    const std::string cloud_path = m.path(f.cloud_opt, f.cloud, "cloud");
    const std::string poses_path = m.path(f.poses_opt, f.poses, "poses");
    const std::string output_path = m.path(f.output_opt, f.output, "output");
    const CameraIntrinsics intrinsics = merged_intrinsics(m, f);
    const int width = m.integer(f.width_opt, f.width, "image.width");
    const int height = m.integer(f.height_opt, f.height, "image.height");
    const double dedup = m.number(f.dedup_opt, f.dedup_tol, "mesh.dedup_tolerance", 1e-9);
    const int grid = m.integer(f.grid_opt, f.grid_res, "mesh.grid_resolution", 0);

    const TerrainMesh mesh = load_mesh(cloud_path, dedup, grid);
    const auto images = geometries_from_log(poses_path, intrinsics, width, height);
    const BatchScaleResult result = batch_scales(images, mesh);
    write_scale_report(result.records, output_path);
    for (const ScaleFailure& failure : result.failures) {
        std::cerr << "error: " << failure.message << "\n";
    }
    return result.failures.empty() ? 0 : 1;
}

int run_groundplane(const Config& cfg, const ScaleFlags& f) {
    const Merged m{cfg};
    const std::string poses_path = m.path(f.poses_opt, f.poses, "poses");
    const std::string output_path = m.path(f.output_opt, f.output, "output");
    const CameraIntrinsics intrinsics = merged_intrinsics(m, f);
    const int width = m.integer(f.width_opt, f.width, "image.width");
    const int height = m.integer(f.height_opt, f.height, "image.height");

    std::vector<ImageScaleRecord> records;
    std::vector<std::string> failures;
    for (const ImageGeometry& g : geometries_from_log(poses_path, intrinsics, width, height)) {
        ImageScaleRecord rec;
        rec.image_id = g.image_id;
        rec.any_fallback = true;
        bool ok = true;
        const auto pixels = corner_pixels(g.width, g.height);
        for (int k = 0; k < 4 && ok; ++k) {
            const WorldRay ray = camera_ray_to_world(g.pose, pixel_to_camera_ray(g.intrinsics, pixels[k]));
            const auto hit = intersect_ground_plane(ray);
            if (!hit) {
                failures.push_back("image '" + g.image_id + "': corner ray parallel to ground plane");
                ok = false;
                break;
            }
            rec.corners[k].triangle = -1;
            rec.corners[k].t = hit->alpha;
            rec.corners[k].point = hit->point;
            rec.corners[k].fallback = true;
        }
        if (!ok) continue;
        rec.top_scale = edge_scale(g.width, rec.corners[0].point, rec.corners[1].point);
        rec.bottom_scale = edge_scale(g.width, rec.corners[2].point, rec.corners[3].point);
        rec.left_scale = edge_scale(g.height, rec.corners[0].point, rec.corners[2].point);
        rec.right_scale = edge_scale(g.height, rec.corners[1].point, rec.corners[3].point);
        records.push_back(std::move(rec));
    }
    write_scale_report(records, output_path);
    for (const std::string& msg : failures) std::cerr << "error: " << msg << "\n";
    return failures.empty() ? 0 : 1;
}

int run_fit(const Config& cfg, const FitFlags& f) {
    const Merged m{cfg};
    const std::string sieve_path = m.path(f.sieve_opt, f.sieve, "sieve");
    const SieveSeries raw = read_sieve_csv(sieve_path);
    SieveSeries usable;
    for (const SievePoint& p : raw) {
        if (p.percent_passing > 0.0 && p.percent_passing < 100.0) usable.push_back(p);
    }
    if (usable.size() != raw.size()) {
        std::cerr << "note: ignored " << raw.size() - usable.size()
                  << " point(s) with percent passing outside (0, 100)\n";
    }
    const SwebrecFitResult result = fit_swebrec(usable);
    print_kv("x_max", result.fit.x_max);
    print_kv("x_50", result.fit.x_50);
    print_kv("b", result.fit.b);
    std::printf("converged=%d\n", result.converged ? 1 : 0);
    std::printf("iterations=%d\n", result.iterations);
    print_kv("residual_norm", result.residual_norm);
    std::printf("size_mm,residual_percent\n");
    for (const ResidualPoint& r : percent_error_residuals(usable, result.fit)) {
        std::printf("%.9g,%.9g\n", r.size_mm, r.residual_percent);
    }
    if (!result.converged) {
        std::cerr << "error: fit failure (no convergence within iteration budget)\n";
        return 1;
    }
    return 0;
}

int run_anova(const Config& cfg, const AnovaFlags& f) {
    const Merged m{cfg};
    const std::string groups_path = m.path(f.groups_opt, f.groups, "groups");
    const double alpha = m.number(f.alpha_opt, f.alpha, "anova.alpha", 0.05);
    const AnovaTable table = one_way_anova(read_groups_csv(groups_path), alpha);
    std::printf("factor_df=%d\n", table.factor_df);
    print_kv("factor_ss", table.factor_ss);
    print_kv("factor_ms", table.factor_ms);
    std::printf("residual_df=%d\n", table.residual_df);
    print_kv("residual_ss", table.residual_ss);
    print_kv("residual_ms", table.residual_ms);
    print_kv("f", table.f_statistic);
    print_kv("critical", table.critical_value);
    print_kv("alpha", table.alpha);
    std::printf("reject=%d\n", table.reject ? 1 : 0);
    return table.reject ? 3 : 0;
}

SyntheticSurface surface_from_config(const Config& cfg, int density_override) {
    const std::string kind = cfg.get_string("surface.kind", "plane");
    Region region;
    region.x0 = cfg.get_double("region.x0", 0.0);
    region.y0 = cfg.get_double("region.y0", 0.0);
    region.x1 = cfg.get_double("region.x1", 1.0);
    region.y1 = cfg.get_double("region.y1", 1.0);
    const int density = density_override > 0 ? density_override : cfg.get_int("density", 16);

    SyntheticSurface surface;
    if (kind == "plane") {
        PlaneSurface p;
        p.a = cfg.get_double("surface.a", 0.0);
        p.b = cfg.get_double("surface.b", 0.0);
        p.c = cfg.get_double("surface.c", 0.0);
        surface = SyntheticSurface::make_plane(p, region, density);
    } else if (kind == "sinusoid") {
        SinusoidSurface s;
        s.amplitude = cfg.get_double("surface.amplitude", 1.0);
        s.wavelength = cfg.get_double("surface.wavelength", 1.0);
        s.base = cfg.get_double("surface.base", 0.0);
        surface = SyntheticSurface::make_sinusoid(s, region, density);
    } else {
        throw UsageError("surface.kind must be 'plane' or 'sinusoid'");
    }
    surface.jitter = cfg.get_double("jitter", 0.25);
    surface.noise_sigma = cfg.get_double("noise_sigma", 0.0);
    return surface;
}

int run_synth(const Config& cfg, const SynthFlags& f) {
    const SyntheticSurface surface =
        surface_from_config(cfg, f.density_opt->count() > 0 ? f.density : 0);
    const PointCloud cloud = sample_cloud(surface, f.seed);
    std::printf("points=%zu\n", cloud.points.size());

    std::string cloud_out = f.cloud_out;
    if (f.cloud_out_opt->count() == 0) cloud_out = cfg.get_string("cloud_out", "");
    if (!cloud_out.empty()) write_point_cloud_ply(cloud, cloud_out);

    const bool has_camera = cfg.has("camera.fx");
    if (!has_camera) return 0;

    const CameraIntrinsics intrinsics(cfg.get_double("camera.fx"), cfg.get_double("camera.fy"),
                                      cfg.get_double("camera.cx"), cfg.get_double("camera.cy"),
                                      cfg.get_double("camera.s", 0.0));
    const Eigen::Vector3d position(cfg.get_double("camera.x"), cfg.get_double("camera.y"),
                                   cfg.get_double("camera.z"));
    const double tilt = cfg.get_double("camera.tilt_deg", 90.0) * kPi / 180.0;
    const CameraPose pose = make_tilted_pose(position, tilt);

    std::string poses_out = f.poses_out;
    if (f.poses_out_opt->count() == 0) poses_out = cfg.get_string("poses_out", "");
    if (!poses_out.empty()) {
        std::ofstream out(poses_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open file '" + poses_out + "' for writing");
        char line[512];
        const Eigen::Matrix3d& r = pose.rotation();
        std::snprintf(line, sizeof line,
                      "synth000,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g\n",
                      position.x(), position.y(), position.z(), r(0, 0), r(0, 1), r(0, 2), r(1, 0),
                      r(1, 1), r(1, 2), r(2, 0), r(2, 1), r(2, 2));
        out << line;
        if (!out.good()) throw std::runtime_error("write failed for '" + poses_out + "'");
    }

    if (surface.kind == SyntheticSurface::Kind::plane) {
        ImageGeometry g;
        g.image_id = "synth000";
        g.width = cfg.get_int("image.width");
        g.height = cfg.get_int("image.height");
        g.intrinsics = intrinsics;
        g.pose = pose;
        const OracleScales oracle = oracle_scale(surface.plane, g);
        print_kv("oracle_top", oracle.top);
        print_kv("oracle_bottom", oracle.bottom);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"photogrammetric image-scale toolkit"};
    app.require_subcommand(1);

    MeshFlags mesh_f;
    ScaleFlags scale_f, ground_f;
    FitFlags fit_f;
    AnovaFlags anova_f;
    SynthFlags synth_f;

    CLI::App* mesh_cmd = app.add_subcommand("mesh", "triangulate a point cloud and report stats");
    mesh_cmd->add_option("--config", mesh_f.config, "config file");
    mesh_f.cloud_opt = mesh_cmd->add_option("--cloud", mesh_f.cloud, "input PLY point cloud");
    mesh_f.dedup_opt = mesh_cmd->add_option("--dedup-tolerance", mesh_f.dedup_tol, "xy merge tolerance");
    mesh_f.grid_opt = mesh_cmd->add_option("--grid-resolution", mesh_f.grid_res, "index cells per axis");
    mesh_f.mesh_out_opt = mesh_cmd->add_option("--mesh-out", mesh_f.mesh_out, "write triangulated mesh PLY");

    CLI::App* scale_cmd = app.add_subcommand("scale", "corner-ray scales against the terrain mesh");
    scale_cmd->add_option("--config", scale_f.config, "config file");
    scale_f.cloud_opt = scale_cmd->add_option("--cloud", scale_f.cloud, "input PLY point cloud");
    scale_f.poses_opt = scale_cmd->add_option("--poses", scale_f.poses, "camera pose CSV");
    scale_f.output_opt = scale_cmd->add_option("--output", scale_f.output, "scale report CSV");
    add_camera_flags(scale_cmd, scale_f);
    scale_f.dedup_opt = scale_cmd->add_option("--dedup-tolerance", scale_f.dedup_tol, "xy merge tolerance");
    scale_f.grid_opt = scale_cmd->add_option("--grid-resolution", scale_f.grid_res, "index cells per axis");

    CLI::App* ground_cmd =
        app.add_subcommand("groundplane-scale", "z=0 fallback scales from poses alone");
    ground_cmd->add_option("--config", ground_f.config, "config file");
    ground_f.poses_opt = ground_cmd->add_option("--poses", ground_f.poses, "camera pose CSV");
    ground_f.output_opt = ground_cmd->add_option("--output", ground_f.output, "scale report CSV");
    add_camera_flags(ground_cmd, ground_f);

    CLI::App* fit_cmd = app.add_subcommand("fit", "fit the passing curve to sieve data");
    fit_cmd->add_option("--config", fit_f.config, "config file");
    fit_f.sieve_opt = fit_cmd->add_option("--sieve", fit_f.sieve, "sieve CSV (size_mm,percent_passing)");

    CLI::App* anova_cmd = app.add_subcommand("anova", "one-way ANOVA over grouped observations");
    anova_cmd->add_option("--config", anova_f.config, "config file");
    anova_f.groups_opt = anova_cmd->add_option("--groups", anova_f.groups, "groups CSV (group_id,value)");
    anova_f.alpha_opt = anova_cmd->add_option("--alpha", anova_f.alpha, "significance level");

    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic surface cloud");
    synth_cmd->add_option("--config", synth_f.config, "config file");
    synth_cmd->add_option("--seed", synth_f.seed, "sampling seed");
    synth_f.density_opt = synth_cmd->add_option("--density", synth_f.density, "samples per axis");
    synth_f.cloud_out_opt = synth_cmd->add_option("--cloud-out", synth_f.cloud_out, "write cloud PLY");
    synth_f.poses_out_opt = synth_cmd->add_option("--poses-out", synth_f.poses_out, "write pose CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const auto load_config = [](const std::string& path) {
            return path.empty() ? Config::from_string("", "<none>") : Config::from_file(path);
        };
        if (mesh_cmd->parsed()) return run_mesh(load_config(mesh_f.config), mesh_f);
        if (scale_cmd->parsed()) return run_scale(load_config(scale_f.config), scale_f);
        if (ground_cmd->parsed()) return run_groundplane(load_config(ground_f.config), ground_f);
        if (fit_cmd->parsed()) return run_fit(load_config(fit_f.config), fit_f);
        if (anova_cmd->parsed()) return run_anova(load_config(anova_f.config), anova_f);
        if (synth_cmd->parsed()) return run_synth(load_config(synth_f.config), synth_f);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
