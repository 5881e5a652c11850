#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fragscale/camera.hpp"
#include "fragscale/io.hpp"
#include "fragscale/mesh.hpp"
#include "fragscale/scale.hpp"
#include "fragscale/stats.hpp"
#include "fragscale/synth.hpp"

namespace py = pybind11;
using namespace fragscale;

namespace {

Eigen::MatrixXd points_matrix(const std::vector<Eigen::Vector3d>& pts) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 3);
    for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = pts[static_cast<std::size_t>(i)];
    return m;
}

PointCloud cloud_from_matrix(const Eigen::MatrixXd& pts) {
    if (pts.cols() != 3) throw std::invalid_argument("point array must be Nx3");
    PointCloud c;
    c.points.reserve(static_cast<std::size_t>(pts.rows()));
    for (Eigen::Index i = 0; i < pts.rows(); ++i) c.points.emplace_back(pts.row(i).transpose());
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "terrain-aware image scale estimation";

    py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
        .def(py::init<>())
        .def(py::init<double, double, double, double, double>(), py::arg("fx"), py::arg("fy"),
             py::arg("cx"), py::arg("cy"), py::arg("skew") = 0.0)
        .def_readwrite("fx", &CameraIntrinsics::fx)
        .def_readwrite("fy", &CameraIntrinsics::fy)
        .def_readwrite("cx", &CameraIntrinsics::cx)
        .def_readwrite("cy", &CameraIntrinsics::cy)
        .def_readwrite("s", &CameraIntrinsics::s)
        .def("matrix", &CameraIntrinsics::matrix);

    py::class_<CameraPose>(m, "CameraPose")
        .def(py::init<const Eigen::Matrix3d&, const Eigen::Vector3d&>(), py::arg("rotation"),
             py::arg("translation"))
        .def_static("identity", &CameraPose::identity)
        .def_static("from_quaternion", &CameraPose::from_quaternion, py::arg("w"), py::arg("x"),
                    py::arg("y"), py::arg("z"), py::arg("translation"))
        .def_property_readonly("rotation", &CameraPose::rotation)
        .def_property_readonly("translation", &CameraPose::translation);

    m.def("nearest_rotation", &nearest_rotation, py::arg("matrix"));

    py::class_<PixelPoint>(m, "PixelPoint")
        .def(py::init<>())
        .def(py::init([](double u, double v) { return PixelPoint{u, v}; }), py::arg("u"), py::arg("v"))
        .def_readwrite("u", &PixelPoint::u)
        .def_readwrite("v", &PixelPoint::v);

    py::class_<WorldRay>(m, "WorldRay")
        .def(py::init<>())
        .def(py::init([](const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
                 return WorldRay{o, d};
             }),
             py::arg("origin"), py::arg("direction"))
        .def_readwrite("origin", &WorldRay::origin)
        .def_readwrite("direction", &WorldRay::direction);

    py::class_<GroundHit>(m, "GroundHit")
        .def_readonly("point", &GroundHit::point)
        .def_readonly("alpha", &GroundHit::alpha)
        .def_readonly("in_front", &GroundHit::in_front);

    m.def("pixel_to_camera_ray", &pixel_to_camera_ray, py::arg("intrinsics"), py::arg("pixel"));
    m.def("camera_ray_to_world", &camera_ray_to_world, py::arg("pose"), py::arg("camera_dir"));
    m.def("intersect_ground_plane", &intersect_ground_plane, py::arg("ray"));

    py::class_<PointCloud>(m, "PointCloud")
        .def(py::init(&cloud_from_matrix), py::arg("points"))
        .def_property_readonly("points", [](const PointCloud& c) { return points_matrix(c.points); })
        .def("__len__", [](const PointCloud& c) { return c.points.size(); });

    py::class_<TerrainMesh>(m, "TerrainMesh")
        .def_property_readonly("vertices",
                               [](const TerrainMesh& mesh) { return points_matrix(mesh.vertices()); })
        .def_property_readonly("triangles",
                               [](const TerrainMesh& mesh) {
                                   Eigen::MatrixXi t(
                                       static_cast<Eigen::Index>(mesh.triangles().size()), 3);
                                   for (Eigen::Index i = 0; i < t.rows(); ++i)
                                       for (int k = 0; k < 3; ++k)
                                           t(i, k) = mesh.triangles()[static_cast<std::size_t>(i)][k];
                                   return t;
                               })
        .def_property_readonly("grid_resolution", &TerrainMesh::grid_resolution);

    m.def(
        "triangulate",
        [](const PointCloud& cloud, double dedup_tolerance, int grid_resolution) {
            MeshOptions o;
            o.dedup_tolerance = dedup_tolerance;
            o.grid_resolution = grid_resolution;
            return triangulate(cloud, o);
        },
        py::arg("cloud"), py::arg("dedup_tolerance") = 1e-9, py::arg("grid_resolution") = 0);

    py::class_<RayHit>(m, "RayHit")
        .def_readonly("triangle", &RayHit::triangle)
        .def_readonly("t", &RayHit::t)
        .def_readonly("eta", &RayHit::eta)
        .def_readonly("mu", &RayHit::mu)
        .def_readonly("point", &RayHit::point)
        .def_readonly("fallback", &RayHit::fallback);

    m.def("cast_ray", &cast_ray, py::arg("mesh"), py::arg("ray"));
    m.def("cast_ray_linear", &cast_ray_linear, py::arg("mesh"), py::arg("ray"));

    py::class_<ImageGeometry>(m, "ImageGeometry")
        .def(py::init<>())
        .def_readwrite("image_id", &ImageGeometry::image_id)
        .def_readwrite("width", &ImageGeometry::width)
        .def_readwrite("height", &ImageGeometry::height)
        .def_readwrite("intrinsics", &ImageGeometry::intrinsics)
        .def_readwrite("pose", &ImageGeometry::pose);

    py::class_<ImageScaleRecord>(m, "ImageScaleRecord")
        .def_readonly("image_id", &ImageScaleRecord::image_id)
        .def_readonly("top_scale", &ImageScaleRecord::top_scale)
        .def_readonly("bottom_scale", &ImageScaleRecord::bottom_scale)
        .def_readonly("left_scale", &ImageScaleRecord::left_scale)
        .def_readonly("right_scale", &ImageScaleRecord::right_scale)
        .def_readonly("corners", &ImageScaleRecord::corners)
        .def_readonly("any_fallback", &ImageScaleRecord::any_fallback);

    m.def("corner_pixels", &corner_pixels, py::arg("width"), py::arg("height"));
    m.def("edge_scale", &edge_scale, py::arg("length_px"), py::arg("hit_a"), py::arg("hit_b"));
    m.def("compute_image_scale", &compute_image_scale, py::arg("geometry"), py::arg("mesh"));

    py::class_<SwebrecFit>(m, "SwebrecFit")
        .def(py::init<double, double, double>(), py::arg("x_max"), py::arg("x_50"), py::arg("b"))
        .def_readonly("x_max", &SwebrecFit::x_max)
        .def_readonly("x_50", &SwebrecFit::x_50)
        .def_readonly("b", &SwebrecFit::b);

    py::class_<SwebrecFitResult>(m, "SwebrecFitResult")
        .def_readonly("fit", &SwebrecFitResult::fit)
        .def_readonly("converged", &SwebrecFitResult::converged)
        .def_readonly("iterations", &SwebrecFitResult::iterations)
        .def_readonly("residual_norm", &SwebrecFitResult::residual_norm);

    m.def("swebrec_percent_passing", &swebrec_percent_passing, py::arg("fit"), py::arg("size_mm"));
    m.def(
        "fit_swebrec",
        [](const std::vector<std::pair<double, double>>& data) {
            SieveSeries series;
            for (const auto& [size, percent] : data) series.push_back({size, percent});
            return fit_swebrec(series);
        },
        py::arg("points"));
    m.def(
        "curve_l2_error",
        [](const SwebrecFit& a, const SwebrecFit& b, double lo, double hi, int n) {
            return curve_l2_error(a, b, lo, hi, n);
        },
        py::arg("a"), py::arg("b"), py::arg("lo"), py::arg("hi"), py::arg("n") = 200);

    py::class_<AnovaTable>(m, "AnovaTable")
        .def_static("from_sums", &AnovaTable::from_sums, py::arg("factor_ss"), py::arg("factor_df"),
                    py::arg("residual_ss"), py::arg("residual_df"), py::arg("alpha") = 0.05)
        .def_readonly("factor_df", &AnovaTable::factor_df)
        .def_readonly("factor_ss", &AnovaTable::factor_ss)
        .def_readonly("factor_ms", &AnovaTable::factor_ms)
        .def_readonly("residual_df", &AnovaTable::residual_df)
        .def_readonly("residual_ss", &AnovaTable::residual_ss)
        .def_readonly("residual_ms", &AnovaTable::residual_ms)
        .def_readonly("f_statistic", &AnovaTable::f_statistic)
        .def_readonly("critical_value", &AnovaTable::critical_value)
        .def_readonly("alpha", &AnovaTable::alpha)
        .def_readonly("reject", &AnovaTable::reject);

    m.def(
        "one_way_anova",
        [](const std::vector<std::vector<double>>& groups, double alpha) {
            std::vector<Group> g;
            for (std::size_t i = 0; i < groups.size(); ++i) {
                g.push_back(Group{"g" + std::to_string(i), groups[i]});
            }
            return one_way_anova(g, alpha);
        },
        py::arg("groups"), py::arg("alpha") = 0.05);
    m.def("f_critical", &f_critical, py::arg("df1"), py::arg("df2"), py::arg("alpha"));

    py::class_<PlaneSurface>(m, "PlaneSurface")
        .def(py::init([](double a, double b, double c) { return PlaneSurface{a, b, c}; }),
             py::arg("a") = 0.0, py::arg("b") = 0.0, py::arg("c") = 0.0)
        .def_readwrite("a", &PlaneSurface::a)
        .def_readwrite("b", &PlaneSurface::b)
        .def_readwrite("c", &PlaneSurface::c)
        .def("height", &PlaneSurface::height, py::arg("x"), py::arg("y"));

    py::class_<SinusoidSurface>(m, "SinusoidSurface")
        .def(py::init([](double amplitude, double wavelength, double base) {
                 return SinusoidSurface{amplitude, wavelength, base};
             }),
             py::arg("amplitude"), py::arg("wavelength"), py::arg("base") = 0.0)
        .def_readwrite("amplitude", &SinusoidSurface::amplitude)
        .def_readwrite("wavelength", &SinusoidSurface::wavelength)
        .def_readwrite("base", &SinusoidSurface::base)
        .def("height", &SinusoidSurface::height, py::arg("x"), py::arg("y"));

    py::class_<Region>(m, "Region")
        .def(py::init([](double x0, double y0, double x1, double y1) {
                 return Region{x0, y0, x1, y1};
             }),
             py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"))
        .def_readwrite("x0", &Region::x0)
        .def_readwrite("y0", &Region::y0)
        .def_readwrite("x1", &Region::x1)
        .def_readwrite("y1", &Region::y1);

    py::class_<SyntheticSurface>(m, "SyntheticSurface")
        .def_static("make_plane", &SyntheticSurface::make_plane, py::arg("plane"), py::arg("region"),
                    py::arg("density"))
        .def_static("make_sinusoid", &SyntheticSurface::make_sinusoid, py::arg("sinusoid"),
                    py::arg("region"), py::arg("density"))
        .def_readwrite("density", &SyntheticSurface::density)
        .def_readwrite("jitter", &SyntheticSurface::jitter)
        .def_readwrite("noise_sigma", &SyntheticSurface::noise_sigma)
        .def("height", &SyntheticSurface::height, py::arg("x"), py::arg("y"));

    m.def("sample_cloud", &sample_cloud, py::arg("surface"), py::arg("seed"));

    py::class_<PlaneHit>(m, "PlaneHit")
        .def_readonly("point", &PlaneHit::point)
        .def_readonly("alpha", &PlaneHit::alpha);
    m.def("analytic_corner_hit", &analytic_corner_hit, py::arg("surface"), py::arg("ray"));

    py::class_<OracleScales>(m, "OracleScales")
        .def_readonly("top", &OracleScales::top)
        .def_readonly("bottom", &OracleScales::bottom)
        .def_readonly("corners", &OracleScales::corners);
    m.def("oracle_scale", &oracle_scale, py::arg("surface"), py::arg("geometry"));
    m.def("march_surface_hit", &march_surface_hit, py::arg("surface"), py::arg("ray"),
          py::arg("step"), py::arg("tol"));
    m.def("make_tilted_pose", &make_tilted_pose, py::arg("position"), py::arg("tilt_rad"));

    m.def("read_point_cloud", &read_point_cloud, py::arg("path"));
    m.def("write_point_cloud_ply", &write_point_cloud_ply, py::arg("cloud"), py::arg("path"));
    m.def("write_mesh_ply", &write_mesh_ply, py::arg("mesh"), py::arg("path"));
}
