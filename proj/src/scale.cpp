#include "fragscale/scale.hpp"

#include <stdexcept>

namespace fragscale {

std::array<PixelPoint, 4> corner_pixels(int width, int height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("corner_pixels: image dimensions must be positive");
    }
    const double w = static_cast<double>(width);
    const double h = static_cast<double>(height);
    return {PixelPoint{0.0, 0.0}, PixelPoint{w, 0.0}, PixelPoint{0.0, h}, PixelPoint{w, h}};
}

double edge_scale(double length_px, const Eigen::Vector3d& hit_a, const Eigen::Vector3d& hit_b) {
    const double span = (hit_a - hit_b).norm();
    if (span < 1e-12) {
        throw std::runtime_error("edge_scale: zero ground span between corner hits");
    }
    return length_px / span;
}

ImageScaleRecord compute_image_scale(const ImageGeometry& geometry, const TerrainMesh& mesh) {
    static const char* corner_names[4] = {"top-left", "top-right", "bottom-left", "bottom-right"};

    const auto corners = corner_pixels(geometry.width, geometry.height);
    ImageScaleRecord rec;
    rec.image_id = geometry.image_id;
    for (int k = 0; k < 4; ++k) {
        const Eigen::Vector3d dir_cam = pixel_to_camera_ray(geometry.intrinsics, corners[k]);
        const WorldRay ray = camera_ray_to_world(geometry.pose, dir_cam);
        const auto hit = cast_ray(mesh, ray);
        if (!hit) {
            throw std::runtime_error("image '" + geometry.image_id + "': " + corner_names[k] +
                                     " corner ray does not reach the terrain");
        }
        rec.corners[k] = *hit;
        rec.any_fallback = rec.any_fallback || hit->fallback;
    }
    const double w = static_cast<double>(geometry.width);
    const double h = static_cast<double>(geometry.height);
    rec.top_scale = edge_scale(w, rec.corners[0].point, rec.corners[1].point);
    rec.bottom_scale = edge_scale(w, rec.corners[2].point, rec.corners[3].point);
    rec.left_scale = edge_scale(h, rec.corners[0].point, rec.corners[2].point);
    rec.right_scale = edge_scale(h, rec.corners[1].point, rec.corners[3].point);
    return rec;
}

BatchScaleResult batch_scales(const std::vector<ImageGeometry>& images, const TerrainMesh& mesh) {
    BatchScaleResult result;
    for (std::size_t i = 0; i < images.size(); ++i) {
        try {
            result.records.push_back(compute_image_scale(images[i], mesh));
        } catch (const std::exception& e) {
            result.failures.push_back({i, images[i].image_id, e.what()});
        }
    }
    return result;
}

}  // namespace fragscale
