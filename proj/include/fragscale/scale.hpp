#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fragscale/camera.hpp"
#include "fragscale/mesh.hpp"

namespace fragscale {

struct ImageGeometry {
    std::string image_id;
    int width = 0;
    int height = 0;
    CameraIntrinsics intrinsics;
    CameraPose pose = CameraPose::identity();
};

// Corner order: top-left, top-right, bottom-left, bottom-right.
std::array<PixelPoint, 4> corner_pixels(int width, int height);

// Pixels per metre along one image edge given the two terrain hits it maps to.
double edge_scale(double length_px, const Eigen::Vector3d& hit_a, const Eigen::Vector3d& hit_b);

struct ImageScaleRecord {
    std::string image_id;
    double top_scale = 0.0;
    double bottom_scale = 0.0;
    double left_scale = 0.0;
    double right_scale = 0.0;
    std::array<RayHit, 4> corners;
    bool any_fallback = false;
};

ImageScaleRecord compute_image_scale(const ImageGeometry& geometry, const TerrainMesh& mesh);

struct ScaleFailure {
    std::size_t index = 0;
    std::string image_id;
    std::string message;
};

struct BatchScaleResult {
    std::vector<ImageScaleRecord> records;
    std::vector<ScaleFailure> failures;
};

BatchScaleResult batch_scales(const std::vector<ImageGeometry>& images, const TerrainMesh& mesh);

}  // namespace fragscale
