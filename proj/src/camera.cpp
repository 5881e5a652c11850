#include "fragscale/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace fragscale {

CameraIntrinsics::CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, double skew)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), s(skew) {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw std::invalid_argument("camera intrinsics: focal lengths must be positive");
    }
    if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy) ||
        !std::isfinite(s)) {
        throw std::invalid_argument("camera intrinsics: parameters must be finite");
    }
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
    Eigen::Matrix3d k;
    k << fx, s, cx,  //
        0.0, fy, cy,  //
        0.0, 0.0, 1.0;
    return k;
}

CameraPose::CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
    const double ortho_err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
    if (!(ortho_err < 1e-9)) {
        throw std::invalid_argument("camera pose: rotation is not orthonormal");
    }
    if (!(std::abs(rotation.determinant() - 1.0) < 1e-9)) {
        throw std::invalid_argument("camera pose: rotation determinant is not +1");
    }
    if (!translation.allFinite()) {
        throw std::invalid_argument("camera pose: translation must be finite");
    }
}

CameraPose CameraPose::identity() {
    return CameraPose(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
}

CameraPose CameraPose::from_quaternion(double w, double x, double y, double z,
                                       const Eigen::Vector3d& translation) {
    const double norm = std::sqrt(w * w + x * x + y * y + z * z);
    if (std::abs(norm - 1.0) > 1e-3) {
        throw std::invalid_argument("camera pose: quaternion norm deviates from 1 by more than 1e-3");
    }
    w /= norm;
    x /= norm;
    y /= norm;
    z /= norm;
    Eigen::Matrix3d c;
    c << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return CameraPose(c, translation);
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    Eigen::Vector3d d(1.0, 1.0, (u * v.transpose()).determinant() < 0 ? -1.0 : 1.0);
    return u * d.asDiagonal() * v.transpose();
}

Eigen::Vector3d homogenize(const PixelPoint& p) {
    return {p.u, p.v, 1.0};
}

Eigen::Vector3d pixel_to_camera_ray(const CameraIntrinsics& intrinsics, const PixelPoint& p) {
    // K is upper triangular; back-substitution instead of a general inverse.
    const double z = 1.0;
    const double y = (p.v - intrinsics.cy * z) / intrinsics.fy;
    const double x = (p.u - intrinsics.s * y - intrinsics.cx * z) / intrinsics.fx;
    return {x, y, z};
}

WorldRay camera_ray_to_world(const CameraPose& pose, const Eigen::Vector3d& camera_dir) {
    return {pose.translation(), pose.rotation() * camera_dir};
}

std::optional<GroundHit> intersect_ground_plane(const WorldRay& ray) {
    const double zm = ray.direction.z();
    if (std::abs(zm) < 1e-12 * ray.direction.norm()) {
        return std::nullopt;
    }
    const double alpha = -ray.origin.z() / zm;
    GroundHit hit;
    hit.alpha = alpha;
    hit.point = ray.origin + alpha * ray.direction;
    hit.in_front = alpha >= 0.0;
    return hit;
}

}  // namespace fragscale
