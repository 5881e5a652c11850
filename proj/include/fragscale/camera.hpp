#pragma once

#include <Eigen/Dense>

#include <optional>

namespace fragscale {

/// Pinhole intrinsics: focal lengths, principal point and axis skew, all in
/// pixels. Assembles to the upper-triangular parameter matrix K.
struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    double s = 0.0;

    CameraIntrinsics() = default;
    CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, double skew = 0.0);

    Eigen::Matrix3d matrix() const;
};

/// Rigid camera pose in the world frame: orthonormal rotation (det +1) and
/// translation in world units (meters).
class CameraPose {
  public:
    CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

    static CameraPose identity();
    /// Builds the pose from a (w,x,y,z) quaternion; the quaternion is
    /// normalized first and must be within 1e-3 of unit norm.
    static CameraPose from_quaternion(double w, double x, double y, double z,
                                      const Eigen::Vector3d& translation);

    const Eigen::Matrix3d& rotation() const { return rotation_; }
    const Eigen::Vector3d& translation() const { return translation_; }

  private:
    Eigen::Matrix3d rotation_;
    Eigen::Vector3d translation_;
};

/// Projects an arbitrary 3x3 matrix to the nearest proper rotation (SVD based).
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

/// Image point in pixels. Real-valued so that image corners and sub-pixel
/// centers are both representable.
struct PixelPoint {
    double u = 0.0;
    double v = 0.0;
};

/// Ray through the world frame. The direction is not normalized; the ray
/// parameter carries the scaling.
struct WorldRay {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    Eigen::Vector3d direction = Eigen::Vector3d::Zero();
};

struct GroundHit {
    Eigen::Vector3d point;
    double alpha = 0.0;
    bool in_front = false;
};

/// Lifts a pixel to homogeneous coordinates (u, v, 1).
Eigen::Vector3d homogenize(const PixelPoint& p);

/// Back-projects a pixel through K^{-1} to a ray direction in the camera
/// frame (z = 1 plane).
Eigen::Vector3d pixel_to_camera_ray(const CameraIntrinsics& intrinsics, const PixelPoint& p);

/// Rotates a camera-frame ray direction into the world frame; the ray passes
/// through the camera center.
WorldRay camera_ray_to_world(const CameraPose& pose, const Eigen::Vector3d& camera_dir);

/// Intersects the ray with the plane z = 0. Returns nullopt when the ray is
/// parallel to the plane (|z slope| < 1e-12 relative to the direction norm).
std::optional<GroundHit> intersect_ground_plane(const WorldRay& ray);

}  // namespace fragscale
