#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pcnvs {

// Camera frame convention used throughout the library: right-handed,
// +X to the right, +Y down the image, +Z into the scene. Pixel (u, v)
// addresses the pixel center, (0, 0) is the top-left pixel, and there is no
// half-pixel offset.

/// Pinhole intrinsics with zero skew.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws InputError unless fx, fy > 0, the image is non-empty and the
  /// principal point lies inside it.
  void validate() const;

  Eigen::Matrix3d matrix() const;
  Eigen::Matrix3d inverse_matrix() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// Rigid SE(3) transform stored as a 4x4 homogeneous matrix. Construction
/// validates the rotation block, so every instance is a proper rigid motion.
class RigidTransform {
 public:
  static constexpr double kOrthonormalTolerance = 1e-6;

  RigidTransform() : m_(Eigen::Matrix4d::Identity()) {}

  /// Throws InputError if R^T R != I or det(R) != 1 (within 1e-6) or the
  /// bottom row is not exactly [0 0 0 1].
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);
  static RigidTransform from_rotation_translation(const Eigen::Matrix3d& r,
                                                  const Eigen::Vector3d& t);
  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Eigen::Vector3d& t);
  /// Right-handed rotation by `radians` about `axis` (normalized internally).
  static RigidTransform rotation(const Eigen::Vector3d& axis, double radians);

  const Eigen::Matrix4d& matrix() const { return m_; }
  Eigen::Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Eigen::Vector3d translation() const { return m_.topRightCorner<3, 1>(); }
  bool is_identity() const { return m_ == Eigen::Matrix4d::Identity(); }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return m_.topLeftCorner<3, 3>() * p + m_.topRightCorner<3, 1>();
  }

 private:
  explicit RigidTransform(const Eigen::Matrix4d& m) : m_(m) {}
  Eigen::Matrix4d m_;
};

/// compose(a, b) applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& a);

/// Camera on a sphere around the world origin. Azimuth and elevation are in
/// degrees, radius in scene units.
struct OrbitPose {
  double azimuth = 0.0;
  double elevation = 0.0;
  double radius = 1.0;

  void validate() const;
};

/// World-to-camera extrinsic for an orbit camera looking at the origin with
/// world +Y as up. Azimuth 0, elevation 0 puts the camera at (0, 0, -radius)
/// looking along world +Z; azimuth rotates the camera position right-handedly
/// about world +Y, positive elevation raises it towards +Y.
/// Elevation of +-90 degrees leaves the up vector degenerate and throws.
RigidTransform pose_from_orbit(const OrbitPose& pose);

/// Camera center in world coordinates for an orbit pose.
Eigen::Vector3d orbit_camera_center(const OrbitPose& pose);

/// Relative pose theta_{s->t} mapping source-camera points to target-camera
/// points, given world-to-camera extrinsics of both views.
RigidTransform relative_pose(const RigidTransform& world_to_source,
                             const RigidTransform& world_to_target);
RigidTransform relative_orbit_pose(const OrbitPose& source, const OrbitPose& target);

}  // namespace pcnvs
