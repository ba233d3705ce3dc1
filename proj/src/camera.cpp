#include "pcnvs/camera.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pcnvs/errors.hpp"

namespace pcnvs {

namespace {

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(std::isfinite(fx) && fx > 0.0) || !(std::isfinite(fy) && fy > 0.0)) {
    throw InputError("intrinsics: focal lengths must be finite and positive");
  }
  if (width <= 0 || height <= 0) {
    throw InputError("intrinsics: image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw InputError("intrinsics: principal point (" + std::to_string(cx) + ", " +
                     std::to_string(cy) + ") outside the image");
  }
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d CameraIntrinsics::inverse_matrix() const {
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  if (!m.allFinite()) throw InputError("rigid transform: non-finite entries");
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
    throw InputError("rigid transform: bottom row must be exactly [0 0 0 1]");
  }
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  const double ortho_err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > kOrthonormalTolerance) {
    throw InputError("rigid transform: rotation block is not orthonormal (max |R^T R - I| = " +
                     std::to_string(ortho_err) + ")");
  }
  if (std::abs(r.determinant() - 1.0) > kOrthonormalTolerance) {
    throw InputError("rigid transform: rotation block must have determinant +1");
  }
  return RigidTransform(m);
}

RigidTransform RigidTransform::from_rotation_translation(const Eigen::Matrix3d& r,
                                                         const Eigen::Vector3d& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return from_matrix(m);
}

RigidTransform RigidTransform::translation(const Eigen::Vector3d& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topRightCorner<3, 1>() = t;
  return RigidTransform(m);
}

RigidTransform RigidTransform::rotation(const Eigen::Vector3d& axis, double radians) {
  if (!(axis.norm() > 0.0)) throw InputError("rigid transform: zero rotation axis");
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
  return RigidTransform(m);
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  Eigen::Matrix4d m = a.matrix() * b.matrix();
  m.row(3) << 0.0, 0.0, 0.0, 1.0;
  return RigidTransform::from_matrix(m);
}

RigidTransform invert(const RigidTransform& a) {
  const Eigen::Matrix3d rt = a.rotation().transpose();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rt;
  m.topRightCorner<3, 1>() = -(rt * a.translation());
  return RigidTransform::from_matrix(m);
}

void OrbitPose::validate() const {
  if (!(std::isfinite(radius) && radius > 0.0)) throw InputError("orbit: radius must be > 0");
  if (!(azimuth >= 0.0 && azimuth < 360.0)) throw InputError("orbit: azimuth must be in [0, 360)");
  if (!(elevation >= -90.0 && elevation <= 90.0)) {
    throw InputError("orbit: elevation must be in [-90, 90]");
  }
}

Eigen::Vector3d orbit_camera_center(const OrbitPose& pose) {
  const double az = deg2rad(pose.azimuth);
  const double el = deg2rad(pose.elevation);
  return pose.radius *
         Eigen::Vector3d(-std::cos(el) * std::sin(az), std::sin(el), -std::cos(el) * std::cos(az));
}

RigidTransform pose_from_orbit(const OrbitPose& pose) {
  pose.validate();
  if (std::abs(pose.elevation) == 90.0) {
    throw InputError("orbit: elevation of +-90 degrees makes the up vector degenerate");
  }
  const Eigen::Vector3d center = orbit_camera_center(pose);
  const Eigen::Vector3d forward = (-center).normalized();
  const Eigen::Vector3d up(0.0, 1.0, 0.0);
  const Eigen::Vector3d right = forward.cross(up).normalized();
  const Eigen::Vector3d down = forward.cross(right);

  // Rows of the world-to-camera rotation are the camera axes in world coordinates.
  Eigen::Matrix3d r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return RigidTransform::from_rotation_translation(r, -(r * center));
}

RigidTransform relative_pose(const RigidTransform& world_to_source,
                             const RigidTransform& world_to_target) {
  return compose(world_to_target, invert(world_to_source));
}

RigidTransform relative_orbit_pose(const OrbitPose& source, const OrbitPose& target) {
  return relative_pose(pose_from_orbit(source), pose_from_orbit(target));
}

}  // namespace pcnvs
