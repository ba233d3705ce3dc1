#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "pcnvs/camera.hpp"
#include "pcnvs/depth_map.hpp"
#include "pcnvs/raster.hpp"

namespace pcnvs {

/// Colored 3D points in a camera (or object) frame. The optional attribute
/// vectors are either empty or parallel to `points`.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  /// RGB in [0, 1].
  std::vector<Eigen::Vector3f> colors;
  /// Row-major index of the pixel each point was back-projected from.
  std::vector<std::int64_t> source_pixel;
  /// Index of the view each point came from (multi-view fusion).
  std::vector<std::int32_t> source_view;
  /// Surface normal per point, zero where unknown.
  std::vector<Eigen::Vector3d> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Throws InputError on length mismatches or non-finite coordinates.
  void validate() const;
  /// Appends `other`; attribute vectors are kept only if both clouds carry them
  /// (or this cloud is empty).
  void append(const PointCloud& other);
  /// Copies point `i` of `other` (with whatever attributes this cloud tracks).
  void push_from(const PointCloud& other, std::size_t i);
};

/// P = K^-1 * D(u,v) * [u, v, 1]^T for every valid depth pixel, in row-major
/// order. Colors are copied from `image` (which must be RGB and match k).
PointCloud backproject(const DepthMap& depth, const CameraIntrinsics& k, const Image& image);
/// Same, with black colors.
PointCloud backproject(const DepthMap& depth, const CameraIntrinsics& k);

struct ProjectedPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  Eigen::Vector3f color = Eigen::Vector3f::Zero();
  std::size_t index = 0;  ///< position in the input cloud
};

struct Projection {
  std::vector<ProjectedPoint> points;
  std::size_t dropped = 0;  ///< points with Z <= 0
};

/// (u', v') = (fx X / Z + cx, fy Y / Z + cy), depth = Z. Points at or behind
/// the camera plane are dropped and counted, never an error.
Projection project(const PointCloud& cloud, const CameraIntrinsics& k);

/// Replaces every point by R P + t and rotates normals; colors, order and
/// other attributes are preserved.
PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& theta);

}  // namespace pcnvs
