#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pcnvs/camera.hpp"
#include "pcnvs/depth_map.hpp"
#include "pcnvs/flow.hpp"
#include "pcnvs/point_cloud.hpp"
#include "pcnvs/raster.hpp"

namespace pcnvs {

/// Sparse target-view image produced by splatting. `rgb` is zero and
/// `zbuffer` is 0 exactly where `coverage` is false.
struct CoarseView {
  Image rgb;
  std::vector<std::uint8_t> coverage;
  DepthMap zbuffer;

  std::size_t covered_count() const;
};

/// Plane n . x = offset, n of unit length, in the object-centered frame.
struct SymmetryPlane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitX();
  double offset = 0.0;
};

struct CoarseViewOptions {
  /// Remove points whose transformed normal faces away from the target camera.
  bool cull = false;
  /// A point is removed iff (R n) . view_dir > cull_epsilon.
  double cull_epsilon = 0.0;
  /// Mirror the cloud across this plane (object frame) before projection.
  std::optional<SymmetryPlane> symmetry;
  /// Maps source (or fusion reference) camera coordinates into the object
  /// frame the symmetry plane is expressed in.
  RigidTransform object_from_camera;
  /// Reflected points closer than this to an existing point are dropped.
  double merge_radius = 1e-6;
};

/// Forward warp: every valid source pixel is splatted to round(u', v') of the
/// flow field. Collisions keep the smallest target depth; at exactly equal
/// depth the first source pixel in row-major order wins. Targets outside the
/// image are dropped. The output shares the source intrinsics.
CoarseView forward_warp(const Image& image, const DepthMap& depth, const CameraIntrinsics& k,
                        const RigidTransform& theta);

/// Bilinear interpolation of channel `c` at continuous pixel coordinates with
/// zero padding: neighbors outside the image contribute zero, so the result
/// is continuous in (u, v) and vanishes once (u, v) leaves (-1, w) x (-1, h).
template <typename T>
double bilinear_sample(const Raster<T>& image, double u, double v, int c);

/// All channels at once.
Eigen::Vector3f bilinear_sample(const Image& image, double u, double v);

struct BackwardWarp {
  Image image;
  /// False where source depth is invalid or the sample lies fully outside the target.
  std::vector<std::uint8_t> mask;
};

/// Backward warp: reconstructs the source view by sampling `target` at
/// phi(p_s; theta) for every valid source pixel.
BackwardWarp backward_warp(const Image& target, const DepthMap& source_depth,
                           const CameraIntrinsics& k, const RigidTransform& theta);

/// Normals from the cross product of back-projected +v and +u tangents
/// (backward differences on the last row/column). Invalid wherever any
/// pixel involved has invalid depth.
NormalMap estimate_normals(const DepthMap& depth, const CameraIntrinsics& k);

/// True iff (R n) . normalize(R p + t) > epsilon. Points without a normal
/// (zero vector) are never back-facing.
bool is_backfacing(const Eigen::Vector3d& point, const Eigen::Vector3d& normal,
                   const RigidTransform& theta, double epsilon = 0.0);

/// Per-source-pixel removal mask (1 = back-facing after `theta`).
std::vector<std::uint8_t> backface_mask(const DepthMap& depth, const CameraIntrinsics& k,
                                        const NormalMap& normals, const RigidTransform& theta,
                                        double epsilon = 0.0);

/// Removes back-facing points, looking normals up through `source_pixel`.
PointCloud backface_cull(const PointCloud& cloud, const NormalMap& normals,
                         const RigidTransform& theta, double epsilon = 0.0);
/// Removes back-facing points using the cloud's own `normals`.
PointCloud backface_cull(const PointCloud& cloud, const RigidTransform& theta,
                         double epsilon = 0.0);

/// Returns the cloud followed by its mirror image across `plane`. Mirrored
/// points within `merge_radius` of an already present point are dropped.
PointCloud symmetrize(const PointCloud& cloud, const SymmetryPlane& plane,
                      double merge_radius = 1e-6);

/// Attaches `normals` to each point through its `source_pixel`.
PointCloud attach_normals(const PointCloud& cloud, const NormalMap& normals);

/// Z-buffered splat of a cloud already expressed in the target camera frame.
CoarseView splat_cloud(const PointCloud& cloud, const CameraIntrinsics& k);

/// Cloud route to a coarse view: optional symmetry (object frame), optional
/// culling by the cloud's normals, then transform + projection + z-buffer.
CoarseView render_cloud(const PointCloud& cloud, const CameraIntrinsics& k,
                        const RigidTransform& theta, const CoarseViewOptions& opts);

/// Coarse target view from a single RGB-D source. With cull and symmetry
/// off this is exactly forward_warp.
CoarseView coarse_view(const Image& image, const DepthMap& depth, const CameraIntrinsics& k,
                       const RigidTransform& theta, const CoarseViewOptions& opts = {});

}  // namespace pcnvs
