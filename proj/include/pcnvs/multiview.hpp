#pragma once

#include <vector>

#include "pcnvs/camera.hpp"
#include "pcnvs/depth_map.hpp"
#include "pcnvs/point_cloud.hpp"
#include "pcnvs/raster.hpp"
#include "pcnvs/warping.hpp"

namespace pcnvs {

/// One RGB-D observation with its absolute camera-to-world pose.
struct ViewRecord {
  Image image;
  DepthMap depth;
  CameraIntrinsics intrinsics;
  RigidTransform camera_to_world;

  void validate() const;
};

/// Back-projects every view, moves it into the reference camera frame and
/// concatenates in input order. Points keep their source view and pixel and
/// carry depth-estimated normals rotated into the reference frame.
PointCloud fuse_clouds(const std::vector<ViewRecord>& views, std::size_t reference = 0);

/// Coarse view of a fused cloud. `target_pose` maps reference-frame points to
/// target-camera points; cull and symmetry options behave as in coarse_view.
CoarseView coarse_from_fused(const PointCloud& cloud, const CameraIntrinsics& k,
                             const RigidTransform& target_pose, const CoarseViewOptions& opts = {});

struct ReconstructionOptions {
  /// Drop points whose nearest-neighbor distance exceeds mean + sigmas * stddev.
  bool prune_outliers = false;
  double sigmas = 3.0;
};

/// Full point cloud from an orbit of views, in the first view's camera frame.
PointCloud reconstruct_360(const std::vector<ViewRecord>& views,
                           const ReconstructionOptions& opts = {});

/// Nearest-neighbor distance of every point to any other point (infinity for
/// a single point).
std::vector<double> nearest_neighbor_distances(const std::vector<Eigen::Vector3d>& points);

}  // namespace pcnvs
