#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pcnvs/camera.hpp"
#include "pcnvs/depth_map.hpp"
#include "pcnvs/flow.hpp"
#include "pcnvs/raster.hpp"

namespace pcnvs::synth {

/// Two-color checkerboard evaluated in closed form at hit points.
struct Checker {
  double period = 0.25;
  Eigen::Vector3f color_a = Eigen::Vector3f(0.8f, 0.8f, 0.8f);
  Eigen::Vector3f color_b = Eigen::Vector3f(0.2f, 0.2f, 0.2f);
};

enum class PrimitiveKind { kPlane, kBox, kSphere };

/// Scene primitive in world coordinates.
///  - kPlane: finite rectangle centered at `center`, spanned by unit axes
///    `axis_u`, `axis_v` with half extents `half_size.x()`, `half_size.y()`.
///    Two-sided.
///  - kBox: axis-aligned box centered at `center` with half extents `half_size`.
///  - kSphere: radius `half_size.x()`.
/// With `symmetric` set, the texture uses |x| so it is mirror-symmetric about
/// the world plane x = 0.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kBox;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_size = Eigen::Vector3d::Constant(0.5);
  Eigen::Vector3d axis_u = Eigen::Vector3d::UnitX();
  Eigen::Vector3d axis_v = Eigen::Vector3d::UnitY();
  Checker texture;
  bool symmetric = false;

  static Primitive plane(const Eigen::Vector3d& center, const Eigen::Vector3d& axis_u,
                         const Eigen::Vector3d& axis_v, double half_u, double half_v,
                         Checker texture = {});
  static Primitive box(const Eigen::Vector3d& center, const Eigen::Vector3d& half_size,
                       Checker texture = {});
  static Primitive sphere(const Eigen::Vector3d& center, double radius, Checker texture = {});

  void validate() const;
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  void validate() const;
};

/// Ray-traced ground truth for one camera.
struct RenderResult {
  Image image;
  DepthMap depth;
  /// Camera-frame unit normals facing the camera.
  NormalMap normals;
  /// World-space hit point and face normal per pixel (zero where no hit).
  std::vector<Eigen::Vector3d> world_points;
  std::vector<Eigen::Vector3d> world_normals;
  /// Index of the primitive hit, -1 for background.
  std::vector<int> primitive;
  /// Box face hit (0..5 = -x,+x,-y,+y,-z,+z), -1 otherwise.
  std::vector<int> face;
};

/// One ray per pixel center; nearest hit wins; depth is the camera-space Z of
/// the hit. Background is black with depth 0.
RenderResult render(const SceneSpec& scene, const CameraIntrinsics& k,
                    const RigidTransform& world_to_camera);

/// Exact correspondence: each source pixel's hit point re-projected into the
/// target camera. Computed from scene geometry, not from a depth map.
FlowField analytic_flow(const SceneSpec& scene, const CameraIntrinsics& k,
                        const RigidTransform& world_to_source,
                        const RigidTransform& world_to_target);

}  // namespace pcnvs::synth
