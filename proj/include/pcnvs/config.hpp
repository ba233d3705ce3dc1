#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcnvs/camera.hpp"
#include "pcnvs/losses.hpp"
#include "pcnvs/multiview.hpp"
#include "pcnvs/synth.hpp"
#include "pcnvs/warping.hpp"

namespace pcnvs::config {

using nlohmann::json;

/// {"fx":..,"fy":..,"cx":..,"cy":..,"width":..,"height":..}
CameraIntrinsics intrinsics_from_json(const json& j);
json to_json(const CameraIntrinsics& k);
CameraIntrinsics load_intrinsics(const std::filesystem::path& path);

/// {"azimuth":..,"elevation":..,"radius":..}
OrbitPose orbit_from_json(const json& j);
/// "az=20,el=10,r=3" (keys may also be spelled azimuth/elevation/radius).
OrbitPose parse_orbit(const std::string& text);

/// 4x4 row-major matrix as nested arrays or a flat list of 16 numbers.
RigidTransform matrix_from_json(const json& j);
json to_json(const RigidTransform& t);

/// Accepts a 4x4 matrix, {"matrix": 4x4}, an orbit record (giving its
/// world-to-camera extrinsic) or {"source": orbit, "target": orbit} (giving
/// the relative pose from source to target camera).
RigidTransform pose_from_json(const json& j);
RigidTransform load_pose(const std::filesystem::path& path);

/// "nx,ny,nz,offset" or "x" / "y" / "z" for the coordinate plane through the origin.
SymmetryPlane parse_plane(const std::string& text);
SymmetryPlane plane_from_json(const json& j);

synth::SceneSpec scene_from_json(const json& j);
synth::SceneSpec load_scene(const std::filesystem::path& path);

/// View list: either an array of view objects or {"intrinsics": ..., "views": [...]}.
/// Each view names "image" and "depth" files (relative to the list file),
/// optional per-view "intrinsics", and either "camera_to_world" (4x4) or
/// "orbit" (converted to camera-to-world).
std::vector<ViewRecord> load_views(const std::filesystem::path& path);

SsimParams ssim_from_json(const json& j, SsimParams base = SsimParams::evaluation());

/// Options shared by the warping subcommands, loadable from a JSON file.
struct PipelineConfig {
  std::optional<CameraIntrinsics> intrinsics;
  std::optional<RigidTransform> pose;
  CoarseViewOptions coarse;
  SsimParams ssim = SsimParams::evaluation();
  DepthLossWeights depth_weights;
  CompletionWeights completion_weights;

  void validate() const;
};

/// Relative file references inside the config resolve against its directory;
/// referenced files must exist.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

}  // namespace pcnvs::config
