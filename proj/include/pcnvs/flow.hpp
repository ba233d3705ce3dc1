#pragma once

#include <cstdint>
#include <vector>

#include "pcnvs/camera.hpp"
#include "pcnvs/depth_map.hpp"

namespace pcnvs {

/// Per-source-pixel continuous target coordinates and target depth.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  FlowField() = default;
  FlowField(int w, int h)
      : width(w),
        height(h),
        u(static_cast<std::size_t>(w) * h, 0.0),
        v(static_cast<std::size_t>(w) * h, 0.0),
        depth(static_cast<std::size_t>(w) * h, 0.0),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

/// phi(p; theta) = K theta K^-1 D(p) [u v 1]^T, evaluated as the single
/// homography-plus-parallax map A (D p) + K t with A = K R K^-1. Cartesian
/// target coordinates are (x / z, y / z) and the target depth is z. Entries are
/// invalid where the source depth is invalid or z <= 0.
FlowField flow_field(const DepthMap& depth, const CameraIntrinsics& k, const RigidTransform& theta);

}  // namespace pcnvs
