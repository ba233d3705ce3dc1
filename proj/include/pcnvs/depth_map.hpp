#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pcnvs/camera.hpp"

namespace pcnvs {

/// Per-pixel metric depth (camera-space Z). 0.0 marks background or invalid
/// pixels; every other value is finite and strictly positive.
class DepthMap {
 public:
  static constexpr double kInvalid = 0.0;

  DepthMap() = default;
  DepthMap(int width, int height);
  /// Throws InputError if `values` has the wrong size or holds a negative,
  /// NaN or infinite entry.
  DepthMap(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  bool valid(int x, int y) const { return at(x, y) > 0.0; }
  /// Throws InputError for values that would break the invariant.
  void set(int x, int y, double depth);

  std::span<const double> values() const { return values_; }
  std::size_t valid_count() const;
  bool matches(const CameraIntrinsics& k) const { return k.width == width_ && k.height == height_; }

  bool operator==(const DepthMap&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Per-pixel unit normals in the source camera frame, oriented towards the
/// camera. Invalid entries hold a zero vector.
struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> normals;
  std::vector<std::uint8_t> valid;

  NormalMap() = default;
  NormalMap(int w, int h)
      : width(w),
        height(h),
        normals(static_cast<std::size_t>(w) * h, Eigen::Vector3d::Zero()),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

void require_depth_matches(const DepthMap& depth, const CameraIntrinsics& k, const char* what);

}  // namespace pcnvs
