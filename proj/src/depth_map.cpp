#include "pcnvs/depth_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcnvs/errors.hpp"

namespace pcnvs {

namespace {

void check_depth_value(double d) {
  if (!(d == 0.0 || (std::isfinite(d) && d > 0.0))) {
    throw InputError("depth map: values must be 0 (invalid) or finite and positive, got " +
                     std::to_string(d));
  }
}

}  // namespace

DepthMap::DepthMap(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InputError("depth map: negative dimensions");
  values_.assign(static_cast<std::size_t>(width) * height, kInvalid);
}

DepthMap::DepthMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 0 || height < 0) throw InputError("depth map: negative dimensions");
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw InputError("depth map: expected " + std::to_string(width * height) + " values, got " +
                     std::to_string(values_.size()));
  }
  std::for_each(values_.begin(), values_.end(), check_depth_value);
}

void DepthMap::set(int x, int y, double depth) {
  check_depth_value(depth);
  values_[static_cast<std::size_t>(y) * width_ + x] = depth;
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](double d) { return d > 0.0; }));
}

void require_depth_matches(const DepthMap& depth, const CameraIntrinsics& k, const char* what) {
  k.validate();
  if (!depth.matches(k)) {
    throw InputError(std::string(what) + ": depth map is " + std::to_string(depth.width()) + "x" +
                     std::to_string(depth.height()) + " but intrinsics describe " +
                     std::to_string(k.width) + "x" + std::to_string(k.height));
  }
}

}  // namespace pcnvs
