#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pcnvs/errors.hpp"

namespace pcnvs {

/// Dense row-major, channel-interleaved grid. Element (x, y, c) lives at
/// ((y * width) + x) * channels + c.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels <= 0) {
      throw InputError("raster dimensions must be non-negative with at least one channel");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  T& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool same_shape(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  template <typename U>
  Raster<U> cast() const {
    Raster<U> out(width_, height_, channels_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const Raster&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

/// RGB image with values in [0, 1]; the interchange type for files and warps.
using Image = Raster<float>;
/// Double-precision image used by the loss functions so gradients have headroom.
using ImageD = Raster<double>;
/// Single-channel double map (per-pixel losses, SSIM maps, disparity).
using Map = Raster<double>;

template <typename A, typename B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
    throw InputError(std::string(what) + ": shape mismatch (" + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + "x" + std::to_string(a.channels()) + " vs " +
                     std::to_string(b.width()) + "x" + std::to_string(b.height()) + "x" +
                     std::to_string(b.channels()) + ")");
  }
}

}  // namespace pcnvs
