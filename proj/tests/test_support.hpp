#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include <Eigen/Geometry>

#include "pcnvs/camera.hpp"
#include "pcnvs/depth_map.hpp"
#include "pcnvs/raster.hpp"
#include "pcnvs/synth.hpp"

namespace pcnvs::testing {

inline double wrap_degrees(double a) {
  a = std::fmod(a, 360.0);
  return a < 0.0 ? a + 360.0 : a;
}

inline CameraIntrinsics square_camera(int size, double focal_factor = 1.2) {
  return {size * focal_factor, size * focal_factor, size / 2.0, size / 2.0, size, size};
}

inline CameraIntrinsics random_intrinsics(std::mt19937& rng, int w, int h) {
  std::uniform_real_distribution<double> f(0.5 * w, 2.0 * w);
  std::uniform_real_distribution<double> cx(0.3 * w, 0.7 * w);
  std::uniform_real_distribution<double> cy(0.3 * h, 0.7 * h);
  return {f(rng), f(rng), cx(rng), cy(rng), w, h};
}

/// Depths uniform in [lo, hi]; each pixel is left invalid with probability `holes`.
inline DepthMap random_depth(std::mt19937& rng, int w, int h, double lo = 0.5, double hi = 10.0,
                             double holes = 0.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DepthMap depth(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = d(rng);
      if (u(rng) >= holes) depth.set(x, y, v);
    }
  }
  return depth;
}

inline RigidTransform random_pose(std::mt19937& rng, double max_angle = M_PI, double max_shift = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> a(-max_angle, max_angle);
  std::uniform_real_distribution<double> s(-max_shift, max_shift);
  const Eigen::Vector3d axis(n(rng), n(rng), n(rng));
  const Eigen::Matrix3d r = Eigen::AngleAxisd(a(rng), axis.normalized()).toRotationMatrix();
  return RigidTransform::from_rotation_translation(r, Eigen::Vector3d(s(rng), s(rng), s(rng)));
}

template <typename T>
Raster<T> random_image(std::mt19937& rng, int w, int h, int c = 3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Raster<T> img(w, h, c);
  for (auto& v : img.data()) v = static_cast<T>(u(rng));
  return img;
}

inline synth::Checker checker(double period = 0.5, float a = 0.8f, float b = 0.2f) {
  return {period, Eigen::Vector3f::Constant(a), Eigen::Vector3f::Constant(b)};
}

inline synth::SceneSpec unit_cube(synth::Checker tex = checker()) {
  return {{synth::Primitive::box(Eigen::Vector3d::Zero(), Eigen::Vector3d::Constant(0.5), tex)}};
}

/// Square textured plane facing world -Z (towards an az = 0 orbit camera).
inline synth::SceneSpec facing_plane(double half = 0.8, double z = 0.0,
                                     synth::Checker tex = checker()) {
  return {{synth::Primitive::plane({0, 0, z}, Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                                   half, half, tex)}};
}

/// Removes the directory on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pcnvs_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace pcnvs::testing
