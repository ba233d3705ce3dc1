#include "pcnvs/warping.hpp"

#include <array>
#include <cmath>
#include <unordered_map>

#include "pcnvs/errors.hpp"

namespace pcnvs {

std::size_t CoarseView::covered_count() const {
  std::size_t n = 0;
  for (auto c : coverage) n += c ? 1 : 0;
  return n;
}

namespace {

void require_rgb_matches(const Image& image, const CameraIntrinsics& k, const char* what) {
  if (image.width() != k.width || image.height() != k.height || image.channels() != 3) {
    throw InputError(std::string(what) + ": image must be RGB and match the intrinsics (" +
                     std::to_string(k.width) + "x" + std::to_string(k.height) + ")");
  }
}

/// Nearest-depth splatting into a fixed-size target.
class ZBufferSplatter {
 public:
  ZBufferSplatter(int width, int height)
      : width_(width),
        height_(height),
        rgb_(width, height, 3, 0.0f),
        depth_(static_cast<std::size_t>(width) * height, 0.0) {}

  void splat(double u, double v, double depth, const float* color) {
    if (!(depth > 0.0) || !std::isfinite(u) || !std::isfinite(v)) return;
    const double x = std::floor(u + 0.5);
    const double y = std::floor(v + 0.5);
    if (x < 0.0 || y < 0.0 || x >= width_ || y >= height_) return;
    const int xi = static_cast<int>(x);
    const int yi = static_cast<int>(y);
    double& z = depth_[static_cast<std::size_t>(yi) * width_ + xi];
    // Strict comparison: at equal depth the earlier splat stays.
    if (z != 0.0 && !(depth < z)) return;
    z = depth;
    for (int c = 0; c < 3; ++c) rgb_.at(xi, yi, c) = color[c];
  }

  CoarseView finish() && {
    CoarseView view;
    view.coverage.resize(depth_.size());
    for (std::size_t i = 0; i < depth_.size(); ++i) view.coverage[i] = depth_[i] > 0.0 ? 1 : 0;
    view.rgb = std::move(rgb_);
    view.zbuffer = DepthMap(width_, height_, std::move(depth_));
    return view;
  }

 private:
  int width_;
  int height_;
  Image rgb_;
  std::vector<double> depth_;
};

void splat_projection(ZBufferSplatter& splatter, const Projection& proj) {
  for (const auto& p : proj.points) splatter.splat(p.u, p.v, p.depth, p.color.data());
}

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.x) * 73856093u;
    h ^= static_cast<std::size_t>(k.y) * 19349663u;
    h ^= static_cast<std::size_t>(k.z) * 83492791u;
    return h;
  }
};

/// Uniform hash grid answering "is any stored point within r of q".
class RadiusIndex {
 public:
  explicit RadiusIndex(double radius) : radius_(radius), cell_(radius > 0.0 ? radius : 1.0) {}

  void insert(const Eigen::Vector3d& p) {
    points_.push_back(p);
    cells_[key(p)].push_back(points_.size() - 1);
  }

  bool any_within(const Eigen::Vector3d& q) const {
    if (!(radius_ > 0.0)) return false;
    const CellKey c = key(q);
    const double r2 = radius_ * radius_;
    for (std::int64_t dz = -1; dz <= 1; ++dz) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t i : it->second) {
            if ((points_[i] - q).squaredNorm() <= r2) return true;
          }
        }
      }
    }
    return false;
  }

 private:
  CellKey key(const Eigen::Vector3d& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
            static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
  }

  double radius_;
  double cell_;
  std::vector<Eigen::Vector3d> points_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells_;
};

Eigen::Vector3d backproject_pixel(const CameraIntrinsics& k, int u, int v, double d) {
  return {(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d};
}

/// Mirror images of `cloud` across the plane (object frame), deduplicated
/// against the cloud and against each other.
PointCloud reflections(const PointCloud& cloud, const SymmetryPlane& plane, double merge_radius) {
  if (std::abs(plane.normal.norm() - 1.0) > 1e-9) {
    throw InputError("symmetrize: plane normal must have unit length");
  }
  if (!(merge_radius >= 0.0)) throw InputError("symmetrize: merge radius must be >= 0");
  const Eigen::Vector3d& n = plane.normal;

  RadiusIndex index(merge_radius);
  for (const auto& p : cloud.points) index.insert(p);

  PointCloud out;
  const bool has_pixel = !cloud.source_pixel.empty();
  const bool has_view = !cloud.source_view.empty();
  const bool has_normals = !cloud.normals.empty();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    const Eigen::Vector3d q = p - 2.0 * (n.dot(p) - plane.offset) * n;
    if (index.any_within(q)) continue;
    index.insert(q);
    out.points.push_back(q);
    out.colors.push_back(cloud.colors[i]);
    if (has_pixel) out.source_pixel.push_back(cloud.source_pixel[i]);
    if (has_view) out.source_view.push_back(cloud.source_view[i]);
    if (has_normals) {
      const Eigen::Vector3d& m = cloud.normals[i];
      out.normals.push_back(m - 2.0 * n.dot(m) * n);
    }
  }
  return out;
}

}  // namespace

template <typename T>
double bilinear_sample(const Raster<T>& image, double u, double v, int c) {
  if (!std::isfinite(u) || !std::isfinite(v)) return 0.0;
  const double x0f = std::floor(u);
  const double y0f = std::floor(v);
  if (x0f < -1.0 || y0f < -1.0 || x0f >= image.width() || y0f >= image.height()) return 0.0;
  const int x0 = static_cast<int>(x0f);
  const int y0 = static_cast<int>(y0f);
  const double ax = u - x0f;
  const double ay = v - y0f;
  auto px = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x >= image.width() || y >= image.height()) return 0.0;
    return static_cast<double>(image.at(x, y, c));
  };
  // Skip zero-weight taps so integer coordinates return the exact pixel value.
  double out = 0.0;
  if (ax < 1.0 && ay < 1.0) out += (1.0 - ax) * (1.0 - ay) * px(x0, y0);
  if (ax > 0.0 && ay < 1.0) out += ax * (1.0 - ay) * px(x0 + 1, y0);
  if (ax < 1.0 && ay > 0.0) out += (1.0 - ax) * ay * px(x0, y0 + 1);
  if (ax > 0.0 && ay > 0.0) out += ax * ay * px(x0 + 1, y0 + 1);
  return out;
}

template double bilinear_sample<float>(const Raster<float>&, double, double, int);
template double bilinear_sample<double>(const Raster<double>&, double, double, int);

Eigen::Vector3f bilinear_sample(const Image& image, double u, double v) {
  if (image.channels() != 3) throw InputError("bilinear_sample: expected an RGB image");
  return {static_cast<float>(bilinear_sample(image, u, v, 0)),
          static_cast<float>(bilinear_sample(image, u, v, 1)),
          static_cast<float>(bilinear_sample(image, u, v, 2))};
}

CoarseView forward_warp(const Image& image, const DepthMap& depth, const CameraIntrinsics& k,
                        const RigidTransform& theta) {
  return coarse_view(image, depth, k, theta, {});
}

BackwardWarp backward_warp(const Image& target, const DepthMap& source_depth,
                           const CameraIntrinsics& k, const RigidTransform& theta) {
  require_rgb_matches(target, k, "backward_warp");
  const FlowField flow = flow_field(source_depth, k, theta);
  BackwardWarp out{Image(k.width, k.height, 3, 0.0f),
                   std::vector<std::uint8_t>(static_cast<std::size_t>(k.width) * k.height, 0)};
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const std::size_t i = flow.index(x, y);
      if (!flow.valid[i]) continue;
      const double u = flow.u[i];
      const double v = flow.v[i];
      if (!(u > -1.0 && u < k.width && v > -1.0 && v < k.height)) continue;
      out.mask[i] = 1;
      for (int c = 0; c < 3; ++c) {
        out.image.at(x, y, c) = static_cast<float>(bilinear_sample(target, u, v, c));
      }
    }
  }
  return out;
}

NormalMap estimate_normals(const DepthMap& depth, const CameraIntrinsics& k) {
  require_depth_matches(depth, k, "estimate_normals");
  const int w = depth.width();
  const int h = depth.height();
  NormalMap normals(w, h);
  if (w < 2 || h < 2) return normals;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Forward differences, backward on the last column/row.
      const int xa = x + 1 < w ? x : x - 1;
      const int ya = y + 1 < h ? y : y - 1;
      if (!depth.valid(x, y) || !depth.valid(xa, y) || !depth.valid(xa + 1, y) ||
          !depth.valid(x, ya) || !depth.valid(x, ya + 1)) {
        continue;
      }
      const Eigen::Vector3d tu = backproject_pixel(k, xa + 1, y, depth.at(xa + 1, y)) -
                                 backproject_pixel(k, xa, y, depth.at(xa, y));
      const Eigen::Vector3d tv = backproject_pixel(k, x, ya + 1, depth.at(x, ya + 1)) -
                                 backproject_pixel(k, x, ya, depth.at(x, ya));
      const Eigen::Vector3d n = tv.cross(tu);
      const double len = n.norm();
      if (!(len > 0.0) || !std::isfinite(len)) continue;
      const std::size_t i = normals.index(x, y);
      normals.normals[i] = n / len;
      normals.valid[i] = 1;
    }
  }
  return normals;
}

bool is_backfacing(const Eigen::Vector3d& point, const Eigen::Vector3d& normal,
                   const RigidTransform& theta, double epsilon) {
  if (normal.isZero(0.0)) return false;
  const Eigen::Vector3d p = theta.apply(point);
  const double len = p.norm();
  if (!(len > 0.0)) return false;
  return (theta.rotation() * normal).dot(p / len) > epsilon;
}

std::vector<std::uint8_t> backface_mask(const DepthMap& depth, const CameraIntrinsics& k,
                                        const NormalMap& normals, const RigidTransform& theta,
                                        double epsilon) {
  require_depth_matches(depth, k, "backface_mask");
  if (normals.width != depth.width() || normals.height != depth.height()) {
    throw InputError("backface_mask: normal map does not match the depth map");
  }
  std::vector<std::uint8_t> removed(depth.size(), 0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const std::size_t i = normals.index(x, y);
      if (!depth.valid(x, y) || !normals.valid[i]) continue;
      removed[i] = is_backfacing(backproject_pixel(k, x, y, depth.at(x, y)), normals.normals[i],
                                 theta, epsilon)
                       ? 1
                       : 0;
    }
  }
  return removed;
}

PointCloud attach_normals(const PointCloud& cloud, const NormalMap& normals) {
  if (cloud.source_pixel.size() != cloud.size()) {
    throw InputError("attach_normals: cloud has no source-pixel indices");
  }
  PointCloud out = cloud;
  out.normals.assign(cloud.size(), Eigen::Vector3d::Zero());
  const auto n_pixels = static_cast<std::int64_t>(normals.normals.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::int64_t px = cloud.source_pixel[i];
    if (px < 0 || px >= n_pixels) {
      throw InputError("attach_normals: source pixel index outside the normal map");
    }
    if (normals.valid[px]) out.normals[i] = normals.normals[px];
  }
  return out;
}

PointCloud backface_cull(const PointCloud& cloud, const RigidTransform& theta, double epsilon) {
  cloud.validate();
  if (cloud.normals.size() != cloud.size()) {
    throw InputError("backface_cull: cloud carries no normals");
  }
  PointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!is_backfacing(cloud.points[i], cloud.normals[i], theta, epsilon)) out.push_from(cloud, i);
  }
  return out;
}

PointCloud backface_cull(const PointCloud& cloud, const NormalMap& normals,
                         const RigidTransform& theta, double epsilon) {
  const bool had_normals = !cloud.normals.empty();
  PointCloud out = backface_cull(attach_normals(cloud, normals), theta, epsilon);
  if (!had_normals) out.normals.clear();
  return out;
}

PointCloud symmetrize(const PointCloud& cloud, const SymmetryPlane& plane, double merge_radius) {
  cloud.validate();
  PointCloud out = cloud;
  out.append(reflections(cloud, plane, merge_radius));
  return out;
}

CoarseView splat_cloud(const PointCloud& cloud, const CameraIntrinsics& k) {
  k.validate();
  ZBufferSplatter splatter(k.width, k.height);
  splat_projection(splatter, project(cloud, k));
  return std::move(splatter).finish();
}

CoarseView render_cloud(const PointCloud& cloud, const CameraIntrinsics& k,
                        const RigidTransform& theta, const CoarseViewOptions& opts) {
  k.validate();
  cloud.validate();
  PointCloud work = cloud;
  if (opts.symmetry) {
    const PointCloud in_object = transform_cloud(work, opts.object_from_camera);
    const PointCloud mirrored = transform_cloud(
        reflections(in_object, *opts.symmetry, opts.merge_radius), invert(opts.object_from_camera));
    work.append(mirrored);
  }
  if (opts.cull) work = backface_cull(work, theta, opts.cull_epsilon);
  return splat_cloud(transform_cloud(work, theta), k);
}

CoarseView coarse_view(const Image& image, const DepthMap& depth, const CameraIntrinsics& k,
                       const RigidTransform& theta, const CoarseViewOptions& opts) {
  require_depth_matches(depth, k, "coarse_view");
  require_rgb_matches(image, k, "coarse_view");

  const FlowField flow = flow_field(depth, k, theta);
  NormalMap normals;
  std::vector<std::uint8_t> removed;
  if (opts.cull || opts.symmetry) normals = estimate_normals(depth, k);
  if (opts.cull) removed = backface_mask(depth, k, normals, theta, opts.cull_epsilon);

  ZBufferSplatter splatter(k.width, k.height);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const std::size_t i = flow.index(x, y);
      if (!flow.valid[i] || (opts.cull && removed[i])) continue;
      const float color[3] = {image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2)};
      splatter.splat(flow.u[i], flow.v[i], flow.depth[i], color);
    }
  }

  if (opts.symmetry) {
    // Mirror the full source cloud (culled points can have visible mirror
    // images), then cull the mirrored points with their mirrored normals.
    const PointCloud cloud = attach_normals(backproject(depth, k, image), normals);
    const PointCloud mirrored = transform_cloud(
        reflections(transform_cloud(cloud, opts.object_from_camera), *opts.symmetry,
                    opts.merge_radius),
        invert(opts.object_from_camera));
    const PointCloud kept =
        opts.cull ? backface_cull(mirrored, theta, opts.cull_epsilon) : mirrored;
    splat_projection(splatter, project(transform_cloud(kept, theta), k));
  }
  return std::move(splatter).finish();
}

}  // namespace pcnvs
