#include "pcnvs/point_cloud.hpp"

#include <string>

#include "pcnvs/errors.hpp"

namespace pcnvs {

void PointCloud::validate() const {
  const std::size_t n = points.size();
  if (colors.size() != n) throw InputError("point cloud: colors and points differ in length");
  if (!source_pixel.empty() && source_pixel.size() != n) {
    throw InputError("point cloud: source_pixel length mismatch");
  }
  if (!source_view.empty() && source_view.size() != n) {
    throw InputError("point cloud: source_view length mismatch");
  }
  if (!normals.empty() && normals.size() != n) throw InputError("point cloud: normals length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!points[i].allFinite()) {
      throw InputError("point cloud: non-finite coordinate at point " + std::to_string(i));
    }
  }
}

void PointCloud::append(const PointCloud& other) {
  if (other.points.empty()) return;
  const bool was_empty = points.empty();
  auto merge = [&](auto& mine, const auto& theirs) {
    if (was_empty) {
      mine = theirs;
    } else if (!mine.empty() && theirs.size() == other.points.size() && !theirs.empty()) {
      mine.insert(mine.end(), theirs.begin(), theirs.end());
    } else {
      mine.clear();
    }
  };
  merge(source_pixel, other.source_pixel);
  merge(source_view, other.source_view);
  merge(normals, other.normals);
  points.insert(points.end(), other.points.begin(), other.points.end());
  colors.insert(colors.end(), other.colors.begin(), other.colors.end());
}

void PointCloud::push_from(const PointCloud& other, std::size_t i) {
  const bool track_pixel = points.empty() ? !other.source_pixel.empty() : !source_pixel.empty();
  const bool track_view = points.empty() ? !other.source_view.empty() : !source_view.empty();
  const bool track_normals = points.empty() ? !other.normals.empty() : !normals.empty();
  points.push_back(other.points[i]);
  colors.push_back(other.colors[i]);
  if (track_pixel) source_pixel.push_back(other.source_pixel[i]);
  if (track_view) source_view.push_back(other.source_view[i]);
  if (track_normals) normals.push_back(other.normals[i]);
}

namespace {

PointCloud backproject_impl(const DepthMap& depth, const CameraIntrinsics& k, const Image* image) {
  require_depth_matches(depth, k, "backproject");
  if (image != nullptr) {
    if (image->width() != k.width || image->height() != k.height || image->channels() != 3) {
      throw InputError("backproject: image must be RGB and match the intrinsics");
    }
  }
  PointCloud cloud;
  const std::size_t n = depth.valid_count();
  cloud.points.reserve(n);
  cloud.colors.reserve(n);
  cloud.source_pixel.reserve(n);
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const double d = depth.at(u, v);
      if (!(d > 0.0)) continue;
      cloud.points.emplace_back((u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d);
      if (image != nullptr) {
        cloud.colors.emplace_back(image->at(u, v, 0), image->at(u, v, 1), image->at(u, v, 2));
      } else {
        cloud.colors.emplace_back(Eigen::Vector3f::Zero());
      }
      cloud.source_pixel.push_back(static_cast<std::int64_t>(v) * depth.width() + u);
    }
  }
  return cloud;
}

}  // namespace

PointCloud backproject(const DepthMap& depth, const CameraIntrinsics& k, const Image& image) {
  return backproject_impl(depth, k, &image);
}

PointCloud backproject(const DepthMap& depth, const CameraIntrinsics& k) {
  return backproject_impl(depth, k, nullptr);
}

Projection project(const PointCloud& cloud, const CameraIntrinsics& k) {
  Projection out;
  out.points.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    if (!(p.z() > 0.0)) {
      ++out.dropped;
      continue;
    }
    ProjectedPoint q;
    q.u = k.fx * p.x() / p.z() + k.cx;
    q.v = k.fy * p.y() / p.z() + k.cy;
    q.depth = p.z();
    q.color = cloud.colors[i];
    q.index = i;
    out.points.push_back(q);
  }
  return out;
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& theta) {
  cloud.validate();
  if (theta.is_identity()) return cloud;
  PointCloud out = cloud;
  const Eigen::Matrix3d r = theta.rotation();
  const Eigen::Vector3d t = theta.translation();
  for (auto& p : out.points) p = r * p + t;
  for (auto& n : out.normals) n = r * n;
  return out;
}

}  // namespace pcnvs
