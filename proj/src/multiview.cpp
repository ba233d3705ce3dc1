#include "pcnvs/multiview.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "pcnvs/errors.hpp"

namespace pcnvs {

void ViewRecord::validate() const {
  intrinsics.validate();
  require_depth_matches(depth, intrinsics, "view record");
  if (image.width() != intrinsics.width || image.height() != intrinsics.height ||
      image.channels() != 3) {
    throw InputError("view record: image must be RGB and match the intrinsics");
  }
}

PointCloud fuse_clouds(const std::vector<ViewRecord>& views, std::size_t reference) {
  if (views.empty()) throw InputError("fuse_clouds: no views given");
  if (reference >= views.size()) throw InputError("fuse_clouds: reference index out of range");
  const RigidTransform world_to_reference = invert(views[reference].camera_to_world);

  PointCloud fused;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const ViewRecord& view = views[i];
    view.validate();
    PointCloud cloud = attach_normals(backproject(view.depth, view.intrinsics, view.image),
                                      estimate_normals(view.depth, view.intrinsics));
    cloud.source_view.assign(cloud.size(), static_cast<std::int32_t>(i));
    fused.append(transform_cloud(cloud, compose(world_to_reference, view.camera_to_world)));
  }
  return fused;
}

CoarseView coarse_from_fused(const PointCloud& cloud, const CameraIntrinsics& k,
                             const RigidTransform& target_pose, const CoarseViewOptions& opts) {
  return render_cloud(cloud, k, target_pose, opts);
}

namespace {

struct Cell {
  std::int64_t x, y, z;
  bool operator==(const Cell&) const = default;
};

struct CellHash {
  std::size_t operator()(const Cell& c) const {
    return static_cast<std::size_t>(c.x) * 73856093u ^ static_cast<std::size_t>(c.y) * 19349663u ^
           static_cast<std::size_t>(c.z) * 83492791u;
  }
};

}  // namespace

std::vector<double> nearest_neighbor_distances(const std::vector<Eigen::Vector3d>& points) {
  const std::size_t n = points.size();
  std::vector<double> out(n, std::numeric_limits<double>::infinity());
  if (n < 2) return out;

  Eigen::Vector3d lo = points[0];
  Eigen::Vector3d hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Cell size targets a handful of points per occupied cell for surface-like clouds.
  const double extent = (hi - lo).maxCoeff();
  const double cell = extent > 0.0 ? extent / std::max(1.0, std::sqrt(static_cast<double>(n))) : 1.0;

  std::unordered_map<Cell, std::vector<std::size_t>, CellHash> grid;
  auto cell_of = [&](const Eigen::Vector3d& p) {
    return Cell{static_cast<std::int64_t>(std::floor((p.x() - lo.x()) / cell)),
                static_cast<std::int64_t>(std::floor((p.y() - lo.y()) / cell)),
                static_cast<std::int64_t>(std::floor((p.z() - lo.z()) / cell))};
  };
  for (std::size_t i = 0; i < n; ++i) grid[cell_of(points[i])].push_back(i);

  const auto max_ring = static_cast<std::int64_t>(std::ceil(extent / cell)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Cell c = cell_of(points[i]);
    double best2 = std::numeric_limits<double>::infinity();
    // Grow the search shell until the best hit is closer than the shell's inner radius.
    for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
      for (std::int64_t dz = -ring; dz <= ring; ++dz) {
        for (std::int64_t dy = -ring; dy <= ring; ++dy) {
          for (std::int64_t dx = -ring; dx <= ring; ++dx) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
            auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
            if (it == grid.end()) continue;
            for (std::size_t j : it->second) {
              if (j == i) continue;
              best2 = std::min(best2, (points[j] - points[i]).squaredNorm());
            }
          }
        }
      }
      const double covered = ring * cell;
      if (best2 <= covered * covered) break;
    }
    out[i] = std::sqrt(best2);
  }
  return out;
}

PointCloud reconstruct_360(const std::vector<ViewRecord>& views, const ReconstructionOptions& opts) {
  if (views.size() < 2) throw InputError("reconstruct_360: needs at least two views");
  PointCloud fused = fuse_clouds(views, 0);
  if (!opts.prune_outliers || fused.size() < 2) return fused;

  const std::vector<double> nn = nearest_neighbor_distances(fused.points);
  const double mean = std::accumulate(nn.begin(), nn.end(), 0.0) / static_cast<double>(nn.size());
  double var = 0.0;
  for (double d : nn) var += (d - mean) * (d - mean);
  const double threshold = mean + opts.sigmas * std::sqrt(var / static_cast<double>(nn.size()));

  PointCloud kept;
  for (std::size_t i = 0; i < fused.size(); ++i) {
    if (nn[i] <= threshold) kept.push_from(fused, i);
  }
  return kept;
}

}  // namespace pcnvs
