#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "pcnvs/errors.hpp"
#include "pcnvs/multiview.hpp"
#include "pcnvs/synth.hpp"
#include "test_support.hpp"

namespace pcnvs {
namespace {

using testing::square_camera;
using testing::unit_cube;

struct RenderedView {
  ViewRecord record;
  synth::RenderResult render;
};

RenderedView make_view(const synth::SceneSpec& scene, const CameraIntrinsics& k, const OrbitPose& o) {
  const RigidTransform w2c = pose_from_orbit(o);
  synth::RenderResult r = synth::render(scene, k, w2c);
  return {ViewRecord{r.image, r.depth, k, invert(w2c)}, r};
}

std::vector<ViewRecord> orbit_views(const synth::SceneSpec& scene, const CameraIntrinsics& k,
                                    const std::vector<double>& azimuths, double el = 20, double r = 3) {
  std::vector<ViewRecord> out;
  for (double az : azimuths) out.push_back(make_view(scene, k, {az, el, r}).record);
  return out;
}

TEST(FuseClouds, SingleViewEqualsBackprojection) {
  const auto k = square_camera(32);
  const ViewRecord v = make_view(unit_cube(), k, {30, 20, 3}).record;
  const PointCloud fused = fuse_clouds({v});
  const PointCloud direct = backproject(v.depth, k, v.image);
  ASSERT_EQ(fused.size(), direct.size());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    EXPECT_LT((fused.points[i] - direct.points[i]).norm(), 1e-12);
    EXPECT_EQ(fused.colors[i], direct.colors[i]);
    EXPECT_EQ(fused.source_pixel[i], direct.source_pixel[i]);
    EXPECT_EQ(fused.source_view[i], 0);
  }
}

TEST(FuseClouds, DuplicateViewDoublesTheCloud) {
  const auto k = square_camera(24);
  const ViewRecord v = make_view(unit_cube(), k, {10, 20, 3}).record;
  const PointCloud fused = fuse_clouds({v, v});
  const std::size_t n = v.depth.valid_count();
  ASSERT_EQ(fused.size(), 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_LT((fused.points[i] - fused.points[n + i]).norm(), 1e-12);
    EXPECT_EQ(fused.source_view[n + i], 1);
  }
}

TEST(FuseClouds, PointCountIsSumOfValidPixels) {
  const auto k = square_camera(24);
  const auto views = orbit_views(unit_cube(), k, {0, 90, 200});
  std::size_t expected = 0;
  for (const auto& v : views) expected += v.depth.valid_count();
  EXPECT_EQ(fuse_clouds(views).size(), expected);
  EXPECT_EQ(fuse_clouds(views, 2).size(), expected);
}

TEST(FuseClouds, PointsLandOnTheSurfaceInTheReferenceFrame) {
  const auto k = square_camera(32);
  const synth::SceneSpec scene = unit_cube();
  std::vector<RenderedView> rendered;
  for (double az : {0.0, 100.0, 230.0}) rendered.push_back(make_view(scene, k, {az, 25, 3}));
  std::vector<ViewRecord> views;
  for (const auto& r : rendered) views.push_back(r.record);
  for (std::size_t ref : {0u, 2u}) {
    const PointCloud fused = fuse_clouds(views, ref);
    const RigidTransform to_world = views[ref].camera_to_world;
    for (std::size_t i = 0; i < fused.size(); ++i) {
      const auto& r = rendered[static_cast<std::size_t>(fused.source_view[i])].render;
      const Eigen::Vector3d truth = r.world_points[static_cast<std::size_t>(fused.source_pixel[i])];
      ASSERT_LT((to_world.apply(fused.points[i]) - truth).norm(), 1e-6);
    }
  }
}

TEST(FuseClouds, NormalsAreRotatedIntoTheReferenceFrame) {
  const auto k = square_camera(32);
  const auto a = make_view(unit_cube(), k, {0, 0, 3});
  const auto b = make_view(unit_cube(), k, {180, 0, 3});
  const PointCloud fused = fuse_clouds({a.record, b.record});
  const RigidTransform to_world = a.record.camera_to_world;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < fused.size(); ++i) {
    if (fused.normals[i].isZero(0.0)) continue;
    const auto& r = fused.source_view[i] == 0 ? a.render : b.render;
    const Eigen::Vector3d world_n = to_world.rotation() * fused.normals[i];
    EXPECT_GT(world_n.dot(r.world_normals[static_cast<std::size_t>(fused.source_pixel[i])]), 0.999);
    ++checked;
  }
  EXPECT_GT(checked, 200u);
}

TEST(FuseClouds, ValidationErrors) {
  EXPECT_THROW(fuse_clouds({}), InputError);
  const auto k = square_camera(16);
  const ViewRecord v = make_view(unit_cube(), k, {0, 0, 3}).record;
  EXPECT_THROW(fuse_clouds({v}, 1), InputError);
  ViewRecord bad = v;
  bad.image = Image(8, 8, 3);
  EXPECT_THROW(fuse_clouds({v, bad}), InputError);
}

TEST(CoarseFromFused, IdentityPoseReproducesSourceView) {
  const auto k = square_camera(32);
  const ViewRecord v = make_view(unit_cube(), k, {40, 20, 3}).record;
  const CoarseView out = coarse_from_fused(fuse_clouds({v}), k, RigidTransform::identity());
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      ASSERT_EQ(out.coverage[static_cast<std::size_t>(y) * 32 + x] != 0, v.depth.valid(x, y));
      for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(out.rgb.at(x, y, c), v.depth.valid(x, y) ? v.image.at(x, y, c) : 0.0f);
      }
    }
  }
}

TEST(CoarseFromFused, MoreViewsNeverCoverLess) {
  const auto k = square_camera(48);
  const synth::SceneSpec scene = unit_cube();
  const auto views = orbit_views(scene, k, {0, 45, 90, 135, 180, 225, 270, 315});
  const RigidTransform target = compose(pose_from_orbit({67.5, 10, 3}), views[0].camera_to_world);
  const std::size_t all = coarse_from_fused(fuse_clouds(views), k, target).covered_count();
  for (std::size_t i = 0; i < views.size(); ++i) {
    const RigidTransform t = compose(pose_from_orbit({67.5, 10, 3}), views[i].camera_to_world);
    EXPECT_GE(all, coarse_from_fused(fuse_clouds({views[i]}), k, t).covered_count());
  }
}

TEST(CoarseFromFused, EmptyCloudGivesEmptyView) {
  const auto k = square_camera(16);
  const CoarseView out = coarse_from_fused(PointCloud{}, k, RigidTransform::identity());
  EXPECT_EQ(out.covered_count(), 0u);
  for (auto v : out.rgb.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Reconstruct360, NeedsTwoViews) {
  const auto k = square_camera(16);
  EXPECT_THROW(reconstruct_360({}), InputError);
  EXPECT_THROW(reconstruct_360(orbit_views(unit_cube(), k, {0})), InputError);
}

TEST(Reconstruct360, EmptySceneGivesEmptyCloud) {
  const auto k = square_camera(16);
  EXPECT_TRUE(reconstruct_360(orbit_views(synth::SceneSpec{}, k, {0, 90, 180})).empty());
}

TEST(Reconstruct360, UnobservedFaceStaysEmpty) {
  const auto k = square_camera(48);
  const auto views = orbit_views(unit_cube(), k, {0, 20, 40, 60}, 0.0, 3.0);
  const PointCloud cloud = reconstruct_360(views);
  ASSERT_FALSE(cloud.empty());
  const RigidTransform to_world = views[0].camera_to_world;
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d w = to_world.apply(p);
    const bool on_far_face_interior =
        w.z() > 0.5 - 1e-6 && std::abs(w.x()) < 0.45 && std::abs(w.y()) < 0.45;
    EXPECT_FALSE(on_far_face_interior) << w.transpose();
  }
}

TEST(Reconstruct360, PruningDropsIsolatedOutlier) {
  const auto k = square_camera(32);
  auto views = orbit_views(unit_cube(), k, {0, 120, 240});
  views[1].depth.set(0, 0, 40.0);
  const PointCloud raw = reconstruct_360(views);
  ReconstructionOptions opts;
  opts.prune_outliers = true;
  const PointCloud pruned = reconstruct_360(views, opts);
  EXPECT_LT(pruned.size(), raw.size());
  for (const auto& p : pruned.points) EXPECT_LT(p.norm(), 10.0);
  bool had_outlier = false;
  for (const auto& p : raw.points) had_outlier |= p.norm() > 10.0;
  EXPECT_TRUE(had_outlier);
}

TEST(NearestNeighbor, MatchesBruteForce) {
  std::mt19937 rng(50);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {0, 1, 2, 17, 300}) {
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), 0.1 * u(rng));
    if (n > 5) pts.push_back(pts[3]);
    const auto nn = nearest_neighbor_distances(pts);
    ASSERT_EQ(nn.size(), pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (j != i) best = std::min(best, (pts[i] - pts[j]).norm());
      }
      EXPECT_EQ(nn[i], best);
    }
  }
}

}  // namespace
}  // namespace pcnvs
