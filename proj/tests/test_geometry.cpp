#include <gtest/gtest.h>

#include <cmath>

#include "pcnvs/errors.hpp"
#include "pcnvs/flow.hpp"
#include "pcnvs/point_cloud.hpp"
#include "test_support.hpp"

namespace pcnvs {
namespace {

using testing::random_depth;
using testing::random_image;
using testing::random_intrinsics;
using testing::random_pose;

const CameraIntrinsics kUnit{1.0, 1.0, 0.0, 0.0, 4, 4};

TEST(DepthMap, RejectsNegativeAndNonFiniteValues) {
  EXPECT_THROW(DepthMap(2, 1, {1.0, -1.0}), InputError);
  EXPECT_THROW(DepthMap(2, 1, {1.0, NAN}), InputError);
  EXPECT_THROW(DepthMap(2, 1, {1.0, INFINITY}), InputError);
  EXPECT_THROW(DepthMap(2, 2, {1.0, 1.0}), InputError);
  DepthMap d(2, 2);
  EXPECT_THROW(d.set(0, 0, -0.5), InputError);
  d.set(1, 1, 3.0);
  EXPECT_EQ(d.valid_count(), 1u);
  EXPECT_TRUE(d.valid(1, 1));
  EXPECT_FALSE(d.valid(0, 0));
}

TEST(Backproject, PrincipalRay) {
  DepthMap d(4, 4);
  d.set(0, 0, 1.0);
  const PointCloud c = backproject(d, kUnit);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0], Eigen::Vector3d(0, 0, 1));
}

TEST(Backproject, HandMultipliedPixel) {
  DepthMap d(4, 4);
  d.set(2, 1, 2.0);
  const PointCloud c = backproject(d, kUnit);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0], Eigen::Vector3d(4, 2, 2));
  EXPECT_EQ(c.source_pixel[0], 1 * 4 + 2);
}

TEST(Backproject, AllInvalidGivesEmptyCloud) {
  EXPECT_TRUE(backproject(DepthMap(4, 4), kUnit).empty());
}

TEST(Backproject, CopiesColorsInRowMajorOrder) {
  std::mt19937 rng(4);
  const DepthMap d = random_depth(rng, 5, 3, 1.0, 2.0, 0.3);
  const Image img = random_image<float>(rng, 5, 3);
  const CameraIntrinsics k{2.0, 2.0, 2.0, 1.0, 5, 3};
  const PointCloud c = backproject(d, k, img);
  ASSERT_EQ(c.size(), d.valid_count());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const int x = static_cast<int>(c.source_pixel[i] % 5);
    const int y = static_cast<int>(c.source_pixel[i] / 5);
    EXPECT_TRUE(d.valid(x, y));
    for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(c.colors[i][ch], img.at(x, y, ch));
    if (i > 0) EXPECT_GT(c.source_pixel[i], c.source_pixel[i - 1]);
  }
}

TEST(Backproject, DimensionMismatchIsInputError) {
  EXPECT_THROW(backproject(DepthMap(3, 4), kUnit), InputError);
  EXPECT_THROW(backproject(DepthMap(4, 4), kUnit, Image(4, 3, 3)), InputError);
  EXPECT_THROW(backproject(DepthMap(4, 4), kUnit, Image(4, 4, 1)), InputError);
}

TEST(Project, Examples) {
  PointCloud c;
  c.points = {{0, 0, 1}, {4, 2, 2}, {0, 0, -1}, {1, 1, 0}};
  c.colors.assign(4, Eigen::Vector3f(0.1f, 0.2f, 0.3f));
  const Projection p = project(c, kUnit);
  ASSERT_EQ(p.points.size(), 2u);
  EXPECT_EQ(p.dropped, 2u);
  EXPECT_EQ(p.points[0].u, 0.0);
  EXPECT_EQ(p.points[0].v, 0.0);
  EXPECT_EQ(p.points[0].depth, 1.0);
  EXPECT_EQ(p.points[1].u, 2.0);
  EXPECT_EQ(p.points[1].v, 1.0);
  EXPECT_EQ(p.points[1].depth, 2.0);
  EXPECT_EQ(p.points[1].index, 1u);
  EXPECT_EQ(p.points[1].color, Eigen::Vector3f(0.1f, 0.2f, 0.3f));
}

TEST(Project, RoundTripRandomDepth) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const CameraIntrinsics k = random_intrinsics(rng, 32, 24);
    const DepthMap d = random_depth(rng, 32, 24, 0.5, 10.0, 0.1);
    const PointCloud c = backproject(d, k);
    const Projection p = project(c, k);
    ASSERT_EQ(p.points.size(), c.size());
    for (const auto& q : p.points) {
      const auto px = c.source_pixel[q.index];
      EXPECT_NEAR(q.u, static_cast<double>(px % 32), 1e-9);
      EXPECT_NEAR(q.v, static_cast<double>(px / 32), 1e-9);
      EXPECT_NEAR(q.depth, d.values()[px], 1e-12);
    }
  }
}

TEST(TransformCloud, IdentityIsBitExact) {
  std::mt19937 rng(6);
  const PointCloud c = backproject(random_depth(rng, 8, 8), random_intrinsics(rng, 8, 8));
  const PointCloud t = transform_cloud(c, RigidTransform::identity());
  EXPECT_EQ(t.points, c.points);
  EXPECT_EQ(t.colors, c.colors);
  EXPECT_EQ(t.source_pixel, c.source_pixel);
}

TEST(TransformCloud, PureTranslation) {
  PointCloud c;
  c.points = {{0, 0, 1}};
  c.colors = {Eigen::Vector3f(1, 0, 0)};
  const PointCloud t = transform_cloud(c, RigidTransform::translation({1, 0, 0}));
  EXPECT_EQ(t.points[0], Eigen::Vector3d(1, 0, 1));
  EXPECT_EQ(t.colors[0], Eigen::Vector3f(1, 0, 0));
}

TEST(TransformCloud, QuarterYaw) {
  // Rotation by +90 degrees about +Y: (1,0,0) -> (cos 90, 0, -sin 90).
  PointCloud c;
  c.points = {{1, 0, 0}};
  c.colors = {Eigen::Vector3f::Zero()};
  const PointCloud t = transform_cloud(c, RigidTransform::rotation({0, 1, 0}, M_PI / 2));
  EXPECT_NEAR((t.points[0] - Eigen::Vector3d(0, 0, -1)).norm(), 0.0, 1e-15);
}

TEST(TransformCloud, PreservesPairwiseDistances) {
  std::mt19937 rng(7);
  const PointCloud c = backproject(random_depth(rng, 10, 10), random_intrinsics(rng, 10, 10));
  const PointCloud t = transform_cloud(c, random_pose(rng, M_PI, 3.0));
  for (std::size_t i = 0; i < c.size(); i += 7) {
    for (std::size_t j = i + 1; j < c.size(); j += 5) {
      EXPECT_NEAR((t.points[i] - t.points[j]).norm(), (c.points[i] - c.points[j]).norm(), 1e-9);
    }
  }
}

TEST(TransformCloud, RotatesNormalsWithoutTranslating) {
  PointCloud c;
  c.points = {{0, 0, 1}};
  c.colors = {Eigen::Vector3f::Zero()};
  c.normals = {{1, 0, 0}};
  const PointCloud t = transform_cloud(
      c, compose(RigidTransform::translation({5, 5, 5}), RigidTransform::rotation({0, 0, 1}, M_PI / 2)));
  EXPECT_NEAR((t.normals[0] - Eigen::Vector3d(0, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(PointCloud, ValidateCatchesMismatch) {
  PointCloud c;
  c.points = {{0, 0, 1}, {1, 1, 1}};
  c.colors = {Eigen::Vector3f::Zero()};
  EXPECT_THROW(c.validate(), InputError);
  c.colors.push_back(Eigen::Vector3f::Zero());
  EXPECT_NO_THROW(c.validate());
  c.points[1].x() = NAN;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(FlowField, IdentityIsExact) {
  std::mt19937 rng(8);
  const DepthMap d = random_depth(rng, 16, 12, 0.5, 10.0, 0.2);
  const FlowField f = flow_field(d, random_intrinsics(rng, 16, 12), RigidTransform::identity());
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 16; ++x) {
      const std::size_t i = f.index(x, y);
      ASSERT_EQ(f.valid[i] != 0, d.valid(x, y));
      if (!f.valid[i]) continue;
      EXPECT_EQ(f.u[i], x);
      EXPECT_EQ(f.v[i], y);
      EXPECT_EQ(f.depth[i], d.at(x, y));
    }
  }
}

TEST(FlowField, HalvingDepthDoublesOffsetFromPrincipalPoint) {
  // Constant depth 2, translation (0,0,-1): every point moves to Z = 1, so
  // u' - cx = 2 (u - cx) and v' - cy = 2 (v - cy).
  const CameraIntrinsics k{3.0, 2.0, 1.5, 2.0, 4, 4};
  const DepthMap d(4, 4, std::vector<double>(16, 2.0));
  const FlowField f = flow_field(d, k, RigidTransform::translation({0, 0, -1}));
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const std::size_t i = f.index(x, y);
      ASSERT_TRUE(f.valid[i]);
      EXPECT_NEAR(f.u[i], 1.5 + 2.0 * (x - 1.5), 1e-12);
      EXPECT_NEAR(f.v[i], 2.0 + 2.0 * (y - 2.0), 1e-12);
      EXPECT_NEAR(f.depth[i], 1.0, 1e-15);
    }
  }
}

TEST(FlowField, PointsBehindTargetAreInvalid) {
  const DepthMap d(4, 4, std::vector<double>(16, 1.0));
  const FlowField f = flow_field(d, kUnit, RigidTransform::translation({0, 0, -1.0}));
  for (auto v : f.valid) EXPECT_FALSE(v);
}

TEST(FlowField, MatchesChainedBackprojectTransformProject) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const CameraIntrinsics k = random_intrinsics(rng, 24, 20);
    const DepthMap d = random_depth(rng, 24, 20, 0.5, 10.0, 0.1);
    const RigidTransform t1 = random_pose(rng, 0.3, 0.3);
    const RigidTransform t2 = random_pose(rng, 0.3, 0.3);
    const FlowField f = flow_field(d, k, compose(t2, t1));
    const PointCloud chained = transform_cloud(transform_cloud(backproject(d, k), t1), t2);
    const Projection p = project(chained, k);
    std::size_t matched = 0;
    for (const auto& q : p.points) {
      const auto px = static_cast<std::size_t>(chained.source_pixel[q.index]);
      ASSERT_TRUE(f.valid[px]);
      EXPECT_LT(std::abs(f.u[px] - q.u), 1e-9);
      EXPECT_LT(std::abs(f.v[px] - q.v), 1e-9);
      ++matched;
    }
    std::size_t valid = 0;
    for (auto v : f.valid) valid += v;
    EXPECT_EQ(valid, matched);
  }
}

TEST(FlowField, DimensionMismatchIsInputError) {
  EXPECT_THROW(flow_field(DepthMap(3, 3), kUnit, RigidTransform::identity()), InputError);
}

}  // namespace
}  // namespace pcnvs
