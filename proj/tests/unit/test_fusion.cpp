#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "calib/fusion.hpp"

namespace calib {
namespace {

const FrameId kA("lidar_a"), kB("lidar_b");

RigidTransform offset(double dx, double yaw_deg = 0.0) {
  return RigidTransform(RotationMatrix::about_z(deg2rad(yaw_deg)), Vec3(dx, 0, 0), kA, kB);
}

// B is the scene itself; A is the same scene seen from a sensor displaced by
// `truth`, so mapping A with `truth` lands exactly on B.
struct Pair {
  PointCloud a;
  PointCloud b;
  RigidTransform truth;
};

Pair observed(const PointCloud& scene_in_b) {
  const RigidTransform truth(RotationMatrix::about_z(deg2rad(3)), Vec3(0.4, -0.2, 0.1), kA, kB);
  return {apply(invert(truth), scene_in_b), scene_in_b, truth};
}

TEST(Fusion, ExactTransformHasNoDuplication) {
  const Pair p = observed(sphere_grid_scene(kB));
  const FusionResult r = fuse(p.a, p.b, p.truth);
  EXPECT_EQ(r.report.overlap_count, p.a.size());
  EXPECT_LE(r.report.mean_nn_distance, 1e-12);
  EXPECT_LE(r.report.median_nn_distance, 1e-12);
  EXPECT_EQ(r.report.duplication_score, 0.0);
  EXPECT_EQ(r.merged.size(), p.a.size() + p.b.size());
  EXPECT_EQ(r.merged.frame(), kB);
}

TEST(Fusion, TranslationErrorDuplicatesObjects) {
  const Pair p = observed(sphere_grid_scene(kB));
  const RigidTransform bad = compose(RigidTransform(RotationMatrix(), Vec3(0.1, 0, 0), kB, kB), p.truth);
  const FusionReport r = fuse(p.a, p.b, bad).report;
  EXPECT_GT(r.duplication_score, 0.5);
}

TEST(Fusion, RotationErrorGrowsWithRange) {
  const Pair p = observed(corridor_scene(kB));
  const RigidTransform bad = compose(RigidTransform(RotationMatrix::about_z(deg2rad(2)), Vec3::Zero(), kB, kB), p.truth);
  const FusionReport r = fuse(p.a, p.b, bad).report;
  ASSERT_EQ(r.range_bins.size(), 8u);
  for (std::size_t i = 1; i < r.range_bins.size(); ++i) {
    EXPECT_GT(r.range_bins[i].mean_distance, r.range_bins[i - 1].mean_distance) << "bin " << i;
  }
}

TEST(Fusion, BinsCoverTheDataRange) {
  const Pair p = observed(corridor_scene(kB));
  const FusionReport r = fuse(p.a, p.b, p.truth).report;
  std::size_t total = 0;
  double lo = 1e300, hi = 0;
  for (const Point3& q : p.b.points()) {
    lo = std::min(lo, q.norm());
    hi = std::max(hi, q.norm());
  }
  EXPECT_NEAR(r.range_bins.front().lower, lo, 1e-9);
  EXPECT_NEAR(r.range_bins.back().upper, hi, 1e-9);
  for (std::size_t i = 0; i < r.range_bins.size(); ++i) {
    total += r.range_bins[i].count;
    EXPECT_GE(r.range_bins[i].mean_distance, 0.0);
    if (i > 0) EXPECT_EQ(r.range_bins[i].lower, r.range_bins[i - 1].upper);
  }
  EXPECT_EQ(total, p.a.size());
}

TEST(Fusion, FrameMismatchAndEmptyInput) {
  const PointCloud b = sphere_grid_scene(kB);
  try {
    fusion_report(sphere_grid_scene(kA), b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFrameMismatch);
  }
  try {
    fuse(sphere_grid_scene(kB), b, offset(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFrameMismatch);
  }
  try {
    fusion_report(PointCloud(kB, {}), b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(Fusion, MergedCloudKeepsRingsOnlyWhenCompatible) {
  const PointCloud a(kA, {Point3(1, 0, 0)}, {2}, 16);
  const PointCloud b16(kB, {Point3(1, 0, 0)}, {5}, 16);
  const PointCloud b32(kB, {Point3(1, 0, 0)}, {5}, 32);
  EXPECT_EQ(fuse(a, b16, offset(0)).merged.rings(), (std::vector<int>{5, 2}));
  EXPECT_FALSE(fuse(a, b32, offset(0)).merged.has_rings());
}

TEST(Scenes, SizesAndFrames) {
  const PointCloud s = sphere_grid_scene(kB);
  EXPECT_EQ(s.size(), 6u * 6u * 3u * 60u);
  EXPECT_EQ(s.frame(), kB);
  EXPECT_GT(corridor_scene(kB).size(), 1000u);
}

}  // namespace
}  // namespace calib
