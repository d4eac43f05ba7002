#ifndef CALIB_FUSION_HPP_
#define CALIB_FUSION_HPP_

#include <cstddef>
#include <vector>

#include "calib/geometry.hpp"

namespace calib {

struct FusionParams {
  /// A transformed A point belongs to the overlap region when some B point
  /// lies within this distance.
  double structure_radius = 0.5;
  /// Overlap points farther than this from B count as duplicated structure.
  double hallucination_radius = 0.05;
  int num_bins = 8;
};

/// Mean nearest-neighbour distance of the transformed A points whose range
/// (distance from B's origin) falls in [lower, upper).
struct RangeBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double mean_distance = 0.0;

  friend bool operator==(const RangeBin&, const RangeBin&) = default;
};

/// Numeric stand-ins for the visual checks of a fused cloud: duplicated
/// objects under translation error, divergence growing with range under
/// rotation error.
struct FusionReport {
  std::size_t overlap_count = 0;
  double mean_nn_distance = 0.0;    // over the overlap region
  double median_nn_distance = 0.0;  // over the overlap region
  /// Fraction of the overlap region farther than hallucination_radius from B.
  double duplication_score = 0.0;
  /// Equal-width bins spanning the range of all transformed A points.
  std::vector<RangeBin> range_bins;

  friend bool operator==(const FusionReport&, const FusionReport&) = default;
};

/// `a_in_b` must already be expressed in B's frame (FrameMismatch otherwise).
FusionReport fusion_report(const PointCloud& a_in_b, const PointCloud& b, const FusionParams& params = {});

struct FusionResult {
  PointCloud merged;  // B's points followed by the transformed A points
  FusionReport report;
};

/// Maps A into B's frame with `a_to_b` and merges. Ring data is kept only
/// when both clouds carry the same ring count.
FusionResult fuse(const PointCloud& a, const PointCloud& b, const RigidTransform& a_to_b,
                  const FusionParams& params = {});

/// Small spheres (surface samples) on a regular grid: distinct objects whose
/// duplication is obvious under a translation error.
PointCloud sphere_grid_scene(const FrameId& frame, int nx = 6, int ny = 6, int nz = 3, double spacing = 0.5,
                             double radius = 0.02);

/// Corridor of two walls, floor and ceiling from 1 m to `length` ahead; a
/// rotation error pushes the far walls off their match.
PointCloud corridor_scene(const FrameId& frame, double length = 30.0, double width = 4.0, double height = 3.0,
                          double spacing = 0.1);

}  // namespace calib

#endif  // CALIB_FUSION_HPP_
