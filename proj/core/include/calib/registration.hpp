#ifndef CALIB_REGISTRATION_HPP_
#define CALIB_REGISTRATION_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "calib/geometry.hpp"

namespace calib {

/// Index-paired point sets: source[i] (P, e.g. LiDAR frame) corresponds to
/// target[i] (Q, e.g. camera frame).
class CorrespondenceSet {
 public:
  /// Throws InvalidArgument on unequal lengths and FrameMismatch when both
  /// clouds claim the same frame.
  CorrespondenceSet(PointCloud source, PointCloud target);

  const PointCloud& source() const noexcept { return source_; }
  const PointCloud& target() const noexcept { return target_; }
  std::size_t size() const noexcept { return source_.size(); }

  friend bool operator==(const CorrespondenceSet&, const CorrespondenceSet&) = default;

 private:
  PointCloud source_;
  PointCloud target_;
};

enum class Method { kKabsch, kIcp, kPnp, kPnpRansac };

std::string_view to_string(Method m) noexcept;
/// Inverse of to_string; throws InvalidArgument for unknown names.
Method method_from_string(std::string_view name);

struct Diagnostics {
  /// Smallest-to-largest singular value ratio of the cross-covariance is
  /// small (rotation weakly observable) but above the rejection threshold.
  bool near_degenerate = false;
  /// The determinant correction was applied to avoid a reflection.
  bool reflection_corrected = false;
  /// Fewer than 3 points supported some fitted edge.
  bool low_confidence = false;
  int iterations = 0;
  bool converged = true;

  friend bool operator==(const Diagnostics&, const Diagnostics&) = default;
};

/// Estimated transform plus residual statistics. For the 3D solvers
/// residuals and rmse are in meters; for the PnP solvers they are
/// back-projection errors in pixels.
struct CalibrationResult {
  RigidTransform transform;
  double rmse = 0.0;
  std::vector<double> per_point_residuals;
  Method method = Method::kKabsch;
  Diagnostics diagnostics;
  /// Empty unless a robust estimator produced one.
  std::vector<bool> inlier_mask;

  friend bool operator==(const CalibrationResult&, const CalibrationResult&) = default;
};

/// sqrt(mean(r²)); 0 for an empty list.
double rms(std::span<const double> residuals);

/// Closed-form least-squares rigid alignment of known correspondences
/// (Kabsch). With X = P − P̄, Y = Q − Q̄ and X·Yᵀ = U·D·Vᵀ the rotation is
/// V·C·Uᵀ where C = diag(1, 1, sign det(V·Uᵀ)) keeps det(R) = +1, and
/// t = Q̄ − R·P̄.
///
/// Throws DegenerateGeometry for fewer than 3 pairs or when the second
/// singular value is below 1e-10 of the largest (collinear or coincident
/// points), and NonFinite on non-finite input.
CalibrationResult kabsch_solve(const CorrespondenceSet& c);

struct IcpParams {
  int max_iterations = 100;
  /// Convergence when |rmse_k − rmse_{k−1}| falls below this (meters).
  double convergence_tol = 1e-6;
  /// Pairs farther apart than this are dropped; unset keeps every pair.
  std::optional<double> max_correspondence_distance;
  /// Source→target starting transform; identity when unset.
  std::optional<RigidTransform> initial_guess;
};

/// Point-to-point ICP: exact nearest-neighbour pairing from the transformed
/// source into the target, then kabsch_solve on the pairs, repeated until the
/// rmse change drops below the tolerance or the iteration cap is hit. The
/// reported rmse is over the pairing used for the final solve. When the
/// pairing collapses onto collinear targets the current estimate is returned
/// with converged = false.
CalibrationResult icp_solve(const PointCloud& source, const PointCloud& target, const IcpParams& params = {});

struct AveragedExtrinsics {
  RigidTransform transform;
  Vec3 mean_translation = Vec3::Zero();
  UnitQuaternion mean_rotation;
  std::size_t sample_count = 0;
  std::vector<CalibrationResult> per_run_results;

  friend bool operator==(const AveragedExtrinsics&, const AveragedExtrinsics&) = default;
};

/// Arithmetic mean of translations and normalized mean of quaternions after
/// flipping each into the first run's hemisphere.
AveragedExtrinsics average_runs(std::span<const CalibrationResult> runs);

/// Running averages after 1, 2, ..., N runs (the convergence trace).
std::vector<RigidTransform> running_average(std::span<const CalibrationResult> runs);

/// sqrt((1/n)·Σ‖R·Pᵢ + t − Qᵢ‖²). Frames of the transform must match the set.
double registration_rmse(const CorrespondenceSet& c, const RigidTransform& t);

/// Per-pair residual norms ‖R·Pᵢ + t − Qᵢ‖.
std::vector<double> registration_residuals(const CorrespondenceSet& c, const RigidTransform& t);

/// Component-wise mean of Qᵢ − Pᵢ: the naive no-rotation translation guess.
Point3 mean_offset(const CorrespondenceSet& c);

}  // namespace calib

#endif  // CALIB_REGISTRATION_HPP_
