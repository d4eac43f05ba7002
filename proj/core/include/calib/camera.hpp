#ifndef CALIB_CAMERA_HPP_
#define CALIB_CAMERA_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "calib/board.hpp"
#include "calib/geometry.hpp"
#include "calib/registration.hpp"

namespace calib {

/// Pinhole intrinsics in pixels; images are assumed rectified.
struct CameraIntrinsics {
  double fx = 700.0;
  double fy = 700.0;
  double cx = 640.0;
  double cy = 360.0;
  double gamma = 0.0;  // skew

  /// Throws InvalidArgument unless fx, fy > 0 and everything is finite.
  void validate() const;
  Mat3 matrix() const;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Board-to-camera transform as reported by a fiducial detector.
struct TagPose {
  RigidTransform pose;
  int tag_id = 0;

  friend bool operator==(const TagPose&, const TagPose&) = default;
};

/// Camera-side corner ordering: up is image-up (−y), viewed from the camera
/// origin, with the tag's +z as tie-breaker when the board is seen edge-on.
CornerOrdering camera_corner_ordering(const TagPose& tag);

/// Model corners mapped into the camera frame, canonically ordered (outer
/// rectangle first, then the cutout).
PointCloud board_corners_camera_frame(const BoardModel& model, const TagPose& tag);

struct Correspondence2D3D {
  Point3 object = Point3::Zero();
  Point2 image;

  friend bool operator==(const Correspondence2D3D&, const Correspondence2D3D&) = default;
};

/// u = (fx·x′ + γ·y′)/z′ + cx, v = fy·y′/z′ + cy with (x′, y′, z′) = R·p + t.
/// Throws BehindCamera when z′ ≤ 1e-9.
Point2 project(const CameraIntrinsics& intr, const RigidTransform& extr, const Point3& p);

/// Pixel distance per pair.
std::vector<double> backprojection_residuals(const CameraIntrinsics& intr, const RigidTransform& extr,
                                             std::span<const Correspondence2D3D> corr);
/// sqrt(mean squared pixel distance). Throws EmptyInput for no pairs.
double backprojection_rmse(const CameraIntrinsics& intr, const RigidTransform& extr,
                           std::span<const Correspondence2D3D> corr);

struct PnpOptions {
  int max_iterations = 50;
  /// Stop when ‖Jᵀr‖ drops below this.
  double gradient_tol = 1e-10;
  FrameId object_frame{"lidar"};
  FrameId camera_frame{"camera"};
};

/// Pose from ≥ 6 correspondences. Initial guesses come from the DLT (points
/// in general position) and a plane homography (near-planar points); each is
/// refined by Gauss–Newton on the pixel reprojection error with a
/// step-halving line search, and the lower-cost result wins. rmse and
/// residuals are in pixels.
///
/// Throws InsufficientPoints, DegenerateConfiguration when no initial guess
/// can be formed, and NoConvergence when the iteration cap is reached.
CalibrationResult pnp_solve(const CameraIntrinsics& intr, std::span<const Correspondence2D3D> corr,
                            const PnpOptions& options = {});

struct PnpRansacParams {
  /// Unset: 15 when at least 20 correspondences are available, else 6.
  std::optional<std::size_t> subset_size;
  int iterations = 10000;
  double inlier_threshold_px = 2.0;
  std::uint64_t seed = 0;
  PnpOptions pnp;
};

std::size_t pnp_ransac_subset_size(const PnpRansacParams& params, std::size_t n);

/// RANSAC around pnp_solve: each iteration fits a random subset (drawn from
/// its own seeded stream), the hypothesis with most inliers wins (ties to the
/// earlier iteration) and the pose is refit on its inliers. The result
/// carries the inlier mask; residuals cover every correspondence.
///
/// Throws InsufficientPoints below the subset size and NoConsensus when the
/// best hypothesis has fewer inliers than the subset size.
CalibrationResult pnp_ransac(const CameraIntrinsics& intr, std::span<const Correspondence2D3D> corr,
                             const PnpRansacParams& params = {});

}  // namespace calib

#endif  // CALIB_CAMERA_HPP_
