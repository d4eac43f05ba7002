#ifndef CALIB_LIDAR_EXTRACTION_HPP_
#define CALIB_LIDAR_EXTRACTION_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "calib/board.hpp"
#include "calib/geometry.hpp"

namespace calib {

/// Infinite 3D line. The direction is unit length and canonically oriented
/// (first component with magnitude above 1e-12 is positive).
class Line3 {
 public:
  Line3(const Point3& point, const Vec3& direction);

  const Point3& point() const noexcept { return point_; }
  const Vec3& direction() const noexcept { return direction_; }
  double distance(const Point3& p) const;

 private:
  Point3 point_;
  Vec3 direction_;
};

struct LineSegment3 {
  Point3 a = Point3::Zero();
  Point3 b = Point3::Zero();

  double length() const { return (a - b).norm(); }
  Point3 midpoint() const { return (a + b) / 2.0; }
};

enum class EdgeId { kTopLeft, kTopRight, kBottomLeft, kBottomRight };
enum class Rectangle { kOuter, kInner };

std::string_view to_string(EdgeId e) noexcept;
/// Accepts "top-left", ..., optionally prefixed with "inner-" (which sets
/// `rect`); throws InvalidArgument otherwise.
EdgeId edge_from_string(std::string_view name, Rectangle* rect);

/// Points of one board edge. `source_indices` refer to the cloud the cluster
/// was cut from.
struct EdgeCluster {
  EdgeId edge = EdgeId::kTopLeft;
  Rectangle rect = Rectangle::kOuter;
  PointCloud points;
  std::vector<std::size_t> source_indices;
};

struct RansacLineParams {
  double threshold = 0.01;  // meters
  int iterations = 1000;
  /// Consensus needs max(2, ceil(fraction · n)) inliers.
  double min_inlier_fraction = 0.5;
  std::uint64_t seed = 0;
};

struct LineFit {
  Line3 line;
  std::vector<bool> inliers;
  std::size_t inlier_count = 0;
};

/// Least-squares line (centroid + principal direction). Needs ≥ 2 points.
Line3 fit_line_least_squares(std::span<const Point3> points);

/// RANSAC over 2-point hypotheses; best by inlier count, ties to the lower
/// total inlier distance, then refit to all inliers. Deterministic per seed:
/// iteration i draws from its own stream derived from (seed, i).
LineFit ransac_fit_line(const PointCloud& points, const RansacLineParams& params = {});

/// Mutually perpendicular segment between two lines; zero length when they
/// intersect. Throws ParallelLines when |d1·d2| > 1 − 1e-9.
LineSegment3 shortest_connecting_segment(const Line3& l1, const Line3& l2);

struct CornerEstimate {
  Point3 corner = Point3::Zero();
  double gap = 0.0;
};

/// Midpoint and length of the shortest connecting segment. Symmetric in its
/// arguments.
CornerEstimate corner_from_edges(const Line3& l1, const Line3& l2);

struct ExtractionParams {
  RansacLineParams ransac;
  /// Reject the board if any edge length deviates more than this from the
  /// model (meters).
  double reject_threshold = 0.05;
  CornerOrdering ordering;  // LiDAR: up = +z, viewpoint = sensor origin
};

struct ExtractedBoard {
  /// Outer corners then (hollow boards) inner corners, each canonical.
  std::vector<Point3> corners;
  /// Fitted lines in cluster order.
  std::vector<Line3> edge_lines;
  /// Shortest-segment length at each corner (same order as corners).
  std::vector<double> gap_lengths;
  /// |estimated − expected| for each edge between consecutive canonical
  /// corners.
  std::vector<double> edge_length_errors;
  bool low_confidence = false;
};

/// Fits each edge, intersects adjacent edges and checks edge lengths against
/// the model. Expects 4 clusters (solid) or 8 (hollow, outer and inner).
ExtractedBoard extract_board(std::span<const EdgeCluster> clusters, const BoardModel& model,
                             const ExtractionParams& params = {});

struct ClusterParams {
  CornerOrdering ordering;
  /// Consecutive returns of a ring farther apart than this start a new run
  /// (cutout gap).
  double segment_gap = 0.05;
  /// Without ring data: points this close to the planar hull are boundary.
  double hull_band = 0.01;
};

/// Splits the points of one pre-segmented board into edge clusters. Boundary
/// candidates are ring run endpoints (or hull-band points without rings);
/// left/right sides are split at the extreme left/right candidates. Throws
/// TooSparse if any edge gets fewer than 2 points.
std::vector<EdgeCluster> cluster_edges(const PointCloud& board_points, const BoardModel& model,
                                       const ClusterParams& params = {});

/// Builds clusters from manual `point_index → edge` labels.
std::vector<EdgeCluster> clusters_from_labels(const PointCloud& cloud,
                                              std::span<const std::pair<std::size_t, std::string>> labels,
                                              const BoardModel& model);

}  // namespace calib

#endif  // CALIB_LIDAR_EXTRACTION_HPP_
