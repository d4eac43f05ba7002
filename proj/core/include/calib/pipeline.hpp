#ifndef CALIB_PIPELINE_HPP_
#define CALIB_PIPELINE_HPP_

#include <optional>
#include <span>
#include <vector>

#include "calib/camera.hpp"
#include "calib/lidar_extraction.hpp"
#include "calib/registration.hpp"

namespace calib {

/// Axis-aligned region of interest, meters, in the cloud's frame.
struct Box3 {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Point3& p) const;
};

/// Points of `cloud` inside `box`, in their original order.
PointCloud crop(const PointCloud& cloud, const Box3& box);

/// One board seen by both sensors in a single scan.
struct BoardObservation {
  BoardModel model;
  PointCloud lidar_points;  // segmented board returns
  TagPose tag;
  /// Manual edge labels; automatic clustering when unset.
  std::optional<std::vector<EdgeCluster>> clusters;
};

struct ScanCorrespondences {
  /// LiDAR corners (source) and camera corners (target), boards in input
  /// order, outer corners before cutout corners, each canonical.
  CorrespondenceSet pairs;
  std::vector<ExtractedBoard> boards;
  bool low_confidence = false;
};

/// Extracts LiDAR corners and builds camera corners from tag poses for every
/// board. Errors are rethrown with the board index and stage prefixed.
ScanCorrespondences scan_correspondences(std::span<const BoardObservation> boards, const ClusterParams& cluster = {},
                                         const ExtractionParams& extraction = {});

}  // namespace calib

#endif  // CALIB_PIPELINE_HPP_
