#include "calib/pipeline.hpp"

#include <string>
#include <utility>

namespace calib {

bool Box3::contains(const Point3& p) const {
  return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
}

PointCloud crop(const PointCloud& cloud, const Box3& box) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (box.contains(cloud[i])) keep.push_back(i);
  return cloud.select(keep);
}

namespace {

template <typename F>
auto staged(std::size_t board, const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), "board " + std::to_string(board) + ", " + stage + ": " + e.detail());
  }
}

}  // namespace

ScanCorrespondences scan_correspondences(std::span<const BoardObservation> boards, const ClusterParams& cluster,
                                         const ExtractionParams& extraction) {
  if (boards.empty()) throw Error(ErrorCode::kEmptyInput, "no boards observed");
  const FrameId lidar = boards.front().lidar_points.frame();
  const FrameId camera = boards.front().tag.pose.to_frame();

  std::vector<Point3> src, tgt;
  std::vector<ExtractedBoard> extracted;
  bool low = false;
  for (std::size_t b = 0; b < boards.size(); ++b) {
    const BoardObservation& o = boards[b];
    if (!(o.lidar_points.frame() == lidar) || !(o.tag.pose.to_frame() == camera)) {
      throw Error(ErrorCode::kFrameMismatch, "board " + std::to_string(b) + " is observed in different frames");
    }
    std::vector<EdgeCluster> clusters = o.clusters ? *o.clusters : staged(b, "cluster", [&] {
      return cluster_edges(o.lidar_points, o.model, cluster);
    });
    ExtractedBoard eb = staged(b, "extract", [&] { return extract_board(clusters, o.model, extraction); });
    const PointCloud cam = staged(b, "tag corners", [&] { return board_corners_camera_frame(o.model, o.tag); });
    src.insert(src.end(), eb.corners.begin(), eb.corners.end());
    tgt.insert(tgt.end(), cam.points().begin(), cam.points().end());
    low = low || eb.low_confidence;
    extracted.push_back(std::move(eb));
  }
  return ScanCorrespondences{CorrespondenceSet(PointCloud(lidar, std::move(src)), PointCloud(camera, std::move(tgt))),
                             std::move(extracted), low};
}

}  // namespace calib
