#ifndef CALIB_SIMULATOR_HPP_
#define CALIB_SIMULATOR_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "calib/board.hpp"
#include "calib/camera.hpp"
#include "calib/geometry.hpp"
#include "calib/lidar_extraction.hpp"
#include "calib/registration.hpp"

namespace calib {

/// Spinning multi-beam LiDAR. Defaults follow a VLP-16: 16 rings from −15°
/// to +15° in 2° steps, 0.2° azimuth resolution.
struct LidarModel {
  int num_rings = 16;
  std::vector<double> vertical_angles_deg = default_vertical_angles();
  double azimuth_step_deg = 0.2;
  double range_noise_sigma = 0.003;  // meters, along the ray
  double max_range = 100.0;
  std::uint64_t seed = 0;

  static std::vector<double> default_vertical_angles();
  /// Throws InvalidArgument unless angles are strictly increasing and there
  /// is one per ring.
  void validate() const;
};

struct BoardPlacement {
  BoardModel model;
  /// world → board frame.
  RigidTransform world_to_board;
  int tag_id = 0;
};

/// Boards and sensors in a shared world frame (x forward, z up).
struct ScenePlacement {
  std::vector<BoardPlacement> boards;
  RigidTransform lidar_pose;   // world → lidar
  RigidTransform camera_pose;  // world → camera

  /// compose(camera_pose, invert(lidar_pose)).
  RigidTransform lidar_to_camera() const;
  /// board → camera for board i.
  RigidTransform board_to_camera(std::size_t i) const;
  /// board → lidar for board i.
  RigidTransform board_to_lidar(std::size_t i) const;
};

/// Pose of a board whose tag center sits at `center` (world), facing the
/// point `look_at` (its +z toward it), rotated in-plane by `in_plane_deg`
/// from the upright orientation (+y along world up).
RigidTransform board_pose_facing(const Point3& center, const Point3& look_at, double in_plane_deg,
                                 const FrameId& board_frame);

/// Camera pose (world → camera) for a camera at `position` looking along the
/// world +x axis, perturbed by small roll/pitch/yaw (degrees, about the
/// world axes).
RigidTransform camera_pose_at(const Point3& position, const EulerAnglesXYZ& tilt_deg);

/// Board whose center (not tag center) sits at `center`, facing `look_at`,
/// rotated in-plane by `in_plane_deg`. Its frame is "board<tag_id>".
BoardPlacement place_board(const BoardModel& model, const Point3& center, const Point3& look_at, double in_plane_deg,
                           int tag_id);

/// Two hollow boards and one solid board, diamond-tilted, about 2 m ahead
/// at azimuths −25°, 0° and +25°: 20 corners in total.
ScenePlacement default_scene();

CameraIntrinsics default_camera();

struct PointLabel {
  int board_id = -1;
  /// 0–3 outer edges, 4–7 cutout edges (edge k joins model corners k and
  /// k+1), −1 for interior returns.
  int edge = -1;

  friend bool operator==(const PointLabel&, const PointLabel&) = default;
};

struct LidarScan {
  PointCloud cloud;  // lidar frame, ring-major then azimuth
  std::vector<PointLabel> labels;
};

/// Ray-casts every (ring, azimuth) beam against the boards, keeping the
/// nearest hit inside a board and outside its cutout, with Gaussian range
/// noise along the ray. Points within `edge_band` of a board boundary carry
/// that edge's label.
LidarScan simulate_lidar_scan(const ScenePlacement& scene, const LidarModel& model, double edge_band = 0.01);

struct TagNoise {
  double pose_rot_sigma_deg = 0.2;
  double pose_trans_sigma_m = 0.003;
  double pixel_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct TagObservation {
  std::vector<TagPose> exact;
  std::vector<TagPose> noisy;
  /// Per board, canonical camera-frame corners projected with pixel noise.
  std::vector<std::vector<Point2>> pixels;
  /// Per board, the exact canonical camera-frame corners.
  std::vector<PointCloud> exact_corners;
};

/// Throws BehindCamera when a board corner is not in front of the camera.
TagObservation simulate_tag_observation(const ScenePlacement& scene, const CameraIntrinsics& camera,
                                        const TagNoise& noise);

struct PipelineParams {
  ClusterParams cluster;
  ExtractionParams extraction;
  bool run_icp = false;
  bool run_pnp = false;
};

struct MethodError {
  double rotation_deg = 0.0;
  double translation_m = 0.0;
};

MethodError transform_error(const RigidTransform& estimate, const RigidTransform& truth);

struct EndToEndReport {
  RigidTransform truth;
  /// LiDAR corners (source) paired with camera corners from the noisy tags.
  CorrespondenceSet pairs;
  /// LiDAR corners paired with their noisy pixel observations.
  std::vector<Correspondence2D3D> pixel_pairs;
  CalibrationResult kabsch;
  MethodError kabsch_error;
  std::optional<CalibrationResult> icp;
  std::optional<MethodError> icp_error;
  std::optional<CalibrationResult> pnp;
  std::optional<MethodError> pnp_error;
  std::vector<ExtractedBoard> boards;
};

/// Simulated scan and tags through cluster → fit → corners → Kabsch (and
/// optionally ICP from identity and PnP), each scored against the truth.
EndToEndReport run_end_to_end(const ScenePlacement& scene, const LidarModel& lidar, const CameraIntrinsics& camera,
                              const TagNoise& noise, const PipelineParams& params = {});

/// Corner pairs from an already simulated scan and tag observation.
EndToEndReport calibrate_scene(const ScenePlacement& scene, const LidarScan& scan, const TagObservation& tags,
                               const CameraIntrinsics& camera, const PipelineParams& params = {});

}  // namespace calib

#endif  // CALIB_SIMULATOR_HPP_
