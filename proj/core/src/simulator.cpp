#include "calib/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "calib/detail/rng.hpp"
#include "calib/pipeline.hpp"

namespace calib {

std::vector<double> LidarModel::default_vertical_angles() {
  std::vector<double> a;
  for (int i = 0; i < 16; ++i) a.push_back(-15.0 + 2.0 * i);
  return a;
}

void LidarModel::validate() const {
  if (num_rings < 1 || static_cast<std::size_t>(num_rings) != vertical_angles_deg.size()) {
    throw Error(ErrorCode::kInvalidArgument, "need one vertical angle per ring (" + std::to_string(num_rings) +
                                                 " rings, " + std::to_string(vertical_angles_deg.size()) + " angles)");
  }
  for (std::size_t i = 1; i < vertical_angles_deg.size(); ++i) {
    if (!(vertical_angles_deg[i] > vertical_angles_deg[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "vertical angles must be strictly increasing");
    }
  }
  if (!(azimuth_step_deg > 0.0) || !(azimuth_step_deg <= 360.0)) {
    throw Error(ErrorCode::kInvalidArgument, "azimuth step must be in (0, 360]");
  }
  if (!(range_noise_sigma >= 0.0) || !std::isfinite(range_noise_sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "range noise must be finite and non-negative");
  }
  if (!(max_range > 0.0)) throw Error(ErrorCode::kInvalidArgument, "max range must be positive");
}

RigidTransform ScenePlacement::lidar_to_camera() const { return compose(camera_pose, invert(lidar_pose)); }

RigidTransform ScenePlacement::board_to_camera(std::size_t i) const {
  return compose(camera_pose, invert(boards.at(i).world_to_board));
}

RigidTransform ScenePlacement::board_to_lidar(std::size_t i) const {
  return compose(lidar_pose, invert(boards.at(i).world_to_board));
}

RigidTransform board_pose_facing(const Point3& center, const Point3& look_at, double in_plane_deg,
                                 const FrameId& board_frame) {
  const Vec3 z = (look_at - center).normalized();
  Vec3 y0 = Vec3::UnitZ() - Vec3::UnitZ().dot(z) * z;
  if (!(y0.norm() > 1e-9)) throw Error(ErrorCode::kInvalidArgument, "board normal is vertical");
  y0.normalize();
  const Vec3 x0 = y0.cross(z);
  const double a = deg2rad(in_plane_deg);
  Mat3 board_to_world;
  board_to_world.col(0) = std::cos(a) * x0 + std::sin(a) * y0;
  board_to_world.col(1) = -std::sin(a) * x0 + std::cos(a) * y0;
  board_to_world.col(2) = z;
  const RotationMatrix r = RotationMatrix::nearest(board_to_world.transpose());
  return RigidTransform(r, -(r * center), FrameId("world"), board_frame);
}

RigidTransform camera_pose_at(const Point3& position, const EulerAnglesXYZ& tilt_deg) {
  Mat3 base;  // world axes into camera axes: x right, y down, z forward
  base << 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0;
  const RotationMatrix r = RotationMatrix::nearest(base * euler_xyz_to_matrix(tilt_deg).matrix().transpose());
  return RigidTransform(r, -(r * position), FrameId("world"), FrameId("camera"));
}

BoardPlacement place_board(const BoardModel& model, const Point3& center, const Point3& look_at, double in_plane_deg,
                           int tag_id) {
  const FrameId frame("board" + std::to_string(tag_id));
  const RigidTransform probe = board_pose_facing(center, look_at, in_plane_deg, frame);
  const Vec3 x_world = probe.rotation().transpose() * Vec3::UnitX();
  const Vec3 y_world = probe.rotation().transpose() * Vec3::UnitY();
  const Point3 tag = center + model.tag_center_offset.x() * x_world + model.tag_center_offset.y() * y_world;
  // Shifting the look-at point with the tag keeps the orientation identical.
  return BoardPlacement{model, board_pose_facing(tag, look_at + (tag - center), in_plane_deg, frame), tag_id};
}

ScenePlacement default_scene() {
  BoardModel hollow;
  hollow.width = 0.55;
  hollow.height = 0.55;
  hollow.inner = InnerCutout{0.33, 0.33, Vec2::Zero()};
  hollow.tag_center_offset = Vec2(0.0, 0.22);
  BoardModel solid;
  solid.width = 0.5;
  solid.height = 0.5;

  auto at = [](double azimuth_deg, double height) {
    const double az = deg2rad(azimuth_deg);
    return Point3(2.0 * std::cos(az), 2.0 * std::sin(az), height);
  };
  const Point3 origin = Point3::Zero();
  ScenePlacement s{{}, RigidTransform::identity(FrameId("world"), FrameId("lidar")),
                   camera_pose_at(Point3(0.06, 0.08, -0.12), EulerAnglesXYZ{1.0, 2.0, -1.5})};
  s.boards.push_back(place_board(hollow, at(25.0, 0.05), origin, 45.0, 0));
  s.boards.push_back(place_board(solid, at(0.0, -0.05), origin, 45.0, 1));
  s.boards.push_back(place_board(hollow, at(-25.0, 0.05), origin, 45.0, 2));
  return s;
}

CameraIntrinsics default_camera() { return CameraIntrinsics{700.0, 700.0, 640.0, 360.0, 0.0}; }

namespace {

struct Rect2 {
  Vec2 center;
  double hw, hh;
  bool contains(const Vec2& p) const { return std::abs(p.x() - center.x()) <= hw && std::abs(p.y() - center.y()) <= hh; }
  bool strictly_contains(const Vec2& p) const {
    return std::abs(p.x() - center.x()) < hw && std::abs(p.y() - center.y()) < hh;
  }
  // Corner k as in BoardModel::corners_board_frame.
  Vec2 corner(int k) const {
    static constexpr int sx[4] = {1, -1, -1, 1};
    static constexpr int sy[4] = {1, 1, -1, -1};
    return {center.x() + sx[k] * hw, center.y() + sy[k] * hh};
  }
};

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

struct BoardGeometry {
  RigidTransform lidar_to_board;
  Rect2 outer;
  std::optional<Rect2> inner;
};

}  // namespace

LidarScan simulate_lidar_scan(const ScenePlacement& scene, const LidarModel& model, double edge_band) {
  model.validate();
  std::vector<BoardGeometry> geo;
  for (const BoardPlacement& b : scene.boards) {
    b.model.validate();
    const Vec2 c = -b.model.tag_center_offset;
    BoardGeometry g{compose(b.world_to_board, invert(scene.lidar_pose)), Rect2{c, b.model.width / 2, b.model.height / 2},
                    std::nullopt};
    if (b.model.inner) g.inner = Rect2{c + b.model.inner->offset, b.model.inner->width / 2, b.model.inner->height / 2};
    geo.push_back(std::move(g));
  }

  std::mt19937_64 rng(detail::mix64(model.seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n_az = static_cast<int>(std::lround(360.0 / model.azimuth_step_deg));

  std::vector<Point3> pts;
  std::vector<int> rings;
  std::vector<PointLabel> labels;
  for (int ring = 0; ring < model.num_rings; ++ring) {
    const double el = deg2rad(model.vertical_angles_deg[static_cast<std::size_t>(ring)]);
    for (int k = 0; k < n_az; ++k) {
      const double az = deg2rad(k * model.azimuth_step_deg);
      const Vec3 dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      double best = model.max_range;
      int hit = -1;
      Vec2 hit_uv;
      for (std::size_t b = 0; b < geo.size(); ++b) {
        const Vec3 o = geo[b].lidar_to_board.translation();
        const Vec3 d = geo[b].lidar_to_board.rotation() * dir;
        if (std::abs(d.z()) < 1e-12) continue;
        const double s = -o.z() / d.z();
        if (!(s > 0.0) || s >= best) continue;
        const Vec2 uv(o.x() + s * d.x(), o.y() + s * d.y());
        if (!geo[b].outer.contains(uv)) continue;
        if (geo[b].inner && geo[b].inner->strictly_contains(uv)) continue;
        best = s;
        hit = static_cast<int>(b);
        hit_uv = uv;
      }
      if (hit < 0) continue;
      const double range = best + model.range_noise_sigma * gauss(rng);
      pts.push_back(range * dir);
      rings.push_back(ring);

      PointLabel label{hit, -1};
      double nearest = edge_band;
      const BoardGeometry& g = geo[static_cast<std::size_t>(hit)];
      for (int e = 0; e < 8; ++e) {
        if (e >= 4 && !g.inner) break;
        const Rect2& r = e < 4 ? g.outer : *g.inner;
        const double dist = segment_distance(hit_uv, r.corner(e % 4), r.corner((e + 1) % 4));
        if (dist <= nearest) {
          nearest = dist;
          label.edge = e;
        }
      }
      labels.push_back(label);
    }
  }
  return LidarScan{PointCloud(scene.lidar_pose.to_frame(), std::move(pts), std::move(rings), model.num_rings),
                   std::move(labels)};
}

TagObservation simulate_tag_observation(const ScenePlacement& scene, const CameraIntrinsics& camera,
                                        const TagNoise& noise) {
  camera.validate();
  std::mt19937_64 rng(detail::mix64(noise.seed ^ 0x7a6f5e4d3c2b1a09ULL));
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw3 = [&](double sigma) -> Vec3 {
    const double a = gauss(rng), b = gauss(rng), c = gauss(rng);
    return Vec3(a, b, c) * sigma;
  };

  TagObservation out;
  const RigidTransform cam_id = RigidTransform::identity(scene.camera_pose.to_frame());
  for (std::size_t i = 0; i < scene.boards.size(); ++i) {
    const TagPose exact{scene.board_to_camera(i), scene.boards[i].tag_id};
    const PointCloud corners = board_corners_camera_frame(scene.boards[i].model, exact);
    for (const Point3& c : corners.points()) {
      if (!(c.z() > 1e-9)) {
        throw Error(ErrorCode::kBehindCamera, "board " + std::to_string(i) + " is not in front of the camera");
      }
    }
    const Vec3 w = draw3(deg2rad(noise.pose_rot_sigma_deg));
    const Vec3 dt = draw3(noise.pose_trans_sigma_m);
    const RigidTransform noisy(RotationMatrix::from_rotation_vector(w) * exact.pose.rotation(),
                               exact.pose.translation() + dt, exact.pose.from_frame(), exact.pose.to_frame());
    std::vector<Point2> px;
    for (const Point3& c : corners.points()) {
      Point2 p = project(camera, cam_id, c);
      p.u += noise.pixel_sigma * gauss(rng);
      p.v += noise.pixel_sigma * gauss(rng);
      px.push_back(p);
    }
    out.exact.push_back(exact);
    out.noisy.push_back(TagPose{noisy, exact.tag_id});
    out.pixels.push_back(std::move(px));
    out.exact_corners.push_back(corners);
  }
  return out;
}

MethodError transform_error(const RigidTransform& estimate, const RigidTransform& truth) {
  return {rad2deg(geodesic_angle(estimate.rotation(), truth.rotation())),
          (estimate.translation() - truth.translation()).norm()};
}

EndToEndReport calibrate_scene(const ScenePlacement& scene, const LidarScan& scan, const TagObservation& tags,
                               const CameraIntrinsics& camera, const PipelineParams& params) {
  std::vector<BoardObservation> obs;
  for (std::size_t b = 0; b < scene.boards.size(); ++b) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < scan.labels.size(); ++i)
      if (scan.labels[i].board_id == static_cast<int>(b)) idx.push_back(i);
    obs.push_back(BoardObservation{scene.boards[b].model, scan.cloud.select(idx), tags.noisy[b], std::nullopt});
  }
  ScanCorrespondences sc = scan_correspondences(obs, params.cluster, params.extraction);
  const RigidTransform truth = scene.lidar_to_camera();

  CalibrationResult k = kabsch_solve(sc.pairs);
  k.diagnostics.low_confidence = sc.low_confidence;
  const MethodError ke = transform_error(k.transform, truth);

  std::vector<Correspondence2D3D> px;
  for (std::size_t b = 0; b < sc.boards.size(); ++b) {
    for (std::size_t c = 0; c < sc.boards[b].corners.size(); ++c) {
      px.push_back(Correspondence2D3D{sc.boards[b].corners[c], tags.pixels[b][c]});
    }
  }

  EndToEndReport r{truth, sc.pairs, std::move(px), std::move(k), ke, {}, {}, {}, {}, std::move(sc.boards)};
  if (params.run_icp) {
    r.icp = icp_solve(r.pairs.source(), r.pairs.target());
    r.icp_error = transform_error(r.icp->transform, truth);
  }
  if (params.run_pnp) {
    PnpOptions opt;
    opt.object_frame = truth.from_frame();
    opt.camera_frame = truth.to_frame();
    r.pnp = pnp_solve(camera, r.pixel_pairs, opt);
    r.pnp_error = transform_error(r.pnp->transform, truth);
  }
  return r;
}

EndToEndReport run_end_to_end(const ScenePlacement& scene, const LidarModel& lidar, const CameraIntrinsics& camera,
                              const TagNoise& noise, const PipelineParams& params) {
  const LidarScan scan = simulate_lidar_scan(scene, lidar);
  const TagObservation tags = simulate_tag_observation(scene, camera, noise);
  return calibrate_scene(scene, scan, tags, camera, params);
}

}  // namespace calib
