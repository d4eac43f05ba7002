#include "commands.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "calib/detail/rng.hpp"
#include "calib/fusion.hpp"
#include "calib/io/csv.hpp"
#include "calib/io/json_io.hpp"
#include "calib/io/pcd.hpp"
#include "calib/io/text.hpp"
#include "calib/pipeline.hpp"
#include "calib/simulator.hpp"

namespace calib::cli {

namespace fs = std::filesystem;
using io::Json;
using io::StrictObject;

namespace {

constexpr ErrorCode kBad = ErrorCode::kInvalidConfig;

struct Config {
  Json doc;
  fs::path dir;
};

Config load_config(const fs::path& path) {
  Config c{io::parse_json(io::read_text_file(path)), path.parent_path()};
  return c;
}

void check_command(StrictObject& o, std::string_view name) {
  const long long v = o.integer("schema_version");
  if (v != io::kSchemaVersion) o.fail("schema_version", "unsupported version " + std::to_string(v));
  if (o.has("command") && o.string("command") != name) {
    o.fail("command", "this config is for '" + o.string("command") + "', not '" + std::string(name) + "'");
  }
}

fs::path resolve(const Config& c, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : c.dir / path;
}

std::uint64_t seed_of(StrictObject& o, const CommandOptions& opt) {
  const long long s = o.integer_or("seed", 0);
  if (s < 0) o.fail("seed", "must be non-negative");
  return opt.seed.value_or(static_cast<std::uint64_t>(s));
}

std::string numbered(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, i, ext);
  return buf;
}

void write_json(const fs::path& p, const Json& j) {
  io::write_text_file(p, io::dump_json(j));
  spdlog::info("wrote {}", p.string());
}

void write_text(const fs::path& p, const std::string& s) {
  io::write_text_file(p, s);
  spdlog::info("wrote {}", p.string());
}

template <typename F>
auto in_context(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.detail());
  }
}

std::vector<std::string> path_list(StrictObject& o, const std::string& key) {
  const Json& j = o.at(key);
  std::vector<std::string> out;
  if (j.is_string()) {
    out.push_back(j.get<std::string>());
  } else if (j.is_array() && !j.empty()) {
    for (const Json& e : j) {
      if (!e.is_string()) o.fail(key, "expected a path or a list of paths");
      out.push_back(e.get<std::string>());
    }
  } else {
    o.fail(key, "expected a path or a list of paths");
  }
  return out;
}

// ---------------------------------------------------------------------------
// simulate

LidarModel lidar_from(StrictObject o) {
  LidarModel m;
  if (o.has("vertical_angles_deg")) {
    const Json& a = o.at("vertical_angles_deg");
    if (!a.is_array()) o.fail("vertical_angles_deg", "expected an array");
    m.vertical_angles_deg.clear();
    for (const Json& v : a) m.vertical_angles_deg.push_back(io::json_number(v, o.where() + ".vertical_angles_deg", kBad));
    m.num_rings = static_cast<int>(m.vertical_angles_deg.size());
  }
  m.num_rings = static_cast<int>(o.integer_or("num_rings", m.num_rings));
  m.azimuth_step_deg = o.number_or("azimuth_step_deg", m.azimuth_step_deg);
  m.range_noise_sigma = o.number_or("range_noise_sigma_m", m.range_noise_sigma);
  m.max_range = o.number_or("max_range_m", m.max_range);
  o.finish();
  in_context(o.where(), [&] {
    m.validate();
    return 0;
  });
  return m;
}

TagNoise tag_noise_from(StrictObject o) {
  TagNoise n;
  n.pose_rot_sigma_deg = o.number_or("pose_rot_sigma_deg", n.pose_rot_sigma_deg);
  n.pose_trans_sigma_m = o.number_or("pose_trans_sigma_m", n.pose_trans_sigma_m);
  n.pixel_sigma = o.number_or("pixel_sigma_px", n.pixel_sigma);
  o.finish();
  if (n.pose_rot_sigma_deg < 0 || n.pose_trans_sigma_m < 0 || n.pixel_sigma < 0) {
    throw Error(kBad, o.where() + ": noise levels must be non-negative");
  }
  return n;
}

ScenePlacement scene_from(StrictObject o) {
  ScenePlacement s = default_scene();
  s.boards.clear();
  const Json& boards = o.at("boards");
  if (!boards.is_array() || boards.empty()) o.fail("boards", "expected a nonempty array");
  for (std::size_t i = 0; i < boards.size(); ++i) {
    StrictObject b(boards[i], o.where() + ".boards[" + std::to_string(i) + "]", kBad);
    const int id = static_cast<int>(b.integer_or("tag_id", static_cast<long long>(i)));
    const BoardModel model = io::board_model_from_json(b.at("model"), b.where() + ".model", kBad);
    const Vec3 center = b.vec3("center_m");
    const Vec3 look_at = b.has("look_at_m") ? b.vec3("look_at_m") : Vec3::Zero();
    const double rot = b.number_or("in_plane_rotation_deg", 45.0);
    b.finish();
    s.boards.push_back(in_context(b.where(), [&] { return place_board(model, center, look_at, rot, id); }));
  }
  if (o.has("camera_position_m") || o.has("camera_tilt_deg")) {
    const Vec3 pos = o.has("camera_position_m") ? o.vec3("camera_position_m") : Vec3::Zero();
    EulerAnglesXYZ tilt;
    if (o.has("camera_tilt_deg")) {
      StrictObject t = o.object("camera_tilt_deg");
      tilt = {t.number_or("roll", 0.0), t.number_or("pitch", 0.0), t.number_or("yaw", 0.0)};
      t.finish();
    }
    s.camera_pose = camera_pose_at(pos, tilt);
  }
  o.finish();
  return s;
}

Json box_json(const Box3& b) {
  return Json{{"min_m", Json::array({b.min.x(), b.min.y(), b.min.z()})},
              {"max_m", Json::array({b.max.x(), b.max.y(), b.max.z()})}};
}

}  // namespace

void cmd_simulate(const CommandOptions& opt) {
  const Config cfg = load_config(opt.config);
  StrictObject o(cfg.doc, "config", kBad);
  check_command(o, "simulate");
  const std::uint64_t seed = seed_of(o, opt);
  const long long num_scans = o.integer_or("num_scans", 1);
  if (num_scans < 1 || num_scans > 10000) o.fail("num_scans", "must be between 1 and 10000");
  LidarModel lidar = o.has("lidar") ? lidar_from(o.object("lidar")) : LidarModel{};
  const CameraIntrinsics camera =
      o.has("camera") ? io::intrinsics_from_json(o.at("camera"), "config.camera", kBad) : default_camera();
  TagNoise noise = o.has("tag_noise") ? tag_noise_from(o.object("tag_noise")) : TagNoise{};
  const double edge_band = o.number_or("edge_band_m", 0.01);
  const ScenePlacement scene = o.has("scene") ? scene_from(o.object("scene")) : default_scene();
  o.finish();

  fs::create_directories(opt.out_dir);
  Json scans = Json::array();
  std::vector<std::string> corr2d;
  for (std::size_t i = 0; i < static_cast<std::size_t>(num_scans); ++i) {
    lidar.seed = detail::mix64(seed ^ detail::mix64(2 * i));
    noise.seed = detail::mix64(seed ^ detail::mix64(2 * i + 1));
    const std::string where = "scan " + std::to_string(i);
    const LidarScan scan = in_context(where, [&] { return simulate_lidar_scan(scene, lidar, edge_band); });
    const TagObservation tags = in_context(where, [&] { return simulate_tag_observation(scene, camera, noise); });
    const EndToEndReport rep = in_context(where, [&] { return calibrate_scene(scene, scan, tags, camera); });
    spdlog::info("scan {}: {} points, {} corner pairs, rmse {:.4g} m", i, scan.cloud.size(), rep.pairs.size(),
                 rep.kabsch.rmse);

    const std::string pcd = numbered("scan", i, "pcd");
    const std::string tag = numbered("tags", i, "json");
    io::write_pcd(opt.out_dir / pcd, scan.cloud);
    write_json(opt.out_dir / tag, io::tag_poses_to_json(tags.noisy));
    write_text(opt.out_dir / numbered("corr3d3d", i, "csv"), io::format_correspondences_3d3d(rep.pairs));
    corr2d.push_back(numbered("corr2d3d", i, "csv"));
    write_text(opt.out_dir / corr2d.back(), io::format_correspondences_2d3d(rep.pixel_pairs));
    scans.push_back(Json{{"cloud", pcd}, {"tags", tag}});
  }

  Json truth;
  truth["schema_version"] = io::kSchemaVersion;
  truth["kind"] = "ground_truth";
  truth["transform"] = io::transform_to_json(scene.lidar_to_camera());
  truth["seed"] = seed;
  truth["camera"] = io::intrinsics_to_json(camera);
  truth["lidar_pose"] = io::transform_to_json(scene.lidar_pose);
  truth["camera_pose"] = io::transform_to_json(scene.camera_pose);
  Json gt_boards = Json::array();
  Json cfg_boards = Json::array();
  for (std::size_t b = 0; b < scene.boards.size(); ++b) {
    const BoardPlacement& bp = scene.boards[b];
    gt_boards.push_back(Json{{"tag_id", bp.tag_id},
                             {"model", io::board_model_to_json(bp.model)},
                             {"world_to_board", io::transform_to_json(bp.world_to_board)}});
    Box3 roi{Vec3::Constant(std::numeric_limits<double>::infinity()),
             Vec3::Constant(-std::numeric_limits<double>::infinity())};
    const RigidTransform to_lidar = scene.board_to_lidar(b);
    for (const Point3& c : bp.model.corners_board_frame()) {
      const Point3 p = to_lidar.apply(c);
      roi.min = roi.min.cwiseMin(p);
      roi.max = roi.max.cwiseMax(p);
    }
    roi.min.array() -= 0.05;
    roi.max.array() += 0.05;
    cfg_boards.push_back(
        Json{{"tag_id", bp.tag_id}, {"model", io::board_model_to_json(bp.model)}, {"roi", box_json(roi)}});
  }
  truth["boards"] = gt_boards;
  write_json(opt.out_dir / "ground_truth.json", truth);

  Json c3;
  c3["schema_version"] = io::kSchemaVersion;
  c3["command"] = "calibrate-3d3d";
  c3["seed"] = seed;
  c3["boards"] = cfg_boards;
  c3["scans"] = scans;
  write_json(opt.out_dir / "calibrate_3d3d.json", c3);

  Json c2;
  c2["schema_version"] = io::kSchemaVersion;
  c2["command"] = "calibrate-2d3d";
  c2["seed"] = seed;
  c2["camera"] = io::intrinsics_to_json(camera);
  c2["correspondences"] = corr2d;
  c2["method"] = "PnP";
  write_json(opt.out_dir / "calibrate_2d3d.json", c2);
}

// ---------------------------------------------------------------------------
// calibrate-3d3d

namespace {

struct BoardConfig {
  int tag_id;
  BoardModel model;
  Box3 roi;
};

Box3 box_from(StrictObject o) {
  Box3 b{o.vec3("min_m"), o.vec3("max_m")};
  o.finish();
  if (!(b.min.array() <= b.max.array()).all()) throw Error(kBad, o.where() + ": min_m must not exceed max_m");
  return b;
}

ExtractionParams extraction_from(StrictObject* o, ClusterParams* cluster) {
  ExtractionParams p;
  if (o) {
    p.ransac.threshold = o->number_or("ransac_threshold_m", p.ransac.threshold);
    p.ransac.iterations = static_cast<int>(o->integer_or("ransac_iterations", p.ransac.iterations));
    p.ransac.min_inlier_fraction = o->number_or("min_inlier_fraction", p.ransac.min_inlier_fraction);
    p.reject_threshold = o->number_or("reject_threshold_m", p.reject_threshold);
    cluster->segment_gap = o->number_or("segment_gap_m", cluster->segment_gap);
    cluster->hull_band = o->number_or("hull_band_m", cluster->hull_band);
    o->finish();
    if (!(p.ransac.threshold > 0) || p.ransac.iterations < 1 || !(p.reject_threshold > 0) ||
        !(cluster->segment_gap > 0) || !(cluster->hull_band > 0) || !(p.ransac.min_inlier_fraction > 0) ||
        p.ransac.min_inlier_fraction > 1) {
      throw Error(kBad, o->where() + ": thresholds must be positive and the inlier fraction in (0, 1]");
    }
  }
  return p;
}

}  // namespace

void cmd_calibrate_3d3d(const CommandOptions& opt) {
  const Config cfg = load_config(opt.config);
  StrictObject o(cfg.doc, "config", kBad);
  check_command(o, "calibrate-3d3d");
  const std::uint64_t seed = seed_of(o, opt);
  const FrameId lidar_frame(o.string_or("lidar_frame", "lidar"));
  const FrameId camera_frame(o.string_or("camera_frame", "camera"));

  std::vector<BoardConfig> boards;
  if (o.has("boards")) {
    const Json& bj = o.at("boards");
    if (!bj.is_array()) o.fail("boards", "expected an array");
    for (std::size_t i = 0; i < bj.size(); ++i) {
      StrictObject b(bj[i], "config.boards[" + std::to_string(i) + "]", kBad);
      BoardConfig bc{static_cast<int>(b.integer("tag_id")),
                     io::board_model_from_json(b.at("model"), b.where() + ".model", kBad), box_from(b.object("roi"))};
      b.finish();
      boards.push_back(bc);
    }
  }
  ClusterParams cluster;
  ExtractionParams extraction;
  if (o.has("extraction")) {
    StrictObject e = o.object("extraction");
    extraction = extraction_from(&e, &cluster);
  }

  const Json& sj = o.at("scans");
  if (!sj.is_array() || sj.empty()) o.fail("scans", "expected a nonempty array");
  struct ScanConfig {
    std::optional<fs::path> correspondences, cloud, tags;
    std::map<int, fs::path> labels;
  };
  std::vector<ScanConfig> scans;
  for (std::size_t i = 0; i < sj.size(); ++i) {
    StrictObject s(sj[i], "config.scans[" + std::to_string(i) + "]", kBad);
    ScanConfig sc;
    if (s.has("correspondences")) {
      sc.correspondences = resolve(cfg, s.string("correspondences"));
    } else {
      sc.cloud = resolve(cfg, s.string("cloud"));
      sc.tags = resolve(cfg, s.string("tags"));
      if (s.has("edge_labels")) {
        const Json& lj = s.at("edge_labels");
        if (!lj.is_array()) s.fail("edge_labels", "expected an array");
        for (std::size_t k = 0; k < lj.size(); ++k) {
          StrictObject l(lj[k], s.where() + ".edge_labels[" + std::to_string(k) + "]", kBad);
          const int id = static_cast<int>(l.integer("tag_id"));
          sc.labels[id] = resolve(cfg, l.string("file"));
          l.finish();
        }
      }
      if (boards.empty()) s.fail("cloud", "scans with clouds need a 'boards' list");
    }
    s.finish();
    scans.push_back(std::move(sc));
  }
  o.finish();

  std::vector<CalibrationResult> runs;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    const ScanConfig& sc = scans[i];
    const std::string where = "scan " + std::to_string(i);
    CalibrationResult r = in_context(where, [&] {
      if (sc.correspondences) {
        const CorrespondenceSet c =
            in_context("correspondences", [&] {
              return io::parse_correspondences_3d3d(io::read_text_file(*sc.correspondences), lidar_frame, camera_frame);
            });
        return in_context("solve", [&] { return kabsch_solve(c); });
      }
      const PointCloud cloud = in_context("read cloud", [&] { return io::read_pcd(*sc.cloud, lidar_frame); });
      const std::vector<TagPose> tags = in_context("read tags", [&] {
        return io::tag_poses_from_json(io::parse_json(io::read_text_file(*sc.tags)));
      });
      std::vector<BoardObservation> obs;
      for (const BoardConfig& b : boards) {
        const TagPose* tag = nullptr;
        for (const TagPose& t : tags)
          if (t.tag_id == b.tag_id) tag = &t;
        if (!tag) throw Error(ErrorCode::kMissingField, "no pose for tag " + std::to_string(b.tag_id));
        std::optional<std::vector<EdgeCluster>> clusters;
        if (auto it = sc.labels.find(b.tag_id); it != sc.labels.end()) {
          const auto labels = io::parse_edge_labels(io::read_text_file(it->second));
          clusters = clusters_from_labels(cloud, labels, b.model);
        }
        obs.push_back(BoardObservation{b.model, clusters ? cloud : crop(cloud, b.roi), *tag, std::move(clusters)});
      }
      ExtractionParams ep = extraction;
      ep.ransac.seed = detail::mix64(seed ^ detail::mix64(i));
      const ScanCorrespondences c = scan_correspondences(obs, cluster, ep);
      CalibrationResult res = in_context("solve", [&] { return kabsch_solve(c.pairs); });
      res.diagnostics.low_confidence = c.low_confidence;
      return res;
    });
    spdlog::info("scan {}: rmse {:.4g} m over {} pairs", i, r.rmse, r.per_point_residuals.size());
    if (r.diagnostics.low_confidence) spdlog::warn("scan {}: some edge fitted from fewer than 3 points", i);
    runs.push_back(std::move(r));
  }

  const AveragedExtrinsics avg = average_runs(runs);
  fs::create_directories(opt.out_dir);
  write_json(opt.out_dir / "calibration_3d3d.json", io::averaged_to_json(avg));
  const auto rows = io::running_average_rows(running_average(runs));
  write_text(opt.out_dir / "running_average.csv", io::format_running_average(rows));
}

// ---------------------------------------------------------------------------
// calibrate-2d3d

void cmd_calibrate_2d3d(const CommandOptions& opt) {
  const Config cfg = load_config(opt.config);
  StrictObject o(cfg.doc, "config", kBad);
  check_command(o, "calibrate-2d3d");
  const std::uint64_t seed = seed_of(o, opt);
  const CameraIntrinsics camera = io::intrinsics_from_json(o.at("camera"), "config.camera", kBad);
  std::vector<fs::path> files;
  for (const std::string& p : path_list(o, "correspondences")) files.push_back(resolve(cfg, p));
  Method method = Method::kPnp;
  if (o.has("method")) {
    const std::string m = o.string("method");
    if (m == "PnP-RANSAC") {
      method = Method::kPnpRansac;
    } else if (m != "PnP") {
      o.fail("method", "expected 'PnP' or 'PnP-RANSAC'");
    }
  }
  std::vector<long long> removed;
  if (const Json* rj = o.find("remove_rows")) {
    if (!rj->is_array()) o.fail("remove_rows", "expected an array of row indices");
    for (const Json& r : *rj) {
      if (!r.is_number_integer() || r.get<long long>() < 0) o.fail("remove_rows", "expected non-negative integers");
      removed.push_back(r.get<long long>());
    }
  }
  PnpRansacParams rp;
  rp.seed = seed;
  rp.pnp.object_frame = FrameId(o.string_or("lidar_frame", "lidar"));
  rp.pnp.camera_frame = FrameId(o.string_or("camera_frame", "camera"));
  if (o.has("ransac")) {
    StrictObject r = o.object("ransac");
    rp.iterations = static_cast<int>(r.integer_or("iterations", rp.iterations));
    rp.inlier_threshold_px = r.number_or("inlier_threshold_px", rp.inlier_threshold_px);
    if (r.has("subset_size")) {
      const long long s = r.integer("subset_size");
      if (s < 6) r.fail("subset_size", "must be at least 6");
      rp.subset_size = static_cast<std::size_t>(s);
    }
    r.finish();
    if (rp.iterations < 1 || !(rp.inlier_threshold_px > 0)) {
      throw Error(kBad, "config.ransac: iterations and inlier threshold must be positive");
    }
  }
  if (o.has("pnp")) {
    StrictObject p = o.object("pnp");
    rp.pnp.max_iterations = static_cast<int>(p.integer_or("max_iterations", rp.pnp.max_iterations));
    rp.pnp.gradient_tol = p.number_or("gradient_tol", rp.pnp.gradient_tol);
    p.finish();
    if (rp.pnp.max_iterations < 1) throw Error(kBad, "config.pnp.max_iterations must be positive");
  }
  o.finish();

  std::vector<Correspondence2D3D> corr;
  for (const fs::path& f : files) {
    auto part = in_context(f.string(), [&] { return io::parse_correspondences_2d3d(io::read_text_file(f)); });
    corr.insert(corr.end(), part.begin(), part.end());
  }
  std::vector<bool> drop(corr.size(), false);
  for (long long r : removed) {
    if (static_cast<std::size_t>(r) >= corr.size()) {
      throw Error(kBad, "config.remove_rows: row " + std::to_string(r) + " is out of range (" +
                            std::to_string(corr.size()) + " correspondences)");
    }
    drop[static_cast<std::size_t>(r)] = true;
  }
  std::vector<Correspondence2D3D> kept;
  for (std::size_t i = 0; i < corr.size(); ++i)
    if (!drop[i]) kept.push_back(corr[i]);
  spdlog::info("{} correspondences ({} removed)", kept.size(), corr.size() - kept.size());

  const CalibrationResult r = method == Method::kPnp ? pnp_solve(camera, kept, rp.pnp) : pnp_ransac(camera, kept, rp);
  spdlog::info("back-projection rmse {:.4g} px", r.rmse);
  fs::create_directories(opt.out_dir);
  write_json(opt.out_dir / "calibration_2d3d.json", io::result_to_json(r));
}

// ---------------------------------------------------------------------------
// chain and fuse

namespace {

RigidTransform load_transform(const fs::path& p) {
  return in_context(p.string(), [&] { return io::transform_from_document(io::parse_json(io::read_text_file(p))); });
}

}  // namespace

void cmd_chain(const CommandOptions& opt) {
  const Config cfg = load_config(opt.config);
  StrictObject o(cfg.doc, "config", kBad);
  check_command(o, "chain");
  const fs::path p1 = resolve(cfg, o.string("lidar_to_camera1"));
  const fs::path p2 = resolve(cfg, o.string("lidar_to_camera2"));
  o.finish();
  const RigidTransform t1 = load_transform(p1);
  const RigidTransform t2 = load_transform(p2);
  if (!(t1.from_frame() == t2.from_frame())) {
    throw Error(ErrorCode::kFrameMismatch, "inputs start in different frames ('" + t1.from_frame().name() + "' and '" +
                                               t2.from_frame().name() + "')");
  }
  const RigidTransform chained = compose(t1, invert(t2));
  fs::create_directories(opt.out_dir);
  write_json(opt.out_dir / "chain.json", io::transform_document(chained));
}

void cmd_fuse(const CommandOptions& opt) {
  const Config cfg = load_config(opt.config);
  StrictObject o(cfg.doc, "config", kBad);
  check_command(o, "fuse");
  const fs::path pa = resolve(cfg, o.string("cloud_a"));
  const fs::path pb = resolve(cfg, o.string("cloud_b"));
  const fs::path pt = resolve(cfg, o.string("transform"));
  FusionParams fp;
  if (o.has("fusion")) {
    StrictObject f = o.object("fusion");
    fp.structure_radius = f.number_or("structure_radius_m", fp.structure_radius);
    fp.hallucination_radius = f.number_or("hallucination_radius_m", fp.hallucination_radius);
    fp.num_bins = static_cast<int>(f.integer_or("num_bins", fp.num_bins));
    f.finish();
    if (!(fp.structure_radius > 0) || !(fp.hallucination_radius > 0) || fp.num_bins < 1) {
      throw Error(kBad, "config.fusion: radii and bin count must be positive");
    }
  }
  o.finish();

  const RigidTransform t = load_transform(pt);
  const PointCloud a = io::read_pcd(pa, t.from_frame());
  const PointCloud b = io::read_pcd(pb, t.to_frame());
  const FusionResult res = fuse(a, b, t, fp);
  const FusionReport& r = res.report;
  spdlog::info("overlap {} points, duplication score {:.4g}", r.overlap_count, r.duplication_score);

  Json j;
  j["schema_version"] = io::kSchemaVersion;
  j["kind"] = "fusion_report";
  j["overlap_count"] = r.overlap_count;
  j["mean_nn_distance_m"] = r.mean_nn_distance;
  j["median_nn_distance_m"] = r.median_nn_distance;
  j["duplication_score"] = r.duplication_score;
  Json bins = Json::array();
  for (const RangeBin& bin : r.range_bins) {
    bins.push_back(Json{{"lower_m", bin.lower},
                        {"upper_m", bin.upper},
                        {"count", bin.count},
                        {"mean_distance_m", bin.mean_distance}});
  }
  j["range_bins"] = bins;
  j["params"] = Json{{"structure_radius_m", fp.structure_radius},
                     {"hallucination_radius_m", fp.hallucination_radius},
                     {"num_bins", fp.num_bins}};
  fs::create_directories(opt.out_dir);
  io::write_pcd(opt.out_dir / "merged.pcd", res.merged);
  write_json(opt.out_dir / "fusion_report.json", j);
}

// ---------------------------------------------------------------------------

int run_command(std::string_view name, const CommandOptions& opt) {
  try {
    if (name == "simulate") {
      cmd_simulate(opt);
    } else if (name == "calibrate-3d3d") {
      cmd_calibrate_3d3d(opt);
    } else if (name == "calibrate-2d3d") {
      cmd_calibrate_2d3d(opt);
    } else if (name == "chain") {
      cmd_chain(opt);
    } else if (name == "fuse") {
      cmd_fuse(opt);
    } else {
      std::cerr << "calib: unknown command '" << name << "'\n";
      return 1;
    }
  } catch (const Error& e) {
    std::cerr << "calib " << name << ": " << e.what() << "\n";
    return is_numerical(e.code()) ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "calib " << name << ": Io: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("calib");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CALIB_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept the real "off".
    if (level != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace calib::cli
