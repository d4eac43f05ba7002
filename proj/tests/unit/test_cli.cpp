#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "calib/io/csv.hpp"
#include "calib/io/json_io.hpp"
#include "calib/io/pcd.hpp"
#include "calib/io/text.hpp"
#include "commands.hpp"
#include "random.hpp"

namespace calib {
namespace {

namespace fs = std::filesystem;
using io::Json;

const fs::path kSample = fs::path(CALIB_TEST_DATA_DIR) / "sample";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    cli::configure_logging();
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("calib_cli_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const Json& j) {
    const fs::path p = dir_ / name;
    io::write_text_file(p, io::dump_json(j));
    return p;
  }

  int run(std::string_view cmd, const fs::path& config, const fs::path& out, std::optional<std::uint64_t> seed = {}) {
    cli::CommandOptions o;
    o.config = config;
    o.out_dir = out;
    o.seed = seed;
    return cli::run_command(cmd, o);
  }

  static int exe(const std::string& args) {
    const std::string cmd = std::string(CALIB_EXE) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  fs::path dir_;
};

Json noiseless_simulation(int scans) {
  return Json{{"schema_version", 1},
              {"command", "simulate"},
              {"seed", 9},
              {"num_scans", scans},
              {"lidar", {{"range_noise_sigma_m", 0.0}}},
              {"tag_noise", {{"pose_rot_sigma_deg", 0.0}, {"pose_trans_sigma_m", 0.0}, {"pixel_sigma_px", 0.0}}}};
}

RigidTransform truth_of(const fs::path& dir) {
  return io::transform_from_document(io::parse_json(io::read_text_file(dir / "ground_truth.json")));
}

RigidTransform transform_of(const fs::path& file) {
  return io::transform_from_document(io::parse_json(io::read_text_file(file)));
}

void expect_close(const RigidTransform& a, const RigidTransform& b, double trans_m, double rot_deg) {
  EXPECT_LE((a.translation() - b.translation()).norm(), trans_m);
  EXPECT_LE(geodesic_angle(a.rotation(), b.rotation()) * 180.0 / M_PI, rot_deg);
}

TEST_F(CliTest, SimulateIsByteDeterministic) {
  Json noisy = io::parse_json(io::read_text_file(kSample / "simulate.json"));
  const fs::path ncfg = write_config("noisy.json", noisy);
  ASSERT_EQ(run("simulate", ncfg, dir_ / "a"), 0);
  ASSERT_EQ(run("simulate", ncfg, dir_ / "b"), 0);
  ASSERT_EQ(run("simulate", ncfg, dir_ / "c", 43), 0);
  for (const char* f : {"scan_000.pcd", "scan_001.pcd", "tags_001.json", "corr2d3d_000.csv", "ground_truth.json"}) {
    EXPECT_EQ(io::read_text_file(dir_ / "a" / f), io::read_text_file(dir_ / "b" / f)) << f;
  }
  EXPECT_NE(io::read_text_file(dir_ / "a" / "scan_000.pcd"), io::read_text_file(dir_ / "c" / "scan_000.pcd"));
  EXPECT_NE(io::read_text_file(dir_ / "a" / "tags_000.json"), io::read_text_file(dir_ / "c" / "tags_000.json"));
}

TEST_F(CliTest, BundledSampleMatchesCurrentSimulator) {
  ASSERT_EQ(run("simulate", kSample / "simulate.json", dir_), 0);
  for (const char* f : {"scan_000.pcd", "scan_001.pcd", "tags_000.json", "tags_001.json", "corr3d3d_000.csv",
                        "corr2d3d_001.csv", "ground_truth.json", "calibrate_3d3d.json", "calibrate_2d3d.json"}) {
    EXPECT_EQ(io::read_text_file(dir_ / f), io::read_text_file(kSample / f)) << f;
  }
}

TEST_F(CliTest, NoiselessDatasetRecoversGroundTruth) {
  ASSERT_EQ(run("simulate", write_config("sim.json", noiseless_simulation(3)), dir_), 0);
  ASSERT_EQ(run("calibrate-3d3d", dir_ / "calibrate_3d3d.json", dir_ / "out"), 0);
  const RigidTransform truth = truth_of(dir_);
  const RigidTransform est = transform_of(dir_ / "out" / "calibration_3d3d.json");
  EXPECT_EQ(est.from_frame(), FrameId("lidar"));
  EXPECT_EQ(est.to_frame(), FrameId("camera"));
  expect_close(est, truth, 0.01, 0.2);

  const auto rows = io::parse_running_average(io::read_text_file(dir_ / "out" / "running_average.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows.back().translation, est.translation());

  // Pixels are exact but the 3D side is the extracted LiDAR corners, so the
  // fit is only as good as the extraction.
  ASSERT_EQ(run("calibrate-2d3d", dir_ / "calibrate_2d3d.json", dir_ / "out"), 0);
  const CalibrationResult pnp =
      io::result_from_json(io::parse_json(io::read_text_file(dir_ / "out" / "calibration_2d3d.json")));
  EXPECT_LT(pnp.rmse, 3.0);
  expect_close(pnp.transform, truth, 0.03, 0.5);
}

TEST_F(CliTest, PrecomputedCorrespondencesGiveExactKabsch) {
  ASSERT_EQ(run("simulate", write_config("sim.json", noiseless_simulation(1)), dir_), 0);
  Json cfg = io::parse_json(io::read_text_file(dir_ / "calibrate_3d3d.json"));
  cfg["scans"] = Json::array({Json{{"correspondences", "corr3d3d_000.csv"}}});
  ASSERT_EQ(run("calibrate-3d3d", write_config("c.json", cfg), dir_ / "out"), 0);
  const AveragedExtrinsics a =
      io::averaged_from_json(io::parse_json(io::read_text_file(dir_ / "out" / "calibration_3d3d.json")));
  ASSERT_EQ(a.sample_count, 1u);
  // the pairs come from extracted corners, so they agree only to extraction accuracy
  expect_close(a.transform, truth_of(dir_), 0.01, 0.2);
}

TEST_F(CliTest, SampleDatasetCalibrates) {
  ASSERT_EQ(run("calibrate-3d3d", kSample / "calibrate_3d3d.json", dir_), 0);
  ASSERT_EQ(run("calibrate-2d3d", kSample / "calibrate_2d3d.json", dir_), 0);
  const RigidTransform truth = truth_of(kSample);
  expect_close(transform_of(dir_ / "calibration_3d3d.json"), truth, 0.05, 2.0);
  expect_close(transform_of(dir_ / "calibration_2d3d.json"), truth, 0.1, 2.0);
}

TEST_F(CliTest, RemoveRowsDropsBadCorrespondence) {
  auto rows = io::parse_correspondences_2d3d(io::read_text_file(kSample / "corr2d3d_000.csv"));
  ASSERT_GE(rows.size(), 8u);
  rows[2].image.u += 150;
  rows[2].image.v -= 90;
  io::write_text_file(dir_ / "pairs.csv", io::format_correspondences_2d3d(rows));
  Json cfg = io::parse_json(io::read_text_file(kSample / "calibrate_2d3d.json"));
  cfg["correspondences"] = "pairs.csv";
  ASSERT_EQ(run("calibrate-2d3d", write_config("with.json", cfg), dir_ / "with"), 0);
  cfg["remove_rows"] = Json::array({2});
  ASSERT_EQ(run("calibrate-2d3d", write_config("without.json", cfg), dir_ / "without"), 0);
  const auto read = [&](const char* sub) {
    return io::result_from_json(io::parse_json(io::read_text_file(dir_ / sub / "calibration_2d3d.json")));
  };
  const CalibrationResult with = read("with");
  const CalibrationResult without = read("without");
  EXPECT_EQ(without.per_point_residuals.size(), rows.size() - 1);
  EXPECT_GT(with.rmse, 5.0);
  EXPECT_LT(without.rmse, 3.0);

  cfg["remove_rows"] = Json::array({static_cast<int>(rows.size())});
  EXPECT_EQ(run("calibrate-2d3d", write_config("bad.json", cfg), dir_ / "bad"), 1);
}

Json transform_doc(const RigidTransform& t) { return io::transform_document(t); }

TEST_F(CliTest, ChainIdentityAndConsistency) {
  const RigidTransform id(RotationMatrix(), Vec3::Zero(), FrameId("lidar"), FrameId("cam1"));
  const RigidTransform id2 = id.relabeled(FrameId("lidar"), FrameId("cam2"));
  write_config("t1.json", transform_doc(id));
  write_config("t2.json", transform_doc(id2));
  const Json cfg{{"schema_version", 1}, {"lidar_to_camera1", "t1.json"}, {"lidar_to_camera2", "t2.json"}};
  ASSERT_EQ(run("chain", write_config("chain.json", cfg), dir_ / "out"), 0);
  const RigidTransform c = transform_of(dir_ / "out" / "chain.json");
  EXPECT_EQ(c.from_frame(), FrameId("cam2"));
  EXPECT_EQ(c.to_frame(), FrameId("cam1"));
  EXPECT_LE(geodesic_angle(c.rotation(), RotationMatrix()), 1e-12);
  EXPECT_LE(c.translation().norm(), 1e-12);

  std::mt19937_64 rng(17);
  for (int i = 0; i < 10; ++i) {
    const RigidTransform a = testing::random_transform(rng, "lidar", "cam1", 1.0);
    const RigidTransform b = testing::random_transform(rng, "lidar", "cam2", 1.0);
    write_config("t1.json", transform_doc(a));
    write_config("t2.json", transform_doc(b));
    ASSERT_EQ(run("chain", dir_ / "chain.json", dir_ / "out"), 0);
    const RigidTransform ab = transform_of(dir_ / "out" / "chain.json");
    // cam2 -> cam1 composed with lidar -> cam2 must give lidar -> cam1
    const RigidTransform back = compose(ab, b);
    EXPECT_LE((back.matrix() - a.matrix()).norm(), 1e-9);

    write_config("t2.json", transform_doc(a.relabeled(FrameId("lidar"), FrameId("cam2"))));
    ASSERT_EQ(run("chain", dir_ / "chain.json", dir_ / "out"), 0);
    const RigidTransform same = transform_of(dir_ / "out" / "chain.json");
    EXPECT_LE((same.matrix() - Mat4::Identity()).norm(), 1e-9);
  }
}

TEST_F(CliTest, ChainRejectsFrameMismatch) {
  std::mt19937_64 rng(1);
  write_config("t1.json", transform_doc(testing::random_transform(rng, "lidar", "cam1", 1.0)));
  write_config("t2.json", transform_doc(testing::random_transform(rng, "radar", "cam2", 1.0)));
  const Json cfg{{"schema_version", 1}, {"lidar_to_camera1", "t1.json"}, {"lidar_to_camera2", "t2.json"}};
  EXPECT_EQ(run("chain", write_config("chain.json", cfg), dir_ / "out"), 1);
}

TEST_F(CliTest, FuseWithTruthHasNoDuplication) {
  ASSERT_EQ(run("simulate", kSample / "simulate.json", dir_), 0);
  const PointCloud a = io::read_pcd(dir_ / "scan_000.pcd");
  const RigidTransform truth = truth_of(dir_);
  io::write_pcd(dir_ / "b.pcd", apply(truth, a));
  const Json cfg{{"schema_version", 1},
                 {"cloud_a", "scan_000.pcd"},
                 {"cloud_b", "b.pcd"},
                 {"transform", "ground_truth.json"}};
  ASSERT_EQ(run("fuse", write_config("fuse.json", cfg), dir_ / "out"), 0);
  const Json report = io::parse_json(io::read_text_file(dir_ / "out" / "fusion_report.json"));
  EXPECT_EQ(report["kind"], "fusion_report");
  EXPECT_LE(report["duplication_score"].get<double>(), 0.01);
  EXPECT_EQ(io::read_pcd(dir_ / "out" / "merged.pcd").size(), 2 * a.size());
}

TEST_F(CliTest, ExitCodes) {
  // configuration problems
  EXPECT_EQ(exe("simulate --config " + (dir_ / "missing.json").string()), 1);
  EXPECT_EQ(exe("no-such-command"), 1);
  EXPECT_EQ(exe(""), 1);
  const fs::path typo = write_config("typo.json", Json{{"schema_version", 1}, {"num_scan", 2}});
  EXPECT_EQ(exe("simulate --config " + typo.string() + " --out " + dir_.string()), 1);
  const fs::path wrong = write_config("wrong.json", Json{{"schema_version", 1}, {"command", "fuse"}});
  EXPECT_EQ(exe("simulate --config " + wrong.string() + " --out " + dir_.string()), 1);
  io::write_text_file(dir_ / "syntax.json", "{ \"schema_version\": 1, ");
  EXPECT_EQ(exe("simulate --config " + (dir_ / "syntax.json").string() + " --out " + dir_.string()), 1);

  // numerical failure: every 2D-3D pair on one line
  std::vector<Correspondence2D3D> line;
  for (int i = 0; i < 8; ++i) line.push_back({Point3(0.1 * i, 0, 2), Point2(320 + 10 * i, 240)});
  io::write_text_file(dir_ / "line.csv", io::format_correspondences_2d3d(line));
  Json cfg = io::parse_json(io::read_text_file(kSample / "calibrate_2d3d.json"));
  cfg["correspondences"] = "line.csv";
  const fs::path degenerate = write_config("degenerate.json", cfg);
  EXPECT_EQ(exe("calibrate-2d3d --config " + degenerate.string() + " --out " + (dir_ / "o").string()), 2);

  EXPECT_EQ(exe("chain --help"), 0);
}

TEST_F(CliTest, SeedFlagOverridesConfig) {
  const fs::path cfg = write_config("sim.json", io::parse_json(io::read_text_file(kSample / "simulate.json")));
  ASSERT_EQ(exe("simulate --config " + cfg.string() + " --seed 42 --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(exe("simulate --config " + cfg.string() + " --out " + (dir_ / "b").string()), 0);
  EXPECT_EQ(io::read_text_file(dir_ / "a" / "scan_001.pcd"), io::read_text_file(dir_ / "b" / "scan_001.pcd"));
  EXPECT_EQ(io::read_text_file(dir_ / "a" / "scan_001.pcd"), io::read_text_file(kSample / "scan_001.pcd"));
}

}  // namespace
}  // namespace calib
