#include <benchmark/benchmark.h>

#include <random>

#include "calib/lidar_extraction.hpp"
#include "calib/simulator.hpp"

namespace calib {
namespace {

void BM_RansacLine(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.002);
  std::uniform_real_distribution<double> along(-0.3, 0.3), outlier(-0.5, 0.5);
  std::vector<Point3> pts;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 5 == 0) {
      pts.emplace_back(outlier(rng), outlier(rng), outlier(rng));
    } else {
      const double t = along(rng);
      pts.emplace_back(2.0 + noise(rng), t, 0.5 * t + noise(rng));
    }
  }
  const PointCloud cloud(FrameId("lidar"), pts);
  RansacLineParams params;
  params.iterations = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ransac_fit_line(cloud, params));
}
BENCHMARK(BM_RansacLine)->Args({10, 1000})->Args({200, 1000})->Unit(benchmark::kMicrosecond);

void BM_SimulateScan(benchmark::State& state) {
  const ScenePlacement scene = default_scene();
  LidarModel model;
  model.azimuth_step_deg = 0.1 * static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_lidar_scan(scene, model));
}
BENCHMARK(BM_SimulateScan)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_EndToEnd(benchmark::State& state) {
  const ScenePlacement scene = default_scene();
  const CameraIntrinsics camera = default_camera();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    LidarModel l;
    l.seed = seed++;
    TagNoise n;
    n.seed = seed;
    benchmark::DoNotOptimize(run_end_to_end(scene, l, camera, n));
  }
}
BENCHMARK(BM_EndToEnd)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace calib
