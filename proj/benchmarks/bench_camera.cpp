#include <benchmark/benchmark.h>

#include <random>

#include "calib/camera.hpp"
#include "calib/simulator.hpp"

namespace calib {
namespace {

std::vector<Correspondence2D3D> synthetic(std::size_t n, double pixel_sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lateral(-1.0, 1.0), depth(2.0, 5.0);
  std::normal_distribution<double> px(0.0, pixel_sigma);
  const CameraIntrinsics k = default_camera();
  const RigidTransform extr = default_scene().lidar_to_camera();
  const RigidTransform to_lidar = invert(extr);
  std::vector<Correspondence2D3D> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Point3 pc(lateral(rng), lateral(rng) * 0.5, depth(rng));
    const Point3 p = to_lidar.apply(pc);
    const Point2 q = project(k, extr, p);
    out.push_back({p, Point2{q.u + px(rng), q.v + px(rng)}});
  }
  return out;
}

void BM_PnpSolve(benchmark::State& state) {
  const auto corr = synthetic(static_cast<std::size_t>(state.range(0)), 0.5, 6);
  const CameraIntrinsics k = default_camera();
  for (auto _ : state) benchmark::DoNotOptimize(pnp_solve(k, corr));
}
BENCHMARK(BM_PnpSolve)->Arg(8)->Arg(20)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_PnpRansac(benchmark::State& state) {
  auto corr = synthetic(20, 0.5, 7);
  for (int i : {3, 9, 14}) corr[static_cast<std::size_t>(i)].image.u += 60.0;
  const CameraIntrinsics k = default_camera();
  PnpRansacParams params;
  params.iterations = static_cast<int>(state.range(0));
  params.subset_size = 6;
  for (auto _ : state) benchmark::DoNotOptimize(pnp_ransac(k, corr, params));
}
BENCHMARK(BM_PnpRansac)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace calib
