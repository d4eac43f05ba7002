#include <benchmark/benchmark.h>

#include <random>

#include "calib/kdtree.hpp"
#include "calib/registration.hpp"
#include "random.hpp"

namespace calib {
namespace {

const FrameId kLidar("lidar"), kCamera("camera");

CorrespondenceSet noisy_pairs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const RigidTransform t = testing::random_transform(rng, kLidar, kCamera, 1.0);
  const std::vector<Point3> p = testing::random_points(rng, n, 2.0);
  std::vector<Point3> q = testing::transformed(t, p);
  for (Point3& v : q) v += testing::gaussian3(rng, 0.003);
  return CorrespondenceSet(PointCloud(kLidar, p), PointCloud(kCamera, q));
}

void BM_Kabsch(benchmark::State& state) {
  const CorrespondenceSet c = noisy_pairs(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(kabsch_solve(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Kabsch)->Arg(4)->Arg(20)->Arg(1000)->Arg(100000);

void BM_KdTreeBuild(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const std::vector<Point3> pts = testing::random_points(rng, static_cast<std::size_t>(state.range(0)), 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(KdTree3(pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdTreeBuild)->Arg(1000)->Arg(30000);

void BM_KdTreeNearest(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const std::vector<Point3> pts = testing::random_points(rng, static_cast<std::size_t>(state.range(0)), 10.0);
  const KdTree3 tree(pts);
  const std::vector<Point3> queries = testing::random_points(rng, 1024, 10.0);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tree.nearest(queries[i++ & 1023]));
}
BENCHMARK(BM_KdTreeNearest)->Arg(1000)->Arg(30000);

// Dense cloud, start 1 degree / 2 cm off.
void BM_Icp(benchmark::State& state) {
  const CorrespondenceSet c = noisy_pairs(static_cast<std::size_t>(state.range(0)), 4);
  const RigidTransform truth = kabsch_solve(c).transform;
  IcpParams params;
  params.initial_guess = compose(
      RigidTransform(RotationMatrix::about_z(deg2rad(1.0)), Vec3(0.02, 0, 0), kCamera, kCamera), truth);
  for (auto _ : state) benchmark::DoNotOptimize(icp_solve(c.source(), c.target(), params));
}
BENCHMARK(BM_Icp)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace calib
