#include "calib/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "calib/kdtree.hpp"

namespace calib {

FusionReport fusion_report(const PointCloud& a_in_b, const PointCloud& b, const FusionParams& params) {
  if (!(a_in_b.frame() == b.frame())) {
    throw Error(ErrorCode::kFrameMismatch,
                "cloud A is in '" + a_in_b.frame().name() + "', cloud B in '" + b.frame().name() + "'");
  }
  if (a_in_b.empty() || b.empty()) throw Error(ErrorCode::kEmptyInput, "both clouds must be nonempty");
  if (params.num_bins < 1) throw Error(ErrorCode::kInvalidArgument, "num_bins must be at least 1");

  const KdTree3 tree(b.points());
  std::vector<double> nn(a_in_b.size());
  for (std::size_t i = 0; i < a_in_b.size(); ++i) nn[i] = std::sqrt(tree.nearest(a_in_b[i]).squared_distance);

  FusionReport r;
  std::vector<double> overlap;
  std::size_t duplicated = 0;
  for (double d : nn) {
    if (d > params.structure_radius) continue;
    overlap.push_back(d);
    if (d > params.hallucination_radius) ++duplicated;
  }
  r.overlap_count = overlap.size();
  if (!overlap.empty()) {
    double s = 0.0;
    for (double d : overlap) s += d;
    r.mean_nn_distance = s / static_cast<double>(overlap.size());
    std::sort(overlap.begin(), overlap.end());
    const std::size_t m = overlap.size() / 2;
    r.median_nn_distance = overlap.size() % 2 ? overlap[m] : (overlap[m - 1] + overlap[m]) / 2.0;
    r.duplication_score = static_cast<double>(duplicated) / static_cast<double>(overlap.size());
  }

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const Point3& p : a_in_b.points()) {
    lo = std::min(lo, p.norm());
    hi = std::max(hi, p.norm());
  }
  const auto nb = static_cast<std::size_t>(params.num_bins);
  const double width = (hi - lo) / static_cast<double>(nb);
  r.range_bins.resize(nb);
  std::vector<double> sums(nb, 0.0);
  for (std::size_t k = 0; k < nb; ++k) {
    r.range_bins[k].lower = lo + width * static_cast<double>(k);
    r.range_bins[k].upper = k + 1 == nb ? hi : lo + width * static_cast<double>(k + 1);
  }
  for (std::size_t i = 0; i < a_in_b.size(); ++i) {
    std::size_t k = width > 0.0 ? static_cast<std::size_t>((a_in_b[i].norm() - lo) / width) : 0;
    k = std::min(k, nb - 1);
    ++r.range_bins[k].count;
    sums[k] += nn[i];
  }
  for (std::size_t k = 0; k < nb; ++k) {
    if (r.range_bins[k].count > 0) r.range_bins[k].mean_distance = sums[k] / static_cast<double>(r.range_bins[k].count);
  }
  return r;
}

FusionResult fuse(const PointCloud& a, const PointCloud& b, const RigidTransform& a_to_b, const FusionParams& params) {
  if (!(a.frame() == a_to_b.from_frame()) || !(b.frame() == a_to_b.to_frame())) {
    throw Error(ErrorCode::kFrameMismatch, "transform " + a_to_b.from_frame().name() + "->" + a_to_b.to_frame().name() +
                                               " does not map '" + a.frame().name() + "' onto '" + b.frame().name() +
                                               "'");
  }
  const PointCloud moved = apply(a_to_b, a);
  FusionReport report = fusion_report(moved, b, params);

  std::vector<Point3> pts = b.points();
  pts.insert(pts.end(), moved.points().begin(), moved.points().end());
  if (a.has_rings() && b.has_rings() && a.num_rings() == b.num_rings()) {
    std::vector<int> rings = b.rings();
    rings.insert(rings.end(), a.rings().begin(), a.rings().end());
    return {PointCloud(b.frame(), std::move(pts), std::move(rings), b.num_rings()), std::move(report)};
  }
  return {PointCloud(b.frame(), std::move(pts)), std::move(report)};
}

PointCloud sphere_grid_scene(const FrameId& frame, int nx, int ny, int nz, double spacing, double radius) {
  // Fibonacci lattice on each sphere.
  constexpr int kPerSphere = 60;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Point3> pts;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < nz; ++k) {
        const Vec3 c(2.0 + i * spacing, (j - (ny - 1) / 2.0) * spacing, k * spacing);
        for (int s = 0; s < kPerSphere; ++s) {
          const double z = 1.0 - 2.0 * (s + 0.5) / kPerSphere;
          const double r = std::sqrt(1.0 - z * z);
          const double phi = golden * s;
          pts.push_back(c + radius * Vec3(r * std::cos(phi), r * std::sin(phi), z));
        }
      }
    }
  }
  return PointCloud(frame, std::move(pts));
}

PointCloud corridor_scene(const FrameId& frame, double length, double width, double height, double spacing) {
  std::vector<Point3> pts;
  const auto nx = static_cast<int>(std::floor((length - 1.0) / spacing)) + 1;
  const auto ny = static_cast<int>(std::floor(width / spacing)) + 1;
  const auto nz = static_cast<int>(std::floor(height / spacing)) + 1;
  const double floor_z = -1.0;
  for (int i = 0; i < nx; ++i) {
    const double x = 1.0 + i * spacing;
    for (int j = 0; j < ny; ++j) {
      const double y = -width / 2 + j * spacing;
      pts.emplace_back(x, y, floor_z);
      pts.emplace_back(x, y, floor_z + height);
    }
    for (int k = 1; k + 1 < nz; ++k) {
      const double z = floor_z + k * spacing;
      pts.emplace_back(x, -width / 2, z);
      pts.emplace_back(x, width / 2, z);
    }
  }
  return PointCloud(frame, std::move(pts));
}

}  // namespace calib
