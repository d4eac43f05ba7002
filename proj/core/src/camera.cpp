#include "calib/camera.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

#include "calib/detail/rng.hpp"

namespace calib {

void CameraIntrinsics::validate() const {
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::kInvalidArgument, "intrinsics must be finite");
  }
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::kInvalidArgument, "focal lengths must be positive");
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, gamma, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

CornerOrdering camera_corner_ordering(const TagPose& tag) {
  CornerOrdering o;
  o.up = Vec3(0.0, -1.0, 0.0);
  o.viewpoint = Point3::Zero();
  o.fallback_normal = tag.pose.rotation().matrix().col(2);
  return o;
}

PointCloud board_corners_camera_frame(const BoardModel& model, const TagPose& tag) {
  std::vector<Point3> pts;
  for (const Point3& c : model.corners_board_frame()) pts.push_back(tag.pose.apply(c));
  return PointCloud(tag.pose.to_frame(), canonicalize_corners(pts, camera_corner_ordering(tag)));
}

namespace {

constexpr double kMinDepth = 1e-9;

Point2 pinhole(const CameraIntrinsics& k, const Vec3& pc) {
  return {(k.fx * pc.x() + k.gamma * pc.y()) / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy};
}

}  // namespace

Point2 project(const CameraIntrinsics& intr, const RigidTransform& extr, const Point3& p) {
  const Vec3 pc = extr.apply(p);
  if (!(pc.z() > kMinDepth)) {
    throw Error(ErrorCode::kBehindCamera, "point at depth " + std::to_string(pc.z()) + " m is not in front of the camera");
  }
  return pinhole(intr, pc);
}

std::vector<double> backprojection_residuals(const CameraIntrinsics& intr, const RigidTransform& extr,
                                             std::span<const Correspondence2D3D> corr) {
  std::vector<double> out;
  out.reserve(corr.size());
  for (const Correspondence2D3D& c : corr) {
    const Point2 q = project(intr, extr, c.object);
    out.push_back(std::hypot(q.u - c.image.u, q.v - c.image.v));
  }
  return out;
}

double backprojection_rmse(const CameraIntrinsics& intr, const RigidTransform& extr,
                           std::span<const Correspondence2D3D> corr) {
  if (corr.empty()) throw Error(ErrorCode::kEmptyInput, "no correspondences");
  return rms(backprojection_residuals(intr, extr, corr));
}

// ---------------------------------------------------------------------------
// PnP

namespace {

struct Pose {
  Mat3 r;
  Vec3 t;
};

struct Normalized {
  Vec3 centroid;
  double scale;
  std::vector<Vec3> points;  // (X − centroid) / scale
  Vec3 spread;               // singular values of the centered points, descending
  Mat3 axes;                 // principal axes, right-handed
};

Normalized normalize_points(std::span<const Correspondence2D3D> corr) {
  Normalized n;
  n.centroid = Vec3::Zero();
  for (const auto& c : corr) n.centroid += c.object;
  n.centroid /= static_cast<double>(corr.size());
  Mat3 cov = Mat3::Zero();
  double ss = 0.0;
  for (const auto& c : corr) {
    const Vec3 d = c.object - n.centroid;
    cov += d * d.transpose();
    ss += d.squaredNorm();
  }
  n.scale = std::sqrt(ss / static_cast<double>(corr.size()));
  if (!(n.scale > 0.0)) n.scale = 1.0;
  for (const auto& c : corr) n.points.push_back((c.object - n.centroid) / n.scale);
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU);
  n.spread = svd.singularValues().cwiseSqrt();
  n.axes = svd.matrixU();
  n.axes.col(2) = n.axes.col(0).cross(n.axes.col(1));
  return n;
}

Vec2 to_normalized_image(const CameraIntrinsics& k, const Point2& p) {
  const double y = (p.v - k.cy) / k.fy;
  const double x = (p.u - k.cx - k.gamma * y) / k.fx;
  return {x, y};
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 c = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) c(2, 2) = -1.0;
  return svd.matrixU() * c * svd.matrixV().transpose();
}

std::optional<Pose> dlt_guess(const CameraIntrinsics& k, std::span<const Correspondence2D3D> corr,
                              const Normalized& n) {
  const auto rows = static_cast<Eigen::Index>(2 * corr.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, 12);
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const Vec2 x = to_normalized_image(k, corr[i].image);
    Eigen::Vector4d xh;
    xh << n.points[i], 1.0;
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.block<1, 4>(r, 0) = xh.transpose();
    a.block<1, 4>(r, 8) = -x.x() * xh.transpose();
    a.block<1, 4>(r + 1, 4) = xh.transpose();
    a.block<1, 4>(r + 1, 8) = -x.y() * xh.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  if (!(s(0) > 0.0) || s(10) < 1e-10 * s(0)) return std::nullopt;
  const Eigen::VectorXd p = svd.matrixV().col(11);
  Mat3 m;
  Vec3 p4;
  for (int r = 0; r < 3; ++r) {
    m.row(r) = p.segment<3>(4 * r).transpose();
    p4(r) = p(4 * r + 3);
  }
  if (m.determinant() < 0.0) {
    m = -m;
    p4 = -p4;
  }
  Eigen::JacobiSVD<Mat3> ms(m);
  const double lambda = ms.singularValues().mean() / n.scale;
  if (!(lambda > 0.0)) return std::nullopt;
  Pose pose;
  pose.r = nearest_rotation(m);
  pose.t = p4 / lambda - pose.r * n.centroid;
  return pose;
}

std::optional<Pose> homography_guess(const CameraIntrinsics& k, std::span<const Correspondence2D3D> corr,
                                     const Normalized& n) {
  const auto rows = static_cast<Eigen::Index>(2 * corr.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, 9);
  const Vec3 e1 = n.axes.col(0);
  const Vec3 e2 = n.axes.col(1);
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const Vec2 x = to_normalized_image(k, corr[i].image);
    const Vec3 ph(e1.dot(n.points[i]), e2.dot(n.points[i]), 1.0);
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.block<1, 3>(r, 0) = ph.transpose();
    a.block<1, 3>(r, 6) = -x.x() * ph.transpose();
    a.block<1, 3>(r + 1, 3) = ph.transpose();
    a.block<1, 3>(r + 1, 6) = -x.y() * ph.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  if (!(s(0) > 0.0) || s(7) < 1e-10 * s(0)) return std::nullopt;
  const Eigen::VectorXd hv = svd.matrixV().col(8);
  Mat3 h;
  h << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
  if (h(2, 2) < 0.0) h = -h;
  const double ls = (h.col(0).norm() + h.col(1).norm()) / 2.0;
  if (!(ls > 0.0)) return std::nullopt;
  Mat3 q;
  q.col(0) = h.col(0) / ls;
  q.col(1) = h.col(1) / ls;
  q.col(2) = q.col(0).cross(q.col(1));
  const Mat3 rp = nearest_rotation(q);
  Pose pose;
  pose.r = rp * n.axes.transpose();
  const double lambda = ls / n.scale;
  pose.t = h.col(2) / lambda - pose.r * n.centroid;
  return pose;
}

double cost_of(const CameraIntrinsics& k, std::span<const Correspondence2D3D> corr, const Pose& pose) {
  double c = 0.0;
  for (const auto& p : corr) {
    const Vec3 pc = pose.r * p.object + pose.t;
    if (!(pc.z() > kMinDepth)) return std::numeric_limits<double>::infinity();
    const Point2 q = pinhole(k, pc);
    c += (q.u - p.image.u) * (q.u - p.image.u) + (q.v - p.image.v) * (q.v - p.image.v);
  }
  return c;
}

struct Refined {
  Pose pose;
  double cost = 0.0;
  int iterations = 0;
};

Mat3 exp_so3(const Vec3& w) { return RotationMatrix::from_rotation_vector(w).matrix(); }

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

// Gauss–Newton with left-multiplicative rotation updates R ← exp(ω)·R.
Refined refine(const CameraIntrinsics& k, std::span<const Correspondence2D3D> corr, Pose pose,
               const PnpOptions& opt) {
  double cost = cost_of(k, corr, pose);
  if (!std::isfinite(cost)) throw Error(ErrorCode::kDegenerateConfiguration, "initial guess puts points behind camera");
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  for (int it = 0; it < opt.max_iterations; ++it) {
    Mat6 jtj = Mat6::Zero();
    Vec6 g = Vec6::Zero();
    for (const auto& p : corr) {
      const Vec3 rx = pose.r * p.object;
      const Vec3 pc = rx + pose.t;
      const double iz = 1.0 / pc.z();
      const Point2 q = pinhole(k, pc);
      const Vec2 res(q.u - p.image.u, q.v - p.image.v);
      Eigen::Matrix<double, 2, 3> jp;
      jp << k.fx * iz, k.gamma * iz, -(k.fx * pc.x() + k.gamma * pc.y()) * iz * iz, 0.0, k.fy * iz,
          -k.fy * pc.y() * iz * iz;
      Eigen::Matrix<double, 3, 6> jx;
      jx.leftCols<3>() = -skew(rx);
      jx.rightCols<3>() = Mat3::Identity();
      const Eigen::Matrix<double, 2, 6> j = jp * jx;
      jtj += j.transpose() * j;
      g += j.transpose() * res;
    }
    if (g.norm() <= opt.gradient_tol) return {pose, cost, it};
    const Vec6 step = -jtj.ldlt().solve(g);
    if (!step.allFinite()) return {pose, cost, it};

    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h, alpha /= 2.0) {
      Pose trial{exp_so3(alpha * step.head<3>()) * pose.r, pose.t + alpha * step.tail<3>()};
      const double c = cost_of(k, corr, trial);
      if (c < cost) {
        const double drop = cost - c;
        pose = trial;
        cost = c;
        accepted = true;
        if (drop <= 1e-12 * (cost + drop)) return {pose, cost, it + 1};
        break;
      }
    }
    // No decrease along the Gauss–Newton direction: numerically at the minimum.
    if (!accepted) return {pose, cost, it};
  }
  throw Error(ErrorCode::kNoConvergence,
              "Gauss-Newton did not converge in " + std::to_string(opt.max_iterations) + " iterations");
}

}  // namespace

CalibrationResult pnp_solve(const CameraIntrinsics& intr, std::span<const Correspondence2D3D> corr,
                            const PnpOptions& options) {
  intr.validate();
  if (corr.size() < 6) {
    throw Error(ErrorCode::kInsufficientPoints, "PnP needs at least 6 correspondences, got " + std::to_string(corr.size()));
  }
  for (const auto& c : corr) {
    if (!is_finite(c.object) || !std::isfinite(c.image.u) || !std::isfinite(c.image.v)) {
      throw Error(ErrorCode::kNonFinite, "correspondence is not finite");
    }
  }
  const Normalized n = normalize_points(corr);
  std::vector<Pose> guesses;
  const double s1 = n.spread(0);
  if (s1 > 0.0 && n.spread(2) > 1e-6 * s1) {
    if (auto g = dlt_guess(intr, corr, n)) guesses.push_back(*g);
  }
  if (s1 > 0.0 && n.spread(2) < 0.1 * s1 && n.spread(1) > 1e-6 * s1) {
    if (auto g = homography_guess(intr, corr, n)) guesses.push_back(*g);
  }
  if (guesses.empty()) {
    throw Error(ErrorCode::kDegenerateConfiguration, "correspondences admit no linear pose estimate");
  }

  std::optional<Refined> best;
  std::optional<Error> failure;
  for (const Pose& g : guesses) {
    try {
      Refined r = refine(intr, corr, g, options);
      if (!best || r.cost < best->cost) best = r;
    } catch (const Error& e) {
      if (!failure || e.code() == ErrorCode::kNoConvergence) failure = e;
    }
  }
  if (!best) throw *failure;

  RigidTransform tf(RotationMatrix::nearest(best->pose.r), best->pose.t, options.object_frame, options.camera_frame);
  std::vector<double> res = backprojection_residuals(intr, tf, corr);
  const double e = rms(res);
  Diagnostics d;
  d.iterations = best->iterations;
  d.converged = true;
  return CalibrationResult{std::move(tf), e, std::move(res), Method::kPnp, d, {}};
}

std::size_t pnp_ransac_subset_size(const PnpRansacParams& params, std::size_t n) {
  if (params.subset_size) return *params.subset_size;
  return n >= 20 ? 15 : 6;
}

CalibrationResult pnp_ransac(const CameraIntrinsics& intr, std::span<const Correspondence2D3D> corr,
                             const PnpRansacParams& params) {
  intr.validate();
  const std::size_t n = corr.size();
  const std::size_t s = pnp_ransac_subset_size(params, n);
  if (s < 6) throw Error(ErrorCode::kInvalidArgument, "RANSAC subset size must be at least 6");
  if (n < s) {
    throw Error(ErrorCode::kInsufficientPoints,
                "RANSAC needs at least " + std::to_string(s) + " correspondences, got " + std::to_string(n));
  }
  if (!(params.inlier_threshold_px > 0.0)) throw Error(ErrorCode::kInvalidArgument, "inlier threshold must be positive");

  auto inliers_of = [&](const RigidTransform& tf, std::vector<bool>* mask) {
    std::size_t count = 0;
    mask->assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 pc = tf.apply(corr[i].object);
      if (!(pc.z() > kMinDepth)) continue;
      const Point2 q = pinhole(intr, pc);
      if (std::hypot(q.u - corr[i].image.u, q.v - corr[i].image.v) <= params.inlier_threshold_px) {
        (*mask)[i] = true;
        ++count;
      }
    }
    return count;
  };

  std::size_t best_count = 0;
  std::vector<bool> best_mask, mask;
  std::vector<Correspondence2D3D> subset(s);
  for (int it = 0; it < params.iterations; ++it) {
    auto rng = detail::stream_rng(params.seed, static_cast<std::uint64_t>(it));
    auto idx = detail::sample_without_replacement(n, s, rng);
    std::sort(idx.begin(), idx.end());
    for (std::size_t k = 0; k < s; ++k) subset[k] = corr[idx[k]];
    CalibrationResult hyp = [&]() -> CalibrationResult {
      try {
        return pnp_solve(intr, subset, params.pnp);
      } catch (const Error& e) {
        if (!is_numerical(e.code())) throw;
        return CalibrationResult{RigidTransform::identity(params.pnp.object_frame, params.pnp.camera_frame),
                                 -1.0, {}, Method::kPnp, {}, {}};
      }
    }();
    if (hyp.rmse < 0.0) continue;
    const std::size_t count = inliers_of(hyp.transform, &mask);
    if (count > best_count) {
      best_count = count;
      best_mask = mask;
      // Later iterations can only tie, and ties keep the earliest.
      if (count == n) break;
    }
  }
  if (best_count < s) {
    throw Error(ErrorCode::kNoConsensus, "best hypothesis has " + std::to_string(best_count) + " inliers, need " +
                                             std::to_string(s));
  }

  std::vector<Correspondence2D3D> inl;
  for (std::size_t i = 0; i < n; ++i)
    if (best_mask[i]) inl.push_back(corr[i]);
  CalibrationResult out = pnp_solve(intr, inl, params.pnp);
  out.method = Method::kPnpRansac;
  out.per_point_residuals.clear();
  for (const auto& c : corr) {
    const Vec3 pc = out.transform.apply(c.object);
    if (!(pc.z() > kMinDepth)) {
      out.per_point_residuals.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const Point2 q = pinhole(intr, pc);
    out.per_point_residuals.push_back(std::hypot(q.u - c.image.u, q.v - c.image.v));
  }
  out.inlier_mask = std::move(best_mask);
  return out;
}

}  // namespace calib
