#include "calib/registration.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "calib/kdtree.hpp"

namespace calib {

CorrespondenceSet::CorrespondenceSet(PointCloud source, PointCloud target)
    : source_(std::move(source)), target_(std::move(target)) {
  if (source_.size() != target_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "correspondence sets differ in length (" + std::to_string(source_.size()) +
                                                 " vs " + std::to_string(target_.size()) + ")");
  }
  if (source_.frame() == target_.frame()) {
    throw Error(ErrorCode::kFrameMismatch, "source and target share frame '" + source_.frame().name() + "'");
  }
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::kKabsch: return "Kabsch";
    case Method::kIcp: return "ICP";
    case Method::kPnp: return "PnP";
    case Method::kPnpRansac: return "PnP-RANSAC";
  }
  return "Unknown";
}

Method method_from_string(std::string_view name) {
  for (Method m : {Method::kKabsch, Method::kIcp, Method::kPnp, Method::kPnpRansac}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

double rms(std::span<const double> residuals) {
  if (residuals.empty()) return 0.0;
  double s = 0.0;
  for (double r : residuals) s += r * r;
  return std::sqrt(s / static_cast<double>(residuals.size()));
}

namespace {

Vec3 centroid(const std::vector<Point3>& pts) {
  Vec3 c = Vec3::Zero();
  for (const Point3& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

void check_frames(const CorrespondenceSet& c, const RigidTransform& t) {
  if (!(c.source().frame() == t.from_frame()) || !(c.target().frame() == t.to_frame())) {
    throw Error(ErrorCode::kFrameMismatch, "transform " + t.from_frame().name() + "->" + t.to_frame().name() +
                                               " does not match correspondences " + c.source().frame().name() + "->" +
                                               c.target().frame().name());
  }
}

}  // namespace

std::vector<double> registration_residuals(const CorrespondenceSet& c, const RigidTransform& t) {
  check_frames(c, t);
  std::vector<double> r;
  r.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) r.push_back((t.apply(c.source()[i]) - c.target()[i]).norm());
  return r;
}

double registration_rmse(const CorrespondenceSet& c, const RigidTransform& t) {
  return rms(registration_residuals(c, t));
}

Point3 mean_offset(const CorrespondenceSet& c) {
  if (c.size() == 0) throw Error(ErrorCode::kEmptyInput, "mean_offset of an empty correspondence set");
  Vec3 s = Vec3::Zero();
  for (std::size_t i = 0; i < c.size(); ++i) s += c.target()[i] - c.source()[i];
  return s / static_cast<double>(c.size());
}

CalibrationResult kabsch_solve(const CorrespondenceSet& c) {
  const std::size_t n = c.size();
  if (n < 3) {
    throw Error(ErrorCode::kDegenerateGeometry, "need at least 3 correspondences, got " + std::to_string(n));
  }
  const auto& p = c.source().points();
  const auto& q = c.target().points();
  const Vec3 p_bar = centroid(p);
  const Vec3 q_bar = centroid(q);

  // H = X·Yᵀ = Σ (Pᵢ − P̄)(Qᵢ − Q̄)ᵀ
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) h += (p[i] - p_bar) * (q[i] - q_bar).transpose();

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 d = svd.singularValues();
  if (!(d(0) > 0.0) || d(1) < 1e-10 * d(0)) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "points are collinear or coincident; rotation about their axis is unobservable");
  }

  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 corr = Mat3::Identity();
  Diagnostics diag;
  if ((v * u.transpose()).determinant() < 0.0) {
    corr(2, 2) = -1.0;
    diag.reflection_corrected = true;
  }
  diag.near_degenerate = d(1) < 1e-6 * d(0);
  diag.iterations = 1;

  const RotationMatrix r = RotationMatrix::nearest(v * corr * u.transpose());
  const Vec3 t = q_bar - r * p_bar;
  RigidTransform tf(r, t, c.source().frame(), c.target().frame());
  std::vector<double> res = registration_residuals(c, tf);
  const double e = rms(res);
  return CalibrationResult{std::move(tf), e, std::move(res), Method::kKabsch, diag, {}};
}

CalibrationResult icp_solve(const PointCloud& source, const PointCloud& target, const IcpParams& params) {
  if (source.size() < 3 || target.size() < 3) {
    throw Error(ErrorCode::kDegenerateGeometry, "ICP needs at least 3 points in each cloud");
  }
  if (params.max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");

  RigidTransform current = params.initial_guess.value_or(RigidTransform::identity(source.frame(), target.frame()));
  if (!(current.from_frame() == source.frame()) || !(current.to_frame() == target.frame())) {
    throw Error(ErrorCode::kFrameMismatch, "initial guess frames do not match the clouds");
  }

  const KdTree3 tree(target.points());
  const double gate2 = params.max_correspondence_distance
                           ? *params.max_correspondence_distance * *params.max_correspondence_distance
                           : std::numeric_limits<double>::infinity();

  // Pairs assembled in source-index order so the solve is deterministic.
  auto pair_up = [&](const RigidTransform& t, std::vector<std::size_t>* src_idx, std::vector<std::size_t>* tgt_idx,
                     double* rmse) {
    src_idx->clear();
    tgt_idx->clear();
    double s = 0.0;
    for (std::size_t i = 0; i < source.size(); ++i) {
      const KdTree3::Neighbor nb = tree.nearest(t.apply(source[i]));
      if (nb.squared_distance > gate2) continue;
      src_idx->push_back(i);
      tgt_idx->push_back(nb.index);
      s += nb.squared_distance;
    }
    *rmse = src_idx->empty() ? 0.0 : std::sqrt(s / static_cast<double>(src_idx->size()));
  };

  std::vector<std::size_t> src_idx, tgt_idx;
  double prev_rmse = 0.0;
  pair_up(current, &src_idx, &tgt_idx, &prev_rmse);

  CalibrationResult last{current, prev_rmse, {}, Method::kIcp, {}, {}};
  last.diagnostics.converged = false;
  for (int it = 1; it <= params.max_iterations; ++it) {
    if (src_idx.empty()) throw Error(ErrorCode::kNoCorrespondences, "distance gate removed every pair");
    const CorrespondenceSet pairs(source.select(src_idx), target.select(tgt_idx));
    std::optional<CalibrationResult> solved;
    try {
      solved = kabsch_solve(pairs);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateGeometry) throw;
    }
    if (!solved) {
      // The pairing collapsed onto collinear targets; ICP is stuck where it is.
      last.transform = current;
      last.per_point_residuals.clear();
      for (std::size_t k = 0; k < src_idx.size(); ++k) {
        last.per_point_residuals.push_back((current.apply(source[src_idx[k]]) - target[tgt_idx[k]]).norm());
      }
      last.rmse = rms(last.per_point_residuals);
      last.diagnostics.iterations = it;
      last.diagnostics.converged = false;
      break;
    }
    CalibrationResult& step = *solved;
    last = CalibrationResult{step.transform, step.rmse, std::move(step.per_point_residuals), Method::kIcp,
                             step.diagnostics, {}};
    last.diagnostics.iterations = it;
    last.diagnostics.converged = false;
    if (std::abs(prev_rmse - last.rmse) < params.convergence_tol) {
      last.diagnostics.converged = true;
      break;
    }
    prev_rmse = last.rmse;
    current = last.transform;
    double paired_rmse = 0.0;
    pair_up(current, &src_idx, &tgt_idx, &paired_rmse);
  }
  return last;
}

namespace {

struct RunMean {
  Vec3 translation;
  UnitQuaternion rotation;
};

RunMean mean_of(std::span<const CalibrationResult> runs) {
  Vec3 t = Vec3::Zero();
  Eigen::Vector4d q = Eigen::Vector4d::Zero();
  const UnitQuaternion ref = matrix_to_quat(runs.front().transform.rotation());
  for (const CalibrationResult& r : runs) {
    t += r.transform.translation();
    UnitQuaternion qi = matrix_to_quat(r.transform.rotation());
    if (qi.dot(ref) < 0.0) qi = qi.negated();
    q += qi.coeffs();
  }
  const double n = static_cast<double>(runs.size());
  return {t / n, UnitQuaternion(q(0), q(1), q(2), q(3)).canonical()};
}

void check_runs(std::span<const CalibrationResult> runs) {
  if (runs.empty()) throw Error(ErrorCode::kEmptyInput, "no runs to average");
  const RigidTransform& first = runs.front().transform;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const RigidTransform& t = runs[i].transform;
    if (!(t.from_frame() == first.from_frame()) || !(t.to_frame() == first.to_frame())) {
      throw Error(ErrorCode::kInconsistentFrames, "run " + std::to_string(i) + " maps " + t.from_frame().name() + "->" +
                                                      t.to_frame().name() + ", expected " + first.from_frame().name() +
                                                      "->" + first.to_frame().name());
    }
  }
}

}  // namespace

AveragedExtrinsics average_runs(std::span<const CalibrationResult> runs) {
  check_runs(runs);
  const RunMean m = mean_of(runs);
  const RigidTransform& f = runs.front().transform;
  return AveragedExtrinsics{RigidTransform(quat_to_matrix(m.rotation), m.translation, f.from_frame(), f.to_frame()),
                            m.translation,
                            m.rotation,
                            runs.size(),
                            {runs.begin(), runs.end()}};
}

std::vector<RigidTransform> running_average(std::span<const CalibrationResult> runs) {
  check_runs(runs);
  std::vector<RigidTransform> out;
  out.reserve(runs.size());
  const RigidTransform& f = runs.front().transform;
  for (std::size_t k = 1; k <= runs.size(); ++k) {
    const RunMean m = mean_of(runs.first(k));
    out.emplace_back(quat_to_matrix(m.rotation), m.translation, f.from_frame(), f.to_frame());
  }
  return out;
}

}  // namespace calib
