#include "calib/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace calib {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFrameMismatch: return "FrameMismatch";
    case ErrorCode::kNotARotation: return "NotARotation";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kNoCorrespondences: return "NoCorrespondences";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInconsistentFrames: return "InconsistentFrames";
    case ErrorCode::kInsufficientPoints: return "InsufficientPoints";
    case ErrorCode::kNoConsensus: return "NoConsensus";
    case ErrorCode::kParallelLines: return "ParallelLines";
    case ErrorCode::kBoardRejected: return "BoardRejected";
    case ErrorCode::kTooSparse: return "TooSparse";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kMalformed: return "Malformed";
    case ErrorCode::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kWrongArity: return "WrongArity";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kDegenerateGeometry:
    case ErrorCode::kNoCorrespondences:
    case ErrorCode::kInsufficientPoints:
    case ErrorCode::kNoConsensus:
    case ErrorCode::kParallelLines:
    case ErrorCode::kBoardRejected:
    case ErrorCode::kTooSparse:
    case ErrorCode::kBehindCamera:
    case ErrorCode::kDegenerateConfiguration:
    case ErrorCode::kNoConvergence:
      return true;
    default:
      return false;
  }
}

bool is_finite(const Vec3& v) { return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z()); }

FrameId::FrameId(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw Error(ErrorCode::kInvalidArgument, "frame id must be nonempty");
}

// ---------------------------------------------------------------------------
// PointCloud

PointCloud::PointCloud(FrameId frame, std::vector<Point3> points)
    : frame_(std::move(frame)), points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!is_finite(points_[i])) {
      throw Error(ErrorCode::kNonFinite, "point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
}

PointCloud::PointCloud(FrameId frame, std::vector<Point3> points, std::vector<int> rings, int num_rings)
    : PointCloud(std::move(frame), std::move(points)) {
  if (num_rings <= 0) throw Error(ErrorCode::kInvalidArgument, "num_rings must be positive");
  if (rings.size() != points_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "ring channel has " + std::to_string(rings.size()) +
                                                 " entries for " + std::to_string(points_.size()) + " points");
  }
  for (std::size_t i = 0; i < rings.size(); ++i) {
    if (rings[i] < 0 || rings[i] >= num_rings) {
      throw Error(ErrorCode::kInvalidArgument,
                  "ring index " + std::to_string(rings[i]) + " of point " + std::to_string(i) + " outside [0, " +
                      std::to_string(num_rings) + ")");
    }
  }
  rings_ = std::move(rings);
  num_rings_ = num_rings;
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  std::vector<Point3> pts;
  pts.reserve(indices.size());
  for (std::size_t i : indices) pts.push_back(points_.at(i));
  if (!has_rings()) return PointCloud(frame_, std::move(pts));
  std::vector<int> rings;
  rings.reserve(indices.size());
  for (std::size_t i : indices) rings.push_back(rings_[i]);
  return PointCloud(frame_, std::move(pts), std::move(rings), num_rings_);
}

// ---------------------------------------------------------------------------
// Rotations

namespace {

double orthonormality_error(const Mat3& m) { return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff(); }

Mat3 project_to_so3(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 c = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) c(2, 2) = -1.0;
  return svd.matrixU() * c * svd.matrixV().transpose();
}

Mat3 skew(const Vec3& v) {
  Mat3 k;
  k << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return k;
}

}  // namespace

RotationMatrix::RotationMatrix(const Mat3& m) {
  if (!m.allFinite()) throw Error(ErrorCode::kNotARotation, "matrix has non-finite entries");
  const double err = orthonormality_error(m);
  if (err > 1e-6) {
    throw Error(ErrorCode::kNotARotation, "matrix is not orthonormal (|RᵀR − I|∞ = " + std::to_string(err) + ")");
  }
  if (m.determinant() < 0.0) throw Error(ErrorCode::kNotARotation, "matrix is a reflection (det = -1)");
  m_ = err > 1e-9 ? project_to_so3(m) : m;
}

RotationMatrix RotationMatrix::nearest(const Mat3& m) {
  if (!m.allFinite()) throw Error(ErrorCode::kNotARotation, "matrix has non-finite entries");
  if (m.determinant() < 0.0) throw Error(ErrorCode::kNotARotation, "matrix is a reflection (det < 0)");
  return RotationMatrix(project_to_so3(m), Unchecked{});
}

RotationMatrix RotationMatrix::about_x(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return RotationMatrix(m, Unchecked{});
}

RotationMatrix RotationMatrix::about_y(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return RotationMatrix(m, Unchecked{});
}

RotationMatrix RotationMatrix::about_z(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return RotationMatrix(m, Unchecked{});
}

RotationMatrix RotationMatrix::from_axis_angle(const Vec3& axis, double rad) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorCode::kInvalidArgument, "rotation axis must be nonzero");
  return from_rotation_vector(axis / n * rad);
}

RotationMatrix RotationMatrix::from_rotation_vector(const Vec3& omega) {
  if (!is_finite(omega)) throw Error(ErrorCode::kNonFinite, "rotation vector is not finite");
  const double theta = omega.norm();
  const Mat3 k = skew(omega);
  if (theta < 1e-8) return RotationMatrix(Mat3::Identity() + k + 0.5 * k * k, Unchecked{});
  const Mat3 ku = k / theta;
  return RotationMatrix(Mat3::Identity() + std::sin(theta) * ku + (1.0 - std::cos(theta)) * ku * ku, Unchecked{});
}

RotationMatrix RotationMatrix::transpose() const { return RotationMatrix(m_.transpose(), Unchecked{}); }

RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b) {
  return RotationMatrix(a.m_ * b.m_, RotationMatrix::Unchecked{});
}

double geodesic_angle(const RotationMatrix& a, const RotationMatrix& b) {
  const Mat3 r = a.matrix() * b.matrix().transpose();
  const Vec3 v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * v.norm(), 0.5 * (r.trace() - 1.0));
}

// ---------------------------------------------------------------------------
// Quaternions

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!std::isfinite(n) || n < 1e-12) throw Error(ErrorCode::kInvalidArgument, "quaternion must be finite and nonzero");
  // Already unit within rounding: keep the bits so serialized values
  // round-trip exactly.
  if (std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) {
    w_ = w;
    x_ = x;
    y_ = y;
    z_ = z;
    return;
  }
  w_ = w / n;
  x_ = x / n;
  y_ = y / n;
  z_ = z / n;
}

UnitQuaternion UnitQuaternion::canonical() const {
  bool flip = false;
  if (w_ != 0.0) {
    flip = w_ < 0.0;
  } else if (x_ != 0.0) {
    flip = x_ < 0.0;
  } else if (y_ != 0.0) {
    flip = y_ < 0.0;
  } else {
    flip = z_ < 0.0;
  }
  UnitQuaternion q = *this;
  if (flip) {
    q.w_ = -w_;
    q.x_ = -x_;
    q.y_ = -y_;
    q.z_ = -z_;
  }
  return q;
}

Vec3 UnitQuaternion::rotate(const Vec3& p) const {
  // (w, v) * (0, p) = (-v·p, w p + v × p), then * (w, -v).
  const Vec3 v(x_, y_, z_);
  const double s = -v.dot(p);
  const Vec3 u = w_ * p + v.cross(p);
  return s * -v + w_ * u + u.cross(-v);
}

RotationMatrix quat_to_matrix(const UnitQuaternion& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  Mat3 m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return RotationMatrix(m);
}

UnitQuaternion matrix_to_quat(const RotationMatrix& r) {
  const Mat3& m = r.matrix();
  const double tr = m.trace();
  double w, x, y, z;
  if (tr >= m(0, 0) && tr >= m(1, 1) && tr >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    w = 0.25 * s;
    x = (m(2, 1) - m(1, 2)) / s;
    y = (m(0, 2) - m(2, 0)) / s;
    z = (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
    w = (m(2, 1) - m(1, 2)) / s;
    x = 0.25 * s;
    y = (m(0, 1) + m(1, 0)) / s;
    z = (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2));
    w = (m(0, 2) - m(2, 0)) / s;
    x = (m(0, 1) + m(1, 0)) / s;
    y = 0.25 * s;
    z = (m(1, 2) + m(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1));
    w = (m(1, 0) - m(0, 1)) / s;
    x = (m(0, 2) + m(2, 0)) / s;
    y = (m(1, 2) + m(2, 1)) / s;
    z = 0.25 * s;
  }
  return UnitQuaternion(w, x, y, z).canonical();
}

// ---------------------------------------------------------------------------
// Euler angles

RotationMatrix euler_xyz_to_matrix(const EulerAnglesXYZ& e) {
  return RotationMatrix::about_z(deg2rad(e.yaw)) * RotationMatrix::about_y(deg2rad(e.pitch)) *
         RotationMatrix::about_x(deg2rad(e.roll));
}

EulerDecomposition matrix_to_euler_xyz(const RotationMatrix& r) {
  const Mat3& m = r.matrix();
  EulerDecomposition out;
  const double pitch = std::atan2(-m(2, 0), std::hypot(m(0, 0), m(1, 0)));
  out.angles.pitch = rad2deg(pitch);
  if (std::abs(std::abs(out.angles.pitch) - 90.0) <= 1e-6) {
    out.gimbal_lock = true;
    out.angles.roll = 0.0;
    out.angles.yaw = rad2deg(std::atan2(-m(0, 1), m(1, 1)));
    return out;
  }
  out.angles.roll = rad2deg(std::atan2(m(2, 1), m(2, 2)));
  out.angles.yaw = rad2deg(std::atan2(m(1, 0), m(0, 0)));
  return out;
}

// ---------------------------------------------------------------------------
// Rigid transforms

RigidTransform::RigidTransform(RotationMatrix rotation, const Vec3& translation, FrameId from_frame, FrameId to_frame)
    : rotation_(std::move(rotation)), translation_(translation), from_(std::move(from_frame)), to_(std::move(to_frame)) {
  if (!is_finite(translation_)) throw Error(ErrorCode::kNonFinite, "translation is not finite");
}

RigidTransform RigidTransform::identity(const FrameId& frame) { return identity(frame, frame); }

RigidTransform RigidTransform::identity(const FrameId& from_frame, const FrameId& to_frame) {
  return RigidTransform(RotationMatrix(), Vec3::Zero(), from_frame, to_frame);
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_.matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform RigidTransform::relabeled(const FrameId& from_frame, const FrameId& to_frame) const {
  return RigidTransform(rotation_, translation_, from_frame, to_frame);
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  if (!(a.from_frame() == b.to_frame())) {
    throw Error(ErrorCode::kFrameMismatch, "cannot compose " + a.from_frame().name() + "->" + a.to_frame().name() +
                                               " after " + b.from_frame().name() + "->" + b.to_frame().name());
  }
  return RigidTransform(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation(), b.from_frame(),
                        a.to_frame());
}

RigidTransform invert(const RigidTransform& t) {
  const RotationMatrix rt = t.rotation().transpose();
  return RigidTransform(rt, -(rt * t.translation()), t.to_frame(), t.from_frame());
}

PointCloud apply(const RigidTransform& t, const PointCloud& cloud) {
  if (!(cloud.frame() == t.from_frame())) {
    throw Error(ErrorCode::kFrameMismatch,
                "cloud is in frame '" + cloud.frame().name() + "' but transform maps from '" + t.from_frame().name() + "'");
  }
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const Point3& p : cloud.points()) out.push_back(t.apply(p));
  if (!cloud.has_rings()) return PointCloud(t.to_frame(), std::move(out));
  return PointCloud(t.to_frame(), std::move(out), cloud.rings(), cloud.num_rings());
}

}  // namespace calib
