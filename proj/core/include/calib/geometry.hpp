#ifndef CALIB_GEOMETRY_HPP_
#define CALIB_GEOMETRY_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calib/error.hpp"

namespace calib {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// A 3D point in meters. Finiteness is enforced wherever points enter a
/// PointCloud or a transform.
using Point3 = Vec3;

inline constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

bool is_finite(const Vec3& v);

/// Named coordinate frame. Comparison is exact string equality.
class FrameId {
 public:
  explicit FrameId(std::string name);

  const std::string& name() const noexcept { return name_; }

  friend bool operator==(const FrameId&, const FrameId&) = default;

 private:
  std::string name_;
};

/// Ordered 3D points in a named frame, optionally carrying the LiDAR ring
/// (channel) index of every point.
class PointCloud {
 public:
  PointCloud(FrameId frame, std::vector<Point3> points);
  PointCloud(FrameId frame, std::vector<Point3> points, std::vector<int> rings, int num_rings);

  const FrameId& frame() const noexcept { return frame_; }
  const std::vector<Point3>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Point3& operator[](std::size_t i) const { return points_[i]; }

  bool has_rings() const noexcept { return num_rings_ > 0; }
  int num_rings() const noexcept { return num_rings_; }
  /// Empty when the cloud has no ring channel.
  const std::vector<int>& rings() const noexcept { return rings_; }

  /// Subset by index, preserving ring data.
  PointCloud select(std::span<const std::size_t> indices) const;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  FrameId frame_;
  std::vector<Point3> points_;
  std::vector<int> rings_;
  int num_rings_ = 0;
};

/// Element of SO(3). Constructing from a matrix validates it: inputs more than
/// 1e-6 away from orthonormal, or with negative determinant, are rejected with
/// NotARotation; inputs within 1e-6 but beyond 1e-9 are projected onto SO(3).
class RotationMatrix {
 public:
  RotationMatrix() : m_(Mat3::Identity()) {}
  explicit RotationMatrix(const Mat3& m);

  /// Closest rotation in Frobenius norm (SVD projection). Rejects reflections
  /// only if the input determinant is negative.
  static RotationMatrix nearest(const Mat3& m);

  static RotationMatrix about_x(double rad);
  static RotationMatrix about_y(double rad);
  static RotationMatrix about_z(double rad);
  static RotationMatrix from_axis_angle(const Vec3& axis, double rad);
  /// Rotation by the vector's norm about its direction.
  static RotationMatrix from_rotation_vector(const Vec3& omega);

  const Mat3& matrix() const noexcept { return m_; }
  RotationMatrix transpose() const;

  Vec3 operator*(const Vec3& p) const { return m_ * p; }
  friend RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b);
  friend bool operator==(const RotationMatrix& a, const RotationMatrix& b) { return a.m_ == b.m_; }

 private:
  struct Unchecked {};
  RotationMatrix(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;
};

/// Angle of the relative rotation a·bᵀ, in radians.
double geodesic_angle(const RotationMatrix& a, const RotationMatrix& b);

/// Unit quaternion (w, x, y, z). The constructor normalizes.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;
  UnitQuaternion(double w, double x, double y, double z);

  double w() const noexcept { return w_; }
  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  double z() const noexcept { return z_; }
  Eigen::Vector4d coeffs() const { return {w_, x_, y_, z_}; }

  /// Representative with w > 0; for w == 0 the first nonzero of x, y, z is
  /// made positive. q and -q map to the same canonical value.
  UnitQuaternion canonical() const;
  UnitQuaternion negated() const { return UnitQuaternion(-w_, -x_, -y_, -z_); }
  double dot(const UnitQuaternion& o) const { return w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_; }

  /// q * (0, p) * q⁻¹, evaluated with quaternion products.
  Vec3 rotate(const Vec3& p) const;

  friend bool operator==(const UnitQuaternion&, const UnitQuaternion&) = default;

 private:
  double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

RotationMatrix quat_to_matrix(const UnitQuaternion& q);
/// Shepperd-style extraction, robust near 180° rotations. The result is
/// canonical (w >= 0).
UnitQuaternion matrix_to_quat(const RotationMatrix& r);

/// Fixed-axis XYZ angles in degrees: R = Rz(yaw) · Ry(pitch) · Rx(roll).
struct EulerAnglesXYZ {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  friend bool operator==(const EulerAnglesXYZ&, const EulerAnglesXYZ&) = default;
};

struct EulerDecomposition {
  EulerAnglesXYZ angles;
  /// |pitch| within 1e-6° of 90°; roll is then fixed to 0 and yaw absorbs the
  /// remaining freedom.
  bool gimbal_lock = false;
};

RotationMatrix euler_xyz_to_matrix(const EulerAnglesXYZ& e);
EulerDecomposition matrix_to_euler_xyz(const RotationMatrix& r);

/// Rigid transform mapping points expressed in `from_frame` into `to_frame`:
/// p ↦ R·p + t.
class RigidTransform {
 public:
  RigidTransform(RotationMatrix rotation, const Vec3& translation, FrameId from_frame, FrameId to_frame);

  static RigidTransform identity(const FrameId& frame);
  static RigidTransform identity(const FrameId& from_frame, const FrameId& to_frame);

  const RotationMatrix& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }
  const FrameId& from_frame() const noexcept { return from_; }
  const FrameId& to_frame() const noexcept { return to_; }

  Mat4 matrix() const;
  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }

  /// Same numbers, different frame labels.
  RigidTransform relabeled(const FrameId& from_frame, const FrameId& to_frame) const;

  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;

 private:
  RotationMatrix rotation_;
  Vec3 translation_;
  FrameId from_;
  FrameId to_;
};

/// a ∘ b: first b, then a. Requires a.from_frame == b.to_frame.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
/// Requires cloud.frame == t.from_frame. Ring indices are preserved.
PointCloud apply(const RigidTransform& t, const PointCloud& cloud);

}  // namespace calib

#endif  // CALIB_GEOMETRY_HPP_
