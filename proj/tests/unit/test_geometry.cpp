#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "calib/geometry.hpp"
#include "random.hpp"

namespace calib {
namespace {

using testing::random_rotation;
using testing::random_transform;

const FrameId kA("a"), kB("b"), kC("c"), kD("d");

void expect_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << a.transpose() << " vs " << b.transpose();
}

void expect_near(const Mat3& a, const Mat3& b, double tol) {
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << "\n" << a << "\nvs\n" << b;
}

RigidTransform rz(double deg, const Vec3& t, const FrameId& from, const FrameId& to) {
  return RigidTransform(RotationMatrix::about_z(deg2rad(deg)), t, from, to);
}

TEST(FrameId, RejectsEmptyName) {
  try {
    FrameId f("");
    FAIL() << "accepted empty frame";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(PointCloud, RejectsNonFinitePoints) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(PointCloud(kA, {Point3(0, nan, 0)}), Error);
  EXPECT_THROW(PointCloud(kA, {Point3(std::numeric_limits<double>::infinity(), 0, 0)}), Error);
}

TEST(PointCloud, RingIndicesMustCoverEveryPointAndStayInRange) {
  EXPECT_NO_THROW(PointCloud(kA, {Point3::Zero(), Point3::Ones()}, {0, 15}, 16));
  EXPECT_THROW(PointCloud(kA, {Point3::Zero(), Point3::Ones()}, {0}, 16), Error);
  EXPECT_THROW(PointCloud(kA, {Point3::Zero()}, {16}, 16), Error);
  EXPECT_THROW(PointCloud(kA, {Point3::Zero()}, {-1}, 16), Error);
}

TEST(RotationMatrix, RejectsReflectionsAndNonOrthogonal) {
  Mat3 mirror = Mat3::Identity();
  mirror(0, 0) = -1;
  try {
    RotationMatrix r(mirror);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotARotation);
  }
  Mat3 sheared = Mat3::Identity();
  sheared(0, 1) = 1e-3;
  EXPECT_THROW(RotationMatrix r(sheared), Error);
  EXPECT_THROW(RotationMatrix::nearest(mirror), Error);
}

TEST(RotationMatrix, SmallDriftIsProjectedBackOntoSO3) {
  std::mt19937_64 rng(1);
  Mat3 m = random_rotation(rng).matrix();
  m(1, 2) += 5e-8;
  const RotationMatrix r(m);
  expect_near(Mat3(r.matrix().transpose() * r.matrix()), Mat3(Mat3::Identity()), 1e-12);
  EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-12);
}

TEST(Compose, IdentityIsNeutral) {
  std::mt19937_64 rng(2);
  const RigidTransform t = random_transform(rng, kA, kB);
  const RigidTransform c = compose(RigidTransform::identity(kB), t);
  expect_near(c.rotation().matrix(), t.rotation().matrix(), 0.0);
  expect_near(c.translation(), t.translation(), 0.0);
  EXPECT_EQ(c.from_frame(), kA);
  EXPECT_EQ(c.to_frame(), kB);
}

TEST(Compose, WithInverseGivesIdentity) {
  std::mt19937_64 rng(3);
  const RigidTransform t = random_transform(rng, kA, kB);
  const RigidTransform c = compose(t, invert(t));
  expect_near(c.rotation().matrix(), Mat3::Identity(), 1e-9);
  expect_near(c.translation(), Vec3::Zero(), 1e-9);
  EXPECT_EQ(c.from_frame(), kB);
  EXPECT_EQ(c.to_frame(), kB);
}

TEST(Compose, TwoQuarterTurnsByHand) {
  // [Rz90 | (1,0,0)] · [Rz90 | 0] = [Rz180 | Rz90·0 + (1,0,0)]
  const RigidTransform c = compose(rz(90, {1, 0, 0}, kB, kC), rz(90, {0, 0, 0}, kA, kB));
  Mat3 expected;
  expected << -1, 0, 0, 0, -1, 0, 0, 0, 1;
  expect_near(c.rotation().matrix(), expected, 1e-15);
  expect_near(c.translation(), Vec3(1, 0, 0), 1e-15);
}

TEST(Compose, FrameMismatchIsRejected) {
  try {
    compose(RigidTransform::identity(kC, kD), RigidTransform::identity(kA, kB));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFrameMismatch);
  }
}

TEST(Compose, MatchesFourByFourProduct) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const RigidTransform a = random_transform(rng, kB, kC);
    const RigidTransform b = random_transform(rng, kA, kB);
    const Mat4 m = a.matrix() * b.matrix();
    EXPECT_LE((compose(a, b).matrix() - m).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Compose, IsAssociative) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const RigidTransform a = random_transform(rng, kC, kD, 5.0);
    const RigidTransform b = random_transform(rng, kB, kC, 5.0);
    const RigidTransform c = random_transform(rng, kA, kB, 5.0);
    const RigidTransform l = compose(compose(a, b), c);
    const RigidTransform r = compose(a, compose(b, c));
    expect_near(l.rotation().matrix(), r.rotation().matrix(), 1e-9);
    expect_near(l.translation(), r.translation(), 1e-9);
  }
}

TEST(Invert, Identity) {
  const RigidTransform i = invert(RigidTransform::identity(kA, kB));
  expect_near(i.rotation().matrix(), Mat3::Identity(), 0.0);
  expect_near(i.translation(), Vec3::Zero(), 0.0);
  EXPECT_EQ(i.from_frame(), kB);
  EXPECT_EQ(i.to_frame(), kA);
}

TEST(Invert, PureTranslation) {
  const RigidTransform i = invert(RigidTransform(RotationMatrix(), {1, 2, 3}, kA, kB));
  expect_near(i.translation(), Vec3(-1, -2, -3), 0.0);
}

TEST(Invert, QuarterTurnByHand) {
  // −Rᵀt with R = Rz(90°), t = (1,0,0): Rᵀ(1,0,0) = (0,−1,0), negated (0,1,0).
  const RigidTransform i = invert(rz(90, {1, 0, 0}, kA, kB));
  expect_near(i.rotation().matrix(), RotationMatrix::about_z(deg2rad(-90)).matrix(), 1e-15);
  expect_near(i.translation(), Vec3(0, 1, 0), 1e-15);
}

TEST(Apply, Examples) {
  const PointCloud c(kA, {Point3(1, 2, 3), Point3(-1, 0, 4)}, {3, 7}, 16);
  EXPECT_EQ(apply(RigidTransform::identity(kA, kB), c).points(), c.points());

  const PointCloud o = apply(RigidTransform(RotationMatrix(), {0, 0, 1}, kA, kB), PointCloud(kA, {Point3::Zero()}));
  expect_near(o[0], Point3(0, 0, 1), 0.0);

  const PointCloud r = apply(rz(90, Vec3::Zero(), kA, kB), PointCloud(kA, {Point3(1, 0, 0)}));
  expect_near(r[0], Point3(0, 1, 0), 1e-12);
  EXPECT_EQ(r.frame(), kB);
}

TEST(Apply, PreservesRingsAndChecksFrame) {
  const PointCloud c(kA, {Point3(1, 2, 3), Point3(-1, 0, 4)}, {3, 7}, 16);
  const PointCloud o = apply(rz(30, {1, 1, 1}, kA, kB), c);
  EXPECT_EQ(o.rings(), c.rings());
  EXPECT_EQ(o.num_rings(), 16);
  try {
    apply(RigidTransform::identity(kB, kC), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFrameMismatch);
  }
}

TEST(Apply, InverseRoundTripProperty) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    const RigidTransform t = random_transform(rng, kA, kB, 10.0);
    const PointCloud c(kA, testing::random_points(rng, 20, 10.0));
    const PointCloud back = apply(invert(t), apply(t, c));
    for (std::size_t k = 0; k < c.size(); ++k) expect_near(back[k], c[k], 1e-9);
  }
}

TEST(Quaternion, ConstructorNormalizes) {
  const UnitQuaternion q(2, 0, 0, 0);
  EXPECT_DOUBLE_EQ(q.w(), 1.0);
  EXPECT_NEAR(UnitQuaternion(1, 2, 3, 4).coeffs().norm(), 1.0, 1e-12);
  EXPECT_THROW(UnitQuaternion(0, 0, 0, 0), Error);
}

TEST(Quaternion, CanonicalSign) {
  const UnitQuaternion q(-0.5, 0.5, -0.5, 0.5);
  EXPECT_GE(q.canonical().w(), 0.0);
  EXPECT_EQ(q.canonical(), q.negated().canonical());
  EXPECT_EQ(UnitQuaternion(0, -1, 0, 0).canonical(), UnitQuaternion(0, 1, 0, 0));
}

TEST(Quaternion, IdentityToMatrix) {
  expect_near(quat_to_matrix(UnitQuaternion(1, 0, 0, 0)).matrix(), Mat3::Identity(), 0.0);
}

TEST(Quaternion, QuarterTurnAboutZByHand) {
  // w = z = √½: R = [[1−2z², −2wz, 0], [2wz, 1−2z², 0], [0, 0, 1]] = Rz(90°).
  const double h = std::sqrt(0.5);
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  expect_near(quat_to_matrix(UnitQuaternion(h, 0, 0, h)).matrix(), expected, 1e-15);
}

TEST(Quaternion, HalfTurnAboutXExtraction) {
  Mat3 m;
  m << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  const UnitQuaternion q = matrix_to_quat(RotationMatrix(m));
  EXPECT_NEAR(q.w(), 0.0, 1e-15);
  EXPECT_NEAR(q.x(), 1.0, 1e-15);
  EXPECT_NEAR(q.y(), 0.0, 1e-15);
  EXPECT_NEAR(q.z(), 0.0, 1e-15);
}

TEST(Quaternion, NearHalfTurnsAgreeWithAxisAngle) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Vec3 axis = testing::gaussian3(rng).normalized();
    const double angle = kPi - 1e-7 * (i % 10);
    const UnitQuaternion q = matrix_to_quat(RotationMatrix::from_axis_angle(axis, angle));
    const Eigen::Vector4d expected(std::cos(angle / 2), axis.x() * std::sin(angle / 2),
                                          axis.y() * std::sin(angle / 2), axis.z() * std::sin(angle / 2));
    const UnitQuaternion e = UnitQuaternion(expected[0], expected[1], expected[2], expected[3]).canonical();
    double err = (q.coeffs() - e.coeffs()).cwiseAbs().maxCoeff();
    // at exactly a half turn w is rounding noise and either sign is canonical
    if (i % 10 == 0) err = std::min(err, (q.coeffs() + e.coeffs()).cwiseAbs().maxCoeff());
    EXPECT_LE(err, 1e-9);
  }
}

TEST(Quaternion, MatrixRoundTripProperty) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    const UnitQuaternion q(g(rng), g(rng), g(rng), g(rng));
    const UnitQuaternion back = matrix_to_quat(quat_to_matrix(q));
    EXPECT_LE((back.coeffs() - q.canonical().coeffs()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Quaternion, MatrixActionMatchesQuaternionProduct) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    const UnitQuaternion q(g(rng), g(rng), g(rng), g(rng));
    const Vec3 p = testing::gaussian3(rng, 3.0);
    expect_near(quat_to_matrix(q) * p, q.rotate(p), 1e-9);
  }
}

TEST(Euler, Examples) {
  const EulerDecomposition id = matrix_to_euler_xyz(RotationMatrix());
  EXPECT_EQ(id.angles, (EulerAnglesXYZ{0, 0, 0}));
  EXPECT_FALSE(id.gimbal_lock);

  const EulerAnglesXYZ z = matrix_to_euler_xyz(RotationMatrix::about_z(deg2rad(10))).angles;
  EXPECT_NEAR(z.roll, 0, 1e-9);
  EXPECT_NEAR(z.pitch, 0, 1e-9);
  EXPECT_NEAR(z.yaw, 10, 1e-9);
}

TEST(Euler, DocumentedCompositionOrder) {
  // Built independently of euler_xyz_to_matrix: Rz(yaw)·Ry(pitch)·Rx(roll).
  const RotationMatrix r = RotationMatrix::about_z(deg2rad(-1.1)) * RotationMatrix::about_y(deg2rad(1.4)) *
                           RotationMatrix::about_x(deg2rad(1.6));
  const EulerAnglesXYZ e = matrix_to_euler_xyz(r).angles;
  EXPECT_NEAR(e.roll, 1.6, 1e-9);
  EXPECT_NEAR(e.pitch, 1.4, 1e-9);
  EXPECT_NEAR(e.yaw, -1.1, 1e-9);
  expect_near(euler_xyz_to_matrix({1.6, 1.4, -1.1}).matrix(), r.matrix(), 1e-15);
}

TEST(Euler, RoundTripAwayFromGimbalLock) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> any(-179.9, 179.9), tilt(-89.0, 89.0);
  for (int i = 0; i < 1000; ++i) {
    const EulerAnglesXYZ e{any(rng), tilt(rng), any(rng)};
    const EulerDecomposition d = matrix_to_euler_xyz(euler_xyz_to_matrix(e));
    EXPECT_FALSE(d.gimbal_lock);
    EXPECT_NEAR(d.angles.roll, e.roll, 1e-6);
    EXPECT_NEAR(d.angles.pitch, e.pitch, 1e-6);
    EXPECT_NEAR(d.angles.yaw, e.yaw, 1e-6);
  }
}

TEST(Euler, GimbalLockIsFlaggedAndStillReconstructs) {
  for (double pitch : {90.0, -90.0}) {
    const RotationMatrix r = euler_xyz_to_matrix({20, pitch, 35});
    const EulerDecomposition d = matrix_to_euler_xyz(r);
    EXPECT_TRUE(d.gimbal_lock);
    EXPECT_EQ(d.angles.roll, 0.0);
    expect_near(euler_xyz_to_matrix(d.angles).matrix(), r.matrix(), 1e-9);
  }
}

TEST(Geodesic, AngleOfKnownRotation) {
  std::mt19937_64 rng(11);
  const RotationMatrix base = random_rotation(rng);
  for (double deg : {0.0, 0.5, 10.0, 90.0, 179.0}) {
    const RotationMatrix r = RotationMatrix::from_axis_angle(Vec3(1, 2, 3).normalized(), deg2rad(deg)) * base;
    EXPECT_NEAR(rad2deg(geodesic_angle(r, base)), deg, 1e-7);
  }
}

}  // namespace
}  // namespace calib
