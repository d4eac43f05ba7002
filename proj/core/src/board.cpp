#include "calib/board.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace calib {

void BoardModel::validate() const {
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
    throw Error(ErrorCode::kInvalidArgument, "board width and height must be positive");
  }
  if (!tag_center_offset.allFinite()) throw Error(ErrorCode::kInvalidArgument, "tag offset must be finite");
  if (inner) {
    const InnerCutout& in = *inner;
    if (!(in.width > 0.0) || !(in.height > 0.0) || !in.offset.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "cutout width and height must be positive");
    }
    if (std::abs(in.offset.x()) + in.width / 2 >= width / 2 || std::abs(in.offset.y()) + in.height / 2 >= height / 2) {
      throw Error(ErrorCode::kInvalidArgument, "cutout must lie strictly inside the outer rectangle");
    }
  }
}

std::vector<Point3> BoardModel::corners_board_frame() const {
  validate();
  std::vector<Point3> out;
  auto rect = [&](double w, double h, const Vec2& center) {
    const Vec2 c = center - tag_center_offset;
    out.emplace_back(c.x() + w / 2, c.y() + h / 2, 0.0);
    out.emplace_back(c.x() - w / 2, c.y() + h / 2, 0.0);
    out.emplace_back(c.x() - w / 2, c.y() - h / 2, 0.0);
    out.emplace_back(c.x() + w / 2, c.y() - h / 2, 0.0);
  };
  rect(width, height, Vec2::Zero());
  if (inner) rect(inner->width, inner->height, inner->offset);
  return out;
}

std::vector<std::size_t> canonical_corner_order(std::span<const Point3> corners, const CornerOrdering& ordering) {
  if (corners.size() != 4) throw Error(ErrorCode::kInvalidArgument, "expected 4 corners");
  Vec3 c = Vec3::Zero();
  for (const Point3& p : corners) c += p;
  c /= 4.0;

  Vec3 n = (corners[2] - corners[0]).cross(corners[3] - corners[1]);
  const double scale = (corners[2] - corners[0]).norm() + (corners[3] - corners[1]).norm();
  if (!(n.norm() > 1e-12 * scale * scale)) throw Error(ErrorCode::kDegenerateGeometry, "corners are collinear");
  n.normalize();
  const Vec3 to_viewer = ordering.viewpoint - c;
  if (std::abs(n.dot(to_viewer)) > 1e-9 * (1.0 + to_viewer.norm())) {
    if (n.dot(to_viewer) < 0.0) n = -n;
  } else if (ordering.fallback_normal) {
    if (n.dot(*ordering.fallback_normal) < 0.0) n = -n;
  }

  Vec3 up = ordering.up - ordering.up.dot(n) * n;
  if (!(up.norm() > 1e-9 * ordering.up.norm())) {
    throw Error(ErrorCode::kInvalidArgument, "up direction is perpendicular to the board plane");
  }
  up.normalize();
  const Vec3 right = up.cross(n);

  std::vector<double> a(4), b(4);
  for (std::size_t i = 0; i < 4; ++i) {
    a[i] = right.dot(corners[i] - c);
    b[i] = up.dot(corners[i] - c);
  }
  const double tie = 1e-9 * (1.0 + scale);
  std::size_t top = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (b[i] > b[top] + tie || (std::abs(b[i] - b[top]) <= tie && a[i] > a[top])) top = i;
  }
  const double theta0 = std::atan2(b[top], a[top]);
  std::vector<double> rel(4);
  for (std::size_t i = 0; i < 4; ++i) {
    double d = std::atan2(b[i], a[i]) - theta0;
    while (d < 0.0) d += 2.0 * kPi;
    while (d >= 2.0 * kPi) d -= 2.0 * kPi;
    rel[i] = i == top ? 0.0 : d;
  }
  std::vector<std::size_t> order(4);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return rel[x] < rel[y]; });
  return order;
}

std::vector<Point3> canonicalize_corners(std::span<const Point3> corners, const CornerOrdering& ordering) {
  if (corners.size() != 4 && corners.size() != 8) {
    throw Error(ErrorCode::kInvalidArgument, "expected 4 or 8 corners, got " + std::to_string(corners.size()));
  }
  std::vector<Point3> out;
  out.reserve(corners.size());
  for (std::size_t base = 0; base < corners.size(); base += 4) {
    const auto rect = corners.subspan(base, 4);
    for (std::size_t i : canonical_corner_order(rect, ordering)) out.push_back(rect[i]);
  }
  return out;
}

}  // namespace calib
