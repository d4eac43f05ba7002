#ifndef CALIB_BOARD_HPP_
#define CALIB_BOARD_HPP_

#include <optional>
#include <span>
#include <vector>

#include "calib/geometry.hpp"

namespace calib {

struct InnerCutout {
  double width = 0.0;
  double height = 0.0;
  /// Center of the cutout relative to the board center, board-plane meters.
  Vec2 offset = Vec2::Zero();

  friend bool operator==(const InnerCutout&, const InnerCutout&) = default;
};

/// Planar rectangular marker. The board frame has its origin at the tag
/// center, x/y in the board plane along the rectangle's sides and z along the
/// normal (pointing toward the camera observing the tag).
struct BoardModel {
  double width = 0.5;
  double height = 0.5;
  std::optional<InnerCutout> inner;
  /// Tag center relative to the board center, board-plane meters.
  Vec2 tag_center_offset = Vec2::Zero();

  bool hollow() const noexcept { return inner.has_value(); }
  std::size_t corner_count() const noexcept { return hollow() ? 8 : 4; }

  /// Throws InvalidArgument for non-positive sizes or a cutout not strictly
  /// inside the outer rectangle.
  void validate() const;

  /// Outer rectangle corners (then inner, for hollow boards) in the board
  /// frame, z = 0, in the order (+x,+y), (−x,+y), (−x,−y), (+x,−y).
  std::vector<Point3> corners_board_frame() const;

  friend bool operator==(const BoardModel&, const BoardModel&) = default;
};

/// Image point, pixels.
struct Point2 {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// How a sensor orders the corners of one rectangle: start at the corner
/// highest along `up`, then walk counter-clockwise as seen from `viewpoint`.
/// Ties in height (an untilted board) go to the corner further right.
struct CornerOrdering {
  Vec3 up = Vec3::UnitZ();
  Point3 viewpoint = Point3::Zero();
  /// Used when the viewpoint lies in the corners' plane.
  std::optional<Vec3> fallback_normal;
};

/// Permutation placing four coplanar corners in canonical order.
std::vector<std::size_t> canonical_corner_order(std::span<const Point3> corners, const CornerOrdering& ordering);

/// Reorders a 4- or 8-corner list (outer first, then inner) canonically.
std::vector<Point3> canonicalize_corners(std::span<const Point3> corners, const CornerOrdering& ordering);

}  // namespace calib

#endif  // CALIB_BOARD_HPP_
