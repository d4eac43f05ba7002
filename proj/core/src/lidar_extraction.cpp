#include "calib/lidar_extraction.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <numeric>

#include "calib/detail/rng.hpp"

namespace calib {

// ---------------------------------------------------------------------------
// Lines

Line3::Line3(const Point3& point, const Vec3& direction) : point_(point) {
  if (!is_finite(point) || !is_finite(direction)) throw Error(ErrorCode::kNonFinite, "line is not finite");
  const double n = direction.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::kInvalidArgument, "line direction must be nonzero");
  direction_ = direction / n;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(direction_[i]) > 1e-12) {
      if (direction_[i] < 0.0) direction_ = -direction_;
      break;
    }
  }
}

double Line3::distance(const Point3& p) const {
  const Vec3 w = p - point_;
  return (w - w.dot(direction_) * direction_).norm();
}

std::string_view to_string(EdgeId e) noexcept {
  switch (e) {
    case EdgeId::kTopLeft: return "top-left";
    case EdgeId::kTopRight: return "top-right";
    case EdgeId::kBottomLeft: return "bottom-left";
    case EdgeId::kBottomRight: return "bottom-right";
  }
  return "unknown";
}

EdgeId edge_from_string(std::string_view name, Rectangle* rect) {
  Rectangle r = Rectangle::kOuter;
  constexpr std::string_view kInner = "inner-";
  if (name.substr(0, kInner.size()) == kInner) {
    r = Rectangle::kInner;
    name.remove_prefix(kInner.size());
  }
  for (EdgeId e : {EdgeId::kTopLeft, EdgeId::kTopRight, EdgeId::kBottomLeft, EdgeId::kBottomRight}) {
    if (to_string(e) == name) {
      if (rect) *rect = r;
      return e;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown edge id '" + std::string(name) + "'");
}

Line3 fit_line_least_squares(std::span<const Point3> points) {
  if (points.size() < 2) throw Error(ErrorCode::kInsufficientPoints, "a line needs at least 2 points");
  Vec3 c = Vec3::Zero();
  for (const Point3& p : points) c += p;
  c /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const Point3& p : points) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  return Line3(c, es.eigenvectors().col(2));
}

LineFit ransac_fit_line(const PointCloud& cloud, const RansacLineParams& params) {
  const auto& pts = cloud.points();
  const std::size_t n = pts.size();
  if (n < 2) throw Error(ErrorCode::kInsufficientPoints, "line fit needs at least 2 points, got " + std::to_string(n));
  const std::size_t min_inliers =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(params.min_inlier_fraction * static_cast<double>(n))));

  std::size_t best_count = 0;
  double best_dist = 0.0;
  std::vector<bool> best_mask;

  auto evaluate = [&](std::size_t i, std::size_t j) {
    const Vec3 d = pts[j] - pts[i];
    if (!(d.norm() > 1e-12)) return;
    const Line3 line(pts[i], d);
    std::vector<bool> mask(n, false);
    std::size_t count = 0;
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double dist = line.distance(pts[k]);
      if (dist <= params.threshold) {
        mask[k] = true;
        ++count;
        total += dist;
      }
    }
    if (count > best_count || (count == best_count && count > 0 && total < best_dist)) {
      best_count = count;
      best_dist = total;
      best_mask = std::move(mask);
    }
  };

  // Small inputs: every pair is cheaper than the sampling budget.
  const std::size_t pairs = n * (n - 1) / 2;
  if (pairs <= static_cast<std::size_t>(std::max(params.iterations, 0))) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) evaluate(i, j);
  } else {
    for (int it = 0; it < params.iterations; ++it) {
      auto rng = detail::stream_rng(params.seed, static_cast<std::uint64_t>(it));
      const auto s = detail::sample_without_replacement(n, 2, rng);
      evaluate(s[0], s[1]);
    }
  }

  if (best_count < min_inliers) {
    throw Error(ErrorCode::kNoConsensus, "best line has " + std::to_string(best_count) + " inliers, need " +
                                             std::to_string(min_inliers));
  }
  std::vector<Point3> inl;
  for (std::size_t k = 0; k < n; ++k)
    if (best_mask[k]) inl.push_back(pts[k]);
  return LineFit{fit_line_least_squares(inl), std::move(best_mask), best_count};
}

LineSegment3 shortest_connecting_segment(const Line3& l1, const Line3& l2) {
  const Vec3& d1 = l1.direction();
  const Vec3& d2 = l2.direction();
  const double b = d1.dot(d2);
  if (std::abs(b) > 1.0 - 1e-9) throw Error(ErrorCode::kParallelLines, "lines are parallel; corner undefined");
  const Vec3 w0 = l1.point() - l2.point();
  const double d = d1.dot(w0);
  const double e = d2.dot(w0);
  const double denom = 1.0 - b * b;
  const double s = (b * e - d) / denom;
  const double t = (e - b * d) / denom;
  return LineSegment3{l1.point() + s * d1, l2.point() + t * d2};
}

CornerEstimate corner_from_edges(const Line3& l1, const Line3& l2) {
  const LineSegment3 seg = shortest_connecting_segment(l1, l2);
  return {seg.midpoint(), seg.length()};
}

// ---------------------------------------------------------------------------
// Board extraction

namespace {

std::size_t slot(EdgeId e) { return static_cast<std::size_t>(e); }

}  // namespace

ExtractedBoard extract_board(std::span<const EdgeCluster> clusters, const BoardModel& model,
                             const ExtractionParams& params) {
  model.validate();
  const std::size_t rects = model.hollow() ? 2 : 1;
  if (clusters.size() != 4 * rects) {
    throw Error(ErrorCode::kInvalidArgument, "expected " + std::to_string(4 * rects) + " edge clusters, got " +
                                                 std::to_string(clusters.size()));
  }

  ExtractedBoard out;
  std::array<std::array<const EdgeCluster*, 4>, 2> by_edge{};
  for (const EdgeCluster& c : clusters) {
    auto& cell = by_edge[c.rect == Rectangle::kOuter ? 0 : 1][slot(c.edge)];
    if (cell != nullptr || (c.rect == Rectangle::kInner && !model.hollow())) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate or unexpected cluster " + std::string(to_string(c.edge)));
    }
    cell = &c;
  }

  std::array<std::array<std::optional<Line3>, 4>, 2> lines;
  for (const EdgeCluster& c : clusters) {
    if (c.points.size() < 3) out.low_confidence = true;
    const LineFit fit = ransac_fit_line(c.points, params.ransac);
    lines[c.rect == Rectangle::kOuter ? 0 : 1][slot(c.edge)] = fit.line;
    out.edge_lines.push_back(fit.line);
  }

  for (std::size_t r = 0; r < rects; ++r) {
    const auto& l = lines[r];
    const std::array<CornerEstimate, 4> est = {
        corner_from_edges(*l[slot(EdgeId::kTopLeft)], *l[slot(EdgeId::kTopRight)]),
        corner_from_edges(*l[slot(EdgeId::kTopLeft)], *l[slot(EdgeId::kBottomLeft)]),
        corner_from_edges(*l[slot(EdgeId::kBottomLeft)], *l[slot(EdgeId::kBottomRight)]),
        corner_from_edges(*l[slot(EdgeId::kTopRight)], *l[slot(EdgeId::kBottomRight)]),
    };
    std::array<Point3, 4> raw;
    for (std::size_t i = 0; i < 4; ++i) raw[i] = est[i].corner;
    const auto order = canonical_corner_order(raw, params.ordering);

    std::array<Point3, 4> c;
    for (std::size_t i = 0; i < 4; ++i) {
      c[i] = raw[order[i]];
      out.corners.push_back(c[i]);
      out.gap_lengths.push_back(est[order[i]].gap);
    }

    const double w = r == 0 ? model.width : model.inner->width;
    const double h = r == 0 ? model.height : model.inner->height;
    std::array<double, 4> len;
    for (std::size_t i = 0; i < 4; ++i) len[i] = (c[(i + 1) % 4] - c[i]).norm();
    std::array<double, 4> e0, e1;
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      e0[i] = std::abs(len[i] - (i % 2 == 0 ? w : h));
      e1[i] = std::abs(len[i] - (i % 2 == 0 ? h : w));
      s0 += e0[i];
      s1 += e1[i];
    }
    const auto& errs = s0 <= s1 ? e0 : e1;
    for (double e : errs) {
      out.edge_length_errors.push_back(e);
      if (e > params.reject_threshold) {
        throw Error(ErrorCode::kBoardRejected, "edge length off by " + std::to_string(e) + " m (limit " +
                                                   std::to_string(params.reject_threshold) + " m)");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Edge clustering

namespace {

struct PlaneFrame {
  Vec3 origin;
  Vec3 right;
  Vec3 up;
  Vec2 project(const Point3& p) const { return {right.dot(p - origin), up.dot(p - origin)}; }
};

PlaneFrame board_plane(const std::vector<Point3>& pts, const CornerOrdering& ordering) {
  Vec3 c = Vec3::Zero();
  for (const Point3& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const Point3& p : pts) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  Vec3 n = es.eigenvectors().col(0);
  if (n.dot(ordering.viewpoint - c) < 0.0) n = -n;
  Vec3 up = ordering.up - ordering.up.dot(n) * n;
  if (!(up.norm() > 1e-9)) throw Error(ErrorCode::kInvalidArgument, "up direction is perpendicular to the board");
  up.normalize();
  return PlaneFrame{c, up.cross(n), up};
}

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain; counter-clockwise, no collinear points.
std::vector<Vec2> convex_hull(std::vector<Vec2> p) {
  std::sort(p.begin(), p.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (p.size() < 3) return p;
  std::vector<Vec2> h(2 * p.size());
  std::size_t k = 0;
  for (const Vec2& q : p) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], q) <= 0) --k;
    h[k++] = q;
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

double line_distance(const std::vector<Vec2>& pts, const Vec2& q) {
  Vec2 c = Vec2::Zero();
  for (const Vec2& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const Vec2& p : pts) cov += (p - c) * (p - c).transpose();
  const Vec2 d = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cov).eigenvectors().col(1);
  const Vec2 w = q - c;
  return (w - w.dot(d) * d).norm();
}

// Splits one side (all left or all right boundary points) into its upper and
// lower edge at the side's extreme point.
void split_side(const std::vector<std::size_t>& side, const std::vector<Vec2>& uv, bool left,
                std::vector<std::size_t>* upper, std::vector<std::size_t>* lower) {
  if (side.empty()) return;
  std::size_t ext = side.front();
  for (std::size_t i : side) {
    const bool more = left ? uv[i].x() < uv[ext].x() : uv[i].x() > uv[ext].x();
    if (more || (uv[i].x() == uv[ext].x() && i < ext)) ext = i;
  }
  for (std::size_t i : side) {
    if (i == ext) continue;
    (uv[i].y() > uv[ext].y() ? upper : lower)->push_back(i);
  }
  std::vector<Vec2> up_pts, lo_pts;
  for (std::size_t i : *upper) up_pts.push_back(uv[i]);
  for (std::size_t i : *lower) lo_pts.push_back(uv[i]);
  bool to_upper;
  if (up_pts.size() >= 2 && lo_pts.size() >= 2) {
    to_upper = line_distance(up_pts, uv[ext]) <= line_distance(lo_pts, uv[ext]);
  } else {
    to_upper = up_pts.size() <= lo_pts.size();
  }
  (to_upper ? upper : lower)->push_back(ext);
  std::sort(upper->begin(), upper->end());
  std::sort(lower->begin(), lower->end());
}

}  // namespace

std::vector<EdgeCluster> cluster_edges(const PointCloud& board_points, const BoardModel& model,
                                       const ClusterParams& params) {
  model.validate();
  const auto& pts = board_points.points();
  if (pts.size() < 8) throw Error(ErrorCode::kTooSparse, "board has only " + std::to_string(pts.size()) + " points");
  const PlaneFrame plane = board_plane(pts, params.ordering);
  std::vector<Vec2> uv;
  uv.reserve(pts.size());
  for (const Point3& p : pts) uv.push_back(plane.project(p));

  std::vector<std::size_t> outer_left, outer_right, inner_left, inner_right;
  // Highest and lowest ring in board coordinates, sorted along the ring.
  std::vector<std::size_t> top_ring, bottom_ring;
  if (board_points.has_rings()) {
    std::map<int, std::vector<std::size_t>> by_ring;
    for (std::size_t i = 0; i < pts.size(); ++i) by_ring[board_points.rings()[i]].push_back(i);
    double top_y = -std::numeric_limits<double>::infinity(), bottom_y = std::numeric_limits<double>::infinity();
    for (auto& [ring, idx] : by_ring) {
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return uv[a].x() < uv[b].x() || (uv[a].x() == uv[b].x() && a < b);
      });
      std::vector<std::size_t> run_starts{0};
      for (std::size_t k = 1; k < idx.size(); ++k) {
        if ((uv[idx[k]] - uv[idx[k - 1]]).norm() > params.segment_gap) run_starts.push_back(k);
      }
      outer_left.push_back(idx.front());
      outer_right.push_back(idx.back());
      double y = 0;
      for (std::size_t i : idx) y += uv[i].y();
      y /= static_cast<double>(idx.size());
      if (y > top_y) top_y = y, top_ring = idx;
      if (y < bottom_y) bottom_y = y, bottom_ring = idx;
      for (std::size_t r = 1; r < run_starts.size(); ++r) {
        inner_left.push_back(idx[run_starts[r] - 1]);
        inner_right.push_back(idx[run_starts[r]]);
      }
    }
  } else {
    if (model.hollow()) {
      throw Error(ErrorCode::kInvalidArgument, "hollow boards need ring data or manual edge labels");
    }
    const std::vector<Vec2> hull = convex_hull(uv);
    std::size_t top = 0, bottom = 0;
    for (std::size_t i = 1; i < uv.size(); ++i) {
      if (uv[i].y() > uv[top].y()) top = i;
      if (uv[i].y() < uv[bottom].y()) bottom = i;
    }
    for (std::size_t i = 0; i < uv.size(); ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < hull.size(); ++k) d = std::min(d, segment_distance(uv[i], hull[k], hull[(k + 1) % hull.size()]));
      if (d > params.hull_band) continue;
      (cross2(uv[bottom], uv[top], uv[i]) > 0.0 ? outer_left : outer_right).push_back(i);
    }
  }

  std::vector<EdgeCluster> out;
  auto emit = [&](Rectangle rect, const std::vector<std::size_t>& left, const std::vector<std::size_t>& right) {
    std::vector<std::size_t> tl, bl, tr, br;
    split_side(left, uv, true, &tl, &bl);
    split_side(right, uv, false, &tr, &br);
    if (rect == Rectangle::kOuter) {
      // A side with no bend (board not tilted in its plane) leaves a top or
      // bottom edge nearly empty; those edges then run along the extreme
      // rings, so borrow that ring's points.
      auto straight = [&](const std::vector<std::size_t>& side) {
        if (side.size() < 3) return false;
        auto [lo, hi] = std::minmax_element(side.begin(), side.end(),
                                            [&](std::size_t a, std::size_t b) { return uv[a].y() < uv[b].y(); });
        const Vec2 a = uv[*lo], d = (uv[*hi] - a).normalized();
        for (std::size_t i : side) {
          const Vec2 w = uv[i] - a;
          if (std::abs(w.x() * d.y() - w.y() * d.x()) > params.hull_band) return false;
        }
        return true;
      };
      const bool flat_left = straight(left), flat_right = straight(right);
      auto borrow = [&](std::vector<std::size_t>* edge, const std::vector<std::size_t>& ring, bool first_half) {
        if (edge->size() >= 2 || ring.size() < 4 || !(first_half ? flat_left : flat_right)) return;
        const std::size_t half = ring.size() / 2;
        edge->insert(edge->end(), first_half ? ring.begin() : ring.begin() + half,
                     first_half ? ring.begin() + half : ring.end());
        std::sort(edge->begin(), edge->end());
        edge->erase(std::unique(edge->begin(), edge->end()), edge->end());
      };
      borrow(&tl, top_ring, true);
      borrow(&tr, top_ring, false);
      borrow(&bl, bottom_ring, true);
      borrow(&br, bottom_ring, false);
    }
    const std::array<std::pair<EdgeId, std::vector<std::size_t>*>, 4> edges = {
        {{EdgeId::kTopLeft, &tl}, {EdgeId::kTopRight, &tr}, {EdgeId::kBottomLeft, &bl}, {EdgeId::kBottomRight, &br}}};
    for (const auto& [edge, idx] : edges) {
      if (idx->size() < 2) {
        throw Error(ErrorCode::kTooSparse, std::string(rect == Rectangle::kInner ? "inner " : "") +
                                               std::string(to_string(edge)) + " edge has " +
                                               std::to_string(idx->size()) + " point(s), need 2");
      }
      out.push_back(EdgeCluster{edge, rect, board_points.select(*idx), *idx});
    }
  };
  emit(Rectangle::kOuter, outer_left, outer_right);
  if (model.hollow()) emit(Rectangle::kInner, inner_left, inner_right);
  return out;
}

std::vector<EdgeCluster> clusters_from_labels(const PointCloud& cloud,
                                              std::span<const std::pair<std::size_t, std::string>> labels,
                                              const BoardModel& model) {
  model.validate();
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (const auto& [index, name] : labels) {
    if (index >= cloud.size()) {
      throw Error(ErrorCode::kInvalidArgument, "label refers to point " + std::to_string(index) + " of a " +
                                                   std::to_string(cloud.size()) + "-point cloud");
    }
    Rectangle rect = Rectangle::kOuter;
    const EdgeId e = edge_from_string(name, &rect);
    groups[{static_cast<int>(rect), static_cast<int>(e)}].push_back(index);
  }
  std::vector<EdgeCluster> out;
  const int rects = model.hollow() ? 2 : 1;
  for (int r = 0; r < rects; ++r) {
    for (int e = 0; e < 4; ++e) {
      auto it = groups.find({r, e});
      const auto edge = static_cast<EdgeId>(e);
      if (it == groups.end() || it->second.size() < 2) {
        throw Error(ErrorCode::kTooSparse, "edge " + std::string(r == 1 ? "inner-" : "") +
                                               std::string(to_string(edge)) + " has fewer than 2 labeled points");
      }
      out.push_back(EdgeCluster{edge, static_cast<Rectangle>(r), cloud.select(it->second), it->second});
    }
  }
  return out;
}

}  // namespace calib
