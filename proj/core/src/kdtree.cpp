#include "calib/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace calib {

namespace {

bool better(const KdTree3::Neighbor& a, const KdTree3::Neighbor& b) {
  return a.squared_distance < b.squared_distance ||
         (a.squared_distance == b.squared_distance && a.index < b.index);
}

}  // namespace

KdTree3::KdTree3(std::span<const Point3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) return;
  std::vector<std::size_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  nodes_.reserve(points_.size());
  root_ = build(idx, 0, idx.size());
}

int KdTree3::build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi) {
  if (lo >= hi) return -1;
  // Split on the axis of largest extent.
  Vec3 mn = points_[idx[lo]], mx = points_[idx[lo]];
  for (std::size_t i = lo + 1; i < hi; ++i) {
    mn = mn.cwiseMin(points_[idx[i]]);
    mx = mx.cwiseMax(points_[idx[i]]);
  }
  int axis = 0;
  (mx - mn).maxCoeff(&axis);

  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(mid),
                   idx.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::size_t a, std::size_t b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{idx[mid], axis, -1, -1});
  const int left = build(idx, lo, mid);
  const int right = build(idx, mid + 1, hi);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree3::search(int node, const Point3& q, Neighbor* best, std::size_t k, std::size_t* found) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Neighbor cand{n.point, (points_[n.point] - q).squaredNorm()};

  // Insert into the sorted k-best list.
  if (*found < k || better(cand, best[*found - 1])) {
    std::size_t pos = std::min(*found, k - 1);
    if (*found < k) ++*found;
    best[pos] = cand;
    while (pos > 0 && better(best[pos], best[pos - 1])) {
      std::swap(best[pos], best[pos - 1]);
      --pos;
    }
  }

  const double diff = q[n.axis] - points_[n.point][n.axis];
  const int near = diff <= 0.0 ? n.left : n.right;
  const int far = diff <= 0.0 ? n.right : n.left;
  search(near, q, best, k, found);
  // Equal plane distance may still hide a lower-index tie.
  if (*found < k || diff * diff <= best[*found - 1].squared_distance) search(far, q, best, k, found);
}

KdTree3::Neighbor KdTree3::nearest(const Point3& query) const {
  Neighbor best[1];
  std::size_t found = 0;
  search(root_, query, best, 1, &found);
  return best[0];
}

std::vector<KdTree3::Neighbor> KdTree3::nearest_two(const Point3& query) const {
  Neighbor best[2];
  std::size_t found = 0;
  search(root_, query, best, 2, &found);
  return {best, best + found};
}

}  // namespace calib
