#ifndef CALIB_KDTREE_HPP_
#define CALIB_KDTREE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "calib/geometry.hpp"

namespace calib {

/// Exact nearest-neighbour index over a fixed set of 3D points. Queries
/// return the point with the smallest squared distance; equal distances
/// resolve to the lowest index, so results are reproducible bit for bit.
class KdTree3 {
 public:
  struct Neighbor {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  explicit KdTree3(std::span<const Point3> points);

  std::size_t size() const noexcept { return points_.size(); }

  /// Precondition: the tree is nonempty.
  Neighbor nearest(const Point3& query) const;

  /// The two nearest distinct points (second is absent for single-point trees).
  std::vector<Neighbor> nearest_two(const Point3& query) const;

 private:
  struct Node {
    std::size_t point = 0;  // index into points_
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi);
  void search(int node, const Point3& q, Neighbor* best, std::size_t k, std::size_t* found) const;

  std::vector<Point3> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace calib

#endif  // CALIB_KDTREE_HPP_
