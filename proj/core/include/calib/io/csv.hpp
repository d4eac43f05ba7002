#ifndef CALIB_IO_CSV_HPP_
#define CALIB_IO_CSV_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "calib/camera.hpp"
#include "calib/geometry.hpp"
#include "calib/registration.hpp"

namespace calib::io {

/// Header `px,py,pz,qx,qy,qz`; one pair per row, source P then target Q.
/// Errors name the 1-based line: Malformed (bad header or number),
/// WrongArity (field count), NonFiniteValue (nan/inf).
CorrespondenceSet parse_correspondences_3d3d(std::string_view text, const FrameId& source, const FrameId& target);
std::string format_correspondences_3d3d(const CorrespondenceSet& c);

/// Header `X,Y,Z,u,v`: object point (meters) and pixel.
std::vector<Correspondence2D3D> parse_correspondences_2d3d(std::string_view text);
std::string format_correspondences_2d3d(std::span<const Correspondence2D3D> c);

/// Header `point_index,edge_id`; edge ids as accepted by edge_from_string.
using EdgeLabel = std::pair<std::size_t, std::string>;
std::vector<EdgeLabel> parse_edge_labels(std::string_view text);
std::string format_edge_labels(std::span<const EdgeLabel> labels);

/// One row of the running-average trace.
struct RunningAverageRow {
  int run = 0;
  Vec3 translation = Vec3::Zero();
  UnitQuaternion rotation;
  EulerAnglesXYZ euler_deg;

  friend bool operator==(const RunningAverageRow&, const RunningAverageRow&) = default;
};

/// Header `run,tx,ty,tz,qw,qx,qy,qz,roll_deg,pitch_deg,yaw_deg`.
std::vector<RunningAverageRow> running_average_rows(std::span<const RigidTransform> trace);
std::vector<RunningAverageRow> parse_running_average(std::string_view text);
std::string format_running_average(std::span<const RunningAverageRow> rows);

}  // namespace calib::io

#endif  // CALIB_IO_CSV_HPP_
