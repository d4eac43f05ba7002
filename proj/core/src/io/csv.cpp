#include "calib/io/csv.hpp"

#include <cmath>
#include <string>

#include "calib/io/text.hpp"
#include "calib/lidar_extraction.hpp"

namespace calib::io {

namespace {

struct Row {
  std::size_t line;
  std::vector<std::string_view> fields;
};

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t c = line.find(',', start);
    out.push_back(trim(line.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start)));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return out;
}

/// Data rows after validating the header.
std::vector<Row> read_rows(std::string_view text, const std::vector<std::string_view>& header) {
  std::vector<Row> rows;
  bool header_seen = false;
  std::size_t ln = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++ln;
    if (trim(line).empty()) continue;
    auto fields = split_commas(line);
    if (!header_seen) {
      if (fields != header) {
        std::string want;
        for (std::size_t k = 0; k < header.size(); ++k) want += (k ? "," : "") + std::string(header[k]);
        throw Error(ErrorCode::kMalformed, "line " + std::to_string(ln) + ": expected header '" + want + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kWrongArity, "line " + std::to_string(ln) + ": expected " + std::to_string(header.size()) +
                                              " fields, got " + std::to_string(fields.size()));
    }
    rows.push_back({ln, std::move(fields)});
  }
  if (!header_seen) throw Error(ErrorCode::kMalformed, "empty file, no header");
  return rows;
}

double number(const Row& r, std::size_t k) {
  double v = 0.0;
  if (!parse_double(r.fields[k], &v)) {
    throw Error(ErrorCode::kMalformed, "line " + std::to_string(r.line) + ", field " + std::to_string(k + 1) + ": '" +
                                           std::string(r.fields[k]) + "' is not a number");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNonFiniteValue,
                "line " + std::to_string(r.line) + ", field " + std::to_string(k + 1) + " is not finite");
  }
  return v;
}

std::string join(std::initializer_list<double> values) {
  std::string s;
  bool first = true;
  for (double v : values) {
    if (!first) s += ",";
    s += format_double(v);
    first = false;
  }
  return s;
}

}  // namespace

CorrespondenceSet parse_correspondences_3d3d(std::string_view text, const FrameId& source, const FrameId& target) {
  std::vector<Point3> p, q;
  for (const Row& r : read_rows(text, {"px", "py", "pz", "qx", "qy", "qz"})) {
    p.emplace_back(number(r, 0), number(r, 1), number(r, 2));
    q.emplace_back(number(r, 3), number(r, 4), number(r, 5));
  }
  return CorrespondenceSet(PointCloud(source, std::move(p)), PointCloud(target, std::move(q)));
}

std::string format_correspondences_3d3d(const CorrespondenceSet& c) {
  std::string out = "px,py,pz,qx,qy,qz\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Point3& p = c.source()[i];
    const Point3& q = c.target()[i];
    out += join({p.x(), p.y(), p.z(), q.x(), q.y(), q.z()}) + "\n";
  }
  return out;
}

std::vector<Correspondence2D3D> parse_correspondences_2d3d(std::string_view text) {
  std::vector<Correspondence2D3D> out;
  for (const Row& r : read_rows(text, {"X", "Y", "Z", "u", "v"})) {
    out.push_back({Point3(number(r, 0), number(r, 1), number(r, 2)), Point2{number(r, 3), number(r, 4)}});
  }
  return out;
}

std::string format_correspondences_2d3d(std::span<const Correspondence2D3D> c) {
  std::string out = "X,Y,Z,u,v\n";
  for (const auto& x : c) out += join({x.object.x(), x.object.y(), x.object.z(), x.image.u, x.image.v}) + "\n";
  return out;
}

std::vector<EdgeLabel> parse_edge_labels(std::string_view text) {
  std::vector<EdgeLabel> out;
  for (const Row& r : read_rows(text, {"point_index", "edge_id"})) {
    long long idx = 0;
    if (!parse_int(r.fields[0], &idx) || idx < 0) {
      throw Error(ErrorCode::kMalformed, "line " + std::to_string(r.line) + ": point_index '" +
                                             std::string(r.fields[0]) + "' is not a non-negative integer");
    }
    try {
      Rectangle rect;
      (void)edge_from_string(r.fields[1], &rect);
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformed, "line " + std::to_string(r.line) + ": " + e.detail());
    }
    out.emplace_back(static_cast<std::size_t>(idx), std::string(r.fields[1]));
  }
  return out;
}

std::string format_edge_labels(std::span<const EdgeLabel> labels) {
  std::string out = "point_index,edge_id\n";
  for (const auto& [i, e] : labels) out += std::to_string(i) + "," + e + "\n";
  return out;
}

std::vector<RunningAverageRow> running_average_rows(std::span<const RigidTransform> trace) {
  std::vector<RunningAverageRow> rows;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    rows.push_back({static_cast<int>(k + 1), trace[k].translation(), matrix_to_quat(trace[k].rotation()),
                    matrix_to_euler_xyz(trace[k].rotation()).angles});
  }
  return rows;
}

std::vector<RunningAverageRow> parse_running_average(std::string_view text) {
  std::vector<RunningAverageRow> out;
  for (const Row& r : read_rows(text, {"run", "tx", "ty", "tz", "qw", "qx", "qy", "qz", "roll_deg", "pitch_deg",
                                       "yaw_deg"})) {
    long long run = 0;
    if (!parse_int(r.fields[0], &run) || run < 1) {
      throw Error(ErrorCode::kMalformed, "line " + std::to_string(r.line) + ": run must be a positive integer");
    }
    out.push_back({static_cast<int>(run), Vec3(number(r, 1), number(r, 2), number(r, 3)),
                   UnitQuaternion(number(r, 4), number(r, 5), number(r, 6), number(r, 7)),
                   EulerAnglesXYZ{number(r, 8), number(r, 9), number(r, 10)}});
  }
  return out;
}

std::string format_running_average(std::span<const RunningAverageRow> rows) {
  std::string out = "run,tx,ty,tz,qw,qx,qy,qz,roll_deg,pitch_deg,yaw_deg\n";
  for (const auto& r : rows) {
    out += std::to_string(r.run) + "," +
           join({r.translation.x(), r.translation.y(), r.translation.z(), r.rotation.w(), r.rotation.x(),
                 r.rotation.y(), r.rotation.z(), r.euler_deg.roll, r.euler_deg.pitch, r.euler_deg.yaw}) +
           "\n";
  }
  return out;
}

}  // namespace calib::io
