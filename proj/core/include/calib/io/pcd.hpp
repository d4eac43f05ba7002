#ifndef CALIB_IO_PCD_HPP_
#define CALIB_IO_PCD_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "calib/geometry.hpp"

namespace calib::io {

/// Parses an ASCII PCD v0.7 document. FIELDS must contain x, y and z; a
/// `ring` field is kept as the ring channel, anything else is ignored. The
/// frame comes from a `# frame <name>` comment, else `default_frame`.
///
/// Throws Malformed (with line and column), UnsupportedEncoding for binary
/// data, MissingField when x/y/z or a required header line is absent.
PointCloud parse_pcd(std::string_view text, const FrameId& default_frame = FrameId("lidar"));

/// Canonical ASCII form: fixed header, shortest round-trip numbers, one point
/// per line. parse_pcd(format_pcd(c)) == c.
std::string format_pcd(const PointCloud& cloud);

PointCloud read_pcd(const std::filesystem::path& path, const FrameId& default_frame = FrameId("lidar"));
void write_pcd(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace calib::io

#endif  // CALIB_IO_PCD_HPP_
