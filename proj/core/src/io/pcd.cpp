#include "calib/io/pcd.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "calib/io/text.hpp"

namespace calib::io {

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> split_ws(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

[[noreturn]] void malformed(std::size_t line, std::size_t col, const std::string& what) {
  throw Error(ErrorCode::kMalformed, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
}

long long header_int(const std::vector<Token>& t, std::size_t line) {
  long long v = 0;
  if (t.size() != 2 || !parse_int(t[1].text, &v) || v < 0) {
    malformed(line, t.size() > 1 ? t[1].column : 1, std::string(t[0].text) + " expects one non-negative integer");
  }
  return v;
}

}  // namespace

PointCloud parse_pcd(std::string_view text, const FrameId& default_frame) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }

  std::optional<std::string> frame;
  std::optional<int> rings_comment;
  std::vector<std::string> fields;
  std::optional<long long> width, height, points;
  bool have_data = false;
  std::size_t i = 0;
  for (; i < lines.size() && !have_data; ++i) {
    const std::size_t ln = i + 1;
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto t = split_ws(line.substr(1));
      if (t.size() == 2 && t[0].text == "frame") frame = std::string(t[1].text);
      if (t.size() == 2 && t[0].text == "rings") {
        long long n = 0;
        if (!parse_int(t[1].text, &n) || n < 1 || n > 1 << 20) malformed(ln, t[1].column + 1, "bad ring count");
        rings_comment = static_cast<int>(n);
      }
      continue;
    }
    const auto t = split_ws(line);
    const std::string_view key = t[0].text;
    if (key == "VERSION" || key == "VIEWPOINT") {
      continue;
    } else if (key == "FIELDS") {
      fields.clear();
      for (std::size_t k = 1; k < t.size(); ++k) fields.emplace_back(t[k].text);
    } else if (key == "SIZE" || key == "TYPE") {
      if (t.size() != fields.size() + 1) {
        malformed(ln, 1, std::string(key) + " has " + std::to_string(t.size() - 1) + " entries for " +
                             std::to_string(fields.size()) + " fields");
      }
    } else if (key == "COUNT") {
      if (t.size() != fields.size() + 1) malformed(ln, 1, "COUNT does not match FIELDS");
      for (std::size_t k = 1; k < t.size(); ++k) {
        if (t[k].text != "1") malformed(ln, t[k].column, "only COUNT 1 fields are supported");
      }
    } else if (key == "WIDTH") {
      width = header_int(t, ln);
    } else if (key == "HEIGHT") {
      height = header_int(t, ln);
    } else if (key == "POINTS") {
      points = header_int(t, ln);
    } else if (key == "DATA") {
      if (t.size() != 2) malformed(ln, 1, "DATA expects one encoding");
      if (t[1].text != "ascii") {
        throw Error(ErrorCode::kUnsupportedEncoding,
                    "line " + std::to_string(ln) + ": DATA " + std::string(t[1].text) + " is not supported (ASCII only)");
      }
      have_data = true;
    } else {
      malformed(ln, 1, "unknown header entry '" + std::string(key) + "'");
    }
  }
  if (!have_data) throw Error(ErrorCode::kMissingField, "no DATA line");
  if (fields.empty()) throw Error(ErrorCode::kMissingField, "no FIELDS line");
  if (!width || !height) throw Error(ErrorCode::kMissingField, "WIDTH and HEIGHT are required");
  const long long expected = *width * *height;
  if (points && *points != expected) {
    throw Error(ErrorCode::kMalformed, "WIDTH*HEIGHT = " + std::to_string(expected) + " but POINTS = " +
                                           std::to_string(*points));
  }

  auto field_index = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = std::find(fields.begin(), fields.end(), name);
    if (it == fields.end()) return std::nullopt;
    return static_cast<std::size_t>(it - fields.begin());
  };
  const auto ix = field_index("x"), iy = field_index("y"), iz = field_index("z"), ir = field_index("ring");
  if (!ix || !iy || !iz) throw Error(ErrorCode::kMissingField, "FIELDS must include x, y and z");

  std::vector<Point3> pts;
  std::vector<int> rings;
  for (; i < lines.size(); ++i) {
    const std::size_t ln = i + 1;
    if (trim(lines[i]).empty()) continue;
    const auto t = split_ws(lines[i]);
    if (t.size() != fields.size()) {
      malformed(ln, 1, "expected " + std::to_string(fields.size()) + " values, got " + std::to_string(t.size()));
    }
    Point3 p;
    const std::size_t xyz[3] = {*ix, *iy, *iz};
    for (int k = 0; k < 3; ++k) {
      const Token& tok = t[xyz[k]];
      double v = 0.0;
      if (!parse_double(tok.text, &v)) malformed(ln, tok.column, "'" + std::string(tok.text) + "' is not a number");
      if (!std::isfinite(v)) malformed(ln, tok.column, "non-finite coordinate");
      p[k] = v;
    }
    pts.push_back(p);
    if (ir) {
      long long r = 0;
      const Token& tok = t[*ir];
      if (!parse_int(tok.text, &r) || r < 0 || r > 1 << 20) malformed(ln, tok.column, "ring must be a small integer");
      rings.push_back(static_cast<int>(r));
    }
  }
  if (static_cast<long long>(pts.size()) != expected) {
    throw Error(ErrorCode::kMalformed, "header declares " + std::to_string(expected) + " points but " +
                                           std::to_string(pts.size()) + " data rows follow");
  }

  const FrameId f = frame ? FrameId(*frame) : default_frame;
  if (!ir) return PointCloud(f, std::move(pts));
  int num_rings = rings_comment.value_or(rings.empty() ? 1 : *std::max_element(rings.begin(), rings.end()) + 1);
  try {
    return PointCloud(f, std::move(pts), std::move(rings), num_rings);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformed, e.detail());
  }
}

std::string format_pcd(const PointCloud& cloud) {
  const std::string n = std::to_string(cloud.size());
  std::string out = "# .PCD v0.7 - Point Cloud Data file format\n";
  out += "# frame " + cloud.frame().name() + "\n";
  if (cloud.has_rings()) out += "# rings " + std::to_string(cloud.num_rings()) + "\n";
  out += "VERSION 0.7\n";
  if (cloud.has_rings()) {
    out += "FIELDS x y z ring\nSIZE 8 8 8 4\nTYPE F F F U\nCOUNT 1 1 1 1\n";
  } else {
    out += "FIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\n";
  }
  out += "WIDTH " + n + "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS " + n + "\nDATA ascii\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud[i];
    out += format_double(p.x()) + " " + format_double(p.y()) + " " + format_double(p.z());
    if (cloud.has_rings()) out += " " + std::to_string(cloud.rings()[i]);
    out += "\n";
  }
  return out;
}

PointCloud read_pcd(const std::filesystem::path& path, const FrameId& default_frame) {
  const std::string text = read_text_file(path);
  try {
    return parse_pcd(text, default_frame);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_pcd(const std::filesystem::path& path, const PointCloud& cloud) { write_text_file(path, format_pcd(cloud)); }

}  // namespace calib::io
