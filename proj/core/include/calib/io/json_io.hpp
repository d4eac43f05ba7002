#ifndef CALIB_IO_JSON_IO_HPP_
#define CALIB_IO_JSON_IO_HPP_

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "calib/board.hpp"
#include "calib/camera.hpp"
#include "calib/registration.hpp"

namespace calib::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Parses JSON text; syntax errors become Malformed with the byte offset.
Json parse_json(std::string_view text);
/// Two-space indent, trailing newline. Numbers use shortest round-trip form.
std::string dump_json(const Json& j);

/// Key-checked view of a JSON object: every key must be read before
/// finish(), so misspelled keys are reported instead of silently ignored.
class StrictObject {
 public:
  /// `where` prefixes error messages; `bad` is the code for type errors and
  /// unknown keys (Malformed for data files, InvalidConfig for configs).
  StrictObject(const Json& j, std::string where, ErrorCode bad = ErrorCode::kMalformed);

  bool has(const std::string& key) const;
  /// Throws MissingField when absent.
  const Json& at(const std::string& key);
  /// nullptr when absent.
  const Json* find(const std::string& key);

  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  long long integer(const std::string& key);
  long long integer_or(const std::string& key, long long fallback);
  std::string string(const std::string& key);
  std::string string_or(const std::string& key, const std::string& fallback);
  bool boolean_or(const std::string& key, bool fallback);
  Vec3 vec3(const std::string& key);
  Vec2 vec2(const std::string& key);
  StrictObject object(const std::string& key);

  /// Throws `bad` naming the first key that was never read.
  void finish() const;

  const std::string& where() const noexcept { return where_; }
  ErrorCode bad() const noexcept { return bad_; }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  const Json& j_;
  std::string where_;
  ErrorCode bad_;
  std::set<std::string> seen_;
};

/// Checks schema_version (must equal kSchemaVersion) and, when `kind` is
/// nonempty, the "kind" field.
void check_header(StrictObject& o, std::string_view kind);

double json_number(const Json& j, const std::string& where, ErrorCode bad = ErrorCode::kMalformed);
Vec3 json_vec3(const Json& j, const std::string& where, ErrorCode bad = ErrorCode::kMalformed);

/// {from, to, rotation_matrix, quaternion_wxyz, euler_xyz_deg, translation_m}.
/// The matrix is authoritative; the other rotation forms must agree with it.
Json transform_to_json(const RigidTransform& t);
RigidTransform transform_from_json(const Json& j, const std::string& where = "transform");

Json result_to_json(const CalibrationResult& r);
CalibrationResult result_from_json(const Json& j);

Json averaged_to_json(const AveragedExtrinsics& a);
AveragedExtrinsics averaged_from_json(const Json& j);

/// {"schema_version", "kind": "transform", "transform": {...}}.
Json transform_document(const RigidTransform& t);
/// The "transform" of any result, averaged, transform or ground-truth
/// document.
RigidTransform transform_from_document(const Json& j);

/// {"schema_version", "kind": "tag_poses", "tags": [{tag_id, board_frame,
/// camera_frame, quaternion_wxyz, rotation_matrix?, translation_m}]}. When
/// the matrix is absent the quaternion defines the rotation.
Json tag_poses_to_json(std::span<const TagPose> tags);
std::vector<TagPose> tag_poses_from_json(const Json& j);

Json intrinsics_to_json(const CameraIntrinsics& k);
CameraIntrinsics intrinsics_from_json(const Json& j, const std::string& where = "camera",
                                      ErrorCode bad = ErrorCode::kMalformed);

Json board_model_to_json(const BoardModel& m);
BoardModel board_model_from_json(const Json& j, const std::string& where = "board",
                                 ErrorCode bad = ErrorCode::kMalformed);

}  // namespace calib::io

#endif  // CALIB_IO_JSON_IO_HPP_
