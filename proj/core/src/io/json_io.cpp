#include "calib/io/json_io.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace calib::io {

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformed, "JSON syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

StrictObject::StrictObject(const Json& j, std::string where, ErrorCode bad) : j_(j), where_(std::move(where)), bad_(bad) {
  if (!j_.is_object()) throw Error(bad_, where_ + ": expected a JSON object");
}

void StrictObject::fail(const std::string& key, const std::string& what) const {
  throw Error(bad_, where_ + "." + key + ": " + what);
}

bool StrictObject::has(const std::string& key) const { return j_.contains(key); }

const Json& StrictObject::at(const std::string& key) {
  if (!j_.contains(key)) throw Error(ErrorCode::kMissingField, where_ + ": missing '" + key + "'");
  seen_.insert(key);
  return j_.at(key);
}

const Json* StrictObject::find(const std::string& key) {
  if (!j_.contains(key)) return nullptr;
  seen_.insert(key);
  return &j_.at(key);
}

double json_number(const Json& j, const std::string& where, ErrorCode bad) {
  if (!j.is_number()) throw Error(bad, where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteValue, where + ": not finite");
  return v;
}

Vec3 json_vec3(const Json& j, const std::string& where, ErrorCode bad) {
  if (!j.is_array() || j.size() != 3) throw Error(bad, where + ": expected an array of 3 numbers");
  return {json_number(j[0], where, bad), json_number(j[1], where, bad), json_number(j[2], where, bad)};
}

double StrictObject::number(const std::string& key) { return json_number(at(key), where_ + "." + key, bad_); }

double StrictObject::number_or(const std::string& key, double fallback) {
  const Json* j = find(key);
  return j ? json_number(*j, where_ + "." + key, bad_) : fallback;
}

long long StrictObject::integer(const std::string& key) {
  const Json& j = at(key);
  if (!j.is_number_integer()) fail(key, "expected an integer");
  return j.get<long long>();
}

long long StrictObject::integer_or(const std::string& key, long long fallback) {
  return has(key) ? integer(key) : fallback;
}

std::string StrictObject::string(const std::string& key) {
  const Json& j = at(key);
  if (!j.is_string()) fail(key, "expected a string");
  return j.get<std::string>();
}

std::string StrictObject::string_or(const std::string& key, const std::string& fallback) {
  return has(key) ? string(key) : fallback;
}

bool StrictObject::boolean_or(const std::string& key, bool fallback) {
  const Json* j = find(key);
  if (!j) return fallback;
  if (!j->is_boolean()) fail(key, "expected true or false");
  return j->get<bool>();
}

Vec3 StrictObject::vec3(const std::string& key) { return json_vec3(at(key), where_ + "." + key, bad_); }

Vec2 StrictObject::vec2(const std::string& key) {
  const Json& j = at(key);
  if (!j.is_array() || j.size() != 2) fail(key, "expected an array of 2 numbers");
  return {json_number(j[0], where_ + "." + key, bad_), json_number(j[1], where_ + "." + key, bad_)};
}

StrictObject StrictObject::object(const std::string& key) { return StrictObject(at(key), where_ + "." + key, bad_); }

void StrictObject::finish() const {
  for (const auto& [k, v] : j_.items()) {
    if (!seen_.count(k)) throw Error(bad_, where_ + ": unknown key '" + k + "'");
  }
}

void check_header(StrictObject& o, std::string_view kind) {
  const long long v = o.integer("schema_version");
  if (v != kSchemaVersion) {
    o.fail("schema_version", "unsupported version " + std::to_string(v) + " (expected " +
                                 std::to_string(kSchemaVersion) + ")");
  }
  if (!kind.empty()) {
    const std::string k = o.string("kind");
    if (k != kind) o.fail("kind", "expected '" + std::string(kind) + "', got '" + k + "'");
  }
}

// ---------------------------------------------------------------------------

namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json matrix_json(const Mat3& m) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

Mat3 matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kMalformed, where + ": expected 3 rows");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = json_vec3(j[static_cast<std::size_t>(r)], where).transpose();
  return m;
}

UnitQuaternion quat_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::kMalformed, where + ": expected [w, x, y, z]");
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) c[i] = json_number(j[i], where);
  try {
    return UnitQuaternion(c[0], c[1], c[2], c[3]);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformed, where + ": " + e.detail());
  }
}

Json quat_json(const UnitQuaternion& q) { return Json::array({q.w(), q.x(), q.y(), q.z()}); }

FrameId frame_from(StrictObject& o, const std::string& key) {
  const std::string name = o.string(key);
  if (name.empty()) o.fail(key, "frame name must be nonempty");
  return FrameId(name);
}

RotationMatrix rotation_from(StrictObject& o) {
  const Json* mj = o.find("rotation_matrix");
  const Json* qj = o.find("quaternion_wxyz");
  const Json* ej = o.find("euler_xyz_deg");
  if (!mj && !qj) throw Error(ErrorCode::kMissingField, o.where() + ": needs rotation_matrix or quaternion_wxyz");
  RotationMatrix r;
  if (mj) {
    try {
      r = RotationMatrix(matrix_from_json(*mj, o.where() + ".rotation_matrix"));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotARotation) throw;
      throw Error(ErrorCode::kMalformed, o.where() + ".rotation_matrix: " + e.detail());
    }
  } else {
    r = quat_to_matrix(quat_from_json(*qj, o.where() + ".quaternion_wxyz"));
  }
  if (mj && qj) {
    const Mat3 d = quat_to_matrix(quat_from_json(*qj, o.where() + ".quaternion_wxyz")).matrix() - r.matrix();
    if (d.norm() > 1e-6) o.fail("quaternion_wxyz", "disagrees with rotation_matrix");
  }
  if (ej) {
    StrictObject e(*ej, o.where() + ".euler_xyz_deg", o.bad());
    const EulerAnglesXYZ a{e.number("roll"), e.number("pitch"), e.number("yaw")};
    e.finish();
    if ((euler_xyz_to_matrix(a).matrix() - r.matrix()).norm() > 1e-6) {
      o.fail("euler_xyz_deg", "disagrees with the rotation");
    }
  }
  return r;
}

}  // namespace

Json transform_to_json(const RigidTransform& t) {
  const UnitQuaternion q = matrix_to_quat(t.rotation());
  const EulerAnglesXYZ e = matrix_to_euler_xyz(t.rotation()).angles;
  Json j;
  j["from"] = t.from_frame().name();
  j["to"] = t.to_frame().name();
  j["rotation_matrix"] = matrix_json(t.rotation().matrix());
  j["quaternion_wxyz"] = quat_json(q);
  j["euler_xyz_deg"] = Json{{"roll", e.roll}, {"pitch", e.pitch}, {"yaw", e.yaw}};
  j["translation_m"] = vec_json(t.translation());
  return j;
}

RigidTransform transform_from_json(const Json& j, const std::string& where) {
  StrictObject o(j, where);
  const FrameId from = frame_from(o, "from");
  const FrameId to = frame_from(o, "to");
  const RotationMatrix r = rotation_from(o);
  const Vec3 t = o.vec3("translation_m");
  o.finish();
  return RigidTransform(r, t, from, to);
}

namespace {

const char* unit_of(Method m) { return m == Method::kPnp || m == Method::kPnpRansac ? "px" : "m"; }

Json residual_json(double r) { return std::isfinite(r) ? Json(r) : Json(nullptr); }

}  // namespace

Json result_to_json(const CalibrationResult& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "calibration_result";
  j["method"] = std::string(to_string(r.method));
  j["transform"] = transform_to_json(r.transform);
  j["rmse"] = r.rmse;
  j["rmse_unit"] = unit_of(r.method);
  Json res = Json::array();
  for (double x : r.per_point_residuals) res.push_back(residual_json(x));
  j["residuals"] = res;
  const Diagnostics& d = r.diagnostics;
  j["diagnostics"] = Json{{"near_degenerate", d.near_degenerate},
                          {"reflection_corrected", d.reflection_corrected},
                          {"low_confidence", d.low_confidence},
                          {"iterations", d.iterations},
                          {"converged", d.converged}};
  Json mask = Json::array();
  for (bool b : r.inlier_mask) mask.push_back(b);
  j["inlier_mask"] = mask;
  return j;
}

CalibrationResult result_from_json(const Json& j) {
  StrictObject o(j, "result");
  check_header(o, "calibration_result");
  Method m;
  try {
    m = method_from_string(o.string("method"));
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformed, "result.method: " + e.detail());
  }
  RigidTransform t = transform_from_json(o.at("transform"), "result.transform");
  const double rmse = o.number("rmse");
  if (o.string("rmse_unit") != unit_of(m)) o.fail("rmse_unit", std::string("expected '") + unit_of(m) + "'");
  std::vector<double> res;
  const Json& rj = o.at("residuals");
  if (!rj.is_array()) o.fail("residuals", "expected an array");
  for (const Json& x : rj) {
    res.push_back(x.is_null() ? std::numeric_limits<double>::infinity() : json_number(x, "result.residuals"));
  }
  StrictObject dj = o.object("diagnostics");
  Diagnostics d;
  d.near_degenerate = dj.boolean_or("near_degenerate", false);
  d.reflection_corrected = dj.boolean_or("reflection_corrected", false);
  d.low_confidence = dj.boolean_or("low_confidence", false);
  d.iterations = static_cast<int>(dj.integer_or("iterations", 0));
  d.converged = dj.boolean_or("converged", true);
  dj.finish();
  std::vector<bool> mask;
  if (const Json* mj = o.find("inlier_mask")) {
    if (!mj->is_array()) o.fail("inlier_mask", "expected an array");
    for (const Json& b : *mj) {
      if (!b.is_boolean()) o.fail("inlier_mask", "expected booleans");
      mask.push_back(b.get<bool>());
    }
  }
  o.finish();
  return CalibrationResult{std::move(t), rmse, std::move(res), m, d, std::move(mask)};
}

Json averaged_to_json(const AveragedExtrinsics& a) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "averaged_extrinsics";
  j["transform"] = transform_to_json(a.transform);
  j["mean_translation_m"] = vec_json(a.mean_translation);
  j["mean_quaternion_wxyz"] = quat_json(a.mean_rotation);
  j["sample_count"] = a.sample_count;
  Json runs = Json::array();
  for (const CalibrationResult& r : a.per_run_results) runs.push_back(result_to_json(r));
  j["runs"] = runs;
  return j;
}

AveragedExtrinsics averaged_from_json(const Json& j) {
  StrictObject o(j, "averaged");
  check_header(o, "averaged_extrinsics");
  RigidTransform t = transform_from_json(o.at("transform"), "averaged.transform");
  const Vec3 mt = o.vec3("mean_translation_m");
  const UnitQuaternion mq = quat_from_json(o.at("mean_quaternion_wxyz"), "averaged.mean_quaternion_wxyz");
  const long long n = o.integer("sample_count");
  const Json& rj = o.at("runs");
  if (!rj.is_array()) o.fail("runs", "expected an array");
  std::vector<CalibrationResult> runs;
  for (const Json& r : rj) runs.push_back(result_from_json(r));
  o.finish();
  if (n < 0 || static_cast<std::size_t>(n) != runs.size()) o.fail("sample_count", "does not match the number of runs");
  return AveragedExtrinsics{std::move(t), mt, mq, static_cast<std::size_t>(n), std::move(runs)};
}

Json transform_document(const RigidTransform& t) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "transform";
  j["transform"] = transform_to_json(t);
  return j;
}

RigidTransform transform_from_document(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformed, "expected a JSON object");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
      j["schema_version"].get<long long>() != kSchemaVersion) {
    throw Error(ErrorCode::kMalformed, "missing or unsupported schema_version");
  }
  if (!j.contains("transform")) throw Error(ErrorCode::kMissingField, "document has no 'transform'");
  return transform_from_json(j["transform"]);
}

Json tag_poses_to_json(std::span<const TagPose> tags) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "tag_poses";
  Json arr = Json::array();
  for (const TagPose& t : tags) {
    Json e;
    e["tag_id"] = t.tag_id;
    e["board_frame"] = t.pose.from_frame().name();
    e["camera_frame"] = t.pose.to_frame().name();
    e["quaternion_wxyz"] = quat_json(matrix_to_quat(t.pose.rotation()));
    e["rotation_matrix"] = matrix_json(t.pose.rotation().matrix());
    e["translation_m"] = vec_json(t.pose.translation());
    arr.push_back(e);
  }
  j["tags"] = arr;
  return j;
}

std::vector<TagPose> tag_poses_from_json(const Json& j) {
  StrictObject o(j, "tag_poses");
  check_header(o, "tag_poses");
  const Json& arr = o.at("tags");
  if (!arr.is_array()) o.fail("tags", "expected an array");
  std::vector<TagPose> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    StrictObject e(arr[i], "tag_poses.tags[" + std::to_string(i) + "]");
    const int id = static_cast<int>(e.integer("tag_id"));
    const FrameId board = frame_from(e, "board_frame");
    const FrameId camera = frame_from(e, "camera_frame");
    const RotationMatrix r = rotation_from(e);
    const Vec3 t = e.vec3("translation_m");
    e.finish();
    out.push_back(TagPose{RigidTransform(r, t, board, camera), id});
  }
  o.finish();
  return out;
}

Json intrinsics_to_json(const CameraIntrinsics& k) {
  return Json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"gamma", k.gamma}};
}

CameraIntrinsics intrinsics_from_json(const Json& j, const std::string& where, ErrorCode bad) {
  StrictObject o(j, where, bad);
  CameraIntrinsics k{o.number("fx"), o.number("fy"), o.number("cx"), o.number("cy"), o.number_or("gamma", 0.0)};
  o.finish();
  try {
    k.validate();
  } catch (const Error& e) {
    throw Error(bad, where + ": " + e.detail());
  }
  return k;
}

Json board_model_to_json(const BoardModel& m) {
  Json j;
  j["width_m"] = m.width;
  j["height_m"] = m.height;
  if (m.inner) {
    j["inner"] = Json{{"width_m", m.inner->width},
                      {"height_m", m.inner->height},
                      {"offset_m", Json::array({m.inner->offset.x(), m.inner->offset.y()})}};
  }
  j["tag_center_offset_m"] = Json::array({m.tag_center_offset.x(), m.tag_center_offset.y()});
  return j;
}

BoardModel board_model_from_json(const Json& j, const std::string& where, ErrorCode bad) {
  StrictObject o(j, where, bad);
  BoardModel m;
  m.width = o.number("width_m");
  m.height = o.number("height_m");
  if (o.has("inner")) {
    StrictObject in = o.object("inner");
    InnerCutout c;
    c.width = in.number("width_m");
    c.height = in.number("height_m");
    c.offset = in.has("offset_m") ? in.vec2("offset_m") : Vec2::Zero();
    in.finish();
    m.inner = c;
  }
  m.tag_center_offset = o.has("tag_center_offset_m") ? o.vec2("tag_center_offset_m") : Vec2::Zero();
  o.finish();
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(bad, where + ": " + e.detail());
  }
  return m;
}

}  // namespace calib::io
