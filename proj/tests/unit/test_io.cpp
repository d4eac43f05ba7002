#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "calib/io/csv.hpp"
#include "calib/io/json_io.hpp"
#include "calib/io/pcd.hpp"
#include "calib/io/text.hpp"
#include "random.hpp"

namespace calib {
namespace {

using io::Json;

std::string golden(const std::string& name) {
  return io::read_text_file(std::filesystem::path(CALIB_TEST_DATA_DIR) / "golden" / name);
}

template <class F>
Error capture(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected an Error";
  return Error(ErrorCode::kInvalidArgument, "none");
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

// ---------------------------------------------------------------- numbers

TEST(Numbers, ShortestFormRoundTrips) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double v = i % 3 == 0 ? u(rng) * 1e-9 : u(rng);
    double back = 0;
    ASSERT_TRUE(io::parse_double(io::format_double(v), &back));
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(2.0), "2");
}

TEST(Numbers, ScientificEqualsDecimal) {
  double a = 0, b = 0;
  ASSERT_TRUE(io::parse_double("1.25e-3", &a));
  ASSERT_TRUE(io::parse_double("0.00125", &b));
  EXPECT_EQ(a, b);
  ASSERT_TRUE(io::parse_double("+2E2", &a));
  EXPECT_EQ(a, 200.0);
  EXPECT_FALSE(io::parse_double("1.0x", &a));
  EXPECT_FALSE(io::parse_double("", &a));
}

// ---------------------------------------------------------------- PCD

TEST(Pcd, GoldenWithRingsRoundTripsByteExact) {
  const std::string text = golden("cloud_rings.pcd");
  const PointCloud c = io::parse_pcd(text);
  EXPECT_EQ(c.frame(), FrameId("lidar"));
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(c.num_rings(), 4);
  EXPECT_EQ(c.rings(), (std::vector<int>{0, 1, 2, 3, 3}));
  EXPECT_EQ(c[1], Point3(1.9888249353339558, 0, -0.38658840575101727));
  EXPECT_EQ(c[3].y(), 1e-7);
  EXPECT_TRUE(std::signbit(c[4].z()));
  EXPECT_EQ(io::format_pcd(c), text);
}

TEST(Pcd, GoldenWithoutRingsRoundTripsByteExact) {
  const std::string text = golden("cloud_plain.pcd");
  const PointCloud c = io::parse_pcd(text);
  EXPECT_EQ(c.frame(), FrameId("camera"));
  EXPECT_FALSE(c.has_rings());
  EXPECT_EQ(c[2], Point3(123456.789, -0.001, 1e-300));
  EXPECT_EQ(io::format_pcd(c), text);
}

TEST(Pcd, DefaultFrameWhenNoComment) {
  const std::string text =
      "VERSION 0.7\nFIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\nWIDTH 1\nHEIGHT 1\n"
      "VIEWPOINT 0 0 0 1 0 0 0\nPOINTS 1\nDATA ascii\n1 2 3\n";
  EXPECT_EQ(io::parse_pcd(text, FrameId("velo")).frame(), FrameId("velo"));
}

TEST(Pcd, ExtraFieldsIgnoredAndOrderRespected) {
  const std::string text =
      "VERSION 0.7\nFIELDS intensity z y x\nSIZE 4 8 8 8\nTYPE F F F F\nCOUNT 1 1 1 1\nWIDTH 2\nHEIGHT 1\n"
      "POINTS 2\nDATA ascii\n9 3 2 1\n9 6 5 4\n";
  const PointCloud c = io::parse_pcd(text);
  EXPECT_EQ(c[0], Point3(1, 2, 3));
  EXPECT_EQ(c[1], Point3(4, 5, 6));
}

TEST(Pcd, RandomCloudsRoundTrip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = testing::random_points(rng, 50, 30.0);
    std::vector<int> rings;
    for (std::size_t i = 0; i < pts.size(); ++i) rings.push_back(static_cast<int>(i % 16));
    const PointCloud c(FrameId("lidar"), pts, rings, 16);
    const std::string s = io::format_pcd(c);
    EXPECT_EQ(io::parse_pcd(s), c);
    EXPECT_EQ(io::format_pcd(io::parse_pcd(s)), s);
  }
}

TEST(Pcd, PointCountMismatchNamesBothCounts) {
  std::string text = golden("cloud_plain.pcd");
  text.replace(text.find("POINTS 3"), 8, "POINTS 4");
  const Error e = capture([&] { io::parse_pcd(text); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformed);
  EXPECT_TRUE(contains(e.detail(), "3")) << e.detail();
  EXPECT_TRUE(contains(e.detail(), "4")) << e.detail();
}

TEST(Pcd, DataRowCountMismatch) {
  std::string text = golden("cloud_plain.pcd");
  text.erase(text.rfind("123456.789"));
  const Error e = capture([&] { io::parse_pcd(text); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformed);
  EXPECT_TRUE(contains(e.detail(), "3")) << e.detail();
  EXPECT_TRUE(contains(e.detail(), "2")) << e.detail();
}

TEST(Pcd, BinaryDataUnsupported) {
  std::string text = golden("cloud_plain.pcd");
  text.replace(text.find("DATA ascii"), 10, "DATA binary");
  EXPECT_EQ(capture([&] { io::parse_pcd(text); }).code(), ErrorCode::kUnsupportedEncoding);
  text.replace(text.find("DATA binary"), 11, "DATA binary_compressed");
  EXPECT_EQ(capture([&] { io::parse_pcd(text); }).code(), ErrorCode::kUnsupportedEncoding);
}

TEST(Pcd, MissingCoordinateField) {
  const std::string text =
      "VERSION 0.7\nFIELDS x y intensity\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\nWIDTH 1\nHEIGHT 1\n"
      "POINTS 1\nDATA ascii\n1 2 3\n";
  EXPECT_EQ(capture([&] { io::parse_pcd(text); }).code(), ErrorCode::kMissingField);
}

TEST(Pcd, BadNumberReportsLineAndColumn) {
  std::string text = golden("cloud_plain.pcd");
  text.replace(text.find("2.25"), 4, "2.2q");
  const Error e = capture([&] { io::parse_pcd(text); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformed);
  EXPECT_TRUE(contains(e.detail(), "line 14")) << e.detail();
  EXPECT_TRUE(contains(e.detail(), "column")) << e.detail();
}

TEST(Pcd, ReadErrorsNameThePath) {
  const Error e = capture([] { io::read_pcd("/nonexistent/dir/cloud.pcd"); });
  EXPECT_TRUE(contains(e.detail(), "/nonexistent/dir/cloud.pcd")) << e.detail();
}

// ---------------------------------------------------------------- CSV

TEST(Csv, Correspondences3d3dGolden) {
  const std::string text = golden("corr3d3d.csv");
  const auto c = io::parse_correspondences_3d3d(text, FrameId("lidar"), FrameId("camera"));
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c.source()[3], Point3(2.1, 0, -0.2));
  EXPECT_EQ(c.target()[1], Point3(0.05, -0.33, 1.98));
  EXPECT_EQ(io::format_correspondences_3d3d(c), text);
}

TEST(Csv, Correspondences2d3dGolden) {
  const std::string text = golden("corr2d3d.csv");
  const auto c = io::parse_correspondences_2d3d(text);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[1].image, Point2(220, 250.125));
  EXPECT_EQ(io::format_correspondences_2d3d(c), text);
}

TEST(Csv, EdgeLabelsGolden) {
  const std::string text = golden("edge_labels.csv");
  const auto labels = io::parse_edge_labels(text);
  ASSERT_EQ(labels.size(), 5u);
  EXPECT_EQ(labels[4], (io::EdgeLabel{20, "inner-top-left"}));
  EXPECT_EQ(io::format_edge_labels(labels), text);
  EXPECT_EQ(capture([] { io::parse_edge_labels("point_index,edge_id\n0,left\n"); }).code(), ErrorCode::kMalformed);
  EXPECT_EQ(capture([] { io::parse_edge_labels("point_index,edge_id\n-1,top-left\n"); }).code(),
            ErrorCode::kMalformed);
}

TEST(Csv, RunningAverageGolden) {
  const std::string text = golden("running_average.csv");
  const auto rows = io::parse_running_average(text);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].run, 2);
  // the quaternion and Euler columns describe the same rotation
  for (const auto& r : rows) {
    EXPECT_LT((quat_to_matrix(r.rotation).matrix() - euler_xyz_to_matrix(r.euler_deg).matrix()).norm(), 1e-12);
  }
  EXPECT_EQ(io::format_running_average(rows), text);
}

TEST(Csv, RunningAverageRowsMatchTrace) {
  std::mt19937_64 rng(5);
  std::vector<RigidTransform> trace;
  for (int i = 0; i < 5; ++i) trace.push_back(testing::random_transform(rng, "lidar", "camera", 1.0));
  const auto rows = io::running_average_rows(trace);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].run, static_cast<int>(k + 1));
    EXPECT_EQ(rows[k].translation, trace[k].translation());
    EXPECT_LT(geodesic_angle(quat_to_matrix(rows[k].rotation), trace[k].rotation()), 1e-12);
  }
  EXPECT_EQ(io::parse_running_average(io::format_running_average(rows)), rows);
}

TEST(Csv, WrongArityNamesTheRow) {
  const Error e = capture([] {
    io::parse_correspondences_3d3d("px,py,pz,qx,qy,qz\n1,2,3,4,5,6\n1,2,3,4,5\n", FrameId("a"), FrameId("b"));
  });
  EXPECT_EQ(e.code(), ErrorCode::kWrongArity);
  EXPECT_TRUE(contains(e.detail(), "line 3")) << e.detail();
}

TEST(Csv, ScientificNotationParsesLikeDecimal) {
  const auto a = io::parse_correspondences_2d3d("X,Y,Z,u,v\n1e-1,2.5E0,3,3.2e2,2.4e+2\n");
  const auto b = io::parse_correspondences_2d3d("X,Y,Z,u,v\n0.1,2.5,3,320,240\n");
  EXPECT_EQ(a, b);
}

TEST(Csv, NonFiniteRejected) {
  for (const char* bad : {"nan", "inf", "-inf"}) {
    const std::string text = std::string("X,Y,Z,u,v\n1,2,3,4,5\n1,2,") + bad + ",4,5\n";
    const Error e = capture([&] { io::parse_correspondences_2d3d(text); });
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteValue) << bad;
    EXPECT_TRUE(contains(e.detail(), "line 3")) << e.detail();
  }
}

TEST(Csv, BadHeaderAndGarbage) {
  EXPECT_EQ(capture([] { io::parse_correspondences_2d3d("x,y,z,u,v\n"); }).code(), ErrorCode::kMalformed);
  EXPECT_EQ(capture([] { io::parse_correspondences_2d3d(""); }).code(), ErrorCode::kMalformed);
  const Error e = capture([] { io::parse_correspondences_2d3d("X,Y,Z,u,v\n1,2,abc,4,5\n"); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformed);
  EXPECT_TRUE(contains(e.detail(), "line 2")) << e.detail();
}

TEST(Csv, CrlfAndSpacesTolerated) {
  const auto c = io::parse_correspondences_2d3d("X,Y,Z,u,v\r\n 1 , 2,3,4,5\r\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].object, Point3(1, 2, 3));
}

// ---------------------------------------------------------------- JSON

TEST(Json, GoldenDocumentsRoundTripByteExact) {
  {
    const std::string text = golden("transform.json");
    const RigidTransform t = io::transform_from_document(io::parse_json(text));
    EXPECT_EQ(io::dump_json(io::transform_document(t)), text);
  }
  {
    const std::string text = golden("result_kabsch.json");
    const CalibrationResult r = io::result_from_json(io::parse_json(text));
    EXPECT_EQ(r.method, Method::kKabsch);
    EXPECT_EQ(r.per_point_residuals.size(), 4u);
    EXPECT_EQ(io::dump_json(io::result_to_json(r)), text);
  }
  {
    const std::string text = golden("averaged.json");
    const AveragedExtrinsics a = io::averaged_from_json(io::parse_json(text));
    EXPECT_EQ(a.sample_count, 2u);
    EXPECT_EQ(io::dump_json(io::averaged_to_json(a)), text);
  }
  {
    const std::string text = golden("tag_poses.json");
    const auto tags = io::tag_poses_from_json(io::parse_json(text));
    ASSERT_EQ(tags.size(), 2u);
    EXPECT_EQ(tags[1].tag_id, 1);
    EXPECT_EQ(io::dump_json(io::tag_poses_to_json(tags)), text);
  }
}

TEST(Json, RandomResultsRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const RigidTransform t = testing::random_transform(rng, "lidar", "camera", 2.0);
    const auto p = testing::random_points(rng, 6, 2.0);
    const PointCloud src(FrameId("lidar"), p);
    const PointCloud dst(FrameId("camera"), testing::transformed(t, p));
    const CalibrationResult r = kabsch_solve(CorrespondenceSet(src, dst));
    const Json j = io::result_to_json(r);
    const CalibrationResult back = io::result_from_json(io::parse_json(io::dump_json(j)));
    EXPECT_EQ(back, r);
  }
}

TEST(Json, UnknownKeysRejected) {
  Json j = io::parse_json(golden("transform.json"));
  j["transform"]["scale"] = 1.0;
  const Error e = capture([&] { io::transform_from_document(j); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformed);
  EXPECT_TRUE(contains(e.detail(), "scale")) << e.detail();

  Json r = io::parse_json(golden("result_kabsch.json"));
  r["diagnostics"]["extra"] = true;
  EXPECT_EQ(capture([&] { io::result_from_json(r); }).code(), ErrorCode::kMalformed);
}

TEST(Json, RotationFormsCrossChecked) {
  Json j = io::parse_json(golden("transform.json"));
  Json q = j;
  q["transform"]["quaternion_wxyz"][0] = -0.2;
  EXPECT_EQ(capture([&] { io::transform_from_document(q); }).code(), ErrorCode::kMalformed);

  Json e = j;
  e["transform"]["euler_xyz_deg"]["yaw"] = 10.0;
  const Error err = capture([&] { io::transform_from_document(e); });
  EXPECT_EQ(err.code(), ErrorCode::kMalformed);
  EXPECT_TRUE(contains(err.detail(), "euler_xyz_deg")) << err.detail();

  Json m = j;
  m["transform"]["rotation_matrix"][0][0] = 2.0;
  EXPECT_EQ(capture([&] { io::transform_from_document(m); }).code(), ErrorCode::kMalformed);
}

TEST(Json, QuaternionAloneDefinesRotation) {
  const RigidTransform ref = io::transform_from_document(io::parse_json(golden("transform.json")));
  Json j = io::parse_json(golden("transform.json"));
  j["transform"].erase("rotation_matrix");
  j["transform"].erase("euler_xyz_deg");
  const RigidTransform t = io::transform_from_document(j);
  EXPECT_LT(geodesic_angle(t.rotation(), ref.rotation()), 1e-12);
  EXPECT_EQ(t.translation(), ref.translation());

  j["transform"].erase("quaternion_wxyz");
  EXPECT_EQ(capture([&] { io::transform_from_document(j); }).code(), ErrorCode::kMissingField);
}

TEST(Json, SchemaVersionAndSyntax) {
  Json j = io::parse_json(golden("transform.json"));
  j["schema_version"] = 2;
  EXPECT_EQ(capture([&] { io::transform_from_document(j); }).code(), ErrorCode::kMalformed);
  const Error e = capture([] { io::parse_json("{\"a\": [1, 2,}"); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformed);
  EXPECT_TRUE(contains(e.detail(), "byte")) << e.detail();
}

TEST(Json, NonFiniteNumbersRejected) {
  EXPECT_EQ(capture([] { io::json_number(Json(std::nan("")), "x"); }).code(), ErrorCode::kNonFiniteValue);
}

TEST(Json, IntrinsicsAndBoardRoundTrip) {
  const CameraIntrinsics k{600, 610, 320, 240, 0.5};
  EXPECT_EQ(io::intrinsics_from_json(io::parse_json(io::dump_json(io::intrinsics_to_json(k)))), k);
  BoardModel b;
  b.width = b.height = 0.55;
  b.inner = InnerCutout{0.33, 0.33};
  b.tag_center_offset = Vec2(0, 0.22);
  EXPECT_EQ(io::board_model_from_json(io::parse_json(io::dump_json(io::board_model_to_json(b)))), b);
}

}  // namespace
}  // namespace calib
