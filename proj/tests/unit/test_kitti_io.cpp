// Copyright 2026 The monogeo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "monogeo/kitti_io.hpp"

using namespace monogeo;
namespace fs = std::filesystem;

namespace {

const fs::path kGolden = fs::path(MONOGEO_SOURCE_DIR) / "tests/fixtures/kitti_golden";

}  // namespace

TEST_SUITE("kitti_io") {

TEST_CASE("golden labels round-trip byte for byte") {
  const auto frames = list_frames(kGolden / "label_2");
  REQUIRE(frames == std::vector<std::string>{"000000", "000001", "000002"});
  for (const auto& id : frames) {
    const std::string text = read_text(kGolden / "label_2" / (id + ".txt"));
    const auto labels = parse_label_file(text, LabelKind::kGroundTruth);
    CHECK(emit_label_file(labels) == text);
    CHECK(parse_label_file(emit_label_file(labels)) == labels);
  }
}

TEST_CASE("label fields") {
  const auto labels = parse_label_file(read_text(kGolden / "label_2/000000.txt"));
  REQUIRE(labels.size() == 5);
  const KittiLabel& car = labels[0];
  CHECK(car.type == "Car");
  CHECK(car.occluded == 0);
  CHECK(car.dimensions[0] == 1.52);
  CHECK(car.location[2] == 12.4);
  CHECK_FALSE(car.score);
  CHECK(labels[1].occluded == 1);
  CHECK(labels.back().type == "DontCare");
  CHECK(to_eval_objects(labels).size() == 4);
}

TEST_CASE("malformed lines report their line number") {
  const std::string good =
      "Car 0.00 0 0.1 10 20 110 90 1.5 1.6 3.9 1.0 1.7 20.0 0.2\n";
  const std::string short_line = "Car 0.00 0 0.1 10 20 110 90 1.5 1.6 3.9 1.0 1.7 20.0\n";
  try {
    parse_label_file(good + short_line);
    FAIL("expected a parse error");
  } catch (const KittiParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_label_file("Car 0 0 0.1 10 20 1x0 90 1.5 1.6 3.9 1 1.7 20 0.2\n"),
                  KittiParseError);
  // Inverted 2D box.
  CHECK_THROWS_AS(parse_label_file("Car 0 0 0.1 110 20 10 90 1.5 1.6 3.9 1 1.7 20 0.2\n"),
                  KittiParseError);
  CHECK(parse_label_file("\n" + good + "\n").size() == 1);
}

TEST_CASE("score rules") {
  const std::string gt = "Car 0 0 0.1 10 20 110 90 1.5 1.6 3.9 1 1.7 20 0.2\n";
  const std::string pred = "Car 0 0 0.1 10 20 110 90 1.5 1.6 3.9 1 1.7 20 0.2 0.75\n";
  CHECK_NOTHROW(parse_label_file(gt, LabelKind::kGroundTruth));
  CHECK_THROWS_AS(parse_label_file(pred, LabelKind::kGroundTruth), KittiParseError);
  CHECK_THROWS_AS(parse_label_file(gt, LabelKind::kPrediction), KittiParseError);
  const auto p = parse_label_file(pred, LabelKind::kPrediction);
  CHECK(*p[0].score == 0.75);
  CHECK(label_to_box3d(p[0]).score == 0.75);
  CHECK(emit_label_file(p).find(" 0.750000\n") != std::string::npos);
}

TEST_CASE("calibration") {
  const std::string text = read_text(kGolden / "calib/000000.txt");
  const KittiCalib calib = parse_calib_file(text);
  CHECK(emit_calib_file(calib) == text);
  const CameraIntrinsicsd K = calib.intrinsics();
  CHECK(K.fu == 721.5377);
  CHECK(K.pu == 609.5593);
  CHECK(K.pv == 172.854);
  CHECK(calib.find("R0_rect")->size() == 9);
  CHECK(calib.find("nothing") == nullptr);
  CHECK_THROWS(parse_calib_file("P0: 1 0 0 0 0 1 0 0 0 0 1 0\n"));
  CHECK_THROWS(parse_calib_file("P2: 1 0 0\n"));
  CHECK(parse_calib_file(emit_calib_file(make_calib(K))).intrinsics() == K);
}

TEST_CASE("box conversion") {
  KittiLabel l;
  l.type = "Car";
  l.dimensions = {1.5, 1.6, 3.9};
  l.location = {1.0, 1.7, 20.0};
  l.rotation_y = 0.2;
  const Box3Dd b = label_to_box3d(l);
  CHECK(b.center.y() == doctest::Approx(0.95));
  CHECK(b.size.length == 3.9);
  CHECK(b.size.width == 1.6);
  CHECK(b.size.height == 1.5);
  CHECK(b.class_id == 1);
  CHECK(b.score == 1.0);

  const CameraIntrinsicsd K(721.5377, 721.5377, 609.5593, 172.854);
  const KittiLabel back = box3d_to_label(b, "Car", K);
  CHECK(back.location[1] == doctest::Approx(1.7));
  CHECK(back.dimensions == l.dimensions);
  const Box2Dd proj = box3d_to_box2d(b, K);
  CHECK(back.bbox[0] == doctest::Approx(proj.left()));
  CHECK(back.bbox[3] == doctest::Approx(proj.bottom()));
  CHECK(back.alpha == doctest::Approx(alpha_from_yaw(0.2, b.center)));
}

TEST_CASE("observation angle") {
  // Straight ahead the two angles coincide.
  CHECK(alpha_from_yaw(0.3, Point3d(0, 1, 10)) == doctest::Approx(0.3));
  // Off to the right the ray bends by atan(x / z).
  CHECK(alpha_from_yaw(0.0, Point3d(10, 1, 10)) == doctest::Approx(-std::numbers::pi / 4));
  for (double yaw : {-3.0, -1.0, 0.0, 2.5}) {
    const Point3d p(-4, 1.5, 7);
    CHECK(yaw_from_alpha(alpha_from_yaw(yaw, p), p) == doctest::Approx(yaw));
  }
}

TEST_CASE("class ids") {
  CHECK(class_id_from_type("Car") == 1);
  CHECK(class_id_from_type("Misc") == 8);
  CHECK(class_id_from_type("DontCare") == 0);
  for (int i = 1; i <= 8; ++i) CHECK(class_id_from_type(type_from_class_id(i)) == i);
}

TEST_CASE("file helpers") {
  const fs::path dir = fs::temp_directory_path() / "monogeo_kitti_io_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text(dir / "000002.txt", "b");
  write_text(dir / "000001.txt", "a");
  write_text(dir / "notes.md", "x");
  CHECK(list_frames(dir) == std::vector<std::string>{"000001", "000002"});
  CHECK(read_text(dir / "000001.txt") == "a");
  CHECK_THROWS(read_text(dir / "missing.txt"));
  fs::remove_all(dir);
}

}  // TEST_SUITE
