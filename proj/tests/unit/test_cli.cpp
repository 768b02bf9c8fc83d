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

#include <filesystem>
#include <sstream>

#include "cli_app.hpp"
#include "doctest.h"
#include "json.hpp"
#include "monogeo/fitters.hpp"
#include "monogeo/kitti_io.hpp"

using namespace monogeo;
namespace fs = std::filesystem;

namespace {

const fs::path kGolden = fs::path(MONOGEO_SOURCE_DIR) / "tests/fixtures/kitti_golden";

// Shipped table plus a row for the seated pedestrian of the fixture.
std::string fixture_priors() {
  static const std::string path = [] {
    const fs::path p = fs::temp_directory_path() / "monogeo_cli_fixture_priors.json";
    auto table = nlohmann::json::parse(
        read_text(fs::path(MONOGEO_SOURCE_DIR) / "data/priors_kitti.json"));
    table["Person_sitting"] = {0.80, 0.60, 1.27};
    write_text(p, table.dump());
    return p.string();
  }();
  return path;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("monogeo_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("eval of labels against themselves") {
  const fs::path out = scratch("eval_self");
  const fs::path gt = kGolden / "label_2";
  const Result r = run({"eval", "--pred", gt.string(), "--gt", gt.string(), "--out",
                        out.string(), "--unscored-preds", "--iou", "0.5,0.7"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "eval.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  const auto json = nlohmann::json::parse(read_text(out / "eval.json"));
  int seen = 0;
  for (const auto& e : json["entries"]) {
    if (e["ap"].is_null()) continue;
    CHECK(e["ap"].get<double>() == 1.0);
    CHECK(e["aos"].get<double>() == 1.0);
    ++seen;
  }
  CHECK(seen > 0);
  CHECK(r.out == read_text(out / "eval.csv"));

  const auto manifest = nlohmann::json::parse(read_text(out / "manifest.json"));
  CHECK(manifest["command"] == "eval");
  CHECK(manifest["status"] == "ok");
  const std::string csv = read_text(out / "eval.csv");
  bool listed = false;
  for (const auto& o : manifest["outputs"]) {
    if (o["path"].get<std::string>().ends_with("eval.csv")) {
      CHECK(o["sha256"] == cli::sha256_hex(csv));
      listed = true;
    }
  }
  CHECK(listed);
  fs::remove_all(out);
}

TEST_CASE("scored predictions are required unless asked otherwise") {
  const fs::path out = scratch("eval_unscored");
  const fs::path gt = kGolden / "label_2";
  const Result r = run({"eval", "--pred", gt.string(), "--gt", gt.string(), "--out", out.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("\"line\"") != std::string::npos);
  CHECK(fs::exists(out / "errors.json"));
  fs::remove_all(out);
}

TEST_CASE("missing frames are errors") {
  const fs::path pred = scratch("eval_missing_pred");
  const fs::path out = scratch("eval_missing_out");
  fs::create_directories(pred);
  fs::copy_file(kGolden / "label_2/000000.txt", pred / "000000.txt");
  const Result r = run({"eval", "--pred", pred.string(), "--gt", (kGolden / "label_2").string(),
                        "--out", out.string(), "--unscored-preds"});
  CHECK(r.code != 0);
  CHECK(r.err.find("000001") != std::string::npos);
  fs::remove_all(pred);
  fs::remove_all(out);
}

TEST_CASE("usage errors") {
  CHECK(run({"fit", "--mode", "newton", "--labels", "x", "--priors", "y", "--out", "z"}).code == 2);
  CHECK(run({"eval", "--pred", "a"}).code == 2);
  CHECK(run({"eval", "--pred", "a", "--gt", "b", "--out", "c", "--ap-points", "12"}).code == 2);
  CHECK(run({"fit", "--labels", "x", "--priors", "y", "--out", "z", "--max-iters", "-1"}).code == 2);
  const Result v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(cli::kVersion) != std::string::npos);
}

TEST_CASE("output directory must differ from the inputs") {
  const fs::path gt = kGolden / "label_2";
  const Result r = run({"pseudolabel", "--labels", kGolden.string(), "--priors", fixture_priors(),
                        "--calib", (kGolden / "calib").string(), "--out", kGolden.string()});
  CHECK(r.code != 0);
  CHECK(fs::exists(gt / "000000.txt"));
  CHECK(!fs::exists(kGolden / "manifest.json"));
}

TEST_CASE("missing prior names the class") {
  const fs::path dir = scratch("priors");
  fs::create_directories(dir);
  write_text(dir / "priors.json", R"({"Car": [3.88, 1.63, 1.53]})");
  const fs::path out = scratch("priors_out");
  const Result r = run({"pseudolabel", "--labels", kGolden.string(), "--priors",
                        (dir / "priors.json").string(), "--calib", (kGolden / "calib").string(),
                        "--out", out.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("no prior size for class 'Pedestrian'") != std::string::npos);
  fs::remove_all(dir);
  fs::remove_all(out);
}

TEST_CASE("pseudolabel matches the library") {
  const fs::path out = scratch("pl");
  const Result r = run({"pseudolabel", "--labels", kGolden.string(), "--priors", fixture_priors(),
                        "--calib", (kGolden / "calib").string(), "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto priors = load_priors(fixture_priors());
  const CameraIntrinsicsd K =
      parse_calib_file(read_text(kGolden / "calib/000000.txt")).intrinsics();
  auto in = parse_label_file(read_text(kGolden / "label_2/000000.txt"));
  std::erase_if(in, [](const KittiLabel& l) { return l.type == "DontCare"; });
  const auto got = parse_label_file(read_text(out / "label_2/000000.txt"));
  REQUIRE(got.size() == in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    CHECK(got[i].type == in[i].type);
    CHECK(got[i].bbox == in[i].bbox);
    const Box2Dd b = Box2Dd::from_extents(in[i].bbox[0], in[i].bbox[1], in[i].bbox[2],
                                          in[i].bbox[3]);
    const ClassPrior& p = priors.at(in[i].type);
    const Point3d c = pseudo_location(b, p, K);
    CHECK(got[i].location[0] == doctest::Approx(c.x()).epsilon(1e-5));
    CHECK(got[i].location[2] == doctest::Approx(c.z()).epsilon(1e-5));
    CHECK(got[i].rotation_y == doctest::Approx(teacher_yaw(in[i].alpha, b.u, K,
                                                            AngleConvention::kKitti))
                                    .epsilon(1e-5));
  }
  fs::remove_all(out);
}

TEST_CASE("geogl with zero iterations reproduces the pseudo labels") {
  const fs::path pl = scratch("pl_zero");
  const fs::path fit = scratch("fit_zero");
  REQUIRE(run({"pseudolabel", "--labels", kGolden.string(), "--priors", fixture_priors(), "--calib",
               (kGolden / "calib").string(), "--out", pl.string()})
              .code == 0);
  REQUIRE(run({"fit", "--mode", "geogl", "--max-iters", "0", "--labels", kGolden.string(),
               "--priors", fixture_priors(), "--calib", (kGolden / "calib").string(), "--out",
               fit.string()})
              .code == 0);
  for (const auto& id : list_frames(pl / "label_2")) {
    CHECK(read_text(pl / "label_2" / (id + ".txt")) == read_text(fit / "label_2" / (id + ".txt")));
  }
  CHECK(fs::exists(fit / "fit_report.json"));
  fs::remove_all(pl);
  fs::remove_all(fit);
}

TEST_CASE("config dump and reload") {
  const Result d = run({"--seed", "7", "--dump-config", "synth", "--out", "x", "--frames", "3"});
  REQUIRE(d.code == 0);
  CHECK(d.out.find("seed=7") != std::string::npos);
  CHECK(d.out.find("frames=3") != std::string::npos);

  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  write_text(dir / "run.toml", "seed=4\n[synth]\nframes=2\nout=\"" +
                                   (dir / "a").generic_string() + "\"\n");
  REQUIRE(run({"--config", (dir / "run.toml").string(), "synth"}).code == 0);
  REQUIRE(run({"--seed", "4", "synth", "--frames", "2", "--out", (dir / "b").string()}).code == 0);
  CHECK(list_frames(dir / "a/label_2").size() == 2);
  for (const char* sub : {"label_2/000000.txt", "detections/000001.txt"}) {
    CHECK(read_text(dir / "a" / sub) == read_text(dir / "b" / sub));
  }
  fs::remove_all(dir);
}

}  // TEST_SUITE
