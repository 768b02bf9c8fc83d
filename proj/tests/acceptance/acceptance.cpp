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

// Release checks. Prints one PASS/FAIL line per criterion and exits nonzero
// if any fails.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "cli_app.hpp"
#include "monogeo/fitters.hpp"
#include "monogeo/gradcheck.hpp"
#include "monogeo/kitti_io.hpp"
#include "monogeo/metrics.hpp"
#include "monogeo/synth.hpp"
#include "monogeo/weak_supervision.hpp"
#include "oracles/oracles.hpp"

using namespace monogeo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

const CameraIntrinsicsd kKitti(721.5377, 721.5377, 609.5593, 172.854);
const fs::path kSource(MONOGEO_SOURCE_DIR);
const fs::path kWork = fs::temp_directory_path() / "monogeo_acceptance";

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  if (code != 0) fmt::print(stderr, "{}\n", err.str());
  return code;
}

Box3Dd make_box(const Point3d& c, const BoxSized& s, double yaw) {
  Box3Dd b;
  b.center = c;
  b.size = s;
  b.yaw = yaw;
  return b;
}

Outcome round_trips() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> f(100, 2000), p(-500, 1500), u(-2000, 3000), z(0.1, 200);
  double worst = 0;
  for (int i = 0; i < 100000; ++i) {
    const CameraIntrinsicsd K(f(rng), f(rng), p(rng), p(rng));
    const Pixeld c(u(rng), u(rng));
    const double depth = z(rng);
    const Pixeld back = project(backproject(c, depth, K), K);
    worst = std::max(worst, (back - c).norm() / std::max(c.norm(), 1.0));
    const Point3d q = backproject(c, depth, K);
    const Point3d again = backproject(project(q, K), q.z(), K);
    worst = std::max(worst, (again - q).norm() / q.norm());
  }
  return {worst < 1e-9, fmt::format("max relative error {:.2e}", worst)};
}

Outcome corner_sums() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dim(0.1, 20), yaw(-10, 10);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const BoxSized s{dim(rng), dim(rng), dim(rng)};
    worst = std::max(worst, corners_from_pose(s, yaw(rng)).rowwise().sum().norm());
  }
  return {worst < 1e-9, fmt::format("max |sum| {:.2e} m", worst)};
}

Outcome iou_oracle() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-1.5, 1.5), dim(0.5, 4), yaw(-std::numbers::pi,
                                                                           std::numbers::pi);
  // About 1e7 lattice samples per pair.
  constexpr long kSide = 3163;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const Box3Dd a = make_box({pos(rng), 0, 20 + pos(rng)}, {dim(rng), dim(rng), 1.5}, yaw(rng));
    const Box3Dd b = make_box({pos(rng), 0, 20 + pos(rng)}, {dim(rng), dim(rng), 1.5}, yaw(rng));
    worst = std::max(worst, std::abs(iou_bev(a, b) - oracle::mc_iou_bev(a, b, kSide, i)));
  }
  const Box3Dd unit = make_box({0, 0, 10}, {1, 1, 1}, 0);
  const Box3Dd turned = make_box({0, 0, 10}, {1, 1, 1}, std::numbers::pi / 4);
  const double octagon = 2 * (std::sqrt(2.0) - 1);
  const double exact = octagon / (2 - octagon);
  const double got = iou_bev(unit, turned);
  const double mc = oracle::mc_iou_bev(unit, turned, kSide, 99);
  worst = std::max(worst, std::abs(got - mc));
  const bool ok = worst < 1e-3 && std::abs(got - exact) < 1e-12 && std::abs(got - 0.7071) < 1e-4;
  return {ok, fmt::format("max |iou - mc| {:.2e}; 45 deg case {:.6f}", worst, got)};
}

Outcome ap_oracle() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(0, 20), extra(0, 5);
  std::uniform_real_distribution<double> u(0, 1);
  double worst40 = 0;
  bool exact11 = true, ordered = true;
  for (int t = 0; t < 200; ++t) {
    const int n = len(rng);
    std::vector<RankedDetection> ranked(n);
    std::vector<oracle::Ranked> plain(n);
    std::size_t tps = 0;
    for (int i = 0; i < n; ++i) {
      ranked[i].true_positive = u(rng) < 0.5;
      ranked[i].similarity = ranked[i].true_positive ? u(rng) : 0.0;
      plain[i] = {ranked[i].true_positive, ranked[i].similarity};
      tps += ranked[i].true_positive;
    }
    const std::size_t num_gt = tps + extra(rng);
    for (int points : {11, 40}) {
      const double ap = average_precision(ranked, num_gt, points).ap;
      const double os = aos(ranked, num_gt, points);
      const double ap_ref = oracle::brute_ap(plain, num_gt, points, false);
      const double os_ref = oracle::brute_ap(plain, num_gt, points, true);
      if (points == 11) {
        exact11 = exact11 && ap == ap_ref && os == os_ref;
      } else {
        worst40 = std::max({worst40, std::abs(ap - ap_ref), std::abs(os - os_ref)});
      }
      ordered = ordered && os <= ap;
    }
  }
  return {exact11 && worst40 <= 1e-12 && ordered,
          fmt::format("11-point exact: {}; 40-point max diff {:.1e}; AOS <= AP: {}", exact11,
                      worst40, ordered)};
}

Outcome gradients() {
  double worst = 0;
  std::string name;
  std::size_t objectives = 0;
  for (const GradCheckEntry& e : gradcheck_battery(5, 1000)) {
    ++objectives;
    if (e.max_deviation >= worst) {
      worst = e.max_deviation;
      name = e.name;
    }
  }
  return {worst < 1e-4,
          fmt::format("{} objectives; max relative deviation {:.2e} ({})", objectives, worst, name)};
}

Outcome min_proj_recovery() {
  SceneConfig cfg;
  cfg.min_depth = 5;
  cfg.max_depth = 60;
  std::size_t total = 0, good = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const SceneFrame frame = generate_scene(cfg, 1000 + s);
    for (const SceneObject& o : frame.objects) {
      const ClassPrior prior{o.type, o.box.size};
      const FitReport r = fit_min_proj_err(*o.box2d, o.box.yaw, prior, kKitti,
                                           o.box.center + Point3d(1, 0.5, 3));
      ++total;
      good += (r.box.center - o.box.center).norm() < 1e-2;
    }
  }
  const double rate = double(good) / double(total);
  return {rate >= 0.99, fmt::format("{}/{} objects within 1e-2 m ({:.2f}%)", good, total,
                                    100 * rate)};
}

Outcome error_transfer() {
  // Depth from a vertical segment: relative error is exactly the height ratio.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> z(5, 60), x(-10, 10), h(0.5, 4), ratio(0.7, 1.3);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double depth = z(rng), height = h(rng), prior = height * ratio(rng), cx = x(rng);
    const double top = project(Point3d(cx, 1.65 - height, depth), kKitti).y();
    const double bottom = project(Point3d(cx, 1.65, depth), kKitti).y();
    const Box2Dd seg{1.0, bottom - top, project(Point3d(cx, 1.0, depth), kKitti).x(),
                     0.5 * (top + bottom)};
    const double rel = std::abs(pseudo_depth(seg, {"X", {1, 1, prior}}, kKitti) - depth) / depth;
    worst = std::max(worst, std::abs(rel - std::abs(prior / height - 1)));
  }

  // Pseudo labels of whole boxes with sizes equal to the priors.
  const fs::path data = kWork / "transfer";
  const fs::path pl = kWork / "transfer_pl";
  fs::remove_all(data);
  fs::remove_all(pl);
  double mean = -1;
  if (cli({"--seed", "17", "synth", "--out", data.string(), "--frames", "50", "--size-spread",
           "0"}) == 0 &&
      cli({"pseudolabel", "--labels", data.string(), "--calib", (data / "calib").string(),
           "--priors", (kSource / "data/priors_kitti.json").string(), "--out", pl.string()}) == 0) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& id : list_frames(data / "label_2")) {
      const auto gt = parse_label_file(read_text(data / "label_2" / (id + ".txt")));
      const auto est = parse_label_file(read_text(pl / "label_2" / (id + ".txt")));
      for (std::size_t i = 0; i < gt.size(); ++i) {
        const Point3d a(gt[i].location.data()), b(est[i].location.data());
        sum += (a - b).norm() / a.z();
        ++n;
      }
    }
    mean = sum / double(n);
  }
  const bool a_ok = worst < 1e-6;
  const bool b_ok = mean >= 0 && mean < 0.02;
  return {a_ok && b_ok,
          fmt::format("segment depth transfer max deviation {:.2e} ({}); pseudolabel mean center "
                      "error {:.2f}% of depth ({})",
                      worst, a_ok ? "ok" : "fail", 100 * mean, b_ok ? "ok" : "fail")};
}

double residual_triple(const Box3Dd& est, const Box2Dd& gt, const ClassPrior& prior) {
  const FirstOrderDelta d = first_order_delta(est, gt, prior, kKitti);
  return std::abs(d.residual.u) + std::abs(d.residual.v) + std::abs(d.residual.h);
}

Outcome refinement() {
  SceneConfig cfg;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> dir(0, 1);
  std::uniform_real_distribution<double> mag(0.002, 0.05);
  std::size_t total = 0, reduced = 0, converged = 0, cases = 0, near_ray = 0, near_ray_failed = 0;
  double worst_px = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const SceneFrame frame = generate_scene(cfg, 5000 + s);
    for (const SceneObject& o : frame.objects) {
      const ClassPrior prior{o.type, o.box.size};
      for (int k = 0; k < 5; ++k) {
        Point3d d(dir(rng), dir(rng), dir(rng));
        d *= mag(rng) * o.box.center.z() / d.norm();
        Box3Dd est = o.box;
        est.center += d;
        const double before = residual_triple(est, *o.box2d, prior);
        est.center += first_order_delta(est, *o.box2d, prior, kKitti).delta;
        const bool better = residual_triple(est, *o.box2d, prior) < before;
        ++total;
        reduced += better;
        // Within 15 degrees of the viewing ray.
        if (std::abs(d.normalized().dot(o.box.center.normalized())) > std::cos(std::numbers::pi / 12)) {
          ++near_ray;
          near_ray_failed += !better;
        }
      }
      const FitReport r = fit_geogl(*o.box2d, Yaw{o.box.yaw}, prior, kKitti);
      const FirstOrderDelta fin = first_order_delta(r.box, *o.box2d, prior, kKitti);
      const double px = std::max({std::abs(fin.residual.u), std::abs(fin.residual.v),
                                  std::abs(fin.residual.h)});
      worst_px = std::max(worst_px, px);
      ++cases;
      converged += px < 0.5;
    }
  }
  const double rate = double(reduced) / double(total);
  return {rate >= 0.95 && converged == cases,
          fmt::format("one step reduces residual in {:.2f}% of {}; {} of the {} failures come from "
                      "the {} perturbations within 15 deg of the viewing ray; geogl max residual "
                      "{:.3f} px",
                      100 * rate, total, near_ray_failed, total - reduced, near_ray, worst_px)};
}

Outcome acceleration() {
  const SceneConfig cfg;
  double in_bound = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    in_bound += acceleration_loss(generate_track(cfg, s, 10, 0.1, 0.3).tracks).value;
  }
  // Jerky tracks: every term is clipped.
  Track jerk;
  for (int n = 0; n < 8; ++n) {
    jerk.times.push_back(0.1 * n);
    jerk.centers.push_back(Point3d((n % 2) * 5.0, 0, 10));
  }
  const double clipped = acceleration_loss(std::span(&jerk, 1)).value;
  const bool clip_ok = clipped == 3.0 * 6;
  // Adding a constant-velocity motion leaves the loss unchanged.
  bool shift_ok = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::vector<Track> tracks = generate_track(cfg, 300 + s, 10, 0.1, 2.0).tracks;
    const double base = acceleration_loss(tracks).value;
    for (Track& t : tracks) {
      for (std::size_t n = 0; n < t.centers.size(); ++n) {
        t.centers[n] += Point3d(4, 0.5, -3) + t.times[n] * Point3d(2, 0, 7);
      }
    }
    shift_ok = shift_ok && std::abs(acceleration_loss(tracks).value - base) <= 1e-9 * (1 + base);
  }
  return {in_bound == 0.0 && clip_ok && shift_ok,
          fmt::format("bounded tracks loss {}; jerky track {} (6 terms); shift invariant {}",
                      in_bound, clipped, shift_ok)};
}

Outcome kitti_io() {
  const fs::path golden = kSource / "tests/fixtures/kitti_golden";
  bool stable = true;
  for (const auto& id : list_frames(golden / "label_2")) {
    const std::string text = read_text(golden / "label_2" / (id + ".txt"));
    stable = stable && emit_label_file(parse_label_file(text)) == text;
    const std::string calib = read_text(golden / "calib" / (id + ".txt"));
    stable = stable && emit_calib_file(parse_calib_file(calib)) == calib;
  }
  const fs::path out = kWork / "self_eval";
  fs::remove_all(out);
  const std::string gt = (golden / "label_2").string();
  bool perfect = cli({"eval", "--pred", gt, "--gt", gt, "--out", out.string(), "--unscored-preds",
                      "--iou", "0.1,0.2,0.3,0.5,0.7"}) == 0;
  std::size_t cells = 0;
  if (perfect) {
    std::istringstream csv(read_text(out / "eval.csv"));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      std::istringstream row(line);
      std::string cell;
      for (int c = 0; std::getline(row, cell, ','); ++c) {
        if (c < 3 || cell == "nan") continue;
        ++cells;
        perfect = perfect && cell == "1.000000";
      }
    }
  }
  return {stable && perfect && cells > 0,
          fmt::format("byte-stable round-trip: {}; self-evaluation {} cells all 1: {}", stable,
                      cells, perfect)};
}

std::string pipeline(const fs::path& root, int jobs) {
  fs::remove_all(root);
  const std::string j = std::to_string(jobs);
  const std::string priors = (kSource / "data/priors_kitti.json").string();
  const fs::path data = root / "data", pl = root / "pl", fit = root / "fit", ev = root / "eval";
  if (cli({"--seed", "23", "--jobs", j, "synth", "--out", data.string(), "--frames", "30",
           "--pixel-noise", "1.0"}) != 0)
    return "synth failed";
  if (cli({"--jobs", j, "pseudolabel", "--labels", data.string(), "--calib",
           (data / "calib").string(), "--priors", priors, "--out", pl.string()}) != 0)
    return "pseudolabel failed";
  if (cli({"--jobs", j, "fit", "--mode", "minproj", "--labels", data.string(), "--calib",
           (data / "calib").string(), "--priors", priors, "--init", pl.string(), "--out",
           fit.string()}) != 0)
    return "fit failed";
  if (cli({"--jobs", j, "eval", "--pred", fit.string(), "--gt", data.string(), "--out",
           ev.string()}) != 0)
    return "eval failed";
  return cli::sha256_hex(read_text(ev / "eval.csv"));
}

Outcome determinism() {
  const std::string a = pipeline(kWork / "e2e_a", 1);
  const std::string b = pipeline(kWork / "e2e_b", 1);
  const std::string c = pipeline(kWork / "e2e_c", 3);
  const bool ok = a.size() == 64 && a == b && a == c;
  return {ok, fmt::format("eval.csv sha256 {} / {} / {}", a.substr(0, 16), b.substr(0, 16),
                          c.substr(0, 16))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"geometry round-trips", round_trips},
      {"corner symmetry", corner_sums},
      {"rotated IoU oracle", iou_oracle},
      {"AP/AOS oracle", ap_oracle},
      {"gradient checks", gradients},
      {"MinProjErr recovery", min_proj_recovery},
      {"weak-supervision error transfer", error_transfer},
      {"first-order refinement", refinement},
      {"acceleration loss", acceleration},
      {"KITTI I/O", kitti_io},
      {"end-to-end determinism", determinism},
  };
  fs::create_directories(kWork);
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    fmt::print("[{}] {:2d} {}: {} ({:.2f} s)\n", o.pass ? "PASS" : "FAIL", i + 1,
               criteria[i].first, o.detail, secs);
    std::fflush(stdout);
  }
  fs::remove_all(kWork);
  return failures == 0 ? 0 : 1;
}
