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

#include "monogeo/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "monogeo/kitti_io.hpp"
#include "monogeo/metrics.hpp"
#include "monogeo/parallel.hpp"

namespace monogeo {
namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double normal(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0) return 0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

std::optional<Box2Dd> try_project(const Box3Dd& box, const CameraIntrinsicsd& K) {
  try {
    return box3d_to_box2d(box, K);
  } catch (const BehindCameraError&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<ClassSpec> SceneConfig::default_classes() {
  return {{"Car", {3.88, 1.63, 1.53}, 0.1, 3.0},
          {"Pedestrian", {0.84, 0.66, 1.76}, 0.1, 1.0},
          {"Cyclist", {1.76, 0.60, 1.73}, 0.1, 1.0}};
}

void SceneConfig::validate() const {
  if (!(image_w > 0) || !(image_h > 0)) throw std::invalid_argument("image size must be positive");
  if (min_objects < 0 || max_objects < min_objects) {
    throw std::invalid_argument("object count range is invalid");
  }
  if (!(min_depth > 0) || !(max_depth >= min_depth)) {
    throw std::invalid_argument("depth range must be positive and ordered");
  }
  if (!(yaw_max >= yaw_min)) throw std::invalid_argument("yaw range is inverted");
  if (pixel_noise < 0) throw std::invalid_argument("pixel noise must be non-negative");
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be positive");
  if (max_objects > 0 && classes.empty()) throw std::invalid_argument("no object classes");
  for (const ClassSpec& c : classes) {
    if (!c.mean.positive()) throw std::invalid_argument("class sizes must be positive");
    if (!(c.spread >= 0 && c.spread < 1)) throw std::invalid_argument("spread must be in [0, 1)");
    if (!(c.weight > 0)) throw std::invalid_argument("class weights must be positive");
  }
}

CameraIntrinsicsd SceneConfig::intrinsics() const {
  return camera ? *camera : default_intrinsics(image_w, image_h);
}

SceneFrame generate_scene(const SceneConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const CameraIntrinsicsd K = cfg.intrinsics();
  std::mt19937_64 rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  std::vector<double> weights;
  for (const ClassSpec& c : cfg.classes) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick_class(weights.begin(), weights.end());
  const int count = std::uniform_int_distribution<int>(cfg.min_objects, cfg.max_objects)(rng);

  SceneFrame frame;
  for (int n = 0; n < count; ++n) {
    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_attempts && !placed; ++attempt) {
      const ClassSpec& cls = cfg.classes[pick_class(rng)];
      Box3Dd box;
      box.size.length = cls.mean.length * uniform(1 - cls.spread, 1 + cls.spread);
      box.size.width = cls.mean.width * uniform(1 - cls.spread, 1 + cls.spread);
      box.size.height = cls.mean.height * uniform(1 - cls.spread, 1 + cls.spread);
      box.yaw = normalize_angle(uniform(cfg.yaw_min, cfg.yaw_max));
      const double z = uniform(cfg.min_depth, cfg.max_depth);
      const double u = uniform(0.0, cfg.image_w);
      box.center = {(u - K.pu) * z / K.fu, cfg.ground_y - box.size.height / 2, z};
      box.class_id = class_id_from_type(cls.name);

      const std::optional<Box2Dd> b2 = try_project(box, K);
      if (!b2 || b2->left() < 0 || b2->top() < 0 || b2->right() > cfg.image_w ||
          b2->bottom() > cfg.image_h) {
        continue;
      }
      const bool overlaps = std::any_of(frame.objects.begin(), frame.objects.end(),
                                        [&](const SceneObject& o) { return iou_bev(o.box, box) > 0; });
      if (overlaps) continue;

      SceneObject obj;
      obj.id = n;
      obj.type = cls.name;
      obj.box = box;
      obj.box2d = b2;
      if (cfg.pixel_noise > 0) {
        const double l = b2->left() + normal(rng, cfg.pixel_noise);
        const double t = b2->top() + normal(rng, cfg.pixel_noise);
        const double r = std::max(l, b2->right() + normal(rng, cfg.pixel_noise));
        const double b = std::max(t, b2->bottom() + normal(rng, cfg.pixel_noise));
        obj.noisy_box2d = Box2Dd::from_extents(l, t, r, b);
      }
      frame.objects.push_back(std::move(obj));
      placed = true;
    }
    if (!placed) {
      throw std::runtime_error(fmt::format(
          "could not place object {} after {} attempts; widen the depth range or lower the count",
          n, cfg.max_attempts));
    }
  }
  return frame;
}

std::vector<SceneFrame> generate_dataset(const SceneConfig& cfg, std::uint64_t seed,
                                         std::size_t frames, int jobs) {
  std::vector<SceneFrame> out(frames);
  parallel_for(frames, jobs, [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    std::uint64_t frame_seed = 0;
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    frame_seed = (std::uint64_t(words[1]) << 32) | words[0];
    out[i] = generate_scene(cfg, frame_seed);
    out[i].timestamp = static_cast<double>(i);
  });
  return out;
}

TrackScene generate_track(const SceneConfig& cfg, std::uint64_t seed, std::size_t n_frames,
                          double dt, double accel_bound) {
  if (n_frames < 1) throw std::invalid_argument("a track needs at least one frame");
  if (!(dt > 0)) throw std::invalid_argument("frame interval must be positive");
  if (!(accel_bound >= 0)) throw std::invalid_argument("acceleration bound must be >= 0");
  const CameraIntrinsicsd K = cfg.intrinsics();
  const SceneFrame first = generate_scene(cfg, seed);
  std::mt19937_64 rng = make_rng(seed, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Strictly inside the bound so rounding in finite differences stays below it.
  const double max_accel = accel_bound * (1.0 - 1e-6);

  TrackScene scene;
  scene.frames.resize(n_frames);
  for (std::size_t n = 0; n < n_frames; ++n) scene.frames[n].timestamp = n * dt;
  for (const SceneObject& obj : first.objects) {
    Track track;
    track.id = obj.id;
    const Eigen::Vector3d velocity(-3 + 6 * unit(rng), 0.0, -10 + 20 * unit(rng));
    for (std::size_t n = 0; n < n_frames; ++n) {
      track.times.push_back(n * dt);
      if (n == 0) {
        track.centers.push_back(obj.box.center);
      } else if (n == 1) {
        track.centers.push_back(obj.box.center + velocity * dt);
      } else {
        const double angle = 2 * std::numbers::pi * unit(rng);
        const double mag = max_accel * unit(rng);
        const Eigen::Vector3d a(mag * std::cos(angle), 0.0, mag * std::sin(angle));
        track.centers.push_back(2 * track.centers[n - 1] - track.centers[n - 2] + a * dt * dt);
      }
      SceneObject moved = obj;
      moved.box.center = track.centers.back();
      moved.box2d = try_project(moved.box, K);
      moved.noisy_box2d.reset();
      scene.frames[n].objects.push_back(std::move(moved));
    }
    scene.tracks.push_back(std::move(track));
  }
  return scene;
}

std::vector<Box3Dd> perturb_detections(const SceneFrame& frame, const DetectionNoise& noise,
                                       std::uint64_t seed) {
  if (noise.center_sigma < 0 || noise.depth_sigma < 0 || noise.yaw_sigma < 0 ||
      !(noise.score_scale > 0)) {
    throw std::invalid_argument("noise sigmas must be >= 0 and the score scale positive");
  }
  std::mt19937_64 rng = make_rng(seed, 2);
  std::vector<Box3Dd> dets;
  dets.reserve(frame.objects.size());
  for (const SceneObject& obj : frame.objects) {
    Box3Dd d = obj.box;
    d.center.x() += normal(rng, noise.center_sigma);
    d.center.y() += normal(rng, noise.center_sigma);
    d.center.z() *= 1.0 + normal(rng, noise.depth_sigma);
    const double dyaw = normal(rng, noise.yaw_sigma);
    d.yaw = normalize_angle(d.yaw + dyaw);
    const double magnitude = (d.center - obj.box.center).norm() + std::abs(dyaw);
    d.score = 1.0 / (1.0 + magnitude / noise.score_scale);
    d.class_id = class_id_from_type(obj.type);
    dets.push_back(d);
  }
  return dets;
}

void export_kitti(const std::vector<SceneFrame>& frames, const CameraIntrinsicsd& K,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "label_2");
  std::filesystem::create_directories(out_dir / "calib");
  const std::string calib = emit_calib_file(make_calib(K));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::vector<KittiLabel> labels;
    for (const SceneObject& obj : frames[i].objects) {
      KittiLabel l = box3d_to_label(obj.box, obj.type, K);
      if (obj.noisy_box2d) {
        const Box2Dd& b = *obj.noisy_box2d;
        l.bbox = {b.left(), b.top(), b.right(), b.bottom()};
      }
      labels.push_back(std::move(l));
    }
    const std::string stem = fmt::format("{:06d}.txt", i);
    write_text(out_dir / "label_2" / stem, emit_label_file(labels));
    write_text(out_dir / "calib" / stem, calib);
  }
}

}  // namespace monogeo
