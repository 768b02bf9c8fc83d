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

// Seeded synthetic scenes and tracks on a flat ground plane.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "monogeo/geometry.hpp"
#include "monogeo/weak_supervision.hpp"

namespace monogeo {

struct ClassSpec {
  std::string name;
  BoxSized mean;       // usually the class prior
  double spread{0.1};  // relative, uniform in [1 - spread, 1 + spread] per dimension
  double weight{1};
};

struct SceneConfig {
  /// Explicit camera; when unset the default-intrinsics rule for the image
  /// size is used.
  std::optional<CameraIntrinsicsd> camera{CameraIntrinsicsd(721.5377, 721.5377, 609.5593, 172.854)};
  double image_w{1242};
  double image_h{375};
  int min_objects{2};
  int max_objects{8};
  double min_depth{5};
  double max_depth{60};
  double ground_y{1.65};  // camera height above the ground plane
  std::vector<ClassSpec> classes = default_classes();
  double yaw_min{-3.14159265358979323846};
  double yaw_max{3.14159265358979323846};
  double pixel_noise{0};  // sigma of each 2D box edge
  int max_attempts{2000};  // placements tried per object

  void validate() const;
  CameraIntrinsicsd intrinsics() const;
  /// Car, Pedestrian and Cyclist with KITTI average sizes.
  static std::vector<ClassSpec> default_classes();
};

struct SceneObject {
  int id{0};
  std::string type;
  Box3Dd box;
  /// Exact projection; unset when a corner is behind the camera.
  std::optional<Box2Dd> box2d;
  std::optional<Box2Dd> noisy_box2d;
};

struct SceneFrame {
  double timestamp{0};
  std::vector<SceneObject> objects;
};

/// Objects rest on the ground plane, project fully inside the image and do
/// not overlap in bird's-eye view. Throws when a placement cannot be found.
SceneFrame generate_scene(const SceneConfig& cfg, std::uint64_t seed);

/// Frame i of a dataset uses a seed derived from (seed, i), so frames can be
/// generated in any order.
std::vector<SceneFrame> generate_dataset(const SceneConfig& cfg, std::uint64_t seed,
                                         std::size_t frames, int jobs = 1);

struct TrackScene {
  std::vector<SceneFrame> frames;
  std::vector<Track> tracks;
};

/// The first frame comes from generate_scene; every object then moves in
/// the ground plane with acceleration of norm strictly below accel_bound.
TrackScene generate_track(const SceneConfig& cfg, std::uint64_t seed, std::size_t n_frames,
                          double dt, double accel_bound);

struct DetectionNoise {
  double center_sigma{0};     // meters, X and Y
  double depth_sigma{0};      // relative
  double yaw_sigma{0};        // radians
  double score_scale{1};      // score = 1 / (1 + magnitude / score_scale)
};

/// One detection per object carrying the object's type in class_id.
std::vector<Box3Dd> perturb_detections(const SceneFrame& frame, const DetectionNoise& noise,
                                       std::uint64_t seed);

/// Writes label_2/NNNNNN.txt and calib/NNNNNN.txt. Uses noisy 2D boxes when
/// present.
void export_kitti(const std::vector<SceneFrame>& frames, const CameraIntrinsicsd& K,
                  const std::filesystem::path& out_dir);

}  // namespace monogeo
