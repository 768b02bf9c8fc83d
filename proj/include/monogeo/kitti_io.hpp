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

// KITTI object labels (label_2) and calibration files.

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "monogeo/geometry.hpp"
#include "monogeo/metrics.hpp"

namespace monogeo {

/// Parse failure at a 1-based line number.
class KittiParseError : public std::runtime_error {
 public:
  KittiParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct KittiLabel {
  std::string type;
  double truncated{0};
  int occluded{0};
  double alpha{0};
  std::array<double, 4> bbox{};        // left, top, right, bottom
  std::array<double, 3> dimensions{};  // h, w, l
  std::array<double, 3> location{};    // x, y, z of the bottom center
  double rotation_y{0};
  std::optional<double> score;

  bool operator==(const KittiLabel&) const = default;
};

/// Ground truth must not carry a score; predictions must.
enum class LabelKind { kGroundTruth, kPrediction, kAny };

std::vector<KittiLabel> parse_label_file(const std::string& text, LabelKind kind = LabelKind::kAny);
/// One line per label, floats with 6 decimals.
std::string emit_label_file(const std::vector<KittiLabel>& labels);

struct KittiCalib {
  /// Every matrix of the file in order, values verbatim.
  std::vector<std::pair<std::string, std::vector<double>>> entries;

  const std::vector<double>* find(const std::string& key) const;
  CameraIntrinsicsd intrinsics() const;  // from P2
};

/// Requires a 12-value P2 entry.
KittiCalib parse_calib_file(const std::string& text);
std::string emit_calib_file(const KittiCalib& calib);
/// P0..P3 with the given P2, identity rectification and zero extrinsics.
KittiCalib make_calib(const CameraIntrinsicsd& K);

double alpha_from_yaw(double yaw, const Point3d& location);
double yaw_from_alpha(double alpha, const Point3d& location);

/// Category index used in Box3D::class_id; 0 for unknown types.
int class_id_from_type(const std::string& type);
std::string type_from_class_id(int class_id);

Box3Dd label_to_box3d(const KittiLabel& label);
/// Fills alpha and the projected 2D box; truncation and occlusion are zero.
KittiLabel box3d_to_label(const Box3Dd& box, const std::string& type, const CameraIntrinsicsd& K,
                          bool with_score = false);

EvalObject to_eval_object(const KittiLabel& label);
/// Drops DontCare rows.
std::vector<EvalObject> to_eval_objects(const std::vector<KittiLabel>& labels);

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file and a rename.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Sorted stems of the *.txt files of a directory.
std::vector<std::string> list_frames(const std::filesystem::path& dir);

}  // namespace monogeo
