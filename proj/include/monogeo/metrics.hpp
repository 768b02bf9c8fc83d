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

// KITTI-style evaluation: rotated 3D / bird's-eye-view IoU, greedy matching,
// interpolated average precision, average orientation similarity, 3D NMS and
// localization error by distance.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "monogeo/geometry.hpp"
#include "monogeo/polygon.hpp"

namespace monogeo {

enum class IouKind { k3D, kBEV };

const char* to_string(IouKind kind);

/// Ground footprint of a box in the (X, Z) plane.
Polygon<double> bev_footprint(const Box3Dd& box);

/// Intersection over union of the yaw-rotated ground rectangles.
double iou_bev(const Box3Dd& a, const Box3Dd& b);
/// BEV intersection times vertical overlap, over the union of volumes.
double iou_3d(const Box3Dd& a, const Box3Dd& b);
double box_iou(const Box3Dd& a, const Box3Dd& b, IouKind kind);

/// Boxes of one frame, already filtered to one class. Ignored ground truth
/// can absorb a detection without counting it either way; ignored
/// detections are dropped before matching.
struct FrameBoxes {
  std::vector<Box3Dd> dets;
  std::vector<Box3Dd> gts;
  std::vector<bool> det_ignored;  // empty means none
  std::vector<bool> gt_ignored;   // empty means none
};

enum class MatchState { kTruePositive, kFalsePositive, kIgnored };

struct FrameMatch {
  std::vector<MatchState> state;  // per detection
  std::vector<int> matched_gt;    // per detection, -1 when unmatched
};

/// Detections visited by descending score (ties by index). Each one takes the
/// unmatched ground truth with the highest IoU if that IoU reaches the
/// threshold.
FrameMatch match_frame(const FrameBoxes& frame, double threshold, IouKind kind);

struct RankedDetection {
  double score{0};
  bool true_positive{false};
  /// (1 + cos(yaw error)) / 2 for true positives, 0 otherwise.
  double similarity{0};
  std::size_t frame{0};
  std::size_t index{0};
};

struct RankedSet {
  std::vector<RankedDetection> ranked;  // descending score, ties by (frame, index)
  std::size_t num_gt{0};                // non-ignored ground truth
};

RankedSet match_and_rank(std::span<const FrameBoxes> frames, double threshold, IouKind kind,
                         int jobs = 1);

/// Recall sample points: 11 -> {0, 0.1, ..., 1}, 40 -> {1/40, ..., 1}.
std::vector<double> recall_points(int points);

struct PRCurve {
  std::vector<double> recall;     // per rank, non-decreasing
  std::vector<double> precision;  // per rank
  std::vector<double> sample_recall;
  std::vector<double> sample_precision;  // interpolated at sample_recall
  double ap{0};
};

/// Mean over the recall points of the best precision at recall >= point.
/// Zero when there is no ground truth.
PRCurve average_precision(std::span<const RankedDetection> ranked, std::size_t num_gt,
                          int points = 40);

/// Same accumulation with each true positive weighted by its orientation
/// similarity.
double aos(std::span<const RankedDetection> ranked, std::size_t num_gt, int points = 40);

inline double orientation_similarity(double yaw_a, double yaw_b) {
  return (1.0 + std::cos(yaw_a - yaw_b)) / 2.0;
}

/// Greedy suppression in descending score order (ties by index). Returns the
/// kept boxes in that order.
std::vector<Box3Dd> nms_3d(std::span<const Box3Dd> dets, double iou_threshold, IouKind kind);

struct ErrorBin {
  double lower{0};
  double upper{0};
  double mean_error{0};
  std::size_t count{0};
  bool empty() const { return count == 0; }
};

/// True positives bucketed by ground-truth depth (Z); mean Euclidean center
/// error per bucket. Bin edges must be strictly increasing.
std::vector<ErrorBin> localization_error_curve(std::span<const FrameBoxes> frames,
                                               double threshold, IouKind kind,
                                               std::span<const double> bin_edges);

struct Difficulty {
  std::string name;
  double min_height{0};  // pixels
  int max_occlusion{0};
  double max_truncation{0};
};

/// Easy / Moderate / Hard of the KITTI object benchmark.
std::vector<Difficulty> kitti_difficulties();

struct EvalObject {
  Box3Dd box;
  std::string type;
  double height_2d{0};
  double truncation{0};
  int occlusion{0};
};

struct EvalFrame {
  std::string id;
  std::vector<EvalObject> gts;
  std::vector<EvalObject> dets;
};

struct EvalConfig {
  std::vector<double> iou_thresholds{0.1, 0.2, 0.3, 0.5, 0.7};
  std::vector<IouKind> kinds{IouKind::k3D, IouKind::kBEV};
  int ap_points{40};
  std::vector<Difficulty> difficulties = kitti_difficulties();
  std::vector<std::string> classes{"Car"};
  std::vector<double> distance_bins{0, 10, 20, 30, 40, 50, 60, 70, 80};
  double localization_iou{0.1};
  IouKind localization_kind{IouKind::kBEV};

  void validate() const;
};

/// Class whose ground truth is ignored rather than missed when evaluating
/// `cls` (Van for Car, Person_sitting for Pedestrian).
std::string neighbor_class(const std::string& cls);

/// Filters one frame for a class and difficulty.
FrameBoxes select(const EvalFrame& frame, const std::string& cls, const Difficulty& difficulty);

struct EvalEntry {
  std::string cls;
  IouKind kind{IouKind::k3D};
  double threshold{0};
  std::string difficulty;
  double ap{0};
  double aos{0};
  std::size_t num_gt{0};
  PRCurve curve;
};

struct EvalReport {
  std::vector<EvalEntry> entries;
  /// Per class, computed over the last (most inclusive) difficulty.
  std::vector<std::pair<std::string, std::vector<ErrorBin>>> localization;
};

EvalReport evaluate(std::span<const EvalFrame> frames, const EvalConfig& cfg, int jobs = 1);

/// One row per (class, metric, kind, threshold) with a column per difficulty.
/// Cells without ground truth read "nan".
std::string report_csv(const EvalReport& report, const EvalConfig& cfg);
std::string report_json(const EvalReport& report);

}  // namespace monogeo
