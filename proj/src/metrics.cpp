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

#include "monogeo/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "monogeo/parallel.hpp"

namespace monogeo {
namespace {

std::vector<std::size_t> score_order(std::span<const Box3Dd> boxes) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].score > boxes[b].score;
  });
  return order;
}

bool flag(const std::vector<bool>& flags, std::size_t i) { return !flags.empty() && flags[i]; }

double vertical_overlap(const Box3Dd& a, const Box3Dd& b) {
  const double top = std::max(a.center.y() - a.size.height / 2, b.center.y() - b.size.height / 2);
  const double bottom =
      std::min(a.center.y() + a.size.height / 2, b.center.y() + b.size.height / 2);
  return std::max(0.0, bottom - top);
}

}  // namespace

const char* to_string(IouKind kind) { return kind == IouKind::k3D ? "3D" : "BEV"; }

Polygon<double> bev_footprint(const Box3Dd& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = box.size.length / 2;
  const double hw = box.size.width / 2;
  const double local[4][2] = {{-hl, -hw}, {hl, -hw}, {hl, hw}, {-hl, hw}};
  Polygon<double> poly;
  poly.reserve(4);
  for (const auto& p : local) {
    poly.emplace_back(box.center.x() + p[0] * c + p[1] * s, box.center.z() - p[0] * s + p[1] * c);
  }
  return poly;
}

double iou_bev(const Box3Dd& a, const Box3Dd& b) {
  const double area_a = a.size.length * a.size.width;
  const double area_b = b.size.length * b.size.width;
  if (!(area_a > 0) || !(area_b > 0)) return 0;
  const double inter = convex_intersection_area(bev_footprint(a), bev_footprint(b));
  const double uni = area_a + area_b - inter;
  return uni > 0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double iou_3d(const Box3Dd& a, const Box3Dd& b) {
  const double vol_a = a.size.length * a.size.width * a.size.height;
  const double vol_b = b.size.length * b.size.width * b.size.height;
  if (!(vol_a > 0) || !(vol_b > 0)) return 0;
  const double dy = vertical_overlap(a, b);
  if (dy <= 0) return 0;
  const double inter = convex_intersection_area(bev_footprint(a), bev_footprint(b)) * dy;
  const double uni = vol_a + vol_b - inter;
  return uni > 0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double box_iou(const Box3Dd& a, const Box3Dd& b, IouKind kind) {
  return kind == IouKind::k3D ? iou_3d(a, b) : iou_bev(a, b);
}

FrameMatch match_frame(const FrameBoxes& frame, double threshold, IouKind kind) {
  if (!frame.det_ignored.empty() && frame.det_ignored.size() != frame.dets.size()) {
    throw std::invalid_argument("det_ignored size mismatch");
  }
  if (!frame.gt_ignored.empty() && frame.gt_ignored.size() != frame.gts.size()) {
    throw std::invalid_argument("gt_ignored size mismatch");
  }
  FrameMatch out;
  out.state.assign(frame.dets.size(), MatchState::kFalsePositive);
  out.matched_gt.assign(frame.dets.size(), -1);
  std::vector<bool> taken(frame.gts.size(), false);
  for (std::size_t d : score_order(frame.dets)) {
    if (flag(frame.det_ignored, d)) {
      out.state[d] = MatchState::kIgnored;
      continue;
    }
    int best = -1;
    double best_iou = -1;
    for (std::size_t g = 0; g < frame.gts.size(); ++g) {
      if (taken[g]) continue;
      const double iou = box_iou(frame.dets[d], frame.gts[g], kind);
      if (iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0 && best_iou >= threshold) {
      taken[best] = true;
      out.matched_gt[d] = best;
      out.state[d] = flag(frame.gt_ignored, best) ? MatchState::kIgnored : MatchState::kTruePositive;
    }
  }
  return out;
}

RankedSet match_and_rank(std::span<const FrameBoxes> frames, double threshold, IouKind kind,
                         int jobs) {
  std::vector<FrameMatch> matches(frames.size());
  parallel_for(frames.size(), jobs,
               [&](std::size_t f) { matches[f] = match_frame(frames[f], threshold, kind); });
  RankedSet out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const FrameBoxes& frame = frames[f];
    for (std::size_t g = 0; g < frame.gts.size(); ++g) {
      if (!flag(frame.gt_ignored, g)) ++out.num_gt;
    }
    for (std::size_t d = 0; d < frame.dets.size(); ++d) {
      const MatchState s = matches[f].state[d];
      if (s == MatchState::kIgnored) continue;
      RankedDetection r;
      r.score = frame.dets[d].score;
      r.frame = f;
      r.index = d;
      r.true_positive = s == MatchState::kTruePositive;
      if (r.true_positive) {
        r.similarity =
            orientation_similarity(frame.dets[d].yaw, frame.gts[matches[f].matched_gt[d]].yaw);
      }
      out.ranked.push_back(r);
    }
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const RankedDetection& a, const RankedDetection& b) {
                     return a.score > b.score;
                   });
  return out;
}

std::vector<double> recall_points(int points) {
  std::vector<double> r;
  if (points == 11) {
    for (int i = 0; i <= 10; ++i) r.push_back(i / 10.0);
  } else if (points == 40) {
    for (int i = 1; i <= 40; ++i) r.push_back(i / 40.0);
  } else {
    throw std::invalid_argument("AP interpolation must use 11 or 40 points");
  }
  return r;
}

namespace {

// Interpolated mean over recall points of a per-rank value (precision or
// orientation-weighted precision).
double interpolate(const std::vector<double>& recall, const std::vector<double>& value,
                   const std::vector<double>& points, std::vector<double>* samples) {
  std::vector<double> suffix_max(value.size());
  double m = 0;
  for (std::size_t k = value.size(); k-- > 0;) {
    m = std::max(m, value[k]);
    suffix_max[k] = m;
  }
  double sum = 0;
  for (double r : points) {
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    const double p = it == recall.end() ? 0.0 : suffix_max[it - recall.begin()];
    if (samples) samples->push_back(p);
    sum += p;
  }
  return sum / static_cast<double>(points.size());
}

}  // namespace

PRCurve average_precision(std::span<const RankedDetection> ranked, std::size_t num_gt,
                          int points) {
  const std::vector<double> pts = recall_points(points);
  PRCurve curve;
  if (num_gt == 0) return curve;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (ranked[k].true_positive) ++tp;
    curve.recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    curve.precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  curve.sample_recall = pts;
  curve.ap = interpolate(curve.recall, curve.precision, pts, &curve.sample_precision);
  return curve;
}

double aos(std::span<const RankedDetection> ranked, std::size_t num_gt, int points) {
  const std::vector<double> pts = recall_points(points);
  if (num_gt == 0) return 0;
  std::vector<double> recall, similarity;
  std::size_t tp = 0;
  double accumulated = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (ranked[k].true_positive) {
      ++tp;
      accumulated += ranked[k].similarity;
    }
    recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    similarity.push_back(accumulated / static_cast<double>(k + 1));
  }
  return interpolate(recall, similarity, pts, nullptr);
}

std::vector<Box3Dd> nms_3d(std::span<const Box3Dd> dets, double iou_threshold, IouKind kind) {
  std::vector<Box3Dd> kept;
  for (std::size_t i : score_order(dets)) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Box3Dd& k) {
      return box_iou(dets[i], k, kind) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(dets[i]);
  }
  return kept;
}

std::vector<ErrorBin> localization_error_curve(std::span<const FrameBoxes> frames,
                                               double threshold, IouKind kind,
                                               std::span<const double> bin_edges) {
  if (bin_edges.size() < 2) throw std::invalid_argument("need at least two bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      throw std::invalid_argument("bin edges must be strictly increasing");
    }
  }
  std::vector<ErrorBin> bins(bin_edges.size() - 1);
  std::vector<double> sums(bins.size(), 0.0);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    bins[b].lower = bin_edges[b];
    bins[b].upper = bin_edges[b + 1];
  }
  for (const FrameBoxes& frame : frames) {
    const FrameMatch m = match_frame(frame, threshold, kind);
    for (std::size_t d = 0; d < frame.dets.size(); ++d) {
      if (m.state[d] != MatchState::kTruePositive) continue;
      const Box3Dd& gt = frame.gts[m.matched_gt[d]];
      const double depth = gt.center.z();
      const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), depth);
      if (it == bin_edges.begin() || it == bin_edges.end()) continue;
      const std::size_t b = static_cast<std::size_t>(it - bin_edges.begin()) - 1;
      sums[b] += (frame.dets[d].center - gt.center).norm();
      ++bins[b].count;
    }
  }
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (bins[b].count > 0) bins[b].mean_error = sums[b] / static_cast<double>(bins[b].count);
  }
  return bins;
}

std::vector<Difficulty> kitti_difficulties() {
  return {{"Easy", 40.0, 0, 0.15}, {"Moderate", 25.0, 1, 0.30}, {"Hard", 25.0, 2, 0.50}};
}

void EvalConfig::validate() const {
  for (double t : iou_thresholds) {
    if (!(t > 0 && t <= 1)) throw std::invalid_argument("IoU thresholds must lie in (0, 1]");
  }
  recall_points(ap_points);
  if (difficulties.empty()) throw std::invalid_argument("at least one difficulty is required");
  for (std::size_t i = 1; i < distance_bins.size(); ++i) {
    if (!(distance_bins[i] > distance_bins[i - 1])) {
      throw std::invalid_argument("distance bins must be strictly increasing");
    }
  }
  if (!(localization_iou > 0 && localization_iou <= 1)) {
    throw std::invalid_argument("localization IoU must lie in (0, 1]");
  }
}

std::string neighbor_class(const std::string& cls) {
  if (cls == "Car") return "Van";
  if (cls == "Pedestrian") return "Person_sitting";
  return {};
}

FrameBoxes select(const EvalFrame& frame, const std::string& cls, const Difficulty& difficulty) {
  FrameBoxes out;
  const std::string neighbor = neighbor_class(cls);
  for (const EvalObject& g : frame.gts) {
    if (g.type == cls) {
      const bool counted = g.height_2d >= difficulty.min_height &&
                           g.occlusion <= difficulty.max_occlusion &&
                           g.truncation <= difficulty.max_truncation;
      out.gts.push_back(g.box);
      out.gt_ignored.push_back(!counted);
    } else if (!neighbor.empty() && g.type == neighbor) {
      out.gts.push_back(g.box);
      out.gt_ignored.push_back(true);
    }
  }
  for (const EvalObject& d : frame.dets) {
    if (d.type != cls) continue;
    out.dets.push_back(d.box);
    out.det_ignored.push_back(d.height_2d < difficulty.min_height);
  }
  return out;
}

EvalReport evaluate(std::span<const EvalFrame> frames, const EvalConfig& cfg, int jobs) {
  cfg.validate();
  EvalReport report;
  for (const std::string& cls : cfg.classes) {
    for (const Difficulty& diff : cfg.difficulties) {
      std::vector<FrameBoxes> selected;
      selected.reserve(frames.size());
      for (const EvalFrame& f : frames) selected.push_back(select(f, cls, diff));
      for (IouKind kind : cfg.kinds) {
        for (double thr : cfg.iou_thresholds) {
          const RankedSet rs = match_and_rank(selected, thr, kind, jobs);
          EvalEntry e;
          e.cls = cls;
          e.kind = kind;
          e.threshold = thr;
          e.difficulty = diff.name;
          e.num_gt = rs.num_gt;
          e.curve = average_precision(rs.ranked, rs.num_gt, cfg.ap_points);
          e.ap = e.curve.ap;
          e.aos = aos(rs.ranked, rs.num_gt, cfg.ap_points);
          report.entries.push_back(std::move(e));
        }
      }
      if (&diff == &cfg.difficulties.back()) {
        report.localization.emplace_back(
            cls, localization_error_curve(selected, cfg.localization_iou, cfg.localization_kind,
                                          cfg.distance_bins));
      }
    }
  }
  return report;
}

namespace {

const EvalEntry* find_entry(const EvalReport& r, const std::string& cls, IouKind kind, double thr,
                            const std::string& difficulty) {
  for (const EvalEntry& e : r.entries) {
    if (e.cls == cls && e.kind == kind && e.threshold == thr && e.difficulty == difficulty) {
      return &e;
    }
  }
  return nullptr;
}

}  // namespace

std::string report_csv(const EvalReport& report, const EvalConfig& cfg) {
  std::string out = "class,metric,iou";
  for (const Difficulty& d : cfg.difficulties) out += "," + d.name;
  out += "\n";
  for (const std::string& cls : cfg.classes) {
    for (IouKind kind : cfg.kinds) {
      for (const bool orientation : {false, true}) {
        for (double thr : cfg.iou_thresholds) {
          out += fmt::format("{},{}_{},{:.2f}", cls, orientation ? "AOS" : "AP", to_string(kind),
                             thr);
          for (const Difficulty& d : cfg.difficulties) {
            const EvalEntry* e = find_entry(report, cls, kind, thr, d.name);
            if (!e) throw std::logic_error("report is missing an entry");
            if (e->num_gt == 0) {
              out += ",nan";
            } else {
              out += fmt::format(",{:.6f}", orientation ? e->aos : e->ap);
            }
          }
          out += "\n";
        }
      }
    }
  }
  return out;
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["entries"] = nlohmann::ordered_json::array();
  for (const EvalEntry& e : report.entries) {
    nlohmann::ordered_json j;
    j["class"] = e.cls;
    j["kind"] = to_string(e.kind);
    j["iou"] = e.threshold;
    j["difficulty"] = e.difficulty;
    j["num_gt"] = e.num_gt;
    // Undefined without ground truth.
    j["ap"] = e.num_gt ? nlohmann::ordered_json(e.ap) : nlohmann::ordered_json(nullptr);
    j["aos"] = e.num_gt ? nlohmann::ordered_json(e.aos) : nlohmann::ordered_json(nullptr);
    j["recall"] = e.curve.sample_recall;
    j["precision"] = e.curve.sample_precision;
    doc["entries"].push_back(std::move(j));
  }
  doc["localization_error"] = nlohmann::ordered_json::array();
  for (const auto& [cls, bins] : report.localization) {
    nlohmann::ordered_json j;
    j["class"] = cls;
    j["bins"] = nlohmann::ordered_json::array();
    for (const ErrorBin& b : bins) {
      j["bins"].push_back({{"lower", b.lower},
                           {"upper", b.upper},
                           {"count", b.count},
                           {"mean_error", b.empty() ? nlohmann::ordered_json(nullptr)
                                                    : nlohmann::ordered_json(b.mean_error)}});
    }
    doc["localization_error"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

}  // namespace monogeo
