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

// Pseudo ground truth from 2D boxes, class size priors and camera geometry.

#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monogeo/geometry.hpp"

namespace monogeo {

struct ClassPrior {
  std::string name;
  BoxSized size;  // average size of the class
};

/// Class name -> prior size.
class PriorTable {
 public:
  void add(ClassPrior prior);
  const ClassPrior& at(const std::string& name) const;  // throws naming the class
  const ClassPrior* find(const std::string& name) const;
  std::size_t size() const { return priors_.size(); }
  const std::map<std::string, ClassPrior>& entries() const { return priors_; }

 private:
  std::map<std::string, ClassPrior> priors_;
};

/// JSON object mapping class name to [l, w, h] or
/// {"length": l, "width": w, "height": h}, meters.
PriorTable parse_priors_json(const std::string& text);
PriorTable load_priors(const std::string& path);

/// Rough instance depth f_v * h_prior / h_2d.
double pseudo_depth(const Box2Dd& box, const ClassPrior& prior, const CameraIntrinsicsd& K);

/// d(pseudo depth) / d(h_2d) = -f_v * h_prior / h_2d^2.
double pseudo_depth_derivative(double h_2d, const ClassPrior& prior, const CameraIntrinsicsd& K);

/// The 2D box center stands in for the projected 3D center.
inline Pixeld pseudo_center(const Box2Dd& box) { return box.center(); }

/// Weak 3D location: pseudo center back-projected at the pseudo depth.
Point3d pseudo_location(const Box2Dd& box, const ClassPrior& prior, const CameraIntrinsicsd& K);

struct FirstOrderDelta {
  Point3d delta{Point3d::Zero()};
  /// gt - projection of the estimate. The width entry is not used by delta.
  Box2Dd residual;
  /// Projection of the estimate.
  Box2Dd projected;
};

/// First-order correction of an estimated center so its projection moves
/// toward the ground-truth 2D box:
///   dX = Z/f_u * du_b,  dY = Z/f_v * dv_b,  dZ = -f_v h_prior / h_2d^2 * dh_2d
/// with Z and h_2d taken from the estimate.
FirstOrderDelta first_order_delta(const Box3Dd& estimate, const Box2Dd& gt2d,
                                  const ClassPrior& prior, const CameraIntrinsicsd& K);

/// One object observed over consecutive frames with strictly increasing
/// times.
struct Track {
  int id{0};
  std::vector<double> times;
  std::vector<Point3d> centers;
};

enum class AccelNorm { kEuclidean, kL1 };

struct AccelConfig {
  double alpha{0.3};  // m/s^2 allowed before any penalty
  double beta{3.0};   // per-term clip
  AccelNorm norm{AccelNorm::kEuclidean};

  void validate() const;
};

struct AccelLoss {
  double value{0};
  /// Per track, d(loss)/d(center) as 3 x frames.
  std::vector<Eigen::Matrix3Xd> gradients;
};

/// Sum over tracks and frame triples of clip(|a_n| - alpha, 0, beta) with
///   v_n = (C_n - C_{n+1}) / (t_n - t_{n+1}),
///   a_n = (v_n - v_{n+1}) / (t_n - t_{n+1}).
/// Tracks shorter than three frames contribute nothing.
AccelLoss acceleration_loss(std::span<const Track> tracks, const AccelConfig& cfg = {});

/// Angle handedness of a view angle. kDirect applies
/// yaw = phi - atan((u_b - p_u)/f_u) directly. kKitti takes a KITTI alpha and
/// returns a KITTI rotation_y; it mirrors both angles through the same
/// formula.
enum class AngleConvention { kDirect, kKitti };

double teacher_yaw(double phi, double u_b, const CameraIntrinsicsd& K,
                   AngleConvention convention = AngleConvention::kDirect);

/// Pseudo corners from a view angle, the 2D box and the class prior size.
LocalCornersd corners_from_teacher(double phi, const Box2Dd& box, const ClassPrior& prior,
                                   const CameraIntrinsicsd& K,
                                   AngleConvention convention = AngleConvention::kDirect);

/// Corrects a depth predicted with a prior height and an assumed focal length
/// once the true height and the true focal length are known.
double rescale_depth(double depth, double true_height, double prior_height, double true_fv,
                     double assumed_fv);

/// Fallback camera for unknown intrinsics: f_u = f_v = 0.8 * width, principal
/// point at the image center.
CameraIntrinsicsd default_intrinsics(double image_w, double image_h);

/// Identifies the same physical object across frames. The synthetic harness
/// uses exact object identities; an optical-flow source can implement the
/// same interface.
class CorrespondenceProvider {
 public:
  virtual ~CorrespondenceProvider() = default;
  /// Index of the object in frame `to` that matches `object` in frame `from`.
  virtual std::optional<std::size_t> match(std::size_t from, std::size_t object,
                                           std::size_t to) const = 0;
};

/// Correspondence through per-frame object id lists.
class IdentityCorrespondence final : public CorrespondenceProvider {
 public:
  explicit IdentityCorrespondence(std::vector<std::vector<int>> ids_per_frame);
  std::optional<std::size_t> match(std::size_t from, std::size_t object,
                                   std::size_t to) const override;

 private:
  std::vector<std::vector<int>> ids_;
};

/// Chains estimated centers into tracks starting from every object of frame
/// 0. A track stops at the first frame without a correspondence.
std::vector<Track> build_tracks(std::span<const double> times,
                                std::span<const std::vector<Point3d>> centers,
                                const CorrespondenceProvider& provider);

}  // namespace monogeo
