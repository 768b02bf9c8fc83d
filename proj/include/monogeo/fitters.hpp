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

// Recovery of a 3D box center from a 2D box. Yaw and size stay fixed.

#pragma once

#include <Eigen/Core>
#include <functional>
#include <variant>
#include <vector>

#include "monogeo/geometry.hpp"
#include "monogeo/weak_supervision.hpp"

namespace monogeo {

struct FitConfig {
  int max_iters{200};
  double initial_step{0.5};  // meters
  double tolerance{1e-4};    // meters, on the center update
  double armijo{1e-4};
  double min_depth{0.1};  // meters

  void validate() const;
};

struct FitReport {
  Box3Dd box;
  int iterations{0};
  /// L1 distance between the projected box extents and the target, pixels.
  double objective{0};
  bool converged{false};
  /// Objective after the initial point and after every accepted step.
  std::vector<double> history;
};

struct ProjectionObjective {
  double value{0};
  Eigen::Vector3d gradient{Eigen::Vector3d::Zero()};
  Box2Dd projected;
};

/// Sum over the four box extents (left, top, right, bottom) of
/// rho(projected - target), rho(d) = |d| when smoothing is 0 and
/// sqrt(d^2 + s^2) - s otherwise. The gradient is with respect to the center;
/// |d| has subgradient 0 at d = 0.
ProjectionObjective min_proj_objective(const Point3d& center, const Box2Dd& target, double yaw,
                                       const BoxSized& size, const CameraIntrinsicsd& K,
                                       double smoothing = 0.0);

/// Center minimizing the L1 box-extent discrepancy, by preconditioned
/// gradient descent with Armijo backtracking (step halving). The L1 kinks are
/// handled with a decreasing smoothing schedule; a step is accepted only if
/// it also does not increase the unsmoothed objective. Running out of
/// iterations returns converged = false.
FitReport fit_min_proj_err(const Box2Dd& gt2d, double yaw, const ClassPrior& prior,
                           const CameraIntrinsicsd& K, const Point3d& init,
                           const FitConfig& cfg = {});

struct Yaw {
  double value{0};
};

struct ViewAngle {
  double value{0};
  AngleConvention convention{AngleConvention::kDirect};
};

using Orientation = std::variant<Yaw, ViewAngle>;

/// Pseudo-label initialization followed by repeated first-order center
/// corrections until the correction is shorter than the tolerance.
FitReport fit_geogl(const Box2Dd& gt2d, const Orientation& orientation, const ClassPrior& prior,
                    const CameraIntrinsicsd& K, const FitConfig& cfg = {});

/// Value and, when the pointer is non-null, gradient.
using DifferentiableObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct GradCheckResult {
  /// max_i |a_i - n_i| / max(|a_i|, |n_i|, 1)
  double max_deviation{0};
  Eigen::VectorXd analytic;
  Eigen::VectorXd numeric;
};

/// Central finite differences against the analytic gradient.
GradCheckResult grad_check(const DifferentiableObjective& objective, const Eigen::VectorXd& params,
                           double step = 1e-5);

}  // namespace monogeo
