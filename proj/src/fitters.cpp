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

#include "monogeo/fitters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace monogeo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this the projected box already matches the target.
constexpr double kExactObjective = 1e-9;
constexpr double kFinalSmoothing = 1e-7;
constexpr double kMinTrialStep = 1e-12;

double penalty(double d, double smoothing, double* slope) {
  if (smoothing <= 0) {
    *slope = double((d > 0) - (d < 0));
    return std::abs(d);
  }
  const double r = std::sqrt(d * d + smoothing * smoothing);
  *slope = d / r;
  return r - smoothing;
}

Box3Dd make_box(const Point3d& center, double yaw, const BoxSized& size) {
  Box3Dd b;
  b.center = center;
  b.yaw = yaw;
  b.size = size;
  return b;
}

// Objective value or +inf when a corner leaves the front half-space.
double safe_value(const Point3d& c, const Box2Dd& target, double yaw, const BoxSized& size,
                  const CameraIntrinsicsd& K, double smoothing) {
  try {
    return min_proj_objective(c, target, yaw, size, K, smoothing).value;
  } catch (const BehindCameraError&) {
    return kInf;
  }
}

// Jacobian of the center with respect to (u_c, v_c, s), s = f_v * h / Z. In
// those pixel-valued coordinates the box extents are close to linear, so
// J J^T makes a good preconditioner for the center gradient.
Eigen::Matrix3d center_jacobian(const Point3d& c, double height, const CameraIntrinsicsd& K) {
  const double z = c.z();
  const double dz_ds = -z * z / (K.fv * height);
  Eigen::Matrix3d j;
  j << z / K.fu, 0.0, c.x() / z * dz_ds,
       0.0, z / K.fv, c.y() / z * dz_ds,
       0.0, 0.0, dz_ds;
  return j;
}

}  // namespace

void FitConfig::validate() const {
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (!(initial_step > 0)) throw std::invalid_argument("initial step must be positive");
  if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  if (!(armijo > 0 && armijo < 1)) throw std::invalid_argument("armijo constant must be in (0,1)");
  if (!(min_depth > 0)) throw std::invalid_argument("min depth must be positive");
}

ProjectionObjective min_proj_objective(const Point3d& center, const Box2Dd& target, double yaw,
                                       const BoxSized& size, const CameraIntrinsicsd& K,
                                       double smoothing) {
  const LocalCornersd corners = corners_from_pose(size, yaw).colwise() + center;
  if (!(corners.row(2).minCoeff() > 0)) {
    throw BehindCameraError("box has a corner at or behind the camera plane");
  }
  Eigen::Matrix<double, 1, 8> u, v;
  for (int k = 0; k < 8; ++k) {
    u[k] = K.fu * corners(0, k) / corners(2, k) + K.pu;
    v[k] = K.fv * corners(1, k) / corners(2, k) + K.pv;
  }
  Eigen::Index umin, umax, vmin, vmax;
  u.minCoeff(&umin);
  u.maxCoeff(&umax);
  v.minCoeff(&vmin);
  v.maxCoeff(&vmax);

  auto du_dc = [&](Eigen::Index k) {
    const double z = corners(2, k);
    return Eigen::Vector3d(K.fu / z, 0.0, -K.fu * corners(0, k) / (z * z));
  };
  auto dv_dc = [&](Eigen::Index k) {
    const double z = corners(2, k);
    return Eigen::Vector3d(0.0, K.fv / z, -K.fv * corners(1, k) / (z * z));
  };

  ProjectionObjective out;
  out.projected = Box2Dd::from_extents(u[umin], v[vmin], u[umax], v[vmax]);
  double slope = 0;
  out.value += penalty(u[umin] - target.left(), smoothing, &slope);
  out.gradient += slope * du_dc(umin);
  out.value += penalty(v[vmin] - target.top(), smoothing, &slope);
  out.gradient += slope * dv_dc(vmin);
  out.value += penalty(u[umax] - target.right(), smoothing, &slope);
  out.gradient += slope * du_dc(umax);
  out.value += penalty(v[vmax] - target.bottom(), smoothing, &slope);
  out.gradient += slope * dv_dc(vmax);
  return out;
}

FitReport fit_min_proj_err(const Box2Dd& gt2d, double yaw, const ClassPrior& prior,
                           const CameraIntrinsicsd& K, const Point3d& init,
                           const FitConfig& cfg) {
  cfg.validate();
  if (!(gt2d.h > 0) || !(gt2d.w > 0)) throw std::domain_error("target 2D box is degenerate");
  if (!(init.z() > 0)) throw std::domain_error("initial center must be in front of the camera");
  const BoxSized& size = prior.size;

  Point3d c = init;
  c.z() = std::max(c.z(), cfg.min_depth);
  double l1 = min_proj_objective(c, gt2d, yaw, size, K).value;

  FitReport report;
  report.history.push_back(l1);
  double smoothing = std::clamp(l1 / 8.0, 1e-3, 10.0);
  double step = cfg.initial_step;
  bool done = l1 < kExactObjective;

  while (!done && report.iterations < cfg.max_iters) {
    ++report.iterations;
    const ProjectionObjective here = min_proj_objective(c, gt2d, yaw, size, K, smoothing);
    const Eigen::Matrix3d j = center_jacobian(c, size.height, K);
    const Eigen::Vector3d dir = -(j * (j.transpose() * here.gradient));
    const double dir_norm = dir.norm();

    bool moved = false;
    double displacement = 0;
    if (dir_norm > 0) {
      const Eigen::Vector3d unit = dir / dir_norm;
      for (double t = step; t >= kMinTrialStep; t *= 0.5) {
        Point3d trial = c + t * unit;
        trial.z() = std::max(trial.z(), cfg.min_depth);
        const double smoothed = safe_value(trial, gt2d, yaw, size, K, smoothing);
        if (smoothed > here.value + cfg.armijo * here.gradient.dot(trial - c)) continue;
        const double trial_l1 = safe_value(trial, gt2d, yaw, size, K, 0.0);
        if (trial_l1 > l1) continue;
        displacement = (trial - c).norm();
        c = trial;
        l1 = trial_l1;
        report.history.push_back(l1);
        step = std::min(2.0 * t, 0.5 * c.z());
        moved = true;
        break;
      }
    }

    if (l1 < kExactObjective) {
      done = true;
    } else if (!moved || displacement < cfg.tolerance) {
      if (smoothing <= kFinalSmoothing) {
        done = true;
      } else {
        smoothing = std::max(smoothing * 0.1, kFinalSmoothing);
        step = std::max(step, 10.0 * cfg.tolerance);
      }
    }
  }

  report.converged = done;
  report.objective = l1;
  report.box = make_box(c, yaw, size);
  return report;
}

FitReport fit_geogl(const Box2Dd& gt2d, const Orientation& orientation, const ClassPrior& prior,
                    const CameraIntrinsicsd& K, const FitConfig& cfg) {
  cfg.validate();
  const double yaw = std::visit(
      [&](const auto& o) -> double {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Yaw>) {
          return normalize_angle(o.value);
        } else {
          return teacher_yaw(o.value, gt2d.u, K, o.convention);
        }
      },
      orientation);

  FitReport report;
  report.box = make_box(pseudo_location(gt2d, prior, K), yaw, prior.size);
  report.history.push_back(safe_value(report.box.center, gt2d, yaw, prior.size, K, 0.0));
  for (int it = 0; it < cfg.max_iters; ++it) {
    const FirstOrderDelta step = first_order_delta(report.box, gt2d, prior, K);
    if (step.delta.norm() < cfg.tolerance) {
      report.converged = true;
      break;
    }
    ++report.iterations;
    report.box.center += step.delta;
    report.box.center.z() = std::max(report.box.center.z(), cfg.min_depth);
    report.history.push_back(safe_value(report.box.center, gt2d, yaw, prior.size, K, 0.0));
  }
  report.objective = report.history.back();
  return report;
}

GradCheckResult grad_check(const DifferentiableObjective& objective, const Eigen::VectorXd& params,
                           double step) {
  if (!(step > 0)) throw std::invalid_argument("finite-difference step must be positive");
  GradCheckResult out;
  out.analytic = Eigen::VectorXd::Zero(params.size());
  objective(params, &out.analytic);
  out.numeric.resize(params.size());
  Eigen::VectorXd x = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    x[i] = params[i] + step;
    const double fp = objective(x, nullptr);
    x[i] = params[i] - step;
    const double fm = objective(x, nullptr);
    x[i] = params[i];
    out.numeric[i] = (fp - fm) / (2.0 * step);
    const double scale =
        std::max({std::abs(out.analytic[i]), std::abs(out.numeric[i]), 1.0});
    out.max_deviation = std::max(out.max_deviation, std::abs(out.analytic[i] - out.numeric[i]) / scale);
  }
  return out;
}

}  // namespace monogeo
