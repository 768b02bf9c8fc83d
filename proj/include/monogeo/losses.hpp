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

// Detection losses over an image grid, each returning its value together with
// the gradient with respect to the predicted quantities.
//
// Inputs are matrices with one row per grid cell. Regression losses only
// count foreground rows. Accumulation runs in ascending cell order so results
// are bit-reproducible.

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "monogeo/grid_codec.hpp"

namespace monogeo {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using FgMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

template <typename Scalar>
struct LossValue {
  Scalar value{0};
  MatrixX<Scalar> gradient;
};

/// Lower clamp applied to probabilities inside the log.
inline constexpr double kMinProbability = 1e-12;

namespace detail {

template <typename DP, typename DT>
void check_shapes(const Eigen::MatrixBase<DP>& pred, const Eigen::MatrixBase<DT>& target,
                  const FgMask& fg, Eigen::Index cols, const char* what) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument(std::string(what) + ": prediction/target shape mismatch");
  }
  if (cols > 0 && pred.cols() != cols) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(cols) +
                                " columns");
  }
  if (fg.size() != pred.rows()) {
    throw std::invalid_argument(std::string(what) + ": foreground mask size mismatch");
  }
}

template <typename Scalar>
Scalar sign0(Scalar x) {
  return Scalar((x > Scalar(0)) - (x < Scalar(0)));
}

}  // namespace detail

/// Sum over foreground rows of the component-wise L1 distance. The
/// subgradient at a zero residual is 0.
template <typename DP, typename DT>
LossValue<typename DP::Scalar> masked_l1(const Eigen::MatrixBase<DP>& pred,
                                         const Eigen::MatrixBase<DT>& target, const FgMask& fg,
                                         Eigen::Index expected_cols = -1,
                                         const char* what = "masked_l1") {
  using Scalar = typename DP::Scalar;
  detail::check_shapes(pred, target, fg, expected_cols, what);
  LossValue<Scalar> out;
  out.gradient = MatrixX<Scalar>::Zero(pred.rows(), pred.cols());
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    if (!fg[i]) continue;
    for (Eigen::Index j = 0; j < pred.cols(); ++j) {
      const Scalar d = pred(i, j) - target(i, j);
      out.value += std::abs(d);
      out.gradient(i, j) = detail::sign0(d);
    }
  }
  return out;
}

/// Cross entropy summed over every cell, background included. Gradient is
/// with respect to the probabilities; entries below the clamp get zero
/// gradient.
template <typename DP, typename DT>
LossValue<typename DP::Scalar> loss_class(const Eigen::MatrixBase<DP>& probs,
                                          const Eigen::MatrixBase<DT>& targets) {
  using Scalar = typename DP::Scalar;
  if (probs.rows() != targets.rows() || probs.cols() != targets.cols()) {
    throw std::invalid_argument("loss_class: shape mismatch");
  }
  const Scalar floor = Scalar(kMinProbability);
  LossValue<Scalar> out;
  out.gradient = MatrixX<Scalar>::Zero(probs.rows(), probs.cols());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      const Scalar t = targets(i, j);
      if (t == Scalar(0)) continue;
      const Scalar p = std::clamp(probs(i, j), floor, Scalar(1));
      out.value -= t * std::log(p);
      if (probs(i, j) >= floor && probs(i, j) <= Scalar(1)) out.gradient(i, j) = -t / p;
    }
  }
  return out;
}

/// Row-wise softmax.
template <typename D>
MatrixX<typename D::Scalar> softmax_rows(const Eigen::MatrixBase<D>& logits) {
  using Scalar = typename D::Scalar;
  MatrixX<Scalar> p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const auto shifted = (logits.row(i).array() - logits.row(i).maxCoeff()).exp();
    p.row(i) = (shifted / shifted.sum()).matrix();
  }
  return p;
}

/// Softmax cross entropy from logits. Gradient w.r.t. the logits is
/// softmax(z) * sum(t) - t per row.
template <typename DP, typename DT>
LossValue<typename DP::Scalar> loss_class_logits(const Eigen::MatrixBase<DP>& logits,
                                                 const Eigen::MatrixBase<DT>& targets) {
  using Scalar = typename DP::Scalar;
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw std::invalid_argument("loss_class_logits: shape mismatch");
  }
  LossValue<Scalar> out;
  out.gradient = MatrixX<Scalar>::Zero(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Scalar m = logits.row(i).maxCoeff();
    const Scalar log_z = m + std::log((logits.row(i).array() - m).exp().sum());
    const Scalar mass = targets.row(i).sum();
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      out.value -= targets(i, j) * (logits(i, j) - log_z);
      out.gradient(i, j) = std::exp(logits(i, j) - log_z) * mass - targets(i, j);
    }
  }
  return out;
}

/// (w, h, du_b, dv_b) per cell.
template <typename DP, typename DT>
LossValue<typename DP::Scalar> loss_box2d(const Eigen::MatrixBase<DP>& pred,
                                          const Eigen::MatrixBase<DT>& target, const FgMask& fg) {
  return masked_l1(pred, target, fg, 4, "loss_box2d");
}

template <typename DP, typename DT>
LossValue<typename DP::Scalar> loss_depth(const Eigen::MatrixBase<DP>& pred,
                                          const Eigen::MatrixBase<DT>& target, const FgMask& fg) {
  return masked_l1(pred, target, fg, 1, "loss_depth");
}

/// Projected-center residuals (du_c, dv_c).
template <typename DP, typename DT>
LossValue<typename DP::Scalar> loss_center(const Eigen::MatrixBase<DP>& pred,
                                           const Eigen::MatrixBase<DT>& target, const FgMask& fg) {
  return masked_l1(pred, target, fg, 2, "loss_center");
}

/// Eight corners flattened to 24 columns.
template <typename DP, typename DT>
LossValue<typename DP::Scalar> loss_corners(const Eigen::MatrixBase<DP>& pred,
                                            const Eigen::MatrixBase<DT>& target, const FgMask& fg) {
  return masked_l1(pred, target, fg, 24, "loss_corners");
}

/// Refinement of the center. The target is the residual C_gt - C under full
/// supervision or the first-order pseudo residual under weak supervision; it
/// is treated as a constant.
template <typename DP, typename DT>
LossValue<typename DP::Scalar> loss_refine_center(const Eigen::MatrixBase<DP>& pred,
                                                  const Eigen::MatrixBase<DT>& target,
                                                  const FgMask& fg) {
  return masked_l1(pred, target, fg, 3, "loss_refine_center");
}

template <typename DP, typename DT>
LossValue<typename DP::Scalar> loss_refine_corners(const Eigen::MatrixBase<DP>& pred,
                                                   const Eigen::MatrixBase<DT>& target,
                                                   const FgMask& fg) {
  return masked_l1(pred, target, fg, 24, "loss_refine_corners");
}

/// Per-term multipliers. All 1 by default.
struct LossWeights {
  double cls{1};
  double box2d{1};
  double depth{1};
  double center{1};
  double corners{1};
  double refine_center{1};
  double refine_corners{1};
  double acceleration{1};
};

struct LossBreakdown {
  double cls{0};
  double box2d{0};
  double depth{0};
  double center{0};
  double corners{0};
  double refine_center{0};
  double refine_corners{0};
  double acceleration{0};
  double total{0};
};

/// Fills in the weighted total. Throws if any component is negative.
inline LossBreakdown loss_total(LossBreakdown parts, const LossWeights& w = {}) {
  const double terms[] = {parts.cls,     parts.box2d,         parts.depth,
                          parts.center,  parts.corners,       parts.refine_center,
                          parts.refine_corners, parts.acceleration};
  for (double t : terms) {
    if (!(t >= 0)) throw std::domain_error("loss components must be non-negative");
  }
  parts.total = w.cls * parts.cls + w.box2d * parts.box2d + w.depth * parts.depth +
                w.center * parts.center + w.corners * parts.corners +
                w.refine_center * parts.refine_center + w.refine_corners * parts.refine_corners +
                w.acceleration * parts.acceleration;
  return parts;
}

/// All grid losses for one frame. The foreground set comes from the target;
/// target.delta_center / delta_corners hold the refinement targets.
inline LossBreakdown frame_losses(const CellMatrices& pred, const CellMatrices& target,
                                  double acceleration = 0.0, const LossWeights& w = {}) {
  const FgMask& fg = target.foreground;
  LossBreakdown parts;
  parts.cls = loss_class(pred.class_probs, target.class_probs).value;
  parts.box2d = loss_box2d(pred.box2d, target.box2d, fg).value;
  parts.depth = loss_depth(pred.depth, target.depth, fg).value;
  parts.center = loss_center(pred.center, target.center, fg).value;
  parts.corners = loss_corners(pred.corners, target.corners, fg).value;
  parts.refine_center = loss_refine_center(pred.delta_center, target.delta_center, fg).value;
  parts.refine_corners = loss_refine_corners(pred.delta_corners, target.delta_corners, fg).value;
  parts.acceleration = acceleration;
  return loss_total(parts, w);
}

}  // namespace monogeo
