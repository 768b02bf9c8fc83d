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

#include "monogeo/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "monogeo/fitters.hpp"
#include "monogeo/losses.hpp"
#include "monogeo/weak_supervision.hpp"

namespace monogeo {
namespace {

constexpr double kMargin = 0.05;

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Residual with magnitude in [margin, 1] and random sign.
double offset(Rng& rng) {
  const double m = uniform(rng, kMargin, 1.0);
  return rng() % 2 ? m : -m;
}

FgMask random_mask(Rng& rng, Eigen::Index rows) {
  FgMask fg(rows);
  for (Eigen::Index i = 0; i < rows; ++i) fg[i] = rng() % 2 == 0;
  fg[rng() % rows] = true;
  return fg;
}

Eigen::VectorXd flat(const Eigen::MatrixXd& m) { return m.reshaped(); }

template <typename Loss>
GradCheckEntry check_l1(const std::string& name, Loss loss, Eigen::Index cols, Rng& rng,
                        std::size_t points, double step) {
  GradCheckEntry e{name, points, 0.0};
  for (std::size_t p = 0; p < points; ++p) {
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(rng() % 6);
    Eigen::MatrixXd target(rows, cols);
    Eigen::MatrixXd pred(rows, cols);
    for (Eigen::Index i = 0; i < target.size(); ++i) {
      target(i) = uniform(rng, -5, 5);
      pred(i) = target(i) + offset(rng);
    }
    const FgMask fg = random_mask(rng, rows);
    const DifferentiableObjective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      const Eigen::MatrixXd m = x.reshaped(rows, cols);
      const auto r = loss(m, target, fg);
      if (g) *g = flat(r.gradient);
      return r.value;
    };
    e.max_deviation = std::max(e.max_deviation, grad_check(f, flat(pred), step).max_deviation);
  }
  return e;
}

GradCheckEntry check_class_probs(Rng& rng, std::size_t points, double step) {
  GradCheckEntry e{"loss_class", points, 0.0};
  for (std::size_t p = 0; p < points; ++p) {
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(rng() % 6);
    const Eigen::Index cols = 2 + static_cast<Eigen::Index>(rng() % 3);
    Eigen::MatrixXd probs(rows, cols);
    Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) probs(i, j) = uniform(rng, 0.2, 1.0);
      probs.row(i) /= probs.row(i).sum();
      targets(i, static_cast<Eigen::Index>(rng() % cols)) = 1;
    }
    const DifferentiableObjective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      const auto r = loss_class(Eigen::MatrixXd(x.reshaped(rows, cols)), targets);
      if (g) *g = flat(r.gradient);
      return r.value;
    };
    e.max_deviation = std::max(e.max_deviation, grad_check(f, flat(probs), step).max_deviation);
  }
  return e;
}

GradCheckEntry check_class_logits(Rng& rng, std::size_t points, double step) {
  GradCheckEntry e{"loss_class_logits", points, 0.0};
  for (std::size_t p = 0; p < points; ++p) {
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(rng() % 6);
    const Eigen::Index cols = 2 + static_cast<Eigen::Index>(rng() % 3);
    Eigen::MatrixXd logits(rows, cols);
    Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) logits(i, j) = uniform(rng, -4, 4);
      targets(i, static_cast<Eigen::Index>(rng() % cols)) = 1;
    }
    const DifferentiableObjective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      const auto r = loss_class_logits(Eigen::MatrixXd(x.reshaped(rows, cols)), targets);
      if (g) *g = flat(r.gradient);
      return r.value;
    };
    e.max_deviation = std::max(e.max_deviation, grad_check(f, flat(logits), step).max_deviation);
  }
  return e;
}

GradCheckEntry check_pseudo_depth(Rng& rng, std::size_t points, double step) {
  GradCheckEntry e{"pseudo_depth", points, 0.0};
  for (std::size_t p = 0; p < points; ++p) {
    const CameraIntrinsicsd K(uniform(rng, 400, 1000), uniform(rng, 400, 1000), 600, 180);
    const ClassPrior prior{"x", {4, 1.6, uniform(rng, 0.5, 3.5)}};
    Box2Dd box{50, uniform(rng, 10, 200), 600, 180};
    const DifferentiableObjective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      Box2Dd b = box;
      b.h = x[0];
      if (g) *g = Eigen::VectorXd::Constant(1, pseudo_depth_derivative(x[0], prior, K));
      return pseudo_depth(b, prior, K);
    };
    e.max_deviation = std::max(
        e.max_deviation, grad_check(f, Eigen::VectorXd::Constant(1, box.h), step).max_deviation);
  }
  return e;
}

// Every acceleration term must be away from zero, alpha and alpha + beta so
// the clip and the norm are smooth around the point.
bool accel_smooth(const Track& t, const AccelConfig& cfg) {
  for (std::size_t n = 0; n + 2 < t.times.size(); ++n) {
    const double dt0 = t.times[n] - t.times[n + 1];
    const double dt1 = t.times[n + 1] - t.times[n + 2];
    const Eigen::Vector3d v0 = (t.centers[n] - t.centers[n + 1]) / dt0;
    const Eigen::Vector3d v1 = (t.centers[n + 1] - t.centers[n + 2]) / dt1;
    const Eigen::Vector3d a = (v0 - v1) / dt0;
    const double mag = cfg.norm == AccelNorm::kEuclidean ? a.norm() : a.lpNorm<1>();
    if (cfg.norm == AccelNorm::kL1 && a.cwiseAbs().minCoeff() < kMargin) return false;
    if (mag < kMargin || std::abs(mag - cfg.alpha) < kMargin ||
        std::abs(mag - cfg.alpha - cfg.beta) < kMargin) {
      return false;
    }
  }
  return true;
}

GradCheckEntry check_acceleration(Rng& rng, std::size_t points, double step, AccelNorm norm) {
  AccelConfig cfg;
  cfg.norm = norm;
  GradCheckEntry e{norm == AccelNorm::kEuclidean ? "acceleration_loss" : "acceleration_loss_l1",
                   points, 0.0};
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<Track> tracks(1 + rng() % 2);
    for (Track& t : tracks) {
      do {
        const std::size_t n = 3 + rng() % 4;
        t.times.assign(1, 0.0);
        t.centers.assign(
            1, Point3d(uniform(rng, -10, 10), uniform(rng, -10, 10), uniform(rng, -10, 10)));
        for (std::size_t k = 1; k < n; ++k) {
          t.times.push_back(t.times.back() + uniform(rng, 0.5, 1.5));
          Eigen::Vector3d c;
          for (int d = 0; d < 3; ++d) c[d] = t.centers.back()[d] + uniform(rng, -2, 2);
          t.centers.push_back(c);
        }
      } while (!accel_smooth(t, cfg));
    }
    Eigen::VectorXd params(0);
    for (const Track& t : tracks) {
      const Eigen::Index old = params.size();
      params.conservativeResize(old + 3 * static_cast<Eigen::Index>(t.centers.size()));
      for (std::size_t k = 0; k < t.centers.size(); ++k) params.segment<3>(old + 3 * k) = t.centers[k];
    }
    const DifferentiableObjective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      std::vector<Track> moved = tracks;
      Eigen::Index at = 0;
      for (Track& t : moved) {
        for (Point3d& c : t.centers) {
          c = x.segment<3>(at);
          at += 3;
        }
      }
      const AccelLoss r = acceleration_loss(moved, cfg);
      if (g) {
        g->resize(x.size());
        at = 0;
        for (const Eigen::Matrix3Xd& m : r.gradients) {
          g->segment(at, m.size()) = m.reshaped();
          at += m.size();
        }
      }
      return r.value;
    };
    e.max_deviation = std::max(e.max_deviation, grad_check(f, params, step).max_deviation);
  }
  return e;
}

// Second smallest minus smallest.
template <int N>
double gap(Eigen::Matrix<double, 1, N> row) {
  std::sort(row.begin(), row.end());
  return row[1] - row[0];
}

bool proj_smooth(const Point3d& c, const Box2Dd& target, double yaw, const BoxSized& size,
                 const CameraIntrinsicsd& K) {
  const LocalCornersd corners = corners_from_pose(size, yaw).colwise() + c;
  Eigen::Matrix<double, 1, 8> u, v;
  for (int k = 0; k < 8; ++k) {
    u[k] = K.fu * corners(0, k) / corners(2, k) + K.pu;
    v[k] = K.fv * corners(1, k) / corners(2, k) + K.pv;
  }
  // Top and bottom corners of a vertical edge share u; compare edges only.
  const Eigen::Matrix<double, 1, 4> edges(u[0], u[1], u[4], u[5]);
  if (gap<4>(edges) < kMargin || gap<4>(-edges) < kMargin || gap<8>(v) < kMargin ||
      gap<8>(-v) < kMargin) {
    return false;
  }
  const Box2Dd b = Box2Dd::from_extents(u.minCoeff(), v.minCoeff(), u.maxCoeff(), v.maxCoeff());
  return std::abs(b.left() - target.left()) > kMargin && std::abs(b.top() - target.top()) > kMargin &&
         std::abs(b.right() - target.right()) > kMargin &&
         std::abs(b.bottom() - target.bottom()) > kMargin;
}

GradCheckEntry check_projection(Rng& rng, std::size_t points, double step, double smoothing) {
  GradCheckEntry e{smoothing > 0 ? "min_proj_objective_smoothed" : "min_proj_objective", points,
                   0.0};
  const CameraIntrinsicsd K(721.5377, 721.5377, 609.5593, 172.854);
  const BoxSized size{3.88, 1.63, 1.53};
  for (std::size_t p = 0; p < points; ++p) {
    Point3d c;
    Box2Dd target;
    double yaw = 0;
    do {
      yaw = uniform(rng, -3.14, 3.14);
      c = {uniform(rng, -8, 8), uniform(rng, 0.5, 1.5), uniform(rng, 8, 50)};
      Box3Dd truth;
      truth.center = c + Point3d(uniform(rng, -1, 1), uniform(rng, -0.3, 0.3), uniform(rng, -3, 3));
      truth.size = size;
      truth.yaw = yaw;
      target = box3d_to_box2d(truth, K);
    } while (!proj_smooth(c, target, yaw, size, K));
    const DifferentiableObjective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      const ProjectionObjective r = min_proj_objective(x, target, yaw, size, K, smoothing);
      if (g) *g = r.gradient;
      return r.value;
    };
    e.max_deviation = std::max(e.max_deviation, grad_check(f, c, step).max_deviation);
  }
  return e;
}

}  // namespace

std::vector<GradCheckEntry> gradcheck_battery(std::uint64_t seed, std::size_t points,
                                              double step) {
  Rng rng(seed);
  std::vector<GradCheckEntry> out;
  out.push_back(check_class_probs(rng, points, step));
  out.push_back(check_class_logits(rng, points, step));
  auto l1 = [&](const char* name, auto loss, Eigen::Index cols) {
    out.push_back(check_l1(name, loss, cols, rng, points, step));
  };
  using M = Eigen::MatrixXd;
  l1("loss_box2d", [](const M& p, const M& t, const FgMask& fg) { return loss_box2d(p, t, fg); }, 4);
  l1("loss_depth", [](const M& p, const M& t, const FgMask& fg) { return loss_depth(p, t, fg); }, 1);
  l1("loss_center", [](const M& p, const M& t, const FgMask& fg) { return loss_center(p, t, fg); },
     2);
  l1("loss_corners",
     [](const M& p, const M& t, const FgMask& fg) { return loss_corners(p, t, fg); }, 24);
  l1("loss_refine_center",
     [](const M& p, const M& t, const FgMask& fg) { return loss_refine_center(p, t, fg); }, 3);
  l1("loss_refine_corners",
     [](const M& p, const M& t, const FgMask& fg) { return loss_refine_corners(p, t, fg); }, 24);
  out.push_back(check_pseudo_depth(rng, points, step));
  out.push_back(check_acceleration(rng, points, step, AccelNorm::kEuclidean));
  out.push_back(check_acceleration(rng, points, step, AccelNorm::kL1));
  out.push_back(check_projection(rng, points, step, 0.0));
  out.push_back(check_projection(rng, points, step, 0.5));
  return out;
}

}  // namespace monogeo
