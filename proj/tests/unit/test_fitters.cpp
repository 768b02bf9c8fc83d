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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "monogeo/fitters.hpp"

using namespace monogeo;

namespace {

const CameraIntrinsicsd K(721.5377, 721.5377, 609.5593, 172.854);
const ClassPrior kCar{"Car", {3.88, 1.63, 1.53}};

Box3Dd car_at(const Point3d& c, double yaw, const BoxSized& size = kCar.size) {
  Box3Dd b;
  b.center = c;
  b.size = size;
  b.yaw = yaw;
  return b;
}

double residual_px(const Box3Dd& est, const Box2Dd& gt) {
  const FirstOrderDelta d = first_order_delta(est, gt, kCar, K);
  return std::max({std::abs(d.residual.u), std::abs(d.residual.v), std::abs(d.residual.h)});
}

}  // namespace

TEST_SUITE("fitters") {

TEST_CASE("minproj at the optimum does nothing") {
  const Box3Dd truth = car_at({2.0, 0.9, 18.0}, 0.6);
  const FitReport r = fit_min_proj_err(box3d_to_box2d(truth, K), truth.yaw, kCar, K, truth.center);
  CHECK(r.iterations == 0);
  CHECK(r.converged);
  CHECK(r.objective < 1e-9);
}

TEST_CASE("minproj recovers offset starts") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> x(-8, 8), z(8, 55), yaw(-3.1, 3.1);
  for (int i = 0; i < 40; ++i) {
    const Box3Dd truth = car_at({x(rng), 0.885, z(rng)}, yaw(rng));
    const FitReport r = fit_min_proj_err(box3d_to_box2d(truth, K), truth.yaw, kCar, K,
                                         truth.center + Point3d(1, 0.5, 3));
    CHECK((r.box.center - truth.center).norm() < 1e-2);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
  }
}

TEST_CASE("minproj errors and budget") {
  const Box3Dd truth = car_at({1.0, 0.9, 20.0}, 0.2);
  Box2Dd flat = box3d_to_box2d(truth, K);
  flat.h = 0;
  CHECK_THROWS_AS(fit_min_proj_err(flat, 0.2, kCar, K, truth.center), std::domain_error);
  CHECK_THROWS_AS(fit_min_proj_err(box3d_to_box2d(truth, K), 0.2, kCar, K, Point3d(0, 0, -1)),
                  std::domain_error);
  FitConfig one;
  one.max_iters = 1;
  const FitReport r = fit_min_proj_err(box3d_to_box2d(truth, K), 0.2, kCar, K,
                                       truth.center + Point3d(1, 0.5, 3), one);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
  FitConfig bad;
  bad.initial_step = 0;
  CHECK_THROWS(fit_min_proj_err(box3d_to_box2d(truth, K), 0.2, kCar, K, truth.center, bad));
}

TEST_CASE("minproj is deterministic") {
  const Box3Dd truth = car_at({-3.0, 0.9, 33.0}, -1.1);
  const Box2Dd gt = box3d_to_box2d(truth, K);
  const FitReport a = fit_min_proj_err(gt, truth.yaw, kCar, K, truth.center + Point3d(1, 0.5, 3));
  const FitReport b = fit_min_proj_err(gt, truth.yaw, kCar, K, truth.center + Point3d(1, 0.5, 3));
  CHECK(a.box.center == b.box.center);
  CHECK(a.history == b.history);
}

TEST_CASE("geogl with the true size converges to the truth") {
  const Box3Dd truth = car_at({0.8, 0.885, 20.0}, 0.0);
  const Box2Dd gt = box3d_to_box2d(truth, K);
  const FitReport r = fit_geogl(gt, Yaw{truth.yaw}, kCar, K);
  CHECK(r.converged);
  CHECK((r.box.center - truth.center).norm() < 1e-3);
}

TEST_CASE("geogl with a prior height 10 percent short") {
  const BoxSized tall{3.88, 1.63, 1.53 * 1.1};
  const Box3Dd truth = car_at({1.5, 0.8, 25.0}, 0.0, tall);
  // Height segment facing the camera, so the pseudo depth sees only the scale error.
  const double top = project(Point3d(1.5, 0.8 - tall.height / 2, 25.0), K).y();
  const double bottom = project(Point3d(1.5, 0.8 + tall.height / 2, 25.0), K).y();
  const Box2Dd segment{50, bottom - top, 650, 0.5 * (top + bottom)};
  const double z0 = pseudo_depth(segment, kCar, K);
  CHECK(std::abs(z0 - 25.0) / 25.0 == doctest::Approx(1 - 1 / 1.1).epsilon(1e-9));

  const Box2Dd gt = box3d_to_box2d(truth, K);
  const FitReport r = fit_geogl(gt, Yaw{0.0}, kCar, K);
  CHECK(r.converged);
  CHECK(residual_px(r.box, gt) < 0.5);
  // The scale error stays in the depth.
  CHECK(std::abs(r.box.center.z() - truth.center.z()) > 0.5);
}

TEST_CASE("geogl with zero iterations returns the pseudo label") {
  FitConfig zero;
  zero.max_iters = 0;
  const Box2Dd gt{80, 60, 700, 200};
  const FitReport r = fit_geogl(gt, ViewAngle{0.4, AngleConvention::kKitti}, kCar, K, zero);
  CHECK(r.iterations == 0);
  CHECK(r.box.center == pseudo_location(gt, kCar, K));
  CHECK(r.box.yaw == teacher_yaw(0.4, gt.u, K, AngleConvention::kKitti));
  CHECK(r.box.size == kCar.size);
}

TEST_CASE("grad_check") {
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(5, -2, 3);
  const DifferentiableObjective linear = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) *g = w;
    return w.dot(x);
  };
  CHECK(grad_check(linear, Eigen::VectorXd::Ones(5)).max_deviation < 1e-9);
  const DifferentiableObjective l1 = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) *g = x.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
    return x.lpNorm<1>();
  };
  Eigen::VectorXd p(4);
  p << 0.3, -1.2, 2.0, -0.05;
  CHECK(grad_check(l1, p).max_deviation < 1e-4);
  const DifferentiableObjective wrong = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) *g = Eigen::VectorXd::Zero(x.size());
    return x.squaredNorm();
  };
  CHECK(grad_check(wrong, p).max_deviation > 0.1);
  CHECK_THROWS(grad_check(linear, p, 0.0));
}

}  // TEST_SUITE
