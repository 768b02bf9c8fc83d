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

#include "monogeo/weak_supervision.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace monogeo {

void PriorTable::add(ClassPrior prior) {
  if (!prior.size.positive()) {
    throw std::domain_error("prior size for '" + prior.name + "' must be positive");
  }
  std::string key = prior.name;
  priors_.insert_or_assign(std::move(key), std::move(prior));
}

const ClassPrior& PriorTable::at(const std::string& name) const {
  if (const ClassPrior* p = find(name)) return *p;
  throw std::out_of_range("no prior size for class '" + name + "'");
}

const ClassPrior* PriorTable::find(const std::string& name) const {
  auto it = priors_.find(name);
  return it == priors_.end() ? nullptr : &it->second;
}

PriorTable parse_priors_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (!doc.is_object()) throw std::invalid_argument("priors must be a JSON object");
  PriorTable table;
  for (const auto& [name, value] : doc.items()) {
    BoxSized size;
    if (value.is_array()) {
      if (value.size() != 3) {
        throw std::invalid_argument("prior for '" + name + "' needs [length, width, height]");
      }
      size = {value[0].get<double>(), value[1].get<double>(), value[2].get<double>()};
    } else if (value.is_object()) {
      size = {value.at("length").get<double>(), value.at("width").get<double>(),
              value.at("height").get<double>()};
    } else {
      throw std::invalid_argument("prior for '" + name + "' has an unsupported form");
    }
    table.add({name, size});
  }
  return table;
}

PriorTable load_priors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open priors file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_priors_json(buf.str());
}

double pseudo_depth(const Box2Dd& box, const ClassPrior& prior, const CameraIntrinsicsd& K) {
  if (!(box.h > 0)) throw std::domain_error("pseudo depth needs a positive 2D box height");
  return K.fv * prior.size.height / box.h;
}

double pseudo_depth_derivative(double h_2d, const ClassPrior& prior, const CameraIntrinsicsd& K) {
  if (!(h_2d > 0)) throw std::domain_error("pseudo depth needs a positive 2D box height");
  return -K.fv * prior.size.height / (h_2d * h_2d);
}

Point3d pseudo_location(const Box2Dd& box, const ClassPrior& prior, const CameraIntrinsicsd& K) {
  return backproject(pseudo_center(box), pseudo_depth(box, prior, K), K);
}

FirstOrderDelta first_order_delta(const Box3Dd& estimate, const Box2Dd& gt2d,
                                  const ClassPrior& prior, const CameraIntrinsicsd& K) {
  FirstOrderDelta out;
  out.projected = box3d_to_box2d(estimate, K);
  if (!(out.projected.h > 0)) {
    throw std::domain_error("estimate projects to a box with zero height");
  }
  out.residual = {gt2d.w - out.projected.w, gt2d.h - out.projected.h, gt2d.u - out.projected.u,
                  gt2d.v - out.projected.v};
  const double z = estimate.center.z();
  out.delta << z / K.fu * out.residual.u, z / K.fv * out.residual.v,
      pseudo_depth_derivative(out.projected.h, prior, K) * out.residual.h;
  return out;
}

void AccelConfig::validate() const {
  if (!(alpha >= 0)) throw std::domain_error("acceleration threshold must be >= 0");
  if (!(beta > 0)) throw std::domain_error("acceleration clip must be > 0");
}

AccelLoss acceleration_loss(std::span<const Track> tracks, const AccelConfig& cfg) {
  cfg.validate();
  AccelLoss out;
  out.gradients.reserve(tracks.size());
  for (const Track& track : tracks) {
    const std::size_t n = track.times.size();
    if (track.centers.size() != n) {
      throw std::invalid_argument("track has mismatched times and centers");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (!(track.times[i] > track.times[i - 1])) {
        throw std::domain_error("track timestamps must be strictly increasing");
      }
    }
    Eigen::Matrix3Xd grad = Eigen::Matrix3Xd::Zero(3, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i + 2 < n; ++i) {
      const double dt0 = track.times[i] - track.times[i + 1];
      const double dt1 = track.times[i + 1] - track.times[i + 2];
      const Eigen::Vector3d v0 = (track.centers[i] - track.centers[i + 1]) / dt0;
      const Eigen::Vector3d v1 = (track.centers[i + 1] - track.centers[i + 2]) / dt1;
      const Eigen::Vector3d a = (v0 - v1) / dt0;
      const double mag = cfg.norm == AccelNorm::kEuclidean ? a.norm() : a.lpNorm<1>();
      const double excess = mag - cfg.alpha;
      if (excess <= 0) continue;
      out.value += std::min(excess, cfg.beta);
      if (excess >= cfg.beta) continue;  // flat beyond the clip
      Eigen::Vector3d dmag_da;
      if (cfg.norm == AccelNorm::kEuclidean) {
        dmag_da = a / mag;
      } else {
        dmag_da = a.unaryExpr([](double x) { return double((x > 0) - (x < 0)); });
      }
      grad.col(static_cast<Eigen::Index>(i)) += dmag_da / (dt0 * dt0);
      grad.col(static_cast<Eigen::Index>(i + 1)) += dmag_da * (-1.0 / dt0 - 1.0 / dt1) / dt0;
      grad.col(static_cast<Eigen::Index>(i + 2)) += dmag_da / (dt0 * dt1);
    }
    out.gradients.push_back(std::move(grad));
  }
  return out;
}

double teacher_yaw(double phi, double u_b, const CameraIntrinsicsd& K,
                   AngleConvention convention) {
  if (convention == AngleConvention::kDirect) return view_angle_to_yaw(phi, u_b, K);
  return normalize_angle(-view_angle_to_yaw(-phi, u_b, K));
}

LocalCornersd corners_from_teacher(double phi, const Box2Dd& box, const ClassPrior& prior,
                                   const CameraIntrinsicsd& K, AngleConvention convention) {
  return corners_from_pose(prior.size, teacher_yaw(phi, box.u, K, convention));
}

double rescale_depth(double depth, double true_height, double prior_height, double true_fv,
                     double assumed_fv) {
  if (!(true_height > 0) || !(prior_height > 0) || !(true_fv > 0) || !(assumed_fv > 0)) {
    throw std::domain_error("rescale_depth needs positive heights and focal lengths");
  }
  return depth * (true_height / prior_height) * (true_fv / assumed_fv);
}

CameraIntrinsicsd default_intrinsics(double image_w, double image_h) {
  if (!(image_w > 0) || !(image_h > 0)) throw std::domain_error("image size must be positive");
  const double f = 0.8 * image_w;
  return {f, f, image_w / 2.0, image_h / 2.0};
}

IdentityCorrespondence::IdentityCorrespondence(std::vector<std::vector<int>> ids_per_frame)
    : ids_(std::move(ids_per_frame)) {}

std::optional<std::size_t> IdentityCorrespondence::match(std::size_t from, std::size_t object,
                                                         std::size_t to) const {
  if (from >= ids_.size() || to >= ids_.size() || object >= ids_[from].size()) return std::nullopt;
  const int id = ids_[from][object];
  for (std::size_t k = 0; k < ids_[to].size(); ++k) {
    if (ids_[to][k] == id) return k;
  }
  return std::nullopt;
}

std::vector<Track> build_tracks(std::span<const double> times,
                                std::span<const std::vector<Point3d>> centers,
                                const CorrespondenceProvider& provider) {
  if (times.size() != centers.size()) {
    throw std::invalid_argument("build_tracks: one time per frame required");
  }
  std::vector<Track> tracks;
  if (times.empty()) return tracks;
  for (std::size_t k = 0; k < centers[0].size(); ++k) {
    Track t;
    t.id = static_cast<int>(k);
    t.times.push_back(times[0]);
    t.centers.push_back(centers[0][k]);
    std::size_t obj = k;
    for (std::size_t f = 1; f < times.size(); ++f) {
      const auto next = provider.match(f - 1, obj, f);
      if (!next || *next >= centers[f].size()) break;
      obj = *next;
      t.times.push_back(times[f]);
      t.centers.push_back(centers[f][obj]);
    }
    tracks.push_back(std::move(t));
  }
  return tracks;
}

}  // namespace monogeo
