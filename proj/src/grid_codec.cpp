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

#include "monogeo/grid_codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace monogeo {

GridSpec::GridSpec(int cols_, int rows_, double image_w_, double image_h_)
    : cols(cols_), rows(rows_), image_w(image_w_), image_h(image_h_) {
  if (cols < 1 || rows < 1) throw std::invalid_argument("grid needs at least one cell");
  if (!(image_w > 0) || !(image_h > 0)) throw std::invalid_argument("image size must be positive");
}

Pixeld GridSpec::cell_center(int index) const {
  if (index < 0 || index >= num_cells()) throw std::out_of_range("cell index out of range");
  const int i = index % cols;
  const int j = index / cols;
  return {(i + 0.5) * stride_u(), (j + 0.5) * stride_v()};
}

int GridSpec::cell_of_pixel(double u, double v) const {
  const int i = std::clamp(static_cast<int>(std::floor(u / stride_u())), 0, cols - 1);
  const int j = std::clamp(static_cast<int>(std::floor(v / stride_v())), 0, rows - 1);
  return cell_index(i, j);
}

double default_sigma_scope(const GridSpec& grid) {
  return 2.0 * std::hypot(grid.stride_u(), grid.stride_v());
}

Assignment assign(std::span<const GridObject> objects, const GridSpec& grid, double sigma_scope) {
  if (!(sigma_scope > 0)) throw std::domain_error("sigma_scope must be positive");
  Assignment out;
  out.owner.assign(grid.num_cells(), std::nullopt);
  for (int cell = 0; cell < grid.num_cells(); ++cell) {
    const Pixeld g = grid.cell_center(cell);
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < objects.size(); ++k) {
      if ((objects[k].box.center() - g).norm() >= sigma_scope) continue;
      if (!best || objects[k].depth < objects[*best].depth) best = k;
    }
    if (best) {
      out.owner[cell] = best;
      out.foreground.push_back(cell);
    }
  }
  return out;
}

CellTarget background_target(int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("need background plus at least one class");
  CellTarget t;
  t.class_probs = Eigen::VectorXd::Zero(num_classes);
  t.class_probs[0] = 1.0;
  return t;
}

CellTarget encode(const ObjectTarget& object, const Pixeld& cell_center, int num_classes) {
  if (object.class_index < 1 || object.class_index >= num_classes) {
    throw std::invalid_argument("object class index outside [1, num_classes)");
  }
  CellTarget t;
  t.class_probs = Eigen::VectorXd::Zero(num_classes);
  t.class_probs[object.class_index] = 1.0;
  t.w = object.box.w;
  t.h = object.box.h;
  t.du_b = object.box.u - cell_center.x();
  t.dv_b = object.box.v - cell_center.y();
  t.depth = object.depth;
  t.du_c = object.projected_center.x() - cell_center.x();
  t.dv_c = object.projected_center.y() - cell_center.y();
  t.corners = object.corners;
  t.delta_center = object.delta_center;
  t.delta_corners = object.delta_corners;
  t.foreground = true;
  return t;
}

Box3Dd decode(const CellTarget& target, const Pixeld& cell_center, const CameraIntrinsicsd& K) {
  if (!target.foreground) throw std::invalid_argument("cannot decode a background cell");
  const Pixeld c = cell_center + Pixeld(target.du_c, target.dv_c);
  Box3Dd box;
  box.center = backproject(c, target.depth, K) + target.delta_center;
  const auto [size, yaw] = pose_from_corners<double>(target.corners + target.delta_corners);
  box.size = size;
  box.yaw = yaw;
  if (target.class_probs.size() > 1) {
    Eigen::Index best = 0;
    box.score = target.class_probs.tail(target.class_probs.size() - 1).maxCoeff(&best);
    box.class_id = static_cast<int>(best) + 1;
  }
  return box;
}

std::vector<CellTarget> build_targets(std::span<const ObjectTarget> objects, const GridSpec& grid,
                                      double sigma_scope, int num_classes) {
  std::vector<GridObject> placed;
  placed.reserve(objects.size());
  for (const auto& o : objects) placed.push_back({o.box, o.depth});
  const Assignment a = assign(placed, grid, sigma_scope);
  std::vector<CellTarget> cells;
  cells.reserve(grid.num_cells());
  for (int cell = 0; cell < grid.num_cells(); ++cell) {
    if (a.owner[cell]) {
      cells.push_back(encode(objects[*a.owner[cell]], grid.cell_center(cell), num_classes));
    } else {
      cells.push_back(background_target(num_classes));
    }
  }
  return cells;
}

CellMatrices pack(std::span<const CellTarget> cells) {
  const Eigen::Index n = static_cast<Eigen::Index>(cells.size());
  const Eigen::Index classes = n > 0 ? cells.front().class_probs.size() : 0;
  CellMatrices m;
  m.class_probs.resize(n, classes);
  m.box2d.resize(n, 4);
  m.depth.resize(n, 1);
  m.center.resize(n, 2);
  m.corners.resize(n, 24);
  m.delta_center.resize(n, 3);
  m.delta_corners.resize(n, 24);
  m.foreground.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const CellTarget& c = cells[i];
    if (c.class_probs.size() != classes) throw std::invalid_argument("inconsistent class counts");
    m.class_probs.row(i) = c.class_probs.transpose();
    m.box2d.row(i) << c.w, c.h, c.du_b, c.dv_b;
    m.depth(i, 0) = c.depth;
    m.center.row(i) << c.du_c, c.dv_c;
    m.corners.row(i) = c.corners.reshaped().transpose();
    m.delta_center.row(i) = c.delta_center.transpose();
    m.delta_corners.row(i) = c.delta_corners.reshaped().transpose();
    m.foreground[i] = c.foreground;
  }
  return m;
}

}  // namespace monogeo
