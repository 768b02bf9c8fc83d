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

// Image grid partitioning and the per-cell regression parametrization.
//
// Each cell g = (u_g, v_g) regresses its 2D box and projected 3D center as
// residuals relative to g, an instance depth, eight local corners and a
// refinement (delta center, delta corners).

#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "monogeo/geometry.hpp"

namespace monogeo {

struct GridSpec {
  int cols{39};  // S_u
  int rows{12};  // S_v
  double image_w{1242.0};
  double image_h{375.0};

  GridSpec() = default;
  GridSpec(int cols_, int rows_, double image_w_, double image_h_);

  int num_cells() const { return cols * rows; }
  double stride_u() const { return image_w / cols; }
  double stride_v() const { return image_h / rows; }

  /// Row-major cell index; i is the column (u) and j the row (v).
  int cell_index(int i, int j) const { return j * cols + i; }
  Pixeld cell_center(int index) const;
  /// Cell containing a pixel; pixels on the far image border map to the last
  /// cell.
  int cell_of_pixel(double u, double v) const;
};

/// Twice the diagonal of one cell.
double default_sigma_scope(const GridSpec& grid);

struct GridObject {
  Box2Dd box;
  double depth{0};
};

struct Assignment {
  /// Object index owning each cell, empty for background.
  std::vector<std::optional<std::size_t>> owner;
  /// Foreground cell indices, ascending.
  std::vector<int> foreground;

  bool is_foreground(int cell) const { return owner[cell].has_value(); }
};

/// A cell is foreground when some object's 2D box center lies within
/// sigma_scope (pixels) of the cell center. The nearest object in depth wins;
/// equal depths go to the lower object index.
Assignment assign(std::span<const GridObject> objects, const GridSpec& grid, double sigma_scope);

/// Everything the encoder needs to know about one ground-truth object.
struct ObjectTarget {
  int class_index{1};  // 0 is background
  Box2Dd box;
  Pixeld projected_center{Pixeld::Zero()};
  double depth{0};
  LocalCornersd corners{LocalCornersd::Zero()};
  Point3d delta_center{Point3d::Zero()};
  LocalCornersd delta_corners{LocalCornersd::Zero()};
};

struct CellTarget {
  Eigen::VectorXd class_probs;
  double w{0};
  double h{0};
  double du_b{0};
  double dv_b{0};
  double depth{0};
  double du_c{0};
  double dv_c{0};
  LocalCornersd corners{LocalCornersd::Zero()};
  Point3d delta_center{Point3d::Zero()};
  LocalCornersd delta_corners{LocalCornersd::Zero()};
  bool foreground{false};
};

CellTarget background_target(int num_classes);

/// num_classes counts the background class.
CellTarget encode(const ObjectTarget& object, const Pixeld& cell_center, int num_classes);

/// Foreground cell to 3D box. Corners O_k + dO_k are folded back into size
/// and yaw; score is the largest non-background class probability.
Box3Dd decode(const CellTarget& target, const Pixeld& cell_center, const CameraIntrinsicsd& K);

/// Assigns and encodes a whole frame: one target per cell.
std::vector<CellTarget> build_targets(std::span<const ObjectTarget> objects, const GridSpec& grid,
                                      double sigma_scope, int num_classes);

/// Per-quantity matrices over all cells (one row per cell), the layout the
/// losses consume.
struct CellMatrices {
  Eigen::MatrixXd class_probs;    // G x C
  Eigen::MatrixXd box2d;          // G x 4: w, h, du_b, dv_b
  Eigen::MatrixXd depth;          // G x 1
  Eigen::MatrixXd center;         // G x 2: du_c, dv_c
  Eigen::MatrixXd corners;        // G x 24
  Eigen::MatrixXd delta_center;   // G x 3
  Eigen::MatrixXd delta_corners;  // G x 24
  Eigen::Array<bool, Eigen::Dynamic, 1> foreground;
};

CellMatrices pack(std::span<const CellTarget> cells);

}  // namespace monogeo
