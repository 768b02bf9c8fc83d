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

// Convex polygon area and Sutherland-Hodgman clipping.

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

namespace monogeo {

template <typename Scalar>
using Polygon = std::vector<Eigen::Matrix<Scalar, 2, 1>>;

/// Shoelace area, positive for counter-clockwise vertex order.
template <typename Scalar>
Scalar signed_area(const Polygon<Scalar>& poly) {
  Scalar twice = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    twice += a.x() * b.y() - a.y() * b.x();
  }
  return twice / Scalar(2);
}

template <typename Scalar>
Scalar cross2(const Eigen::Matrix<Scalar, 2, 1>& o, const Eigen::Matrix<Scalar, 2, 1>& a,
              const Eigen::Matrix<Scalar, 2, 1>& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Intersection of a polygon with a convex counter-clockwise clip polygon.
template <typename Scalar>
Polygon<Scalar> clip_convex(const Polygon<Scalar>& subject, const Polygon<Scalar>& clip) {
  Polygon<Scalar> out = subject;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const auto& a = clip[e];
    const auto& b = clip[(e + 1) % m];
    Polygon<Scalar> in = std::move(out);
    out.clear();
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = in[i];
      const auto& q = in[(i + 1) % n];
      const Scalar sp = cross2(a, b, p);
      const Scalar sq = cross2(a, b, q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const Scalar t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

/// Area of the intersection of two convex polygons of either orientation.
/// Slivers smaller than `min_area` count as empty.
template <typename Scalar>
Scalar convex_intersection_area(Polygon<Scalar> a, Polygon<Scalar> b,
                                Scalar min_area = Scalar(1e-12)) {
  if (a.size() < 3 || b.size() < 3) return 0;
  if (signed_area(a) < 0) std::reverse(a.begin(), a.end());
  if (signed_area(b) < 0) std::reverse(b.begin(), b.end());
  const Polygon<Scalar> inter = clip_convex(a, b);
  if (inter.size() < 3) return 0;
  const Scalar area = std::abs(signed_area(inter));
  return area < min_area ? Scalar(0) : area;
}

}  // namespace monogeo
