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

// Pinhole camera geometry and 3D box algebra.
//
// Camera frame: X right, Y down, Z forward. Yaw rotates about +Y and yaw = 0
// puts the box length axis along +X, which is the KITTI rotation_y
// convention.

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace monogeo {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

/// A point in the camera frame, meters.
template <typename Scalar>
using Point3 = Vector3<Scalar>;

/// An image position (u, v), pixels.
template <typename Scalar>
using Pixel = Vector2<Scalar>;

/// Eight box vertices as columns. Column k holds the sign pattern of the
/// binary digits of k over (length, height, width), 0 meaning negative.
template <typename Scalar>
using LocalCorners = Eigen::Matrix<Scalar, 3, 8>;

/// Thrown when a point or a box corner is not strictly in front of the camera.
class BehindCameraError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <typename Scalar>
struct CameraIntrinsics {
  Scalar fu;
  Scalar fv;
  Scalar pu;
  Scalar pv;

  CameraIntrinsics(Scalar fu_, Scalar fv_, Scalar pu_, Scalar pv_)
      : fu(fu_), fv(fv_), pu(pu_), pv(pv_) {
    if (!(fu > Scalar(0)) || !(fv > Scalar(0))) {
      throw std::domain_error("focal lengths must be positive");
    }
  }

  bool operator==(const CameraIntrinsics&) const = default;
};

/// Image-plane box stored as size plus center.
template <typename Scalar>
struct Box2D {
  Scalar w{0};
  Scalar h{0};
  Scalar u{0};
  Scalar v{0};

  Scalar left() const { return u - w / Scalar(2); }
  Scalar right() const { return u + w / Scalar(2); }
  Scalar top() const { return v - h / Scalar(2); }
  Scalar bottom() const { return v + h / Scalar(2); }
  Pixel<Scalar> center() const { return {u, v}; }

  static Box2D from_extents(Scalar left, Scalar top, Scalar right, Scalar bottom) {
    if (right < left || bottom < top) {
      throw std::domain_error("box extents are inverted");
    }
    return {right - left, bottom - top, (left + right) / Scalar(2), (top + bottom) / Scalar(2)};
  }

  bool operator==(const Box2D&) const = default;
};

/// Box dimensions, meters.
template <typename Scalar>
struct BoxSize {
  Scalar length{1};
  Scalar width{1};
  Scalar height{1};

  bool positive() const {
    return length > Scalar(0) && width > Scalar(0) && height > Scalar(0);
  }
  bool operator==(const BoxSize&) const = default;
};

template <typename Scalar>
struct Box3D {
  Point3<Scalar> center{Point3<Scalar>::Zero()};
  BoxSize<Scalar> size{};
  Scalar yaw{0};
  int class_id{0};
  Scalar score{1};
};

using CameraIntrinsicsd = CameraIntrinsics<double>;
using Box2Dd = Box2D<double>;
using BoxSized = BoxSize<double>;
using Box3Dd = Box3D<double>;
using LocalCornersd = LocalCorners<double>;
using Point3d = Point3<double>;
using Pixeld = Pixel<double>;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar normalize_angle(Scalar a) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  Scalar r = std::remainder(a, Scalar(2) * kPi);
  if (r <= -kPi) r += Scalar(2) * kPi;
  return r;
}

template <typename Scalar>
Point3<Scalar> backproject(const Pixel<Scalar>& c, Scalar depth,
                           const CameraIntrinsics<Scalar>& K) {
  if (!(depth > Scalar(0))) {
    throw std::domain_error("back-projection depth must be positive");
  }
  return {(c.x() - K.pu) * depth / K.fu, (c.y() - K.pv) * depth / K.fv, depth};
}

template <typename Scalar>
Pixel<Scalar> project(const Point3<Scalar>& p, const CameraIntrinsics<Scalar>& K) {
  if (!(p.z() > Scalar(0))) {
    throw BehindCameraError("cannot project a point with Z <= 0");
  }
  return {K.fu * p.x() / p.z() + K.pu, K.fv * p.y() / p.z() + K.pv};
}

/// Rotation about the camera Y axis.
template <typename Scalar>
Matrix3<Scalar> rotation_y(Scalar yaw) {
  const Scalar c = std::cos(yaw);
  const Scalar s = std::sin(yaw);
  Matrix3<Scalar> r;
  r << c, Scalar(0), s,
       Scalar(0), Scalar(1), Scalar(0),
       -s, Scalar(0), c;
  return r;
}

/// Canonical unrotated corners of a box with the given size.
template <typename Scalar>
LocalCorners<Scalar> axis_aligned_corners(const BoxSize<Scalar>& size) {
  LocalCorners<Scalar> corners;
  for (int k = 0; k < 8; ++k) {
    const Scalar sl = (k & 4) ? Scalar(1) : Scalar(-1);
    const Scalar sh = (k & 2) ? Scalar(1) : Scalar(-1);
    const Scalar sw = (k & 1) ? Scalar(1) : Scalar(-1);
    corners.col(k) << sl * size.length / Scalar(2), sh * size.height / Scalar(2),
        sw * size.width / Scalar(2);
  }
  return corners;
}

template <typename Scalar>
LocalCorners<Scalar> corners_from_pose(const BoxSize<Scalar>& size, Scalar yaw) {
  if (!size.positive()) {
    throw std::domain_error("box size must be positive");
  }
  return rotation_y(yaw) * axis_aligned_corners(size);
}

/// Corners in the camera frame.
template <typename Scalar>
LocalCorners<Scalar> absolute_corners(const Box3D<Scalar>& box) {
  return corners_from_pose(box.size, box.yaw).colwise() + box.center;
}

/// Inverse of corners_from_pose for corner sets that are (close to) a
/// yaw-rotated box in canonical order. Edge vectors are averaged, so small
/// per-corner noise is tolerated.
template <typename Scalar>
std::pair<BoxSize<Scalar>, Scalar> pose_from_corners(const LocalCorners<Scalar>& corners) {
  Vector3<Scalar> length_axis = Vector3<Scalar>::Zero();
  Vector3<Scalar> height_axis = Vector3<Scalar>::Zero();
  Vector3<Scalar> width_axis = Vector3<Scalar>::Zero();
  for (int k = 0; k < 8; ++k) {
    if (k & 4) length_axis += corners.col(k) - corners.col(k ^ 4);
    if (k & 2) height_axis += corners.col(k) - corners.col(k ^ 2);
    if (k & 1) width_axis += corners.col(k) - corners.col(k ^ 1);
  }
  length_axis /= Scalar(4);
  height_axis /= Scalar(4);
  width_axis /= Scalar(4);
  BoxSize<Scalar> size{length_axis.norm(), width_axis.norm(), height_axis.norm()};
  if (!size.positive()) {
    throw std::domain_error("corners describe a degenerate box");
  }
  // Length axis is R * (1, 0, 0) = (cos, 0, -sin).
  const Scalar yaw = normalize_angle(std::atan2(-length_axis.z(), length_axis.x()));
  return {size, yaw};
}

/// Tight image rectangle around the eight projected corners.
template <typename Scalar>
Box2D<Scalar> box3d_to_box2d(const Box3D<Scalar>& box, const CameraIntrinsics<Scalar>& K) {
  const LocalCorners<Scalar> corners = absolute_corners(box);
  if (!(corners.row(2).minCoeff() > Scalar(0))) {
    throw BehindCameraError("box has a corner at or behind the camera plane");
  }
  const Eigen::Matrix<Scalar, 1, 8> u =
      (K.fu * corners.row(0).array() / corners.row(2).array() + K.pu).matrix();
  const Eigen::Matrix<Scalar, 1, 8> v =
      (K.fv * corners.row(1).array() / corners.row(2).array() + K.pv).matrix();
  return Box2D<Scalar>::from_extents(u.minCoeff(), v.minCoeff(), u.maxCoeff(), v.maxCoeff());
}

/// Converts an observed view angle into a ground-plane yaw using the ray
/// through the 2D box center: yaw = phi - atan((u_b - p_u) / f_u).
template <typename Scalar>
Scalar view_angle_to_yaw(Scalar phi, Scalar u_b, const CameraIntrinsics<Scalar>& K) {
  return normalize_angle(phi - std::atan((u_b - K.pu) / K.fu));
}

}  // namespace monogeo
