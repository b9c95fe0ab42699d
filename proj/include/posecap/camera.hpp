// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "posecap/types.hpp"

namespace posecap {

// Pinhole camera with two-coefficient radial distortion. R and t map world
// points into the camera frame: Xc = R * X + t.
struct CameraParams {
  std::string camera_id;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  int width = 1;
  int height = 1;

  Vec3 center() const { return -R.transpose() * t; }
  Mat3 intrinsic_matrix() const;
};

struct CameraRig {
  std::vector<CameraParams> cameras;

  std::size_t size() const { return cameras.size(); }
  std::optional<std::size_t> index_of(const std::string& camera_id) const;
};

// Throws SpecError when R is not a proper rotation (1e-9), a focal length is
// nonpositive, or the image size is not positive.
void validate(const CameraParams& cam);

// Throws ConfigError for fewer than two cameras or duplicate ids.
void validate(const CameraRig& rig);

// Applies the radial model (1 + k1 r^2 + k2 r^4) to a normalized image point.
Vec2 distort(const CameraParams& cam, const Vec2& normalized);

// Inverts distort() by fixed-point iteration (10 iterations).
Vec2 undistort_normalized(const CameraParams& cam, const Vec2& normalized);

// Pixel -> undistorted normalized image coordinates.
Vec2 pixel_to_normalized(const CameraParams& cam, const Vec2& pixel);

// World point -> pixel. Throws BehindCameraError for nonpositive depth.
Vec2 project(const CameraParams& cam, const Vec3& world,
             bool apply_distortion = true);

// Derivatives of project() with respect to every parameter block.
struct ProjectionJacobian {
  Vec2 pixel;
  Eigen::Matrix<double, 2, 4> d_intrinsics;  // fx, fy, cx, cy
  Eigen::Matrix<double, 2, 2> d_distortion;  // k1, k2
  Eigen::Matrix<double, 2, 3> d_rotation;    // left-multiplied so(3) increment
  Eigen::Matrix<double, 2, 3> d_translation;
  Eigen::Matrix<double, 2, 3> d_point;
};

ProjectionJacobian project_with_jacobian(const CameraParams& cam,
                                         const Vec3& world);

// Rodrigues' formula.
Mat3 rotation_from_axis_angle(const Vec3& omega);

// Nearest rotation in the Frobenius sense, det = +1.
Mat3 orthonormalize(const Mat3& m);

}  // namespace posecap
