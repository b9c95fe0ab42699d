// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "posecap/camera.hpp"

namespace posecap {

struct RayObservation {
  const CameraParams* camera = nullptr;
  Vec2 pixel;
};

// Condition number above which a DLT solution is flagged as low confidence.
inline constexpr double kNearParallelConditionLimit = 1e8;

struct LinearTriangulation {
  Vec3 point = Vec3::Zero();
  // Ratio of the largest to the third singular value of the row-normalized
  // design matrix; large when the rays are nearly parallel.
  double condition_number = 0.0;
  bool low_confidence = false;
};

// Homogeneous DLT on undistorted normalized coordinates. Throws ArityError
// for fewer than two observations.
LinearTriangulation triangulate_linear(std::span<const RayObservation> obs);

struct RefinedTriangulation {
  Vec3 point = Vec3::Zero();
  double initial_cost = 0.0;  // sum of squared pixel residuals
  double final_cost = 0.0;
  int iterations = 0;
  // False when the initial point could not be evaluated (behind a camera) or
  // no step reduced the cost; `point` is then the initial estimate.
  bool improved = false;
  bool valid = true;
};

// Damped Gauss-Newton on the summed squared reprojection residual. The final
// cost never exceeds the initial cost.
RefinedTriangulation triangulate_refined(std::span<const RayObservation> obs,
                                         const Vec3& initial,
                                         int max_iterations = 50);

double reprojection_cost(std::span<const RayObservation> obs, const Vec3& point);

}  // namespace posecap
