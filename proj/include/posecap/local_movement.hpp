// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "posecap/types.hpp"

namespace posecap {

enum class LimbChain { kWrist, kAnkle };

enum class OriginSide { kRight, kLeft };

// Body-local extremity positions. For each frame the origin-side joint is
// expressed in a frame at its shoulder (hip): x along the shoulder (hip)
// axis pointing to the origin side, the hip-to-shoulder (shoulder-to-hip)
// direction in the xz-plane, y completing a right-handed frame. The opposite
// joint is taken relative to its own shoulder (hip) in the same axes with x
// negated. Positions are divided by the median over frames of the summed
// upper and lower segment lengths, averaged over both sides.
struct LocalPoints {
  std::vector<Vec3> points;  // 2F entries: origin side, mirrored side per frame
  double limb_length = 0.0;  // meters
};

// Throws DegeneracyError for coincident shoulders (hips) or a torso parallel
// to the shoulder (hip) axis.
LocalPoints to_local_frame(const PoseSequence& seq, LimbChain chain,
                           OriginSide origin = OriginSide::kRight);

// Unique occupied voxels of a grid anchored at the origin with side
// `voxel_side`, divided by the number of points.
double cover_ratio(std::span<const Vec3> points, double voxel_side);

struct LocalMovementConfig {
  int n_resolutions = 50;
  LimbChain chain = LimbChain::kWrist;
  OriginSide origin = OriginSide::kRight;
};

struct LocalMovementCurve {
  std::vector<double> voxel_sides;  // fraction of limb length, decreasing
  std::vector<double> cover_ratios;
  double auc = 0.0;  // mean of cover_ratios
};

// Voxel sides log-spaced from 1 down to 1/1000, n values.
std::vector<double> voxel_sides(int n_resolutions);

LocalMovementCurve local_movement(std::span<const Vec3> local_points,
                                  const LocalMovementConfig& cfg);

LocalMovementCurve local_movement(const PoseSequence& seq,
                                  const LocalMovementConfig& cfg);

double local_movement_auc(const PoseSequence& seq,
                          const LocalMovementConfig& cfg);

}  // namespace posecap
