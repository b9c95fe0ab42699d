// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posecap/types.hpp"

namespace posecap {

// Oblique frame spanned by a marker triad. Columns of `basis` are the unit
// vectors along M2 - M1, M3 - M1 and their cross product.
struct LocalFrame {
  Mat3 basis = Mat3::Identity();
  Vec3 origin = Vec3::Zero();

  Vec3 to_world(const Vec3& weights) const { return basis * weights + origin; }
};

// Throws DegeneracyError when the markers are coincident or collinear.
LocalFrame local_frame(const Vec3& m1, const Vec3& m2, const Vec3& m3);

// One frame of fitting data; std::nullopt for an occluded marker or a missing
// joint drops the frame.
struct TriadSample {
  std::optional<Vec3> m1, m2, m3;
  std::optional<Vec3> joint;
};

struct OffsetFit {
  Vec3 weights = Vec3::Zero();
  double rms_residual = 0.0;  // meters, over the usable frames
  std::size_t frames_used = 0;
};

// Minimum rotation (radians) between the triad orientations of the usable
// frames before the fit accepts them as spanning distinct orientations.
inline constexpr double kMinOrientationSpread = 1e-2;

// Least-squares weights of the stacked system A w = J - M1. Throws
// DegeneracyError (message names `label`) with fewer than three usable frames,
// a single triad orientation, or a rank-deficient stack.
OffsetFit fit_joint_offset(std::span<const TriadSample> samples,
                           const std::string& label = "joint");

struct JointOffset {
  std::array<std::string, 3> markers;
  Vec3 weights = Vec3::Zero();
};

// Joint name -> triad and weights.
struct JointOffsetModel {
  std::map<std::string, JointOffset> joints;
};

// Transformed ground-truth joints for every frame. Requires an entry for all
// 17 joints. Throws ConfigError for an unknown marker, GapError when a triad
// marker is occluded, DegeneracyError for a collinear triad.
PoseSequence apply_offset(const JointOffsetModel& model,
                          const MarkerSequence& markers);

// Picks the triad for `joint`: the two markers nearest by median distance,
// then the third minimizing the variance of the joint's out-of-plane
// coordinate.
std::array<std::string, 3> select_triad(const MarkerSequence& markers,
                                        const PoseSequence& joints, int joint);

struct OffsetFitReport {
  JointOffsetModel model;
  std::map<std::string, OffsetFit> fits;
};

// Fits every joint, using `overrides` (joint name -> triad) where given and
// select_triad otherwise.
OffsetFitReport fit_offset_model(
    const MarkerSequence& markers, const PoseSequence& joints,
    const std::map<std::string, std::array<std::string, 3>>& overrides = {});

}  // namespace posecap
