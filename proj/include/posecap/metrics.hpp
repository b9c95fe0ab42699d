// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "posecap/types.hpp"

namespace posecap {

enum class AlignmentMode {
  kIdentity,           // mean error
  kHipTranslation,     // MPJPE: mid-hips made to coincide
  kProcrustesSimilarity,  // PA-MPJPE: per-frame rotation, scale, translation
};

struct Similarity {
  Mat3 R = Mat3::Identity();
  double scale = 1.0;
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return scale * (R * x) + t; }
};

// Least-squares similarity mapping source onto target over the valid points
// (an empty mask means all valid). Throws DegeneracyError for fewer than three
// valid points or a collinear source.
Similarity procrustes_similarity(std::span<const Vec3> source,
                                 std::span<const Vec3> target,
                                 std::span<const bool> valid = {});

struct PoseError {
  std::array<double, kNumJoints> per_joint_mm{};
  double overall_mm = 0.0;
};

// Mean over frames of the per-joint distance after aligning pred to gt with
// `mode`, then mean over joints. Throws ShapeError on a length mismatch.
PoseError pose_error(const PoseSequence& pred, const PoseSequence& gt,
                     AlignmentMode mode);

// Per-frame sum of squared residuals after alignment.
std::vector<double> per_frame_rss(const PoseSequence& pred,
                                  const PoseSequence& gt, AlignmentMode mode);

double rss_after_alignment(const Pose& pred, const Pose& gt, AlignmentMode mode);

struct JointKinematics {
  int joint = 0;
  std::vector<double> speed;         // m/s
  std::vector<double> acceleration;  // m/s^2
};

// Central differences scaled by the sample rate, one-sided at the ends.
// Throws LengthError when T < 3.
std::vector<JointKinematics> joint_kinematics(const PoseSequence& seq,
                                              std::span<const int> joints);

struct CdfSummary {
  std::vector<double> values;     // distinct sample values, ascending
  std::vector<double> fractions;  // fraction of samples <= value
  double mean = 0.0;
};

// Empirical CDF. Throws ArityError for empty input and FormatError for a
// non-finite sample.
CdfSummary cdf(std::span<const double> samples);

void write_cdf_csv(const std::string& path, const CdfSummary& summary);

// Uniform frame sample without replacement, kept in temporal order. Returns
// the input unchanged when count >= T.
PoseSequence subsample_frames(const PoseSequence& seq, std::size_t count,
                              unsigned long long seed);

std::string to_string(AlignmentMode mode);

}  // namespace posecap
