// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/skeleton.hpp"

#include <cmath>
#include <sstream>

#include "posecap/errors.hpp"
#include "posecap/types.hpp"

namespace posecap {

const Skeleton& Skeleton::coco() {
  static const Skeleton skeleton{
      {"nose", "left_eye", "right_eye", "left_ear", "right_ear",
       "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
       "left_wrist", "right_wrist", "left_hip", "right_hip", "left_knee",
       "right_knee", "left_ankle", "right_ankle"},
      {{{kLeftHip, kLeftKnee},
        {kLeftKnee, kLeftAnkle},
        {kRightHip, kRightKnee},
        {kRightKnee, kRightAnkle},
        {kLeftHip, kRightHip},
        {kLeftShoulder, kLeftHip},
        {kRightShoulder, kRightHip},
        {kLeftShoulder, kRightShoulder},
        {kLeftShoulder, kLeftElbow},
        {kRightShoulder, kRightElbow},
        {kLeftElbow, kLeftWrist},
        {kRightElbow, kRightWrist},
        {kLeftEye, kRightEye},
        {kNose, kLeftEye},
        {kNose, kRightEye},
        {kLeftEye, kLeftEar},
        {kRightEye, kRightEar},
        {kLeftEar, kLeftShoulder},
        {kRightEar, kRightShoulder}}},
      {kNose, kRightEye, kLeftEye, kRightEar, kLeftEar, kRightShoulder,
       kLeftShoulder, kRightElbow, kLeftElbow, kRightWrist, kLeftWrist,
       kRightHip, kLeftHip, kRightKnee, kLeftKnee, kRightAnkle, kLeftAnkle},
  };
  return skeleton;
}

std::optional<int> Skeleton::index_of(std::string_view name) const {
  for (int j = 0; j < kNumJoints; ++j) {
    if (joint_names[j] == name) return j;
  }
  return std::nullopt;
}

std::optional<std::size_t> MarkerSequence::index_of(
    const std::string& name) const {
  for (std::size_t i = 0; i < marker_names.size(); ++i) {
    if (marker_names[i] == name) return i;
  }
  return std::nullopt;
}

void validate(const PoseSequence& seq) {
  if (!(seq.sample_rate_hz > 0.0) || !std::isfinite(seq.sample_rate_hz)) {
    throw SpecError("pose sequence: sample_rate_hz must be positive");
  }
  if (seq.frames.empty()) {
    throw LengthError("pose sequence: at least one frame required");
  }
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    for (int j = 0; j < kNumJoints; ++j) {
      if (!seq.frames[t][j].allFinite()) {
        std::ostringstream msg;
        msg << "pose sequence: non-finite coordinate at frame " << t
            << ", joint " << Skeleton::coco().name(j);
        throw FormatError(msg.str());
      }
    }
  }
}

}  // namespace posecap
