// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posecap/skeleton.hpp"

namespace posecap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Keypoint2D {
  double u = 0.0;
  double v = 0.0;
  double confidence = 0.0;  // in [0, 1]
};

// Detections of one camera at one frame. Absent joints are std::nullopt.
struct KeypointFrame {
  std::string camera_id;
  std::int64_t frame_index = 0;
  std::array<std::optional<Keypoint2D>, kNumJoints> keypoints;
};

using Pose = std::array<Vec3, kNumJoints>;

// T x 17 x 3 joint positions in meters.
struct PoseSequence {
  double sample_rate_hz = 90.0;
  std::vector<Pose> frames;

  std::size_t size() const { return frames.size(); }
};

// T x M x 3 marker positions in meters; std::nullopt marks an occluded marker.
struct MarkerSequence {
  double sample_rate_hz = 90.0;
  std::vector<std::string> marker_names;
  std::vector<std::vector<std::optional<Vec3>>> frames;

  std::optional<std::size_t> index_of(const std::string& name) const;
  std::size_t size() const { return frames.size(); }
};

// Throws on a non-finite coordinate, an empty sequence, or a nonpositive rate.
void validate(const PoseSequence& seq);

}  // namespace posecap
