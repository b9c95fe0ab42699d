// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <utility>

namespace posecap {

inline constexpr int kNumJoints = 17;

// COCO-17 keypoint order. The 2D detector convention dictates this order;
// every per-joint array in the library is indexed by it.
enum Joint : int {
  kNose = 0,
  kLeftEye,
  kRightEye,
  kLeftEar,
  kRightEar,
  kLeftShoulder,
  kRightShoulder,
  kLeftElbow,
  kRightElbow,
  kLeftWrist,
  kRightWrist,
  kLeftHip,
  kRightHip,
  kLeftKnee,
  kRightKnee,
  kLeftAnkle,
  kRightAnkle,
};

struct Skeleton {
  std::array<std::string_view, kNumJoints> joint_names;
  // (parent, child) index pairs.
  std::array<std::pair<int, int>, 19> limb_pairs;
  // Left/right counterpart of every joint; the nose maps to itself.
  std::array<int, kNumJoints> mirror_map;

  static const Skeleton& coco();

  std::string_view name(int joint) const { return joint_names.at(joint); }
  std::optional<int> index_of(std::string_view name) const;
  int mirror(int joint) const { return mirror_map.at(joint); }
};

}  // namespace posecap
