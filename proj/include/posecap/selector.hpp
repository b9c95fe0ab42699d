// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posecap/camera.hpp"
#include "posecap/types.hpp"

namespace posecap {

// Bit i set <=> rig camera i is in the subset.
using CameraMask = std::uint32_t;

inline constexpr int kMaxCameras = 24;

CameraMask to_mask(std::span<const int> cameras);
std::vector<int> from_mask(CameraMask mask);

// All subsets of size >= 2, ordered by size then lexicographically.
// Throws ArityError for fewer than two cameras.
std::vector<std::vector<int>> enumerate_subsets(std::span<const int> active);

struct PruneConfig {
  double confidence_threshold = 0.5;
  int max_removed = 2;
};

struct CameraConfidence {
  int camera = 0;
  double confidence = 0.0;
};

// Drops up to `max_removed` cameras whose confidence is below the threshold,
// lowest first (ties by camera index), never leaving fewer than two. Returns
// the retained cameras in ascending index order.
std::vector<int> prune_cameras(std::span<const CameraConfidence> confidences,
                               const PruneConfig& cfg);

// Contiguous block of detections: at(t, camera, joint), t relative to
// first_frame. Frames without a record for a camera hold no detections.
class KeypointTable {
 public:
  KeypointTable() = default;
  KeypointTable(std::int64_t first_frame, std::size_t num_frames,
                std::size_t num_cameras);

  std::int64_t first_frame() const { return first_frame_; }
  std::size_t num_frames() const { return num_frames_; }
  std::size_t num_cameras() const { return num_cameras_; }

  std::optional<Keypoint2D>& at(std::size_t t, std::size_t camera, int joint);
  const std::optional<Keypoint2D>& at(std::size_t t, std::size_t camera,
                                      int joint) const;

 private:
  std::int64_t first_frame_ = 0;
  std::size_t num_frames_ = 0;
  std::size_t num_cameras_ = 0;
  std::vector<std::optional<Keypoint2D>> data_;
};

// Groups a keypoint stream by frame and rig camera. The frame range spans the
// smallest to largest frame_index present. Unknown camera ids are a
// ConfigError, duplicate (frame, camera) records a FormatError.
KeypointTable make_keypoint_table(std::span<const KeypointFrame> frames,
                                  const CameraRig& rig);

struct CandidateNode {
  std::int64_t frame_index = 0;
  CameraMask subset = 0;
  Vec3 position = Vec3::Zero();
  double aggregate_confidence = 0.0;  // diagnostics only
  bool low_confidence = false;
};

struct CandidateLayer {
  std::int64_t frame_index = 0;
  std::vector<CandidateNode> nodes;
};

// Candidate layers for one joint over every frame of the table. Throws
// GapError for a frame with fewer than two detections.
std::vector<CandidateLayer> build_layers(const KeypointTable& table, int joint,
                                         const CameraRig& rig,
                                         const PruneConfig& cfg);

// Candidate layer for a single frame, or std::nullopt when fewer than two
// cameras detected the joint.
std::optional<CandidateLayer> build_layer(const KeypointTable& table,
                                          std::size_t t, int joint,
                                          const CameraRig& rig,
                                          const PruneConfig& cfg);

struct PathSelection {
  std::vector<int> nodes;  // one index per layer
  double total_cost = 0.0;
  // Edge length entering each layer; the first entry is 0.
  std::vector<double> cost_increments;
};

// Minimum summed Euclidean step length through the layered graph. Ties go to
// the lowest node index. Throws StructuralError for an empty layer or input.
PathSelection shortest_path(std::span<const CandidateLayer> layers);

struct SelectorOptions {
  PruneConfig prune;
  double sample_rate_hz = 90.0;
  // Fill frames with < 2 detections by linear interpolation between the
  // neighbouring selected positions, for interior gaps up to max_gap frames.
  bool interpolate_gaps = false;
  int max_gap = 5;
  int threads = 1;
};

struct DiagnosticRow {
  std::int64_t frame = 0;
  int joint = 0;
  CameraMask subset = 0;  // 0 for interpolated frames
  double cost_increment = 0.0;
};

struct SelectionResult {
  PoseSequence poses;
  std::vector<DiagnosticRow> diagnostics;
};

// Runs build_layers + shortest_path independently per joint.
SelectionResult select_trajectories(const KeypointTable& table,
                                    const CameraRig& rig,
                                    const SelectorOptions& options = {});

// Per-frame triangulation from every camera that detected the joint, without
// pruning or temporal selection.
PoseSequence triangulate_all_cameras(const KeypointTable& table,
                                     const CameraRig& rig,
                                     double sample_rate_hz = 90.0);

void write_diagnostics_csv(const std::string& path,
                           std::span<const DiagnosticRow> rows);

}  // namespace posecap
