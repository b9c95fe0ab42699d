// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "posecap/alignment.hpp"
#include "posecap/calibration.hpp"
#include "posecap/camera.hpp"
#include "posecap/types.hpp"

namespace posecap::synth {

// Cameras on a ring around the capture volume, all aimed at `look_at`.
// Heights cycle through `heights`; the default mixes ceiling and chest mounts.
struct RigSpec {
  int num_cameras = 7;
  double radius_m = 3.2;
  std::vector<double> heights_m = {2.5, 1.4};
  Vec3 look_at = Vec3(0.0, 0.0, 1.0);
  double angle_offset_rad = 0.3;
  double focal_px = 1150.0;
  int width = 1920;
  int height = 1200;
  double k1 = 0.0;
  double k2 = 0.0;
};

// Throws SpecError for K < 2, radius <= 0, or a camera that cannot see the
// look-at point.
CameraRig make_rig(const RigSpec& spec);

struct BodyDims {
  double pelvis_height = 0.95;
  double hip_half_width = 0.1;
  double torso = 0.5;
  double shoulder_half_width = 0.19;
  double neck = 0.2;
  double upper_arm = 0.3;
  double forearm = 0.27;
  double thigh = 0.44;
  double shank = 0.42;
};

enum class MotionKind {
  kStatic,
  kLinear,  // static pose translating at `velocity`
  kSwing,   // sagittal arm/leg swing: a fixed arc per extremity
  kSweep,   // two incommensurate angles: extremities sweep a sphere patch
  kBurst,   // composite: translation, yaw, lean and fast limb sweeps
};

struct MotionSpec {
  double duration_s = 200.0 / 90.0;
  double sample_rate_hz = 90.0;
  MotionKind kind = MotionKind::kBurst;
  double amplitude_rad = 0.6;
  double frequency_hz = 1.0;
  Vec3 velocity = Vec3(1.0, 0.0, 0.0);
  BodyDims dims;
};

std::size_t frame_count(const MotionSpec& spec);

// Throws SpecError when fewer than three frames result or a segment length
// is not positive.
void validate(const MotionSpec& spec);

PoseSequence gen_motion(const MotionSpec& spec);

// Four markers on each rigid body segment, named "<segment>_<n>".
MarkerSequence gen_markers(const MotionSpec& spec);

// Marker triad rigidly attached to the segment carrying each joint.
std::map<std::string, std::array<std::string, 3>> default_triads();

struct CorruptionSpec {
  double pixel_noise_sigma = 0.0;
  double swap_probability = 0.0;
  double dropout_probability = 0.0;
  std::pair<double, double> clean_confidence = {0.8, 1.0};
  std::pair<double, double> corrupted_confidence = {0.0, 0.4};
  unsigned long long seed = 0;
  // Restrict swaps to these rig indices / left-right pairs. Empty = all.
  std::vector<int> swap_cameras;
  std::vector<std::pair<int, int>> swap_pairs;
  // Mark joints behind a camera absent instead of failing.
  bool drop_behind_camera = false;
};

void validate(const CorruptionSpec& spec);

struct CorruptionEvent {
  std::int64_t frame = 0;
  int camera = 0;
  int joint = 0;
  bool swapped = false;
  bool dropped = false;
};

struct RenderResult {
  std::vector<KeypointFrame> frames;  // ordered by frame, then camera
  std::vector<CorruptionEvent> log;
};

// Projects ground truth into every camera and applies the corruption model.
// Deterministic under `corruption.seed`; each camera draws from its own
// stream derived from the seed and its rig index.
RenderResult render_keypoints(const PoseSequence& gt, const CameraRig& rig,
                              const CorruptionSpec& corruption);

struct CalibrationSceneSpec {
  int num_board_poses = 14;
  int grid_cols = 6;
  int grid_rows = 6;
  double grid_spacing_m = 0.1;
  int num_scene_points = 60;
  double pixel_noise_sigma = 0.0;
  unsigned long long seed = 0;
};

struct CalibrationScene {
  std::vector<CameraCalibrationInput> cameras;
  std::vector<Observation3D> observations;
  std::map<int, Vec3> points;  // ground truth, in the rig's world frame
};

// Board views (index-synchronized across cameras; a camera only sees boards
// facing it) and scene-point observations rendered from `rig`.
CalibrationScene make_calibration_scene(const CameraRig& rig,
                                        const CalibrationSceneSpec& spec);

std::string to_string(MotionKind kind);
MotionKind motion_kind_from_string(const std::string& name);

}  // namespace posecap::synth
