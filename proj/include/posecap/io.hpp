// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "posecap/alignment.hpp"
#include "posecap/calibration.hpp"
#include "posecap/camera.hpp"
#include "posecap/types.hpp"

namespace posecap {

// Rig: JSON list of {camera_id, K (3x3 row-major), dist [k1, k2],
// R (3x3 row-major, world -> camera), t [m], image_size [w, h]}.
CameraRig load_rig(const std::string& path);
void save_rig(const CameraRig& rig, const std::string& path);
CameraRig parse_rig(const std::string& text);

// Keypoints: JSON lines {frame_index, camera_id, keypoints: 17 x ([u, v, c] |
// null)}. Returned sorted by (frame_index, camera_id).
std::vector<KeypointFrame> load_keypoints(const std::string& path);
void save_keypoints(const std::vector<KeypointFrame>& frames,
                    const std::string& path);
std::vector<KeypointFrame> parse_keypoints(const std::string& text);

// Pose sequence: {sample_rate_hz, joint_names, frames: T x 17 x 3}.
void save_pose_sequence(const PoseSequence& seq, const std::string& path);
PoseSequence load_pose_sequence(const std::string& path);

// Marker sequence: {sample_rate_hz, marker_names, frames: T x M x ([x,y,z] |
// null)}.
void save_marker_sequence(const MarkerSequence& seq, const std::string& path);
MarkerSequence load_marker_sequence(const std::string& path);

// Planar correspondences of one camera: list of views, each a list of
// [board_x_m, board_y_m, pixel_u, pixel_v].
PlanarObservationSet load_planar(const std::string& path);
void save_planar(const PlanarObservationSet& obs, const std::string& path);

// Calibration index: {cameras: [{camera_id, image_size, planar}]} where
// `planar` is a path relative to the index file.
std::vector<CameraCalibrationInput> load_calibration_index(
    const std::string& path);
void save_calibration_index(const std::vector<CameraCalibrationInput>& cameras,
                            const std::string& path);

// Bundle-adjustment observations: JSON lines {camera_id, point_id, u, v}.
std::vector<Observation3D> load_observations(const std::string& path);
void save_observations(const std::vector<Observation3D>& obs,
                       const std::string& path);

// Offset model: {joint_name: {markers: [m1, m2, m3], w: [wx, wy, wz]}}.
JointOffsetModel load_offset_model(const std::string& path);
void save_offset_model(const JointOffsetModel& model, const std::string& path);

// Triad override table: {joint_name: [m1, m2, m3]}.
std::map<std::string, std::array<std::string, 3>> load_triad_overrides(
    const std::string& path);
void save_triad_overrides(
    const std::map<std::string, std::array<std::string, 3>>& table,
    const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace posecap
