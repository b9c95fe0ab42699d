// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

#include "posecap/camera.hpp"

namespace posecap {

struct PlanarCorrespondence {
  Vec2 board;  // meters, on the board plane (z = 0)
  Vec2 pixel;
};

using PlanarView = std::vector<PlanarCorrespondence>;

// All views of the calibration board seen by one camera. An empty view means
// the board was not visible in that capture.
struct PlanarObservationSet {
  std::vector<PlanarView> views;
};

struct BoardPose {
  Mat3 R = Mat3::Identity();  // board -> camera
  Vec3 t = Vec3::Zero();
};

struct ZhangEstimate {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  // One entry per input view; empty views get std::nullopt.
  std::vector<std::optional<BoardPose>> extrinsics;
};

// Normalized DLT homography mapping board coordinates to pixels.
// Requires >= 4 correspondences.
Mat3 estimate_homography(const PlanarView& view);

// Linear intrinsics and per-view extrinsics from >= 3 non-empty views.
// Throws DegeneracyError when the absolute-conic system is rank deficient.
ZhangEstimate zhang_init(const PlanarObservationSet& obs);

struct Observation3D {
  std::string camera_id;
  Vec2 pixel;
  int point_id = 0;
};

// Parameters held constant during bundle adjustment. The default freezes the
// first camera's pose, which fixes the rigid gauge.
struct FixMask {
  bool first_camera_pose = true;
  bool intrinsics = false;
  bool distortion = false;
  bool points = false;
};

struct BundleAdjustOptions {
  int max_iterations = 200;
  double initial_lambda = 1e-3;
  double relative_tolerance = 1e-12;
};

struct BundleAdjustResult {
  CameraRig rig;
  std::map<int, Vec3> points;
  double initial_mean_error_px = 0.0;
  double mean_error_px = 0.0;  // mean over observations of the residual norm
  int iterations = 0;
  bool converged = false;
  // Cost (sum of squared residuals) after every accepted step, starting with
  // the initial cost.
  std::vector<double> cost_history;
};

BundleAdjustResult bundle_adjust(const CameraRig& rig,
                                 const std::vector<Observation3D>& observations,
                                 const std::map<int, Vec3>& points,
                                 const FixMask& fix = {},
                                 const BundleAdjustOptions& options = {});

struct CameraCalibrationInput {
  std::string camera_id;
  int width = 0;
  int height = 0;
  // Views are index-synchronized across cameras: view i of every camera shows
  // the same board placement.
  PlanarObservationSet planar;
};

// Zhang initialization per camera, then relative poses chained through shared
// board views. The world frame is the board frame of the first camera's first
// non-empty view. Throws DegeneracyError when a camera shares no view with
// the already placed cameras.
CameraRig initialize_rig(const std::vector<CameraCalibrationInput>& cameras);

// Linear triangulation of every observed point id from the cameras that see
// it. Points seen by fewer than two cameras are skipped.
std::map<int, Vec3> triangulate_observations(
    const CameraRig& rig, const std::vector<Observation3D>& observations);

// Mean residual norm in pixels. Points missing from `points` are an error.
double mean_reprojection_error(const CameraRig& rig,
                               const std::vector<Observation3D>& observations,
                               const std::map<int, Vec3>& points);

}  // namespace posecap
