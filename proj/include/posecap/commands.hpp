// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "posecap/alignment.hpp"
#include "posecap/butterworth.hpp"
#include "posecap/calibration.hpp"
#include "posecap/local_movement.hpp"
#include "posecap/metrics.hpp"
#include "posecap/selector.hpp"
#include "posecap/synth.hpp"

// Batch commands behind the `posecap` executable. Each reads and writes the
// file formats in io.hpp and prints a short report to `log`.
namespace posecap::commands {

struct CalibrateOptions {
  std::string index_path;
  std::string observations_path;
  std::string out_path;
  BundleAdjustOptions bundle;
};

struct CalibrateReport {
  CameraRig rig;
  double initial_error_px = 0.0;
  double mean_error_px = 0.0;
  bool converged = false;
};

CalibrateReport cmd_calibrate(const CalibrateOptions& opts, std::ostream& log);

struct PipelineConfig {
  std::string rig_path;
  std::string keypoints_path;
  std::string output_path;
  PruneConfig prune;
  FilterSpec filter;
  double sample_rate_hz = 90.0;
  bool skip_smoothing = false;
  bool single_pass = false;
  bool interpolate_gaps = false;
  std::string diagnostics_path;  // empty = no dump
  int threads = 1;
};

// Throws ConfigError for missing or clashing paths and invalid nested configs.
void validate(const PipelineConfig& cfg);

// Reads a JSON config; keys mirror the CLI flags (rig, keypoints, output,
// confidence_threshold, max_removed, order, cutoff_hz, sample_rate_hz,
// skip_smoothing, single_pass, interpolate_gaps, diagnostics, threads).
PipelineConfig load_pipeline_config(const std::string& path);

PoseSequence cmd_reconstruct(const PipelineConfig& cfg, std::ostream& log);

struct EvaluateOptions {
  std::string pred_path;
  std::string gt_path;       // pose sequence, or
  std::string markers_path;  // marker sequence + offset model
  std::string offsets_path;
  std::string out_path;      // CSV; empty = log only
  std::string sequence_name = "sequence";
};

struct EvaluationReport {
  PoseError mean_error;
  PoseError mpjpe;
  PoseError pa_mpjpe;
};

EvaluationReport cmd_evaluate(const EvaluateOptions& opts, std::ostream& log);

struct StatsOptions {
  std::vector<std::string> pose_paths;
  std::string out_dir;
  int n_resolutions = 50;
  std::size_t subsample = 0;  // frames kept per sequence; 0 keeps all
  unsigned long long seed = 0;
};

struct ChainSummary {
  std::string sequence;
  LimbChain chain = LimbChain::kWrist;
  LocalMovementCurve curve;
};

struct StatsReport {
  std::vector<ChainSummary> local_movement;
  // Keyed by "<group>_speed" / "<group>_accel", group in wrists/ankles/hips.
  std::map<std::string, CdfSummary> distributions;
};

StatsReport cmd_stats(const StatsOptions& opts, std::ostream& log);

struct SynthOptions {
  synth::RigSpec rig;
  synth::MotionSpec motion;
  synth::CorruptionSpec corruption;
  std::string out_dir;
  bool with_markers = false;
  bool with_calibration = false;
  synth::CalibrationSceneSpec calibration;
};

// Writes rig.json, keypoints.jsonl, gt.json and manifest.json (plus
// markers.json / triads.json and calibration inputs when requested).
void cmd_synth(const SynthOptions& opts, std::ostream& log);

struct FitOffsetsOptions {
  std::string markers_path;
  std::string joints_path;
  std::string overrides_path;  // optional
  std::string out_path;
};

OffsetFitReport cmd_fit_offsets(const FitOffsetsOptions& opts,
                                std::ostream& log);

}  // namespace posecap::commands
