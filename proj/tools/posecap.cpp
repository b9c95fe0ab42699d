// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "posecap/commands.hpp"
#include "posecap/errors.hpp"

namespace pc = posecap::commands;

namespace {

// Copies a flag value into `dst` only when the flag was given on the command
// line, so values loaded from --config survive otherwise.
template <typename T>
void override_if_set(const CLI::Option* opt, const T& value, T& dst) {
  if (opt->count() > 0) dst = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view markerless 3D human pose reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();

  unsigned long long seed = 0;
  int threads = 1;
  std::string config_path;
  app.add_option("--seed", seed, "Random seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads")
                          ->check(CLI::PositiveNumber);
  app.add_option("--config", config_path, "JSON config file (flags win)")
      ->check(CLI::ExistingFile);

  // calibrate
  pc::CalibrateOptions cal;
  auto* calibrate = app.add_subcommand(
      "calibrate", "Planar initialization and bundle adjustment");
  calibrate->add_option("--index", cal.index_path, "Calibration index JSON")
      ->required();
  calibrate
      ->add_option("--observations", cal.observations_path,
                   "Scene-point observations (JSON lines)")
      ->required();
  calibrate->add_option("--out", cal.out_path, "Output rig file")->required();
  calibrate->add_option("--max-iterations", cal.bundle.max_iterations,
                        "Bundle-adjustment iteration cap");

  // reconstruct
  pc::PipelineConfig flags;
  auto* reconstruct = app.add_subcommand(
      "reconstruct", "Select, triangulate and smooth 3D joint trajectories");
  auto* rig_opt = reconstruct->add_option("--rig", flags.rig_path, "Rig file");
  auto* kp_opt = reconstruct->add_option("--keypoints", flags.keypoints_path,
                                         "Keypoint file (JSON lines)");
  auto* out_opt =
      reconstruct->add_option("--out", flags.output_path, "Output pose file");
  auto* thr_opt = reconstruct->add_option(
      "--confidence-threshold", flags.prune.confidence_threshold,
      "Prune cameras below this confidence (default 0.5)");
  auto* maxrem_opt = reconstruct->add_option(
      "--max-removed", flags.prune.max_removed,
      "Cameras pruned at most per frame and joint (default 2)");
  auto* order_opt = reconstruct->add_option("--order", flags.filter.order,
                                            "Filter order per pass (default 4)");
  auto* cutoff_opt = reconstruct->add_option(
      "--cutoff-hz", flags.filter.cutoff_hz, "Filter cutoff (default 6.0)");
  auto* rate_opt = reconstruct->add_option(
      "--sample-rate-hz", flags.sample_rate_hz, "Frame rate (default 90)");
  auto* single_opt = reconstruct->add_flag(
      "--single-pass", flags.single_pass, "Causal single-pass filtering");
  auto* skip_opt = reconstruct->add_flag(
      "--skip-smoothing", flags.skip_smoothing, "Write the selector output");
  auto* interp_opt =
      reconstruct->add_flag("--interpolate-gaps", flags.interpolate_gaps,
                            "Linearly bridge short interior gaps");
  auto* diag_opt = reconstruct->add_option(
      "--diagnostics", flags.diagnostics_path, "Per-frame selection CSV");

  // evaluate
  pc::EvaluateOptions ev;
  auto* evaluate =
      app.add_subcommand("evaluate", "Mean error, MPJPE and PA-MPJPE");
  evaluate->add_option("--pred", ev.pred_path, "Predicted pose file")
      ->required();
  auto* gt_opt = evaluate->add_option("--gt", ev.gt_path, "Ground-truth poses");
  auto* markers_opt = evaluate->add_option("--markers", ev.markers_path,
                                           "Marker sequence (with --offsets)");
  evaluate->add_option("--offsets", ev.offsets_path, "Offset model file")
      ->needs(markers_opt);
  gt_opt->excludes(markers_opt);
  evaluate->add_option("--out", ev.out_path, "Metrics CSV");
  evaluate->add_option("--name", ev.sequence_name, "Sequence label in the CSV");

  // stats
  pc::StatsOptions st;
  auto* stats = app.add_subcommand(
      "stats", "Speed/acceleration CDFs and local-movement curves");
  stats->add_option("poses", st.pose_paths, "Pose files")->required();
  stats->add_option("--out-dir", st.out_dir, "Report directory")->required();
  stats->add_option("--resolutions", st.n_resolutions,
                    "Voxel resolutions per curve (default 50)");
  stats->add_option("--subsample", st.subsample,
                    "Frames kept per sequence for local movement (0 = all)");

  // synth
  pc::SynthOptions sy;
  std::string motion_kind = "burst";
  auto* synth_cmd =
      app.add_subcommand("synth", "Write a synthetic scene bundle");
  synth_cmd->add_option("--out-dir", sy.out_dir, "Bundle directory")
      ->required();
  synth_cmd->add_option("--cameras", sy.rig.num_cameras, "Camera count");
  synth_cmd->add_option("--radius", sy.rig.radius_m, "Ring radius [m]");
  synth_cmd->add_option("--focal", sy.rig.focal_px, "Focal length [px]");
  synth_cmd->add_option("--motion", motion_kind,
                        "static, linear, swing, sweep or burst");
  synth_cmd->add_option("--duration", sy.motion.duration_s, "Seconds");
  synth_cmd->add_option("--rate", sy.motion.sample_rate_hz, "Frame rate");
  synth_cmd->add_option("--amplitude", sy.motion.amplitude_rad,
                        "Limb angle amplitude [rad]");
  synth_cmd->add_option("--frequency", sy.motion.frequency_hz,
                        "Limb motion frequency [Hz]");
  synth_cmd->add_option("--noise-sigma", sy.corruption.pixel_noise_sigma,
                        "Keypoint noise [px]");
  synth_cmd->add_option("--swap-prob", sy.corruption.swap_probability,
                        "Left/right swap probability per pair");
  synth_cmd->add_option("--dropout-prob", sy.corruption.dropout_probability,
                        "Detection dropout probability");
  synth_cmd->add_flag("--with-markers", sy.with_markers,
                      "Also write markers.json and triads.json");
  synth_cmd->add_flag("--with-calibration", sy.with_calibration,
                      "Also write calibration inputs");
  synth_cmd->add_option("--calib-noise", sy.calibration.pixel_noise_sigma,
                        "Calibration pixel noise [px]");

  // fit-offsets
  pc::FitOffsetsOptions fo;
  auto* fit = app.add_subcommand(
      "fit-offsets", "Fit marker-triad offsets to reference joints");
  fit->add_option("--markers", fo.markers_path, "Marker sequence")->required();
  fit->add_option("--joints", fo.joints_path, "Reference joint sequence")
      ->required();
  fit->add_option("--overrides", fo.overrides_path, "Triad override table");
  fit->add_option("--out", fo.out_path, "Offset model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (calibrate->parsed()) {
      pc::cmd_calibrate(cal, std::cout);
    } else if (reconstruct->parsed()) {
      pc::PipelineConfig cfg;
      if (!config_path.empty()) cfg = pc::load_pipeline_config(config_path);
      override_if_set(rig_opt, flags.rig_path, cfg.rig_path);
      override_if_set(kp_opt, flags.keypoints_path, cfg.keypoints_path);
      override_if_set(out_opt, flags.output_path, cfg.output_path);
      override_if_set(thr_opt, flags.prune.confidence_threshold,
                      cfg.prune.confidence_threshold);
      override_if_set(maxrem_opt, flags.prune.max_removed,
                      cfg.prune.max_removed);
      override_if_set(order_opt, flags.filter.order, cfg.filter.order);
      override_if_set(cutoff_opt, flags.filter.cutoff_hz, cfg.filter.cutoff_hz);
      override_if_set(rate_opt, flags.sample_rate_hz, cfg.sample_rate_hz);
      override_if_set(single_opt, flags.single_pass, cfg.single_pass);
      override_if_set(skip_opt, flags.skip_smoothing, cfg.skip_smoothing);
      override_if_set(interp_opt, flags.interpolate_gaps, cfg.interpolate_gaps);
      override_if_set(diag_opt, flags.diagnostics_path, cfg.diagnostics_path);
      override_if_set(threads_opt, threads, cfg.threads);
      cfg.filter.sample_rate_hz = cfg.sample_rate_hz;
      pc::cmd_reconstruct(cfg, std::cout);
    } else if (evaluate->parsed()) {
      pc::cmd_evaluate(ev, std::cout);
    } else if (stats->parsed()) {
      st.seed = seed;
      pc::cmd_stats(st, std::cout);
    } else if (synth_cmd->parsed()) {
      sy.motion.kind = posecap::synth::motion_kind_from_string(motion_kind);
      sy.corruption.seed = seed;
      sy.calibration.seed = seed;
      pc::cmd_synth(sy, std::cout);
    } else if (fit->parsed()) {
      pc::cmd_fit_offsets(fo, std::cout);
    }
  } catch (const posecap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
