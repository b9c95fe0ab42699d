// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "posecap/errors.hpp"
#include "posecap/io.hpp"

namespace posecap::commands {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

std::string stem(const std::string& path) {
  return fs::path(path).stem().string();
}

const char* chain_name(LimbChain c) {
  return c == LimbChain::kWrist ? "wrist" : "ankle";
}

}  // namespace

// --- calibrate -------------------------------------------------------------

CalibrateReport cmd_calibrate(const CalibrateOptions& opts, std::ostream& log) {
  const auto cameras = load_calibration_index(opts.index_path);
  const auto observations = load_observations(opts.observations_path);
  const CameraRig initial = initialize_rig(cameras);
  const auto points = triangulate_observations(initial, observations);

  std::vector<Observation3D> usable;
  for (const auto& o : observations) {
    if (points.count(o.point_id)) usable.push_back(o);
  }
  const BundleAdjustResult ba =
      bundle_adjust(initial, usable, points, FixMask{}, opts.bundle);
  save_rig(ba.rig, opts.out_path);

  log << "cameras: " << ba.rig.cameras.size() << ", points: " << ba.points.size()
      << ", observations: " << usable.size() << "\n"
      << "initial mean reprojection error: " << ba.initial_mean_error_px
      << " px\n"
      << "mean reprojection error: " << ba.mean_error_px << " px ("
      << ba.iterations << " iterations"
      << (ba.converged ? "" : ", not converged") << ")\n";
  return {ba.rig, ba.initial_mean_error_px, ba.mean_error_px, ba.converged};
}

// --- reconstruct -----------------------------------------------------------

void validate(const PipelineConfig& cfg) {
  const std::pair<const char*, const std::string*> paths[] = {
      {"rig", &cfg.rig_path},
      {"keypoints", &cfg.keypoints_path},
      {"output", &cfg.output_path},
      {"diagnostics", &cfg.diagnostics_path}};
  std::set<std::string> seen;
  for (const auto& [name, path] : paths) {
    if (path->empty()) {
      if (std::string(name) == "diagnostics") continue;
      throw ConfigError(std::string("missing path: ") + name);
    }
    const std::string norm = fs::absolute(*path).lexically_normal().string();
    if (!seen.insert(norm).second) {
      throw ConfigError(std::string("path '") + *path + "' (" + name +
                        ") is used twice");
    }
  }
  if (!(cfg.prune.confidence_threshold >= 0.0 &&
        cfg.prune.confidence_threshold <= 1.0)) {
    throw ConfigError("confidence_threshold must lie in [0, 1]");
  }
  if (cfg.prune.max_removed < 0) {
    throw ConfigError("max_removed must be nonnegative");
  }
  if (!(cfg.sample_rate_hz > 0.0)) {
    throw ConfigError("sample_rate_hz must be positive");
  }
  if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
  if (!cfg.skip_smoothing) {
    FilterSpec f = cfg.filter;
    f.sample_rate_hz = cfg.sample_rate_hz;
    try {
      validate(f);
    } catch (const SpecError& e) {
      throw ConfigError(std::string("filter: ") + e.what());
    }
  }
}

PipelineConfig load_pipeline_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": invalid JSON (" + e.what() + ")");
  }
  if (!doc.is_object()) throw FormatError(path + ": expected an object");
  static const std::set<std::string> known = {
      "rig",         "keypoints",      "output",      "confidence_threshold",
      "max_removed", "order",          "cutoff_hz",   "sample_rate_hz",
      "skip_smoothing", "single_pass", "interpolate_gaps", "diagnostics",
      "threads"};
  PipelineConfig cfg;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (!known.count(key)) {
        throw ConfigError(path + ": unknown key '" + key + "'");
      }
    }
    auto get = [&](const char* key, auto& dst) {
      if (doc.contains(key)) dst = doc[key].get<std::decay_t<decltype(dst)>>();
    };
    get("rig", cfg.rig_path);
    get("keypoints", cfg.keypoints_path);
    get("output", cfg.output_path);
    get("confidence_threshold", cfg.prune.confidence_threshold);
    get("max_removed", cfg.prune.max_removed);
    get("order", cfg.filter.order);
    get("cutoff_hz", cfg.filter.cutoff_hz);
    get("sample_rate_hz", cfg.sample_rate_hz);
    get("skip_smoothing", cfg.skip_smoothing);
    get("single_pass", cfg.single_pass);
    get("interpolate_gaps", cfg.interpolate_gaps);
    get("diagnostics", cfg.diagnostics_path);
    get("threads", cfg.threads);
  } catch (const json::type_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  cfg.filter.sample_rate_hz = cfg.sample_rate_hz;
  return cfg;
}

PoseSequence cmd_reconstruct(const PipelineConfig& cfg, std::ostream& log) {
  validate(cfg);
  const CameraRig rig = load_rig(cfg.rig_path);
  const auto frames = load_keypoints(cfg.keypoints_path);
  if (frames.empty()) throw FormatError(cfg.keypoints_path + ": no records");
  const KeypointTable table = make_keypoint_table(frames, rig);

  SelectorOptions sel;
  sel.prune = cfg.prune;
  sel.sample_rate_hz = cfg.sample_rate_hz;
  sel.interpolate_gaps = cfg.interpolate_gaps;
  sel.threads = cfg.threads;
  SelectionResult result = select_trajectories(table, rig, sel);
  if (!cfg.diagnostics_path.empty()) {
    write_diagnostics_csv(cfg.diagnostics_path, result.diagnostics);
  }

  PoseSequence out = std::move(result.poses);
  if (!cfg.skip_smoothing) {
    FilterSpec f = cfg.filter;
    f.sample_rate_hz = cfg.sample_rate_hz;
    out = smooth_sequence(out, f, cfg.single_pass);
  }
  save_pose_sequence(out, cfg.output_path);
  log << "reconstructed " << out.size() << " frames from " << rig.cameras.size()
      << " cameras";
  if (cfg.skip_smoothing) {
    log << " (smoothing skipped)";
  } else {
    log << " (order " << cfg.filter.order << ", " << cfg.filter.cutoff_hz
        << " Hz" << (cfg.single_pass ? ", single pass" : ", zero phase") << ")";
  }
  log << "\n";
  return out;
}

// --- evaluate --------------------------------------------------------------

EvaluationReport cmd_evaluate(const EvaluateOptions& opts, std::ostream& log) {
  const PoseSequence pred = load_pose_sequence(opts.pred_path);
  PoseSequence gt;
  if (!opts.markers_path.empty()) {
    if (opts.offsets_path.empty()) {
      throw ConfigError("a marker file needs an offset model");
    }
    gt = apply_offset(load_offset_model(opts.offsets_path),
                      load_marker_sequence(opts.markers_path));
  } else if (!opts.gt_path.empty()) {
    gt = load_pose_sequence(opts.gt_path);
  } else {
    throw ConfigError("ground truth required: a pose file or markers + offsets");
  }

  EvaluationReport r;
  r.mean_error = pose_error(pred, gt, AlignmentMode::kIdentity);
  r.mpjpe = pose_error(pred, gt, AlignmentMode::kHipTranslation);
  r.pa_mpjpe = pose_error(pred, gt, AlignmentMode::kProcrustesSimilarity);

  std::ostringstream csv;
  csv.precision(10);
  csv << "sequence,joint,mean_error_mm,mpjpe_mm,pa_mpjpe_mm\n";
  for (int j = 0; j < kNumJoints; ++j) {
    csv << opts.sequence_name << ',' << Skeleton::coco().name(j) << ','
        << r.mean_error.per_joint_mm[j] << ',' << r.mpjpe.per_joint_mm[j] << ','
        << r.pa_mpjpe.per_joint_mm[j] << '\n';
  }
  csv << opts.sequence_name << ",overall," << r.mean_error.overall_mm << ','
      << r.mpjpe.overall_mm << ',' << r.pa_mpjpe.overall_mm << '\n';
  if (!opts.out_path.empty()) write_text_file(opts.out_path, csv.str());

  log << "frames: " << pred.size() << "\n"
      << "mean error: " << r.mean_error.overall_mm << " mm\n"
      << "MPJPE: " << r.mpjpe.overall_mm << " mm\n"
      << "PA-MPJPE: " << r.pa_mpjpe.overall_mm << " mm\n";
  return r;
}

// --- stats -----------------------------------------------------------------

StatsReport cmd_stats(const StatsOptions& opts, std::ostream& log) {
  if (opts.pose_paths.empty()) throw ConfigError("no pose sequences given");
  ensure_dir(opts.out_dir);
  const std::pair<const char*, std::array<int, 2>> groups[] = {
      {"wrists", {kLeftWrist, kRightWrist}},
      {"ankles", {kLeftAnkle, kRightAnkle}},
      {"hips", {kLeftHip, kRightHip}}};

  StatsReport report;
  std::map<std::string, std::vector<double>> pooled;
  std::ostringstream auc_csv;
  auc_csv.precision(17);
  auc_csv << "sequence,chain,auc\n";

  for (const auto& path : opts.pose_paths) {
    const PoseSequence seq = load_pose_sequence(path);
    const std::string name = stem(path);
    for (const auto& [group, joints] : groups) {
      for (const auto& k : joint_kinematics(seq, joints)) {
        auto& speed = pooled[std::string(group) + "_speed"];
        auto& accel = pooled[std::string(group) + "_accel"];
        speed.insert(speed.end(), k.speed.begin(), k.speed.end());
        accel.insert(accel.end(), k.acceleration.begin(), k.acceleration.end());
      }
    }
    const PoseSequence sampled =
        opts.subsample ? subsample_frames(seq, opts.subsample, opts.seed) : seq;
    for (LimbChain chain : {LimbChain::kWrist, LimbChain::kAnkle}) {
      LocalMovementConfig cfg;
      cfg.n_resolutions = opts.n_resolutions;
      cfg.chain = chain;
      ChainSummary s{name, chain, local_movement(sampled, cfg)};
      std::ostringstream curve;
      curve.precision(17);
      curve << "x,y\n";
      for (std::size_t i = 0; i < s.curve.voxel_sides.size(); ++i) {
        curve << s.curve.voxel_sides[i] << ',' << s.curve.cover_ratios[i]
              << '\n';
      }
      write_text_file((fs::path(opts.out_dir) /
                       (name + "_" + chain_name(chain) + "_local_movement.csv"))
                          .string(),
                      curve.str());
      auc_csv << name << ',' << chain_name(chain) << ',' << s.curve.auc << '\n';
      log << name << " " << chain_name(chain) << " local-movement AUC: "
          << s.curve.auc << "\n";
      report.local_movement.push_back(std::move(s));
    }
  }
  write_text_file((fs::path(opts.out_dir) / "local_movement_auc.csv").string(),
                  auc_csv.str());

  for (const auto& [key, samples] : pooled) {
    CdfSummary c = cdf(samples);
    write_cdf_csv((fs::path(opts.out_dir) / (key + "_cdf.csv")).string(), c);
    log << key << " mean: " << c.mean << "\n";
    report.distributions[key] = std::move(c);
  }
  return report;
}

// --- synth -----------------------------------------------------------------

namespace {

json manifest(const SynthOptions& o, std::size_t frames) {
  const auto& r = o.rig;
  const auto& m = o.motion;
  const auto& c = o.corruption;
  json swaps = json::array();
  for (const auto& [a, b] : c.swap_pairs) swaps.push_back({a, b});
  json doc = {
      {"seed", c.seed},
      {"frames", frames},
      {"rig",
       {{"num_cameras", r.num_cameras},
        {"radius_m", r.radius_m},
        {"heights_m", r.heights_m},
        {"look_at", {r.look_at.x(), r.look_at.y(), r.look_at.z()}},
        {"angle_offset_rad", r.angle_offset_rad},
        {"focal_px", r.focal_px},
        {"image_size", {r.width, r.height}},
        {"dist", {r.k1, r.k2}}}},
      {"motion",
       {{"kind", synth::to_string(m.kind)},
        {"duration_s", m.duration_s},
        {"sample_rate_hz", m.sample_rate_hz},
        {"amplitude_rad", m.amplitude_rad},
        {"frequency_hz", m.frequency_hz},
        {"velocity", {m.velocity.x(), m.velocity.y(), m.velocity.z()}}}},
      {"corruption",
       {{"pixel_noise_sigma", c.pixel_noise_sigma},
        {"swap_probability", c.swap_probability},
        {"dropout_probability", c.dropout_probability},
        {"clean_confidence", {c.clean_confidence.first, c.clean_confidence.second}},
        {"corrupted_confidence",
         {c.corrupted_confidence.first, c.corrupted_confidence.second}},
        {"swap_cameras", c.swap_cameras},
        {"swap_pairs", swaps},
        {"drop_behind_camera", c.drop_behind_camera}}}};
  if (o.with_calibration) {
    const auto& s = o.calibration;
    doc["calibration"] = {{"num_board_poses", s.num_board_poses},
                          {"grid", {s.grid_cols, s.grid_rows}},
                          {"grid_spacing_m", s.grid_spacing_m},
                          {"num_scene_points", s.num_scene_points},
                          {"pixel_noise_sigma", s.pixel_noise_sigma},
                          {"seed", s.seed}};
  }
  return doc;
}

}  // namespace

void cmd_synth(const SynthOptions& opts, std::ostream& log) {
  if (opts.out_dir.empty()) throw ConfigError("missing output directory");
  const CameraRig rig = synth::make_rig(opts.rig);
  const PoseSequence gt = synth::gen_motion(opts.motion);
  const synth::RenderResult rendered =
      synth::render_keypoints(gt, rig, opts.corruption);

  ensure_dir(opts.out_dir);
  const fs::path dir(opts.out_dir);
  save_rig(rig, (dir / "rig.json").string());
  save_keypoints(rendered.frames, (dir / "keypoints.jsonl").string());
  save_pose_sequence(gt, (dir / "gt.json").string());
  if (opts.with_markers) {
    save_marker_sequence(synth::gen_markers(opts.motion),
                         (dir / "markers.json").string());
    save_triad_overrides(synth::default_triads(),
                         (dir / "triads.json").string());
  }
  if (opts.with_calibration) {
    const auto scene = synth::make_calibration_scene(rig, opts.calibration);
    save_calibration_index(scene.cameras,
                           (dir / "calibration.json").string());
    save_observations(scene.observations,
                      (dir / "observations.jsonl").string());
  }
  write_text_file((dir / "manifest.json").string(),
                  manifest(opts, gt.size()).dump(2) + "\n");

  std::size_t swaps = 0, drops = 0;
  for (const auto& e : rendered.log) {
    swaps += e.swapped;
    drops += e.dropped;
  }
  log << "wrote " << gt.size() << " frames x " << rig.cameras.size()
      << " cameras to " << opts.out_dir << " (" << swaps << " swapped, "
      << drops << " dropped detections)\n";
}

// --- fit-offsets -----------------------------------------------------------

OffsetFitReport cmd_fit_offsets(const FitOffsetsOptions& opts,
                                std::ostream& log) {
  const MarkerSequence markers = load_marker_sequence(opts.markers_path);
  const PoseSequence joints = load_pose_sequence(opts.joints_path);
  std::map<std::string, std::array<std::string, 3>> overrides;
  if (!opts.overrides_path.empty()) {
    overrides = load_triad_overrides(opts.overrides_path);
  }
  OffsetFitReport report = fit_offset_model(markers, joints, overrides);
  save_offset_model(report.model, opts.out_path);
  log << "joint,markers,rms_residual_m,frames\n";
  for (int j = 0; j < kNumJoints; ++j) {
    const std::string name(Skeleton::coco().name(j));
    const auto& fit = report.fits.at(name);
    const auto& m = report.model.joints.at(name).markers;
    log << name << ',' << m[0] << ' ' << m[1] << ' ' << m[2] << ','
        << fit.rms_residual << ',' << fit.frames_used << '\n';
  }
  return report;
}

}  // namespace posecap::commands
