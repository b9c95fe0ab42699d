// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any
// criterion fails.

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "posecap/alignment.hpp"
#include "posecap/butterworth.hpp"
#include "posecap/calibration.hpp"
#include "posecap/local_movement.hpp"
#include "posecap/metrics.hpp"
#include "posecap/selector.hpp"
#include "posecap/synth.hpp"

using namespace posecap;

namespace {

int g_failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s: %s (%s)\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double max_error(const PoseSequence& a, const PoseSequence& b) {
  double m = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (int j = 0; j < kNumJoints; ++j) m = std::max(m, (a.frames[t][j] - b.frames[t][j]).norm());
  }
  return m;
}

PoseSequence reconstruct(const PoseSequence& gt, const CameraRig& rig,
                         const synth::CorruptionSpec& c, bool smooth) {
  const auto frames = synth::render_keypoints(gt, rig, c).frames;
  const KeypointTable table = make_keypoint_table(frames, rig);
  PoseSequence out = select_trajectories(table, rig).poses;
  if (smooth) out = smooth_sequence(out, FilterSpec{});
  return out;
}

Mat3 rot(double angle, const Vec3& axis) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

// --- criteria --------------------------------------------------------------

void end_to_end_identity() {
  const auto start = std::chrono::steady_clock::now();
  const CameraRig rig = synth::make_rig({});
  const PoseSequence gt = synth::gen_motion({});
  const PoseSequence out = reconstruct(gt, rig, {}, false);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double err = max_error(out, gt);
  report(out.size() == 200 && err < 1e-6 && secs < 30.0,
         "end-to-end identity, 7 cameras x 200 frames, zero corruption",
         fmt("max error %.3g m, %.2f s", err, secs));
  // Smoothing is not an identity on moving data; reported for reference.
  const double smoothed = max_error(smooth_sequence(out, FilterSpec{}), gt);
  std::printf("INFO: same scene after 6 Hz smoothing, max error %.3g m\n", smoothed);
}

void candidate_combinatorics() {
  bool ok = true;
  std::string detail;
  for (int K = 2; K <= 8; ++K) {
    std::vector<int> cams(K);
    for (int k = 0; k < K; ++k) cams[k] = k;
    const std::size_t n = enumerate_subsets(cams).size();
    const std::size_t expect = (std::size_t(1) << K) - K - 1;
    ok = ok && n == expect;
    detail += (detail.empty() ? "" : " ") + std::to_string(n);
  }
  std::vector<int> seven = {0, 1, 2, 3, 4, 5, 6};
  ok = ok && enumerate_subsets(seven).size() == 120;
  report(ok, "subset counts 2^K-K-1 for K=2..8, 120 at K=7", "counts " + detail);
}

double brute_force_min(const std::vector<CandidateLayer>& layers) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(layers.size(), 0);
  while (true) {
    double cost = 0.0;
    for (std::size_t t = 1; t < layers.size(); ++t) {
      cost += (layers[t].nodes[idx[t]].position - layers[t - 1].nodes[idx[t - 1]].position).norm();
    }
    best = std::min(best, cost);
    std::size_t t = 0;
    while (t < layers.size() && ++idx[t] == layers[t].nodes.size()) idx[t++] = 0;
    if (t == layers.size()) break;
  }
  return best;
}

void dag_oracle() {
  std::mt19937_64 rng(20260415);
  std::uniform_int_distribution<int> n_layers(1, 5), n_nodes(1, 6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int matches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CandidateLayer> layers(n_layers(rng));
    for (auto& l : layers) {
      l.nodes.resize(n_nodes(rng));
      for (auto& n : l.nodes) n.position = Vec3(u(rng), u(rng), u(rng));
    }
    matches += shortest_path(layers).total_cost == brute_force_min(layers);
  }
  report(matches == 50, "DAG shortest path equals exhaustive minimum on 50 instances",
         std::to_string(matches) + "/50 exact");
}

void pruning_efficacy() {
  const CameraRig rig = synth::make_rig({});
  const PoseSequence gt = synth::gen_motion({});
  synth::CorruptionSpec swapped;
  swapped.swap_probability = 1.0;
  swapped.swap_cameras = {2};
  swapped.swap_pairs = {{kLeftWrist, kRightWrist}};
  const double clean = max_error(reconstruct(gt, rig, {}, true), gt);
  const PoseSequence corrupt = reconstruct(gt, rig, swapped, true);
  const double dirty = max_error(corrupt, gt);
  const double diff = max_error(corrupt, reconstruct(gt, rig, {}, true));
  report(std::abs(dirty - clean) < 1e-9 && diff < 1e-9,
         "pruning removes a camera with swapped low-confidence wrists",
         fmt("clean %.6g m, corrupted %.6g m", clean, dirty) +
             fmt(", pose difference %.3g m", diff));
}

void robustness_ordering() {
  const CameraRig rig = synth::make_rig({});
  const PoseSequence gt = synth::gen_motion({});
  int wins = 0;
  double sum_pipe = 0.0, sum_all = 0.0;
  for (unsigned long long seed = 1; seed <= 10; ++seed) {
    synth::CorruptionSpec c;
    c.pixel_noise_sigma = 2.0;
    c.swap_probability = 0.05;
    c.seed = seed;
    const auto frames = synth::render_keypoints(gt, rig, c).frames;
    const KeypointTable table = make_keypoint_table(frames, rig);
    const PoseSequence pipe =
        smooth_sequence(select_trajectories(table, rig).poses, FilterSpec{});
    const PoseSequence all = triangulate_all_cameras(table, rig);
    const double e_pipe = pose_error(pipe, gt, AlignmentMode::kHipTranslation).overall_mm;
    const double e_all = pose_error(all, gt, AlignmentMode::kHipTranslation).overall_mm;
    wins += e_pipe <= e_all;
    sum_pipe += e_pipe;
    sum_all += e_all;
  }
  report(wins >= 9, "pipeline MPJPE <= all-camera triangulation MPJPE on >= 9/10 seeds",
         std::to_string(wins) + "/10 seeds" +
             fmt(", mean %.2f mm vs %.2f mm", sum_pipe / 10, sum_all / 10));
}

void filter_response() {
  const SosChain chain = design_butterworth(FilterSpec{});
  const double h6 = chain.magnitude(6.0, 90.0);
  const double h0 = chain.magnitude(0.0, 90.0);
  const double db30 = -20.0 * std::log10(chain.magnitude(30.0, 90.0));

  // Zero-phase 1 Hz sine: amplitude and lag from the interior samples.
  const int n = 900;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sin(2 * M_PI * i / 90.0);
  const auto y = filter_zero_phase(chain, x);
  int best_lag = 0;
  double best = -1e300;
  for (int lag = -10; lag <= 10; ++lag) {
    double acc = 0.0;
    for (int i = 100; i < n - 100; ++i) acc += x[i] * y[i + lag];
    if (acc > best) best = acc, best_lag = lag;
  }
  double ax = 0.0, ay = 0.0;
  for (int i = 100; i < n - 100; ++i) ax = std::max(ax, std::abs(x[i])), ay = std::max(ay, std::abs(y[i]));
  const double loss = 1.0 - ay / ax;
  report(std::abs(h6 - std::sqrt(0.5)) < 1e-4 && std::abs(h0 - 1.0) < 1e-12 && db30 >= 55.0 &&
             best_lag == 0 && loss < 0.01,
         "Butterworth 4th order, 6 Hz at 90 Hz",
         fmt("|H(6)| %.6f, |H(0)|-1 %.2g", h6, h0 - 1.0) + fmt(", %.1f dB at 30 Hz", db30) +
             ", lag " + std::to_string(best_lag) + fmt(", 1 Hz loss %.4f%%", 100 * loss));
}

double calibration_error(double sigma) {
  const CameraRig truth = synth::make_rig({});
  synth::CalibrationSceneSpec spec;
  spec.pixel_noise_sigma = sigma;
  spec.seed = 11;
  const auto scene = synth::make_calibration_scene(truth, spec);
  const CameraRig initial = initialize_rig(scene.cameras);
  const auto points = triangulate_observations(initial, scene.observations);
  std::vector<Observation3D> usable;
  for (const auto& o : scene.observations) {
    if (points.count(o.point_id)) usable.push_back(o);
  }
  return bundle_adjust(initial, usable, points).mean_error_px;
}

void calibration_oracle() {
  const double e0 = calibration_error(0.0);
  const double e1 = calibration_error(0.5);
  report(e0 < 1e-8 && e1 < 1.0, "calibration reprojection error after bundle adjustment",
         fmt("noiseless %.3g px, sigma 0.5: %.3f px", e0, e1));
}

// Rigid triad tumbling through many orientations.
struct Rigid {
  Mat3 R;
  Vec3 p;
};

std::vector<Rigid> tumble(int n, double phase) {
  std::vector<Rigid> out;
  for (int i = 0; i < n; ++i) {
    const double s = 0.05 * i + phase;
    out.push_back({rot(1.3 * std::sin(s), Vec3::UnitZ()) *
                       rot(0.9 * std::sin(0.7 * s + 1.0), Vec3::UnitX()) * rot(s, Vec3(1, 1, 0)),
                   Vec3(0.5 * std::sin(0.3 * s), 0.2 * s, 1.0)});
  }
  return out;
}

void alignment_oracle() {
  const Vec3 w(0.03, -0.01, 0.05);
  const std::array<Vec3, 3> body = {Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0.02, 0.08, 0.01)};
  const Vec3 J = local_frame(body[0], body[1], body[2]).to_world(w);
  auto samples = [&](const std::vector<Rigid>& motion, double noise, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<TriadSample> out;
    for (const auto& m : motion) {
      auto jit = [&] { return noise * Vec3(n(rng), n(rng), n(rng)); };
      out.push_back({m.R * body[0] + m.p + jit(), m.R * body[1] + m.p + jit(),
                     m.R * body[2] + m.p + jit(), m.R * J + m.p});
    }
    return out;
  };
  const auto train = tumble(200, 0.0);
  const OffsetFit clean = fit_joint_offset(samples(train, 0.0, 1));
  const OffsetFit noisy = fit_joint_offset(samples(train, 0.001, 2));
  const double e_clean = (clean.weights - w).norm();
  const double e_noisy = (noisy.weights - w).norm();

  // Held-out application through the marker model.
  const auto held = tumble(90, 7.3);
  MarkerSequence markers;
  markers.marker_names = {"a", "b", "c"};
  for (const auto& m : held) {
    markers.frames.push_back({m.R * body[0] + m.p, m.R * body[1] + m.p, m.R * body[2] + m.p});
  }
  JointOffsetModel model;
  for (int j = 0; j < kNumJoints; ++j) {
    model.joints[std::string(Skeleton::coco().name(j))] = {{"a", "b", "c"}, clean.weights};
  }
  const PoseSequence applied = apply_offset(model, markers);
  double e_held = 0.0;
  for (std::size_t t = 0; t < held.size(); ++t) {
    for (int j = 0; j < kNumJoints; ++j) {
      e_held = std::max(e_held, (applied.frames[t][j] - (held[t].R * J + held[t].p)).norm());
    }
  }

  // Equivariance: the same noisy data under a rigid motion gives the same w.
  auto data = samples(train, 0.001, 3);
  auto moved = data;
  const Mat3 G = rot(2.1, Vec3(0.3, -1, 0.5));
  const Vec3 g(10.0, -3.0, 0.5);
  for (auto& s : moved) {
    s.m1 = G * *s.m1 + g;
    s.m2 = G * *s.m2 + g;
    s.m3 = G * *s.m3 + g;
    s.joint = G * *s.joint + g;
  }
  const double e_equi =
      (fit_joint_offset(data).weights - fit_joint_offset(moved).weights).norm();
  report(e_clean < 1e-9 && e_noisy < 2e-3 && e_held < 1e-9 && e_equi < 1e-9,
         "marker offset fit recovery, held-out application, equivariance",
         fmt("noiseless %.3g m, 1 mm noise %.3g m", e_clean, e_noisy) +
             fmt(", held-out %.3g m, equivariance %.3g m", e_held, e_equi));
}

void metric_identities() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.4);
  PoseSequence gt, pred;
  for (int t = 0; t < 1000; ++t) {
    Pose g, p;
    for (int j = 0; j < kNumJoints; ++j) {
      g[j] = Vec3(n(rng), n(rng), n(rng) + 1.0);
      p[j] = g[j] + 0.1 * Vec3(n(rng), n(rng), n(rng));
    }
    gt.frames.push_back(g);
    pred.frames.push_back(p);
  }
  PoseSequence shifted = gt;
  for (auto& f : shifted.frames) {
    for (auto& q : f) q += Vec3(0.006, -0.008, 0.0);
  }
  const double mean = pose_error(shifted, gt, AlignmentMode::kIdentity).overall_mm;
  const double mpjpe = pose_error(shifted, gt, AlignmentMode::kHipTranslation).overall_mm;
  const double pa = pose_error(shifted, gt, AlignmentMode::kProcrustesSimilarity).overall_mm;
  const auto rss_pa = per_frame_rss(pred, gt, AlignmentMode::kProcrustesSimilarity);
  const auto rss_hip = per_frame_rss(pred, gt, AlignmentMode::kHipTranslation);
  int ok_frames = 0;
  for (std::size_t t = 0; t < rss_pa.size(); ++t) ok_frames += rss_pa[t] <= rss_hip[t];
  report(std::abs(mean - 10.0) < 1e-9 && mpjpe < 1e-9 && pa < 1e-9 && ok_frames == 1000,
         "10 mm offset gives 10/0/0 mm; Procrustes RSS <= hip RSS on 1000 frames",
         fmt("%.9f / %.2g", mean, mpjpe) + fmt(" / %.2g mm, ", pa) +
             std::to_string(ok_frames) + "/1000 frames");
}

void local_movement_properties() {
  // Stationary joint: a single voxel per side.
  synth::MotionSpec still;
  still.kind = synth::MotionKind::kStatic;
  const PoseSequence s = synth::gen_motion(still);
  const double auc_still = local_movement_auc(s, {});
  const double expect = 1.0 / (2.0 * s.size());

  // Cover ratio as the side shrinks, on nested (dyadic) grids.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  std::uniform_int_distribution<int> sz(2, 400);
  int monotone_sets = 0, logspaced_violations = 0;
  const auto sides = voxel_sides(50);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> pts(sz(rng));
    for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
    bool mono = true;
    double prev = 0.0;
    for (int k = 0; k <= 12; ++k) {
      const double r = cover_ratio(pts, std::ldexp(1.0, -k));
      mono = mono && r >= prev;
      prev = r;
    }
    monotone_sets += mono;
    prev = 0.0;
    for (double side : sides) {
      const double r = cover_ratio(pts, side);
      logspaced_violations += r < prev;
      prev = r;
    }
  }

  synth::MotionSpec m;
  m.duration_s = 6.0;
  m.kind = synth::MotionKind::kSweep;
  const PoseSequence sweep = synth::gen_motion(m);
  m.kind = synth::MotionKind::kSwing;
  const PoseSequence arc = synth::gen_motion(m);
  const double a_sweep = local_movement_auc(sweep, {});
  const double a_arc = local_movement_auc(arc, {});

  PoseSequence moved = sweep;
  const Mat3 R = rot(0.7, Vec3(1, 2, 3));
  for (auto& f : moved.frames) {
    for (auto& p : f) p = R * p + Vec3(-3, 5, 0.2);
  }
  const double d_rigid = std::abs(local_movement_auc(moved, {}) - a_sweep);

  report(std::abs(auc_still - expect) < 1e-15, "stationary joint AUC equals 1/(2F)",
         fmt("%.17g vs %.17g", auc_still, expect));
  report(monotone_sets == 100, "cover ratio nonincreasing in voxel side (nested grids)",
         std::to_string(monotone_sets) + "/100 sets");
  std::printf("INFO: log-spaced sides, %d increases of cover ratio with side across 100 sets\n",
              logspaced_violations);
  report(d_rigid < 1e-9, "local movement AUC invariant under rigid motion",
         fmt("difference %.3g", d_rigid));
  report(a_sweep > a_arc, "sphere sweep AUC exceeds fixed arc AUC",
         fmt("%.4f vs %.4f", a_sweep, a_arc));
}

void kinematics() {
  const double fs = 90.0, A = 0.5, f = 2.0;
  PoseSequence sine, lin;
  sine.sample_rate_hz = lin.sample_rate_hz = fs;
  for (int t = 0; t < 270; ++t) {
    Pose p, q;
    p.fill(Vec3::Zero());
    q.fill(Vec3::Zero());
    p[kRightWrist] = Vec3(0, A * std::sin(2 * M_PI * f * t / fs), 1);
    q[kRightWrist] = Vec3(0.6, 0.8, 0) * (t / fs);
    sine.frames.push_back(p);
    lin.frames.push_back(q);
  }
  const int joint[] = {kRightWrist};
  const auto ks = joint_kinematics(sine, joint);
  const double peak = *std::max_element(ks[0].speed.begin(), ks[0].speed.end());
  const double rel = std::abs(peak - 2 * M_PI * f * A) / (2 * M_PI * f * A);
  double worst = 0.0;
  const auto kl = joint_kinematics(lin, joint);
  for (double v : kl[0].speed) worst = std::max(worst, std::abs(v - 1.0));
  report(rel < 0.005 && worst < 1e-9, "speed of a 2 Hz sinusoid and a constant velocity",
         fmt("peak error %.3f%%, constant-velocity error %.3g", 100 * rel, worst));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const std::pair<const char*, void (*)()> criteria[] = {
      {"end-to-end identity", end_to_end_identity},
      {"candidate combinatorics", candidate_combinatorics},
      {"DAG oracle", dag_oracle},
      {"pruning efficacy", pruning_efficacy},
      {"robustness ordering", robustness_ordering},
      {"filter response", filter_response},
      {"calibration oracle", calibration_oracle},
      {"alignment oracle", alignment_oracle},
      {"metric identities", metric_identities},
      {"local movement", local_movement_properties},
      {"kinematics", kinematics},
  };
  for (const auto& [name, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(false, name, std::string("threw: ") + e.what());
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s: %d failure(s), %.1f s total\n", g_failures ? "FAILED" : "ALL PASSED",
              g_failures, secs);
  return g_failures ? 1 : 0;
}
