// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/synth.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "posecap/errors.hpp"

namespace posecap::synth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGolden = std::numbers::phi;

Mat3 rot_z(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
}

Mat3 rot_x(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix();
}

// Spherical direction in the body frame: x lateral (subject's right),
// y forward, z up.
Vec3 dir(double azimuth, double elevation) {
  return {std::cos(elevation) * std::cos(azimuth),
          std::cos(elevation) * std::sin(azimuth), std::sin(elevation)};
}

Vec3 mirror_x(const Vec3& v) { return {-v.x(), v.y(), v.z()}; }

struct Limb {
  Vec3 upper;  // body-frame unit directions, right-side convention
  Vec3 lower;
};

struct Segment {
  std::string name;
  Mat3 frame;  // columns: segment axes in world
  Vec3 origin;
  double length = 0.0;  // 0 for the trunk segments
};

struct BodyState {
  Pose pose;
  std::vector<Segment> segments;
};

// Frame with its first axis along `axis`; the second axis is whichever of
// forward/up is less aligned with it, orthogonalized.
Mat3 axis_frame(const Vec3& axis, const Vec3& forward, const Vec3& up) {
  const Vec3 ref =
      std::abs(axis.dot(forward)) < std::abs(axis.dot(up)) ? forward : up;
  const Vec3 e2 = (ref - ref.dot(axis) * axis).normalized();
  Mat3 m;
  m.col(0) = axis;
  m.col(1) = e2;
  m.col(2) = axis.cross(e2);
  return m;
}

struct Pattern {
  Limb arm;
  Limb leg;
};

Pattern rest_pattern() {
  return {{dir(0.0, -75.0 * kPi / 180.0), dir(kPi / 3.0, -kPi / 3.0)},
          {dir(0.0, -88.0 * kPi / 180.0), dir(0.0, -89.0 * kPi / 180.0)}};
}

Pattern swing_pattern(double theta) {
  const double phi = -0.6 * theta;
  return {{Vec3(0.08, std::sin(theta), -std::cos(theta)).normalized(),
           Vec3(0.08, std::sin(theta + 0.4), -std::cos(theta + 0.4))
               .normalized()},
          {Vec3(0.02, std::sin(phi), -std::cos(phi)).normalized(),
           Vec3(0.02, std::sin(phi - 0.15), -std::cos(phi - 0.15))
               .normalized()}};
}

Pattern sweep_pattern(double a1, double a2) {
  return {{dir(0.8 + a2, -0.6 + a1), dir(1.2 + a2, -0.3 + 1.2 * a1)},
          {dir(0.3 * a2, -1.4 + 0.3 * a1), dir(0.2 * a2, -1.5 + 0.2 * a1)}};
}

BodyState evaluate(const MotionSpec& spec, double t) {
  const BodyDims& d = spec.dims;
  const double A = spec.amplitude_rad;
  const double w = 2.0 * kPi * spec.frequency_hz;
  const double duration =
      static_cast<double>(frame_count(spec)) / spec.sample_rate_hz;

  Vec3 pelvis(0.0, 0.0, d.pelvis_height);
  double yaw = 0.0;
  double lean = 0.0;
  Pattern right = rest_pattern();
  Pattern left = right;

  switch (spec.kind) {
    case MotionKind::kStatic:
      break;
    case MotionKind::kLinear:
      pelvis += spec.velocity * (t - 0.5 * duration);
      break;
    case MotionKind::kSwing:
      right = swing_pattern(A * std::sin(w * t));
      left = swing_pattern(A * std::sin(w * t + kPi));
      break;
    case MotionKind::kSweep:
      right = sweep_pattern(A * std::sin(w * t),
                            A * std::sin(w * kGolden * t + 0.7));
      left = right;
      break;
    case MotionKind::kBurst:
      pelvis += Vec3(0.4 * std::sin(2.0 * kPi * 0.3 * t),
                     0.3 * std::sin(2.0 * kPi * 0.2 * t + 0.5),
                     0.03 * std::sin(2.0 * kPi * 1.5 * t));
      yaw = 0.8 * std::sin(2.0 * kPi * 0.25 * t);
      lean = 0.25 * std::sin(2.0 * kPi * 0.4 * t);
      right = sweep_pattern(A * std::sin(2.0 * w * t),
                            A * std::sin(2.0 * w * kGolden * t + 0.7));
      left = sweep_pattern(A * std::sin(2.0 * w * t + 1.3),
                           A * std::sin(2.0 * w * kGolden * t + 2.1));
      break;
  }

  const Mat3 Rb = rot_z(yaw);
  const Mat3 Rt = Rb * rot_x(-lean);
  const Vec3 forward = Rb * Vec3::UnitY();
  const Vec3 up = Vec3::UnitZ();

  BodyState s;
  Pose& p = s.pose;
  p[kRightHip] = pelvis + Rb * Vec3(d.hip_half_width, 0, 0);
  p[kLeftHip] = pelvis - Rb * Vec3(d.hip_half_width, 0, 0);
  const Vec3 top = pelvis + Rt * Vec3(0, 0, d.torso);
  p[kRightShoulder] = top + Rt * Vec3(d.shoulder_half_width, 0, 0);
  p[kLeftShoulder] = top - Rt * Vec3(d.shoulder_half_width, 0, 0);
  const Vec3 head = top + Rt * Vec3(0, 0, d.neck);
  p[kNose] = head + Rt * Vec3(0, 0.1, 0);
  p[kRightEye] = head + Rt * Vec3(0.035, 0.085, 0.03);
  p[kLeftEye] = head + Rt * Vec3(-0.035, 0.085, 0.03);
  p[kRightEar] = head + Rt * Vec3(0.075, 0, 0);
  p[kLeftEar] = head + Rt * Vec3(-0.075, 0, 0);

  s.segments.push_back({"pelvis", Rb, pelvis, 0.0});
  s.segments.push_back({"torso", Rt, pelvis, 0.0});
  s.segments.push_back({"head", Rt, head, 0.0});

  auto chain = [&](const std::string& prefix, const Limb& limb, bool mirrored,
                   const Mat3& R, int root, int mid, int tip,
                   const char* upper_name, const char* lower_name,
                   double upper_len, double lower_len) {
    const Vec3 du = R * (mirrored ? mirror_x(limb.upper) : limb.upper);
    const Vec3 dl = R * (mirrored ? mirror_x(limb.lower) : limb.lower);
    p[mid] = p[root] + upper_len * du;
    p[tip] = p[mid] + lower_len * dl;
    s.segments.push_back({prefix + upper_name, axis_frame(du, forward, up),
                          p[root], upper_len});
    s.segments.push_back({prefix + lower_name, axis_frame(dl, forward, up),
                          p[mid], lower_len});
  };
  chain("r_", right.arm, false, Rt, kRightShoulder, kRightElbow, kRightWrist,
        "upper_arm", "forearm", d.upper_arm, d.forearm);
  chain("l_", left.arm, true, Rt, kLeftShoulder, kLeftElbow, kLeftWrist,
        "upper_arm", "forearm", d.upper_arm, d.forearm);
  chain("r_", right.leg, false, Rb, kRightHip, kRightKnee, kRightAnkle,
        "thigh", "shank", d.thigh, d.shank);
  chain("l_", left.leg, true, Rb, kLeftHip, kLeftKnee, kLeftAnkle, "thigh",
        "shank", d.thigh, d.shank);
  return s;
}

// Marker offsets in segment axes.
std::array<Vec3, 4> marker_offsets(const Segment& seg) {
  if (seg.name == "pelvis") {
    return {Vec3(0.12, -0.08, 0.05), Vec3(-0.12, -0.08, 0.05),
            Vec3(0.0, -0.1, 0.15), Vec3(0.0, 0.08, 0.1)};
  }
  if (seg.name == "torso") {
    return {Vec3(0.1, 0.1, 0.35), Vec3(-0.1, 0.1, 0.35), Vec3(0.0, -0.1, 0.45),
            Vec3(0.0, 0.1, 0.2)};
  }
  if (seg.name == "head") {
    return {Vec3(0.08, 0.05, 0.08), Vec3(-0.08, 0.05, 0.08),
            Vec3(0.0, -0.1, 0.1), Vec3(0.0, 0.0, 0.12)};
  }
  const double L = seg.length;
  return {Vec3(0.3 * L, 0.05, 0.0), Vec3(0.5 * L, 0.0, 0.05),
          Vec3(0.7 * L, -0.05, 0.0), Vec3(0.55 * L, 0.0, -0.05)};
}

void check_range(const std::pair<double, double>& r, const char* what) {
  if (!(r.first >= 0.0 && r.first <= r.second && r.second <= 1.0)) {
    throw SpecError(std::string(what) + " must satisfy 0 <= lo <= hi <= 1");
  }
}

std::vector<std::pair<int, int>> all_pairs() {
  std::vector<std::pair<int, int>> out;
  const Skeleton& sk = Skeleton::coco();
  for (int j = 0; j < kNumJoints; ++j) {
    if (sk.mirror(j) > j) out.emplace_back(j, sk.mirror(j));
  }
  return out;
}

}  // namespace

CameraRig make_rig(const RigSpec& spec) {
  if (spec.num_cameras < 2) throw SpecError("rig needs at least two cameras");
  if (!(spec.radius_m > 0.0)) throw SpecError("rig radius must be positive");
  if (spec.heights_m.empty()) throw SpecError("rig needs at least one height");
  CameraRig rig;
  for (int k = 0; k < spec.num_cameras; ++k) {
    const double a = 2.0 * kPi * k / spec.num_cameras + spec.angle_offset_rad;
    const Vec3 pos(spec.look_at.x() + spec.radius_m * std::cos(a),
                   spec.look_at.y() + spec.radius_m * std::sin(a),
                   spec.heights_m[k % spec.heights_m.size()]);
    const Vec3 forward = (spec.look_at - pos).normalized();
    const Vec3 side = forward.cross(Vec3::UnitZ());
    if (side.norm() < 1e-9) {
      throw SpecError("camera " + std::to_string(k) + " looks straight down");
    }
    const Vec3 right = side.normalized();
    const Vec3 down = forward.cross(right);
    CameraParams cam;
    cam.camera_id = "cam" + std::to_string(k);
    cam.fx = cam.fy = spec.focal_px;
    cam.cx = 0.5 * spec.width;
    cam.cy = 0.5 * spec.height;
    cam.k1 = spec.k1;
    cam.k2 = spec.k2;
    cam.R.row(0) = right;
    cam.R.row(1) = down;
    cam.R.row(2) = forward;
    cam.t = -cam.R * pos;
    cam.width = spec.width;
    cam.height = spec.height;
    validate(cam);
    const Vec2 px = project(cam, spec.look_at);
    if (px.x() < 0 || px.y() < 0 || px.x() > cam.width || px.y() > cam.height) {
      throw SpecError("camera " + cam.camera_id +
                      " does not see the look-at point");
    }
    rig.cameras.push_back(std::move(cam));
  }
  validate(rig);
  return rig;
}

std::size_t frame_count(const MotionSpec& spec) {
  const double n = std::round(spec.duration_s * spec.sample_rate_hz);
  return n > 0.0 ? static_cast<std::size_t>(n) : 0;
}

void validate(const MotionSpec& spec) {
  if (!(spec.sample_rate_hz > 0.0)) {
    throw SpecError("motion sample rate must be positive");
  }
  if (!(spec.duration_s > 0.0) || frame_count(spec) < 3) {
    throw SpecError("motion must span at least three frames");
  }
  const BodyDims& d = spec.dims;
  for (double len : {d.pelvis_height, d.hip_half_width, d.torso,
                     d.shoulder_half_width, d.neck, d.upper_arm, d.forearm,
                     d.thigh, d.shank}) {
    if (!(len > 0.0)) throw SpecError("body dimensions must be positive");
  }
  if (!std::isfinite(spec.amplitude_rad) || !std::isfinite(spec.frequency_hz) ||
      !spec.velocity.allFinite()) {
    throw SpecError("motion parameters must be finite");
  }
}

PoseSequence gen_motion(const MotionSpec& spec) {
  validate(spec);
  PoseSequence seq;
  seq.sample_rate_hz = spec.sample_rate_hz;
  const std::size_t n = frame_count(spec);
  seq.frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    seq.frames.push_back(evaluate(spec, i / spec.sample_rate_hz).pose);
  }
  return seq;
}

MarkerSequence gen_markers(const MotionSpec& spec) {
  validate(spec);
  MarkerSequence seq;
  seq.sample_rate_hz = spec.sample_rate_hz;
  const std::size_t n = frame_count(spec);
  for (std::size_t i = 0; i < n; ++i) {
    const BodyState s = evaluate(spec, i / spec.sample_rate_hz);
    std::vector<std::optional<Vec3>> row;
    for (const Segment& seg : s.segments) {
      const auto offsets = marker_offsets(seg);
      for (int m = 0; m < 4; ++m) {
        if (i == 0) {
          seq.marker_names.push_back(seg.name + "_" + std::to_string(m + 1));
        }
        row.push_back(seg.origin + seg.frame * offsets[m]);
      }
    }
    seq.frames.push_back(std::move(row));
  }
  return seq;
}

std::map<std::string, std::array<std::string, 3>> default_triads() {
  auto triad = [](const std::string& seg) {
    return std::array<std::string, 3>{seg + "_1", seg + "_2", seg + "_3"};
  };
  const std::array<const char*, kNumJoints> segment = {
      "head",        "head",        "head",      "head",      "head",
      "torso",       "torso",       "l_upper_arm", "r_upper_arm",
      "l_forearm",   "r_forearm",   "pelvis",    "pelvis",    "l_thigh",
      "r_thigh",     "l_shank",     "r_shank"};
  std::map<std::string, std::array<std::string, 3>> out;
  for (int j = 0; j < kNumJoints; ++j) {
    out[std::string(Skeleton::coco().name(j))] = triad(segment[j]);
  }
  return out;
}

void validate(const CorruptionSpec& spec) {
  if (!(spec.pixel_noise_sigma >= 0.0) || !std::isfinite(spec.pixel_noise_sigma)) {
    throw SpecError("pixel noise sigma must be finite and nonnegative");
  }
  for (double p : {spec.swap_probability, spec.dropout_probability}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw SpecError("probabilities must lie in [0, 1]");
    }
  }
  check_range(spec.clean_confidence, "clean confidence range");
  check_range(spec.corrupted_confidence, "corrupted confidence range");
  const Skeleton& sk = Skeleton::coco();
  for (const auto& [a, b] : spec.swap_pairs) {
    if (a < 0 || a >= kNumJoints || b < 0 || b >= kNumJoints ||
        sk.mirror(a) != b || a == b) {
      throw SpecError("swap pairs must be left/right joint pairs");
    }
  }
}

RenderResult render_keypoints(const PoseSequence& gt, const CameraRig& rig,
                              const CorruptionSpec& corruption) {
  validate(gt);
  validate(rig);
  validate(corruption);
  const auto pairs =
      corruption.swap_pairs.empty() ? all_pairs() : corruption.swap_pairs;
  const std::size_t T = gt.size();
  const std::size_t K = rig.cameras.size();

  // Per camera, all frames; interleaved afterwards.
  std::vector<std::vector<KeypointFrame>> per_camera(K);
  std::vector<std::vector<CorruptionEvent>> events(K);
  for (std::size_t c = 0; c < K; ++c) {
    const CameraParams& cam = rig.cameras[c];
    std::seed_seq seq{static_cast<std::uint32_t>(corruption.seed),
                      static_cast<std::uint32_t>(corruption.seed >> 32),
                      static_cast<std::uint32_t>(c)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const bool may_swap =
        corruption.swap_cameras.empty() ||
        std::find(corruption.swap_cameras.begin(), corruption.swap_cameras.end(),
                  static_cast<int>(c)) != corruption.swap_cameras.end();

    for (std::size_t t = 0; t < T; ++t) {
      std::array<std::optional<Vec2>, kNumJoints> px;
      for (int j = 0; j < kNumJoints; ++j) {
        try {
          px[j] = project(cam, gt.frames[t][j]);
        } catch (const BehindCameraError&) {
          if (!corruption.drop_behind_camera) throw;
        }
      }
      std::array<int, kNumJoints> source;
      for (int j = 0; j < kNumJoints; ++j) source[j] = j;
      std::array<bool, kNumJoints> corrupted{};
      for (const auto& [a, b] : pairs) {
        const bool swap = uniform(rng) < corruption.swap_probability;
        if (swap && may_swap) {
          std::swap(source[a], source[b]);
          corrupted[a] = corrupted[b] = true;
        }
      }
      KeypointFrame frame;
      frame.camera_id = cam.camera_id;
      frame.frame_index = static_cast<std::int64_t>(t);
      for (int j = 0; j < kNumJoints; ++j) {
        const double nu = normal(rng);
        const double nv = normal(rng);
        const bool drop = uniform(rng) < corruption.dropout_probability;
        const double r = uniform(rng);
        const auto& range = corrupted[j] ? corruption.corrupted_confidence
                                         : corruption.clean_confidence;
        const double conf = range.first + r * (range.second - range.first);
        if (corrupted[j] || drop) {
          events[c].push_back({frame.frame_index, static_cast<int>(c), j,
                               corrupted[j], drop});
        }
        if (drop || !px[source[j]]) continue;
        const Vec2 p = *px[source[j]] +
                       corruption.pixel_noise_sigma * Vec2(nu, nv);
        frame.keypoints[j] = Keypoint2D{p.x(), p.y(), conf};
      }
      per_camera[c].push_back(std::move(frame));
    }
  }

  RenderResult out;
  out.frames.reserve(T * K);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < K; ++c) {
      out.frames.push_back(std::move(per_camera[c][t]));
    }
  }
  for (std::size_t c = 0; c < K; ++c) {
    out.log.insert(out.log.end(), events[c].begin(), events[c].end());
  }
  std::stable_sort(out.log.begin(), out.log.end(),
                   [](const CorruptionEvent& a, const CorruptionEvent& b) {
                     return a.frame != b.frame ? a.frame < b.frame
                                               : a.camera < b.camera;
                   });
  return out;
}

CalibrationScene make_calibration_scene(const CameraRig& rig,
                                        const CalibrationSceneSpec& spec) {
  validate(rig);
  if (spec.num_board_poses < 3 || spec.grid_cols < 3 || spec.grid_rows < 3 ||
      !(spec.grid_spacing_m > 0.0) || spec.num_scene_points < 0 ||
      !(spec.pixel_noise_sigma >= 0.0)) {
    throw SpecError("invalid calibration scene specification");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto noisy = [&](const Vec2& p) {
    const double nu = normal(rng);
    const double nv = normal(rng);
    return Vec2(p + spec.pixel_noise_sigma * Vec2(nu, nv));
  };
  auto in_image = [](const CameraParams& cam, const Vec2& p) {
    return p.x() >= 0 && p.y() >= 0 && p.x() < cam.width && p.y() < cam.height;
  };

  CalibrationScene scene;
  for (const auto& cam : rig.cameras) {
    scene.cameras.push_back({cam.camera_id, cam.width, cam.height, {}});
  }

  const double half_w = 0.5 * (spec.grid_cols - 1) * spec.grid_spacing_m;
  const double half_h = 0.5 * (spec.grid_rows - 1) * spec.grid_spacing_m;
  const double cos_limit = std::cos(65.0 * kPi / 180.0);
  for (int b = 0; b < spec.num_board_poses; ++b) {
    const double az = 2.0 * kPi * b / spec.num_board_poses + 0.2 * uniform(rng);
    const double tilt = (b % 2 ? 0.35 : -0.3) + 0.1 * uniform(rng);
    const double roll = 0.6 * (uniform(rng) - 0.5);
    const Vec3 center(0.25 * std::cos(az + 1.0), 0.25 * std::sin(az + 1.0),
                      0.8 + 0.5 * uniform(rng));
    // Board z axis faces azimuth `az`, tipped by `tilt`.
    const Vec3 normal_dir(std::cos(tilt) * std::cos(az),
                          std::cos(tilt) * std::sin(az), std::sin(tilt));
    const Vec3 horizontal =
        Vec3(-std::sin(az), std::cos(az), 0.0).normalized();
    Mat3 Rbw;
    Rbw.col(2) = normal_dir;
    Rbw.col(0) = (horizontal - horizontal.dot(normal_dir) * normal_dir)
                     .normalized();
    Rbw.col(1) = Rbw.col(2).cross(Rbw.col(0));
    Rbw = Rbw * rot_z(roll);
    const Vec3 origin = center - Rbw * Vec3(half_w, half_h, 0.0);

    for (std::size_t c = 0; c < rig.cameras.size(); ++c) {
      const CameraParams& cam = rig.cameras[c];
      PlanarView view;
      const Vec3 to_cam = (cam.center() - center).normalized();
      if (to_cam.dot(normal_dir) > cos_limit) {
        bool visible = true;
        for (int r = 0; r < spec.grid_rows && visible; ++r) {
          for (int q = 0; q < spec.grid_cols; ++q) {
            const Vec2 board(q * spec.grid_spacing_m, r * spec.grid_spacing_m);
            const Vec3 X = origin + Rbw * Vec3(board.x(), board.y(), 0.0);
            if ((cam.R * X + cam.t).z() <= 0.0) {
              visible = false;
              break;
            }
            const Vec2 px = project(cam, X);
            if (!in_image(cam, px)) {
              visible = false;
              break;
            }
            view.push_back({board, px});
          }
        }
        if (!visible) view.clear();
        for (auto& corr : view) corr.pixel = noisy(corr.pixel);
      }
      scene.cameras[c].planar.views.push_back(std::move(view));
    }
  }

  for (int i = 0; i < spec.num_scene_points; ++i) {
    const double x = 2.0 * uniform(rng) - 1.0;
    const double y = 2.0 * uniform(rng) - 1.0;
    const double z = 0.2 + 1.8 * uniform(rng);
    const Vec3 X(x, y, z);
    scene.points[i] = X;
    for (const auto& cam : rig.cameras) {
      if ((cam.R * X + cam.t).z() <= 0.0) continue;
      const Vec2 px = project(cam, X);
      if (!in_image(cam, px)) continue;
      scene.observations.push_back({cam.camera_id, noisy(px), i});
    }
  }
  return scene;
}

std::string to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::kStatic: return "static";
    case MotionKind::kLinear: return "linear";
    case MotionKind::kSwing: return "swing";
    case MotionKind::kSweep: return "sweep";
    case MotionKind::kBurst: return "burst";
  }
  return "unknown";
}

MotionKind motion_kind_from_string(const std::string& name) {
  for (MotionKind k : {MotionKind::kStatic, MotionKind::kLinear,
                       MotionKind::kSwing, MotionKind::kSweep,
                       MotionKind::kBurst}) {
    if (to_string(k) == name) return k;
  }
  throw SpecError("unknown motion kind '" + name + "'");
}

}  // namespace posecap::synth
