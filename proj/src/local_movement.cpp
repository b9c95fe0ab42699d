// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/local_movement.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "posecap/errors.hpp"

namespace posecap {

namespace {

struct ChainJoints {
  int root_o, root_m;  // shoulders or hips: origin side, mirrored side
  int mid_o, mid_m;    // elbows or knees
  int end_o, end_m;    // wrists or ankles
};

ChainJoints chain_joints(LimbChain chain, OriginSide origin) {
  const bool right = origin == OriginSide::kRight;
  if (chain == LimbChain::kWrist) {
    return right ? ChainJoints{kRightShoulder, kLeftShoulder, kRightElbow,
                               kLeftElbow, kRightWrist, kLeftWrist}
                 : ChainJoints{kLeftShoulder, kRightShoulder, kLeftElbow,
                               kRightElbow, kLeftWrist, kRightWrist};
  }
  return right ? ChainJoints{kRightHip, kLeftHip, kRightKnee, kLeftKnee,
                             kRightAnkle, kLeftAnkle}
               : ChainJoints{kLeftHip, kRightHip, kLeftKnee, kRightKnee,
                             kLeftAnkle, kRightAnkle};
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

LocalPoints to_local_frame(const PoseSequence& seq, LimbChain chain,
                           OriginSide origin) {
  if (seq.frames.empty()) throw LengthError("local frame: empty sequence");
  const ChainJoints cj = chain_joints(chain, origin);

  std::vector<double> lengths;
  lengths.reserve(seq.size());
  for (const Pose& p : seq.frames) {
    const double a = (p[cj.root_o] - p[cj.mid_o]).norm() +
                     (p[cj.mid_o] - p[cj.end_o]).norm();
    const double b = (p[cj.root_m] - p[cj.mid_m]).norm() +
                     (p[cj.mid_m] - p[cj.end_m]).norm();
    lengths.push_back(0.5 * (a + b));
  }
  LocalPoints out;
  out.limb_length = median(lengths);
  if (!(out.limb_length > 0.0)) {
    throw DegeneracyError("local frame: limb length is zero");
  }

  out.points.reserve(2 * seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const Pose& p = seq.frames[t];
    const Vec3 axis = p[cj.root_o] - p[cj.root_m];
    const Vec3 mid_shoulder = 0.5 * (p[kLeftShoulder] + p[kRightShoulder]);
    const Vec3 mid_hip = 0.5 * (p[kLeftHip] + p[kRightHip]);
    const Vec3 torso = chain == LimbChain::kWrist ? Vec3(mid_shoulder - mid_hip)
                                                  : Vec3(mid_hip - mid_shoulder);
    const double width = axis.norm();
    if (!(width > 1e-12)) {
      throw DegeneracyError("local frame: coincident " +
                            std::string(chain == LimbChain::kWrist ? "shoulders"
                                                                   : "hips") +
                            " at frame " + std::to_string(t));
    }
    const Vec3 x = axis / width;
    const Vec3 z_raw = torso - torso.dot(x) * x;
    if (!(z_raw.norm() > 1e-12 * std::max(1.0, torso.norm()))) {
      throw DegeneracyError("local frame: torso parallel to the " +
                            std::string(chain == LimbChain::kWrist ? "shoulder"
                                                                   : "hip") +
                            " axis at frame " + std::to_string(t));
    }
    const Vec3 z = z_raw.normalized();
    const Vec3 y = z.cross(x);
    Mat3 B;
    B << x, y, z;
    const Mat3 Bt = B.transpose();
    const double inv = 1.0 / out.limb_length;
    out.points.push_back(inv * (Bt * (p[cj.end_o] - p[cj.root_o])));
    Vec3 mirrored = Bt * (p[cj.end_m] - p[cj.root_m]);
    mirrored.x() = -mirrored.x();
    out.points.push_back(inv * mirrored);
  }
  return out;
}

double cover_ratio(std::span<const Vec3> points, double voxel_side) {
  if (!(voxel_side > 0.0)) {
    throw SpecError("cover_ratio: voxel side must be positive");
  }
  if (points.empty()) return 0.0;
  std::vector<std::array<std::int64_t, 3>> cells;
  cells.reserve(points.size());
  for (const Vec3& p : points) {
    cells.push_back({static_cast<std::int64_t>(std::floor(p.x() / voxel_side)),
                     static_cast<std::int64_t>(std::floor(p.y() / voxel_side)),
                     static_cast<std::int64_t>(std::floor(p.z() / voxel_side))});
  }
  std::sort(cells.begin(), cells.end());
  const auto unique = std::unique(cells.begin(), cells.end()) - cells.begin();
  return static_cast<double>(unique) / static_cast<double>(points.size());
}

std::vector<double> voxel_sides(int n_resolutions) {
  if (n_resolutions < 2) {
    throw SpecError("local movement: at least two resolutions required");
  }
  std::vector<double> sides(n_resolutions);
  for (int k = 0; k < n_resolutions; ++k) {
    sides[k] = std::pow(10.0, -3.0 * k / (n_resolutions - 1));
  }
  return sides;
}

LocalMovementCurve local_movement(std::span<const Vec3> local_points,
                                  const LocalMovementConfig& cfg) {
  LocalMovementCurve curve;
  curve.voxel_sides = voxel_sides(cfg.n_resolutions);
  double sum = 0.0;
  for (double side : curve.voxel_sides) {
    const double r = cover_ratio(local_points, side);
    curve.cover_ratios.push_back(r);
    sum += r;
  }
  curve.auc = sum / static_cast<double>(cfg.n_resolutions);
  return curve;
}

LocalMovementCurve local_movement(const PoseSequence& seq,
                                  const LocalMovementConfig& cfg) {
  const LocalPoints pts = to_local_frame(seq, cfg.chain, cfg.origin);
  return local_movement(pts.points, cfg);
}

double local_movement_auc(const PoseSequence& seq,
                          const LocalMovementConfig& cfg) {
  return local_movement(seq, cfg).auc;
}

}  // namespace posecap
