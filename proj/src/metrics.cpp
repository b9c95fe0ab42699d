// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/metrics.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "posecap/errors.hpp"

namespace posecap {

Similarity procrustes_similarity(std::span<const Vec3> source,
                                 std::span<const Vec3> target,
                                 std::span<const bool> valid) {
  if (source.size() != target.size() ||
      (!valid.empty() && valid.size() != source.size())) {
    throw ShapeError("procrustes: point sets differ in size");
  }
  std::vector<std::size_t> use;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (valid.empty() || valid[i]) use.push_back(i);
  }
  if (use.size() < 3) {
    throw DegeneracyError("procrustes: at least three valid points required");
  }
  const double n = static_cast<double>(use.size());
  Vec3 mx = Vec3::Zero(), my = Vec3::Zero();
  for (auto i : use) {
    mx += source[i];
    my += target[i];
  }
  mx /= n;
  my /= n;

  Mat3 cov = Mat3::Zero();
  Mat3 spread = Mat3::Zero();
  double var_x = 0.0;
  for (auto i : use) {
    const Vec3 dx = source[i] - mx;
    cov.noalias() += (target[i] - my) * dx.transpose();
    spread.noalias() += dx * dx.transpose();
    var_x += dx.squaredNorm();
  }
  cov /= n;
  var_x /= n;

  const Eigen::Vector3d ev =
      Eigen::JacobiSVD<Mat3>(spread).singularValues();
  if (!(ev(1) > 1e-12 * std::max(ev(0), 1e-300)) || !(var_x > 0.0)) {
    throw DegeneracyError("procrustes: source points are collinear");
  }

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 S = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    S(2, 2) = -1.0;
  }
  Similarity out;
  out.R = svd.matrixU() * S * svd.matrixV().transpose();
  out.scale = (svd.singularValues().asDiagonal() * S).trace() / var_x;
  out.t = my - out.scale * out.R * mx;
  return out;
}

namespace {

Pose align(const Pose& pred, const Pose& gt, AlignmentMode mode) {
  Pose out = pred;
  switch (mode) {
    case AlignmentMode::kIdentity:
      break;
    case AlignmentMode::kHipTranslation: {
      const Vec3 shift = 0.5 * (gt[kLeftHip] + gt[kRightHip]) -
                         0.5 * (pred[kLeftHip] + pred[kRightHip]);
      for (auto& p : out) p += shift;
      break;
    }
    case AlignmentMode::kProcrustesSimilarity: {
      const Similarity s = procrustes_similarity(pred, gt);
      for (auto& p : out) p = s.apply(p);
      break;
    }
  }
  return out;
}

void check_shapes(const PoseSequence& pred, const PoseSequence& gt) {
  if (pred.size() != gt.size()) {
    throw ShapeError("prediction has " + std::to_string(pred.size()) +
                     " frames, ground truth " + std::to_string(gt.size()));
  }
  if (pred.frames.empty()) {
    throw ShapeError("cannot evaluate empty sequences");
  }
}

}  // namespace

double rss_after_alignment(const Pose& pred, const Pose& gt,
                           AlignmentMode mode) {
  const Pose aligned = align(pred, gt, mode);
  double rss = 0.0;
  for (int j = 0; j < kNumJoints; ++j) rss += (aligned[j] - gt[j]).squaredNorm();
  return rss;
}

std::vector<double> per_frame_rss(const PoseSequence& pred,
                                  const PoseSequence& gt, AlignmentMode mode) {
  check_shapes(pred, gt);
  std::vector<double> out(pred.size());
  for (std::size_t t = 0; t < pred.size(); ++t) {
    out[t] = rss_after_alignment(pred.frames[t], gt.frames[t], mode);
  }
  return out;
}

PoseError pose_error(const PoseSequence& pred, const PoseSequence& gt,
                     AlignmentMode mode) {
  check_shapes(pred, gt);
  PoseError err;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const Pose aligned = align(pred.frames[t], gt.frames[t], mode);
    for (int j = 0; j < kNumJoints; ++j) {
      err.per_joint_mm[j] += (aligned[j] - gt.frames[t][j]).norm();
    }
  }
  const double frames = static_cast<double>(pred.size());
  for (auto& e : err.per_joint_mm) e = 1000.0 * e / frames;
  err.overall_mm =
      std::accumulate(err.per_joint_mm.begin(), err.per_joint_mm.end(), 0.0) /
      kNumJoints;
  return err;
}

std::vector<JointKinematics> joint_kinematics(const PoseSequence& seq,
                                              std::span<const int> joints) {
  const std::size_t T = seq.size();
  if (T < 3) {
    throw LengthError("kinematics need at least 3 frames, got " +
                      std::to_string(T));
  }
  const double fs = seq.sample_rate_hz;
  std::vector<JointKinematics> out;
  for (int j : joints) {
    JointKinematics k;
    k.joint = j;
    k.speed.resize(T);
    k.acceleration.resize(T);
    const auto x = [&](std::size_t t) -> const Vec3& { return seq.frames[t][j]; };
    for (std::size_t t = 0; t < T; ++t) {
      Vec3 v;
      if (t == 0) {
        v = (x(1) - x(0)) * fs;
      } else if (t == T - 1) {
        v = (x(T - 1) - x(T - 2)) * fs;
      } else {
        v = (x(t + 1) - x(t - 1)) * (fs / 2.0);
      }
      const std::size_t c = std::clamp<std::size_t>(t, 1, T - 2);
      const Vec3 a = (x(c + 1) - 2.0 * x(c) + x(c - 1)) * (fs * fs);
      k.speed[t] = v.norm();
      k.acceleration[t] = a.norm();
    }
    out.push_back(std::move(k));
  }
  return out;
}

CdfSummary cdf(std::span<const double> samples) {
  if (samples.empty()) throw ArityError("cdf: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double s : sorted) {
    if (!std::isfinite(s)) throw FormatError("cdf: non-finite sample");
  }
  std::sort(sorted.begin(), sorted.end());
  CdfSummary out;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.values.push_back(sorted[i]);
    out.fractions.push_back(static_cast<double>(i + 1) / n);
  }
  out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  return out;
}

void write_cdf_csv(const std::string& path, const CdfSummary& summary) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.precision(17);
  out << "x,y\n";
  for (std::size_t i = 0; i < summary.values.size(); ++i) {
    out << summary.values[i] << ',' << summary.fractions[i] << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

PoseSequence subsample_frames(const PoseSequence& seq, std::size_t count,
                              unsigned long long seed) {
  if (count >= seq.size()) return seq;
  std::vector<std::size_t> idx(seq.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  PoseSequence out;
  out.sample_rate_hz = seq.sample_rate_hz;
  for (auto i : idx) out.frames.push_back(seq.frames[i]);
  return out;
}

std::string to_string(AlignmentMode mode) {
  switch (mode) {
    case AlignmentMode::kIdentity:
      return "identity";
    case AlignmentMode::kHipTranslation:
      return "hip_translation";
    case AlignmentMode::kProcrustesSimilarity:
      return "procrustes_similarity";
  }
  return "unknown";
}

}  // namespace posecap
