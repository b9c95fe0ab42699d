// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/alignment.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "posecap/errors.hpp"

namespace posecap {

namespace {

// Orthonormal frame of the triad, used only to measure orientation change.
Mat3 triad_orientation(const Vec3& m1, const Vec3& m2, const Vec3& m3) {
  const Vec3 e1 = (m2 - m1).normalized();
  const Vec3 e3 = (m2 - m1).cross(m3 - m1).normalized();
  Mat3 Q;
  Q << e1, e3.cross(e1), e3;
  return Q;
}

double rotation_angle(const Mat3& a, const Mat3& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

LocalFrame local_frame(const Vec3& m1, const Vec3& m2, const Vec3& m3) {
  const Vec3 v1 = m2 - m1;
  const Vec3 v2 = m3 - m1;
  const Vec3 v3 = v1.cross(v2);
  const double n1 = v1.norm();
  const double n2 = v2.norm();
  const double n3 = v3.norm();
  if (!(n1 > 0.0) || !(n2 > 0.0) || !(n3 > 1e-9 * n1 * n2)) {
    throw DegeneracyError("marker triad is coincident or collinear");
  }
  LocalFrame f;
  f.basis << v1 / n1, v2 / n2, v3 / n3;
  f.origin = m1;
  return f;
}

OffsetFit fit_joint_offset(std::span<const TriadSample> samples,
                           const std::string& label) {
  std::vector<LocalFrame> frames;
  std::vector<Vec3> targets;
  std::vector<Mat3> orientations;
  for (const auto& s : samples) {
    if (!s.m1 || !s.m2 || !s.m3 || !s.joint) continue;
    try {
      frames.push_back(local_frame(*s.m1, *s.m2, *s.m3));
    } catch (const DegeneracyError&) {
      throw DegeneracyError(label + ": marker triad is collinear in a frame");
    }
    targets.push_back(*s.joint);
    orientations.push_back(triad_orientation(*s.m1, *s.m2, *s.m3));
  }
  const std::size_t n = frames.size();
  if (n < 3) {
    throw DegeneracyError(label + ": " + std::to_string(n) +
                          " usable frames, at least 3 required");
  }
  double spread = 0.0;
  for (const auto& q : orientations) {
    spread = std::max(spread, rotation_angle(orientations.front(), q));
  }
  if (spread < kMinOrientationSpread) {
    throw DegeneracyError(label +
                          ": calibration frames show a single triad orientation");
  }

  Eigen::MatrixXd A(3 * n, 3);
  Eigen::VectorXd b(3 * n);
  for (std::size_t t = 0; t < n; ++t) {
    A.block<3, 3>(3 * t, 0) = frames[t].basis;
    b.segment<3>(3 * t) = targets[t] - frames[t].origin;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(2) > 1e-12 * sv(0))) {
    throw DegeneracyError(label + ": stacked triad system is rank deficient");
  }
  OffsetFit fit;
  fit.weights = svd.solve(b);
  fit.frames_used = n;
  double sum_sq = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    sum_sq += (frames[t].to_world(fit.weights) - targets[t]).squaredNorm();
  }
  fit.rms_residual = std::sqrt(sum_sq / static_cast<double>(n));
  return fit;
}

PoseSequence apply_offset(const JointOffsetModel& model,
                          const MarkerSequence& markers) {
  const Skeleton& sk = Skeleton::coco();
  std::array<std::array<std::size_t, 3>, kNumJoints> idx{};
  std::array<Vec3, kNumJoints> weights;
  for (int j = 0; j < kNumJoints; ++j) {
    const std::string name(sk.name(j));
    const auto it = model.joints.find(name);
    if (it == model.joints.end()) {
      throw ConfigError("offset model has no entry for joint '" + name + "'");
    }
    for (int k = 0; k < 3; ++k) {
      const auto m = markers.index_of(it->second.markers[k]);
      if (!m) {
        throw ConfigError("offset model for '" + name +
                          "' references unknown marker '" +
                          it->second.markers[k] + "'");
      }
      idx[j][k] = *m;
    }
    weights[j] = it->second.weights;
  }

  PoseSequence out;
  out.sample_rate_hz = markers.sample_rate_hz;
  out.frames.resize(markers.size());
  for (std::size_t t = 0; t < markers.size(); ++t) {
    const auto& row = markers.frames[t];
    for (int j = 0; j < kNumJoints; ++j) {
      const auto& a = row.at(idx[j][0]);
      const auto& b = row.at(idx[j][1]);
      const auto& c = row.at(idx[j][2]);
      if (!a || !b || !c) {
        throw GapError("joint " + std::string(sk.name(j)) +
                           ": triad marker occluded at frame " +
                           std::to_string(t),
                       j, static_cast<std::int64_t>(t));
      }
      try {
        out.frames[t][j] = local_frame(*a, *b, *c).to_world(weights[j]);
      } catch (const DegeneracyError&) {
        throw DegeneracyError("joint " + std::string(sk.name(j)) +
                              ": collinear triad at frame " +
                              std::to_string(t));
      }
    }
  }
  return out;
}

std::array<std::string, 3> select_triad(const MarkerSequence& markers,
                                        const PoseSequence& joints, int joint) {
  const std::size_t T = std::min(markers.size(), joints.size());
  const std::size_t M = markers.marker_names.size();
  const std::string label(Skeleton::coco().name(joint));

  std::vector<std::pair<double, std::size_t>> by_distance;
  for (std::size_t m = 0; m < M; ++m) {
    std::vector<double> d;
    for (std::size_t t = 0; t < T; ++t) {
      if (const auto& p = markers.frames[t][m]) {
        d.push_back((*p - joints.frames[t][joint]).norm());
      }
    }
    if (d.empty()) continue;
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    by_distance.emplace_back(d[d.size() / 2], m);
  }
  if (by_distance.size() < 3) {
    throw DegeneracyError(label + ": fewer than three visible markers");
  }
  std::sort(by_distance.begin(), by_distance.end());
  const std::size_t m1 = by_distance[0].second;
  const std::size_t m2 = by_distance[1].second;

  double best = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> m3;
  for (std::size_t m = 0; m < M; ++m) {
    if (m == m1 || m == m2) continue;
    std::vector<double> heights;
    bool collinear = false;
    for (std::size_t t = 0; t < T && !collinear; ++t) {
      const auto& a = markers.frames[t][m1];
      const auto& b = markers.frames[t][m2];
      const auto& c = markers.frames[t][m];
      if (!a || !b || !c) continue;
      const Vec3 normal = (*b - *a).cross(*c - *a);
      if (!(normal.norm() > 1e-9 * (*b - *a).norm() * (*c - *a).norm())) {
        collinear = true;
        break;
      }
      heights.push_back((joints.frames[t][joint] - *a).dot(normal.normalized()));
    }
    if (collinear || heights.size() < 3) continue;
    double mean = 0.0;
    for (double h : heights) mean += h;
    mean /= static_cast<double>(heights.size());
    double var = 0.0;
    for (double h : heights) var += (h - mean) * (h - mean);
    var /= static_cast<double>(heights.size());
    if (var < best) {
      best = var;
      m3 = m;
    }
  }
  if (!m3) {
    throw DegeneracyError(label + ": no marker completes a non-collinear triad");
  }
  return {markers.marker_names[m1], markers.marker_names[m2],
          markers.marker_names[*m3]};
}

OffsetFitReport fit_offset_model(
    const MarkerSequence& markers, const PoseSequence& joints,
    const std::map<std::string, std::array<std::string, 3>>& overrides) {
  if (markers.size() != joints.size()) {
    throw ShapeError("marker sequence has " + std::to_string(markers.size()) +
                     " frames, joint sequence " +
                     std::to_string(joints.size()));
  }
  OffsetFitReport report;
  for (int j = 0; j < kNumJoints; ++j) {
    const std::string name(Skeleton::coco().name(j));
    const auto ov = overrides.find(name);
    const std::array<std::string, 3> triad =
        ov != overrides.end() ? ov->second : select_triad(markers, joints, j);

    std::array<std::size_t, 3> idx{};
    for (int k = 0; k < 3; ++k) {
      const auto m = markers.index_of(triad[k]);
      if (!m) {
        throw ConfigError(name + ": unknown marker '" + triad[k] + "'");
      }
      idx[k] = *m;
    }
    if (idx[0] == idx[1] || idx[0] == idx[2] || idx[1] == idx[2]) {
      throw DegeneracyError(name + ": triad markers must be distinct");
    }
    std::vector<TriadSample> samples(markers.size());
    for (std::size_t t = 0; t < markers.size(); ++t) {
      samples[t] = {markers.frames[t][idx[0]], markers.frames[t][idx[1]],
                    markers.frames[t][idx[2]], joints.frames[t][j]};
    }
    report.fits[name] = fit_joint_offset(samples, name);
    report.model.joints[name] = {triad, report.fits[name].weights};
  }
  return report;
}

}  // namespace posecap
