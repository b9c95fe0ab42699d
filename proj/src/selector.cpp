// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/selector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <sstream>

#include "posecap/errors.hpp"
#include "posecap/triangulation.hpp"

namespace posecap {

CameraMask to_mask(std::span<const int> cameras) {
  CameraMask mask = 0;
  for (int c : cameras) mask |= CameraMask{1} << c;
  return mask;
}

std::vector<int> from_mask(CameraMask mask) {
  std::vector<int> out;
  for (int c = 0; c < 32; ++c) {
    if (mask & (CameraMask{1} << c)) out.push_back(c);
  }
  return out;
}

std::vector<std::vector<int>> enumerate_subsets(std::span<const int> active) {
  const int k = static_cast<int>(active.size());
  if (k < 2) {
    throw ArityError("enumerate_subsets: at least two cameras required, got " +
                     std::to_string(k));
  }
  if (k > kMaxCameras) {
    throw ArityError("enumerate_subsets: at most " +
                     std::to_string(kMaxCameras) + " cameras supported");
  }
  std::vector<int> sorted(active.begin(), active.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<std::vector<int>> out;
  out.reserve((std::size_t{1} << k) - k - 1);
  std::vector<int> pick;
  for (int size = 2; size <= k; ++size) {
    // Lexicographic combinations of `size` positions.
    pick.resize(size);
    for (int i = 0; i < size; ++i) pick[i] = i;
    while (true) {
      std::vector<int> subset(size);
      for (int i = 0; i < size; ++i) subset[i] = sorted[pick[i]];
      out.push_back(std::move(subset));
      int i = size - 1;
      while (i >= 0 && pick[i] == k - size + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

std::vector<int> prune_cameras(std::span<const CameraConfidence> confidences,
                               const PruneConfig& cfg) {
  std::vector<CameraConfidence> below;
  for (const auto& c : confidences) {
    if (c.confidence < cfg.confidence_threshold) below.push_back(c);
  }
  std::sort(below.begin(), below.end(),
            [](const CameraConfidence& a, const CameraConfidence& b) {
              if (a.confidence != b.confidence) {
                return a.confidence < b.confidence;
              }
              return a.camera < b.camera;
            });
  const int floor_limit = std::max(0, static_cast<int>(confidences.size()) - 2);
  const int n_remove = std::min({static_cast<int>(below.size()),
                                 std::max(0, cfg.max_removed), floor_limit});
  std::vector<int> retained;
  for (const auto& c : confidences) {
    const bool removed =
        std::any_of(below.begin(), below.begin() + n_remove,
                    [&](const CameraConfidence& r) { return r.camera == c.camera; });
    if (!removed) retained.push_back(c.camera);
  }
  std::sort(retained.begin(), retained.end());
  return retained;
}

KeypointTable::KeypointTable(std::int64_t first_frame, std::size_t num_frames,
                             std::size_t num_cameras)
    : first_frame_(first_frame),
      num_frames_(num_frames),
      num_cameras_(num_cameras),
      data_(num_frames * num_cameras * kNumJoints) {}

std::optional<Keypoint2D>& KeypointTable::at(std::size_t t, std::size_t camera,
                                             int joint) {
  return data_.at((t * num_cameras_ + camera) * kNumJoints + joint);
}

const std::optional<Keypoint2D>& KeypointTable::at(std::size_t t,
                                                   std::size_t camera,
                                                   int joint) const {
  return data_.at((t * num_cameras_ + camera) * kNumJoints + joint);
}

KeypointTable make_keypoint_table(std::span<const KeypointFrame> frames,
                                  const CameraRig& rig) {
  if (frames.empty()) {
    throw LengthError("keypoint stream is empty");
  }
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& f : frames) {
    lo = std::min(lo, f.frame_index);
    hi = std::max(hi, f.frame_index);
  }
  KeypointTable table(lo, static_cast<std::size_t>(hi - lo + 1), rig.size());
  std::vector<bool> seen(table.num_frames() * rig.size(), false);
  for (const auto& f : frames) {
    const auto cam = rig.index_of(f.camera_id);
    if (!cam) {
      throw ConfigError("keypoints reference unknown camera '" + f.camera_id +
                        "'");
    }
    const auto t = static_cast<std::size_t>(f.frame_index - lo);
    if (seen[t * rig.size() + *cam]) {
      throw FormatError("duplicate keypoint record for frame " +
                        std::to_string(f.frame_index) + ", camera '" +
                        f.camera_id + "'");
    }
    seen[t * rig.size() + *cam] = true;
    for (int j = 0; j < kNumJoints; ++j) table.at(t, *cam, j) = f.keypoints[j];
  }
  return table;
}

std::optional<CandidateLayer> build_layer(const KeypointTable& table,
                                          std::size_t t, int joint,
                                          const CameraRig& rig,
                                          const PruneConfig& cfg) {
  std::vector<CameraConfidence> detected;
  for (std::size_t c = 0; c < table.num_cameras(); ++c) {
    if (const auto& kp = table.at(t, c, joint)) {
      detected.push_back({static_cast<int>(c), kp->confidence});
    }
  }
  if (detected.size() < 2) return std::nullopt;

  const std::vector<int> retained = prune_cameras(detected, cfg);
  CandidateLayer layer;
  layer.frame_index = table.first_frame() + static_cast<std::int64_t>(t);
  std::vector<RayObservation> rays;
  for (const auto& subset : enumerate_subsets(retained)) {
    rays.clear();
    double confidence = 0.0;
    for (int c : subset) {
      const Keypoint2D& kp = *table.at(t, c, joint);
      rays.push_back({&rig.cameras[c], Vec2(kp.u, kp.v)});
      confidence += kp.confidence;
    }
    const LinearTriangulation lin = triangulate_linear(rays);
    CandidateNode node;
    node.frame_index = layer.frame_index;
    node.subset = to_mask(subset);
    node.aggregate_confidence = confidence / static_cast<double>(subset.size());
    node.position = lin.point;
    node.low_confidence = lin.low_confidence;
    if (lin.point.allFinite()) {
      const RefinedTriangulation ref = triangulate_refined(rays, lin.point);
      node.position = ref.point;
      node.low_confidence = node.low_confidence || !ref.valid;
    }
    layer.nodes.push_back(node);
  }
  return layer;
}

std::vector<CandidateLayer> build_layers(const KeypointTable& table, int joint,
                                         const CameraRig& rig,
                                         const PruneConfig& cfg) {
  std::vector<CandidateLayer> layers;
  layers.reserve(table.num_frames());
  for (std::size_t t = 0; t < table.num_frames(); ++t) {
    auto layer = build_layer(table, t, joint, rig, cfg);
    if (!layer) {
      const std::int64_t frame = table.first_frame() + static_cast<std::int64_t>(t);
      throw GapError("joint " + std::string(Skeleton::coco().name(joint)) +
                         ": fewer than two detections at frame " +
                         std::to_string(frame),
                     joint, frame);
    }
    layers.push_back(std::move(*layer));
  }
  return layers;
}

PathSelection shortest_path(std::span<const CandidateLayer> layers) {
  if (layers.empty()) {
    throw StructuralError("shortest_path: no layers");
  }
  for (std::size_t t = 0; t < layers.size(); ++t) {
    if (layers[t].nodes.empty()) {
      throw StructuralError("shortest_path: layer " + std::to_string(t) +
                            " (frame " +
                            std::to_string(layers[t].frame_index) +
                            ") is empty");
    }
  }
  // cost[j] = length of the best path ending at node j of the current layer.
  std::vector<double> cost(layers[0].nodes.size(), 0.0);
  std::vector<std::vector<int>> back(layers.size());
  for (std::size_t t = 1; t < layers.size(); ++t) {
    const auto& prev = layers[t - 1].nodes;
    const auto& cur = layers[t].nodes;
    std::vector<double> next(cur.size());
    back[t].resize(cur.size());
    for (std::size_t j = 0; j < cur.size(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (std::size_t i = 0; i < prev.size(); ++i) {
        const double c = cost[i] + (cur[j].position - prev[i].position).norm();
        if (c < best) {
          best = c;
          arg = static_cast<int>(i);
        }
      }
      next[j] = best;
      back[t][j] = arg;
    }
    cost = std::move(next);
  }

  PathSelection out;
  out.nodes.resize(layers.size());
  const auto last = std::min_element(cost.begin(), cost.end());
  out.total_cost = *last;
  out.nodes.back() = static_cast<int>(last - cost.begin());
  for (std::size_t t = layers.size() - 1; t > 0; --t) {
    out.nodes[t - 1] = back[t][out.nodes[t]];
  }
  out.cost_increments.assign(layers.size(), 0.0);
  for (std::size_t t = 1; t < layers.size(); ++t) {
    out.cost_increments[t] = (layers[t].nodes[out.nodes[t]].position -
                              layers[t - 1].nodes[out.nodes[t - 1]].position)
                                 .norm();
  }
  return out;
}

namespace {

struct JointTrack {
  std::vector<Vec3> positions;
  std::vector<DiagnosticRow> rows;
};

JointTrack select_joint(const KeypointTable& table, int joint,
                        const CameraRig& rig, const SelectorOptions& opts) {
  const std::size_t T = table.num_frames();
  std::vector<CandidateLayer> layers;
  std::vector<std::size_t> layer_frame;  // table row of each layer
  for (std::size_t t = 0; t < T; ++t) {
    auto layer = build_layer(table, t, joint, rig, opts.prune);
    if (layer) {
      layers.push_back(std::move(*layer));
      layer_frame.push_back(t);
      continue;
    }
    const std::int64_t frame = table.first_frame() + static_cast<std::int64_t>(t);
    if (!opts.interpolate_gaps) {
      throw GapError("joint " + std::string(Skeleton::coco().name(joint)) +
                         ": fewer than two detections at frame " +
                         std::to_string(frame),
                     joint, frame);
    }
  }

  // Validate gaps: interior and at most max_gap frames long.
  const auto gap_error = [&](std::size_t t) {
    const std::int64_t frame = table.first_frame() + static_cast<std::int64_t>(t);
    return GapError("joint " + std::string(Skeleton::coco().name(joint)) +
                        ": cannot interpolate gap at frame " +
                        std::to_string(frame),
                    joint, frame);
  };
  if (layers.empty()) throw gap_error(0);
  if (layer_frame.front() != 0) throw gap_error(0);
  if (layer_frame.back() != T - 1) throw gap_error(layer_frame.back() + 1);
  for (std::size_t i = 1; i < layer_frame.size(); ++i) {
    const std::size_t gap = layer_frame[i] - layer_frame[i - 1] - 1;
    if (gap > static_cast<std::size_t>(opts.max_gap)) {
      throw gap_error(layer_frame[i - 1] + 1);
    }
  }

  const PathSelection path = shortest_path(layers);
  JointTrack track;
  track.positions.resize(T);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const CandidateNode& node = layers[i].nodes[path.nodes[i]];
    track.positions[layer_frame[i]] = node.position;
    track.rows.push_back({node.frame_index, joint, node.subset,
                          path.cost_increments[i]});
    if (i == 0) continue;
    const std::size_t a = layer_frame[i - 1];
    const std::size_t b = layer_frame[i];
    for (std::size_t t = a + 1; t < b; ++t) {
      const double s = static_cast<double>(t - a) / static_cast<double>(b - a);
      track.positions[t] = (1.0 - s) * track.positions[a] + s * node.position;
      track.rows.push_back(
          {table.first_frame() + static_cast<std::int64_t>(t), joint, 0, 0.0});
    }
  }
  return track;
}

}  // namespace

SelectionResult select_trajectories(const KeypointTable& table,
                                    const CameraRig& rig,
                                    const SelectorOptions& options) {
  if (table.num_cameras() != rig.size()) {
    throw ConfigError("keypoint table and rig disagree on camera count");
  }
  std::vector<JointTrack> tracks(kNumJoints);
  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (int j = 0; j < kNumJoints; ++j) {
      tracks[j] = select_joint(table, j, rig, options);
    }
  } else {
    // Joints are independent; run them in batches of `threads`.
    for (int start = 0; start < kNumJoints; start += threads) {
      std::vector<std::future<JointTrack>> batch;
      for (int j = start; j < std::min(kNumJoints, start + threads); ++j) {
        batch.push_back(std::async(std::launch::async, select_joint,
                                   std::cref(table), j, std::cref(rig),
                                   std::cref(options)));
      }
      for (std::size_t i = 0; i < batch.size(); ++i) {
        tracks[start + i] = batch[i].get();
      }
    }
  }

  SelectionResult out;
  out.poses.sample_rate_hz = options.sample_rate_hz;
  out.poses.frames.resize(table.num_frames());
  for (int j = 0; j < kNumJoints; ++j) {
    for (std::size_t t = 0; t < table.num_frames(); ++t) {
      out.poses.frames[t][j] = tracks[j].positions[t];
    }
    out.diagnostics.insert(out.diagnostics.end(), tracks[j].rows.begin(),
                           tracks[j].rows.end());
  }
  std::stable_sort(out.diagnostics.begin(), out.diagnostics.end(),
                   [](const DiagnosticRow& a, const DiagnosticRow& b) {
                     return a.frame != b.frame ? a.frame < b.frame
                                               : a.joint < b.joint;
                   });
  return out;
}

PoseSequence triangulate_all_cameras(const KeypointTable& table,
                                     const CameraRig& rig,
                                     double sample_rate_hz) {
  PoseSequence out;
  out.sample_rate_hz = sample_rate_hz;
  out.frames.resize(table.num_frames());
  std::vector<RayObservation> rays;
  for (std::size_t t = 0; t < table.num_frames(); ++t) {
    for (int j = 0; j < kNumJoints; ++j) {
      rays.clear();
      for (std::size_t c = 0; c < table.num_cameras(); ++c) {
        if (const auto& kp = table.at(t, c, j)) {
          rays.push_back({&rig.cameras[c], Vec2(kp->u, kp->v)});
        }
      }
      if (rays.size() < 2) {
        const std::int64_t frame = table.first_frame() + static_cast<std::int64_t>(t);
        throw GapError("joint " + std::string(Skeleton::coco().name(j)) +
                           ": fewer than two detections at frame " +
                           std::to_string(frame),
                       j, frame);
      }
      const Vec3 lin = triangulate_linear(rays).point;
      out.frames[t][j] =
          lin.allFinite() ? triangulate_refined(rays, lin).point : lin;
    }
  }
  return out;
}

void write_diagnostics_csv(const std::string& path,
                           std::span<const DiagnosticRow> rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write diagnostics to '" + path + "'");
  out << "frame,joint,subset_bitmask,cost_increment\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.frame << ',' << Skeleton::coco().name(r.joint) << ',' << r.subset
        << ',' << r.cost_increment << '\n';
  }
  if (!out) throw IoError("failed writing diagnostics to '" + path + "'");
}

}  // namespace posecap
