// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "posecap/errors.hpp"
#include "posecap/selector.hpp"
#include "posecap/synth.hpp"
#include "posecap/triangulation.hpp"
#include "test_util.hpp"

using namespace posecap;
using posecap::testing::max_joint_error;

namespace {

// Exhaustive minimum over every layer-respecting path.
double brute_force_min(const std::vector<CandidateLayer>& layers) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(layers.size(), 0);
  while (true) {
    double cost = 0.0;
    for (std::size_t t = 1; t < layers.size(); ++t) {
      cost += (layers[t].nodes[idx[t]].position -
               layers[t - 1].nodes[idx[t - 1]].position)
                  .norm();
    }
    best = std::min(best, cost);
    std::size_t t = 0;
    while (t < layers.size() && ++idx[t] == layers[t].nodes.size()) idx[t++] = 0;
    if (t == layers.size()) break;
  }
  return best;
}

double path_cost(const std::vector<CandidateLayer>& layers,
                 const std::vector<int>& nodes) {
  double cost = 0.0;
  for (std::size_t t = 1; t < layers.size(); ++t) {
    cost += (layers[t].nodes[nodes[t]].position -
             layers[t - 1].nodes[nodes[t - 1]].position)
                .norm();
  }
  return cost;
}

std::vector<CandidateLayer> random_layers(std::mt19937_64& rng, int n_layers,
                                          int max_nodes) {
  std::uniform_int_distribution<int> count(1, max_nodes);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<CandidateLayer> layers(n_layers);
  for (int t = 0; t < n_layers; ++t) {
    layers[t].frame_index = t;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      CandidateNode node;
      node.frame_index = t;
      node.position = Vec3(u(rng), u(rng), u(rng));
      layers[t].nodes.push_back(node);
    }
  }
  return layers;
}

struct Scene {
  CameraRig rig;
  PoseSequence gt;
  std::vector<KeypointFrame> frames;
};

Scene scene(std::size_t n_frames, const synth::CorruptionSpec& corruption = {},
            synth::MotionKind kind = synth::MotionKind::kBurst) {
  Scene s;
  s.rig = synth::make_rig({});
  synth::MotionSpec m;
  m.kind = kind;
  m.duration_s = static_cast<double>(n_frames) / m.sample_rate_hz;
  s.gt = synth::gen_motion(m);
  s.frames = synth::render_keypoints(s.gt, s.rig, corruption).frames;
  return s;
}

}  // namespace

TEST_CASE("camera masks") {
  const std::vector<int> cams = {0, 3, 5};
  CHECK(to_mask(cams) == 0b101001u);
  CHECK(from_mask(0b101001u) == cams);
  CHECK(from_mask(0).empty());
}

TEST_CASE("enumerate_subsets counts and order") {
  CHECK(enumerate_subsets(std::vector<int>{0, 1}).size() == 1);
  CHECK(enumerate_subsets(std::vector<int>{0, 1, 2}).size() == 4);
  CHECK(enumerate_subsets(std::vector<int>{0, 1, 2, 3, 4, 5, 6}).size() == 120);
  for (int K = 2; K <= 12; ++K) {
    std::vector<int> active(K);
    for (int k = 0; k < K; ++k) active[k] = 2 * k + 1;
    const auto subsets = enumerate_subsets(active);
    CHECK(subsets.size() == (std::size_t{1} << K) - K - 1);
    // Oracle: every subset of size >= 2, exactly once, sorted.
    std::set<std::vector<int>> seen(subsets.begin(), subsets.end());
    CHECK(seen.size() == subsets.size());
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      CHECK(subsets[i].size() >= 2);
      CHECK(std::is_sorted(subsets[i].begin(), subsets[i].end()));
      if (i > 0) {
        const auto& a = subsets[i - 1];
        const auto& b = subsets[i];
        CHECK((a.size() < b.size() || (a.size() == b.size() && a < b)));
      }
    }
  }
  const auto three = enumerate_subsets(std::vector<int>{4, 1, 2});
  CHECK(three[0] == std::vector<int>{1, 2});
  CHECK(three[1] == std::vector<int>{1, 4});
  CHECK(three[2] == std::vector<int>{2, 4});
  CHECK(three[3] == std::vector<int>{1, 2, 4});
  CHECK_THROWS_AS(enumerate_subsets(std::vector<int>{1}), ArityError);
  CHECK_THROWS_AS(enumerate_subsets(std::vector<int>{}), ArityError);
}

TEST_CASE("prune_cameras") {
  auto conf = [](std::vector<double> c) {
    std::vector<CameraConfidence> out;
    for (std::size_t i = 0; i < c.size(); ++i) out.push_back({int(i), c[i]});
    return out;
  };
  const PruneConfig cfg{0.5, 2};
  CHECK(prune_cameras(conf({0.9, 0.9, 0.9, 0.9}), cfg) ==
        std::vector<int>{0, 1, 2, 3});
  CHECK(prune_cameras(conf({0.9, 0.1, 0.9, 0.9, 0.1, 0.9, 0.9}), cfg) ==
        std::vector<int>{0, 2, 3, 5, 6});
  CHECK(prune_cameras(conf({0.1, 0.1, 0.1}), cfg) == std::vector<int>{1, 2});
  // At most max_removed, lowest first.
  CHECK(prune_cameras(conf({0.3, 0.1, 0.2, 0.9, 0.9}), cfg) ==
        std::vector<int>{0, 3, 4});
  // Ties broken by camera order.
  CHECK(prune_cameras(conf({0.2, 0.2, 0.2, 0.9, 0.9}), cfg) ==
        std::vector<int>{2, 3, 4});
  CHECK(prune_cameras(conf({0.1, 0.2}), cfg) == std::vector<int>{0, 1});
  CHECK(prune_cameras(conf({0.1, 0.2, 0.3}), {0.5, 0}) ==
        std::vector<int>{0, 1, 2});
  // Exactly at the threshold is kept.
  CHECK(prune_cameras(conf({0.5, 0.5, 0.5}), cfg) == std::vector<int>{0, 1, 2});
}

TEST_CASE("keypoint table construction") {
  const Scene s = scene(5);
  const KeypointTable table = make_keypoint_table(s.frames, s.rig);
  CHECK(table.num_frames() == 5);
  CHECK(table.num_cameras() == 7);
  CHECK(table.at(2, 3, kNose)->u == s.frames[2 * 7 + 3].keypoints[kNose]->u);

  auto shuffled = s.frames;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const KeypointTable t2 = make_keypoint_table(shuffled, s.rig);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t c = 0; c < 7; ++c) {
      CHECK(t2.at(t, c, kLeftAnkle)->v == table.at(t, c, kLeftAnkle)->v);
    }
  }

  auto bad = s.frames;
  bad[0].camera_id = "ghost";
  CHECK_THROWS_AS(make_keypoint_table(bad, s.rig), ConfigError);
  bad = s.frames;
  bad.push_back(bad[3]);
  CHECK_THROWS_AS(make_keypoint_table(bad, s.rig), FormatError);
}

TEST_CASE("build_layers: node counts and noiseless positions") {
  Scene s = scene(4);
  const KeypointTable table = make_keypoint_table(s.frames, s.rig);
  const auto layers = build_layers(table, kRightKnee, s.rig, {0.5, 2});
  REQUIRE(layers.size() == 4);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(layers[t].nodes.size() == 120);
    for (const auto& node : layers[t].nodes) {
      CHECK((node.position - s.gt.frames[t][kRightKnee]).norm() < 1e-9);
      CHECK(std::popcount(node.subset) >= 2);
    }
    // Node order follows subset enumeration order.
    const auto subsets = enumerate_subsets(std::vector<int>{0, 1, 2, 3, 4, 5, 6});
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      CHECK(layers[t].nodes[i].subset == to_mask(subsets[i]));
    }
  }

  // Two cameras below threshold: 2^5 - 5 - 1 nodes.
  for (auto& f : s.frames) {
    if (f.camera_id == "cam1" || f.camera_id == "cam4") {
      f.keypoints[kRightKnee]->confidence = 0.1;
    }
  }
  const KeypointTable pruned = make_keypoint_table(s.frames, s.rig);
  const auto layer = build_layer(pruned, 0, kRightKnee, s.rig, {0.5, 2});
  REQUIRE(layer.has_value());
  CHECK(layer->nodes.size() == 26);
  for (const auto& node : layer->nodes) CHECK((node.subset & 0b10010u) == 0u);
}

TEST_CASE("build_layers: gaps name the joint and frame") {
  Scene s = scene(6);
  for (auto& f : s.frames) {
    if (f.frame_index == 3 && f.camera_id != "cam0") {
      f.keypoints[kLeftElbow].reset();
    }
  }
  const KeypointTable table = make_keypoint_table(s.frames, s.rig);
  try {
    build_layers(table, kLeftElbow, s.rig, {});
    FAIL("expected a gap error");
  } catch (const GapError& e) {
    CHECK(e.joint() == kLeftElbow);
    CHECK(e.frame() == 3);
    CHECK(std::string(e.what()).find("left_elbow") != std::string::npos);
  }
  CHECK_NOTHROW(build_layers(table, kRightElbow, s.rig, {}));
}

TEST_CASE("shortest_path: small hand-checked instances") {
  std::vector<CandidateLayer> single(3);
  for (int t = 0; t < 3; ++t) {
    single[t].nodes.resize(1);
    single[t].nodes[0].position = Vec3(t, 0, 0);
  }
  const auto one = shortest_path(single);
  CHECK(one.nodes == std::vector<int>{0, 0, 0});
  CHECK(one.total_cost == doctest::Approx(2.0));

  // Node 1 is stationary, node 0 jumps around.
  std::vector<CandidateLayer> two(3);
  const Vec3 jumps[] = {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0)};
  for (int t = 0; t < 3; ++t) {
    two[t].nodes.resize(2);
    two[t].nodes[0].position = jumps[t];
    two[t].nodes[1].position = Vec3(0.05, 0.05, 0.05);
  }
  const auto p = shortest_path(two);
  CHECK(p.nodes == std::vector<int>{1, 1, 1});
  CHECK(p.total_cost == 0.0);
  CHECK(p.total_cost == brute_force_min(two));
  REQUIRE(p.cost_increments.size() == 3);
  CHECK(p.cost_increments[0] == 0.0);
}

TEST_CASE("shortest_path: random instances match exhaustive enumeration") {
  std::mt19937_64 rng(2024);
  {
    // 4 layers x 5 nodes: 625 paths.
    std::vector<CandidateLayer> layers(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& l : layers) {
      l.nodes.resize(5);
      for (auto& n : l.nodes) n.position = Vec3(u(rng), u(rng), u(rng));
    }
    const auto p = shortest_path(layers);
    CHECK(p.total_cost == brute_force_min(layers));
    CHECK(path_cost(layers, p.nodes) == p.total_cost);
  }
  std::uniform_int_distribution<int> n_layers(1, 5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto layers = random_layers(rng, n_layers(rng), 6);
    const auto p = shortest_path(layers);
    CHECK(p.total_cost == brute_force_min(layers));
    double sum = 0.0;
    for (double c : p.cost_increments) sum += c;
    CHECK(sum == doctest::Approx(p.total_cost).epsilon(1e-12));
  }
}

TEST_CASE("shortest_path: invariances") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    auto layers = random_layers(rng, 5, 6);
    const auto base = shortest_path(layers);

    auto permuted = layers;
    for (auto& l : permuted) std::shuffle(l.nodes.begin(), l.nodes.end(), rng);
    CHECK(shortest_path(permuted).total_cost ==
          doctest::Approx(base.total_cost).epsilon(1e-12));

    auto moved = layers;
    const Vec3 d(0.25, -0.5, 0.125);  // exact in binary
    for (auto& l : moved) {
      for (auto& n : l.nodes) n.position += d;
    }
    CHECK(shortest_path(moved).nodes == base.nodes);
  }
}

TEST_CASE("shortest_path: ties pick the lowest index") {
  std::vector<CandidateLayer> layers(3);
  for (auto& l : layers) {
    l.nodes.resize(3);
    for (auto& n : l.nodes) n.position = Vec3(1, 2, 3);
  }
  CHECK(shortest_path(layers).nodes == std::vector<int>{0, 0, 0});
}

TEST_CASE("shortest_path: structural errors") {
  CHECK_THROWS_AS(shortest_path(std::vector<CandidateLayer>{}), StructuralError);
  std::vector<CandidateLayer> layers(2);
  layers[0].nodes.resize(1);
  CHECK_THROWS_AS(shortest_path(layers), StructuralError);
}

TEST_CASE("select_trajectories: noiseless scene is exact") {
  const Scene s = scene(100);
  const KeypointTable table = make_keypoint_table(s.frames, s.rig);
  const auto r = select_trajectories(table, s.rig);
  REQUIRE(r.poses.size() == 100);
  CHECK(max_joint_error(r.poses, s.gt) < 1e-9);
  CHECK(r.diagnostics.size() == 100 * kNumJoints);

  SelectorOptions threaded;
  threaded.threads = 4;
  const auto r4 = select_trajectories(table, s.rig, threaded);
  CHECK(max_joint_error(r4.poses, r.poses) == 0.0);

  CHECK(max_joint_error(triangulate_all_cameras(table, s.rig), s.gt) < 1e-9);
}

TEST_CASE("select_trajectories: a swapped low-confidence camera is pruned") {
  synth::CorruptionSpec c;
  c.swap_probability = 1.0;
  c.swap_cameras = {2};
  c.swap_pairs = {{kLeftWrist, kRightWrist}};
  Scene s = scene(40, c);
  // Keep the swap on frames 10..19 only.
  const Scene clean = scene(40);
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    const auto f = s.frames[i].frame_index;
    if (f < 10 || f >= 20) s.frames[i] = clean.frames[i];
  }
  const KeypointTable table = make_keypoint_table(s.frames, s.rig);
  CHECK(table.at(12, 2, kLeftWrist)->confidence < 0.5);
  const auto r = select_trajectories(table, s.rig);
  CHECK(max_joint_error(r.poses, s.gt) < 1e-9);
  for (const auto& row : r.diagnostics) {
    if ((row.joint == kLeftWrist || row.joint == kRightWrist) && row.frame >= 10 &&
        row.frame < 20) {
      CHECK((row.subset & (1u << 2)) == 0u);
    }
  }
}

TEST_CASE("select_trajectories: noise stays below the worst fixed subset") {
  synth::CorruptionSpec c;
  c.pixel_noise_sigma = 2.0;
  c.seed = 5;
  const Scene s = scene(60, c);
  const KeypointTable table = make_keypoint_table(s.frames, s.rig);
  const auto r = select_trajectories(table, s.rig);
  const auto subsets = enumerate_subsets(std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  for (int j : {kNose, kLeftWrist, kRightKnee, kLeftAnkle}) {
    double sel = 0.0;
    for (std::size_t t = 0; t < 60; ++t) {
      sel += (r.poses.frames[t][j] - s.gt.frames[t][j]).squaredNorm();
    }
    sel = std::sqrt(sel / 60);
    double worst = 0.0;
    for (const auto& subset : subsets) {
      double acc = 0.0;
      for (std::size_t t = 0; t < 60; ++t) {
        std::vector<RayObservation> rays;
        for (int cam : subset) {
          const auto& kp = *table.at(t, cam, j);
          rays.push_back({&s.rig.cameras[cam], Vec2(kp.u, kp.v)});
        }
        const Vec3 lin = triangulate_linear(rays).point;
        acc += (triangulate_refined(rays, lin).point - s.gt.frames[t][j])
                   .squaredNorm();
      }
      worst = std::max(worst, std::sqrt(acc / 60));
    }
    CHECK(sel < worst);
  }
}

TEST_CASE("select_trajectories: gap handling") {
  synth::CorruptionSpec none;
  auto with_gap = [&](std::int64_t first, std::int64_t last) {
    Scene s = scene(30, none);
    for (auto& f : s.frames) {
      if (f.frame_index >= first && f.frame_index <= last) {
        f.keypoints[kRightAnkle].reset();
      }
    }
    return s;
  };
  {
    const Scene s = with_gap(10, 12);
    const KeypointTable table = make_keypoint_table(s.frames, s.rig);
    CHECK_THROWS_AS(select_trajectories(table, s.rig), GapError);
    SelectorOptions opts;
    opts.interpolate_gaps = true;
    const auto r = select_trajectories(table, s.rig, opts);
    for (std::int64_t t = 10; t <= 12; ++t) {
      const double a = double(t - 9) / 4.0;
      const Vec3 expect = (1 - a) * s.gt.frames[9][kRightAnkle] +
                          a * s.gt.frames[13][kRightAnkle];
      CHECK((r.poses.frames[t][kRightAnkle] - expect).norm() < 1e-9);
    }
    int interpolated = 0;
    for (const auto& row : r.diagnostics) interpolated += row.subset == 0;
    CHECK(interpolated == 3);
    CHECK(std::is_sorted(r.diagnostics.begin(), r.diagnostics.end(),
                         [](const DiagnosticRow& a, const DiagnosticRow& b) {
                           return a.frame < b.frame;
                         }));
  }
  SelectorOptions opts;
  opts.interpolate_gaps = true;
  {
    const Scene s = with_gap(10, 15);  // six frames
    CHECK_THROWS_AS(
        select_trajectories(make_keypoint_table(s.frames, s.rig), s.rig, opts),
        GapError);
  }
  {
    const Scene s = with_gap(0, 1);  // leading gap: no interpolation anchor
    try {
      select_trajectories(make_keypoint_table(s.frames, s.rig), s.rig, opts);
      FAIL("expected a gap error");
    } catch (const GapError& e) {
      CHECK(e.joint() == kRightAnkle);
      CHECK(e.frame() == 0);
    }
  }
}

TEST_CASE("diagnostics CSV") {
  posecap::testing::TempDir dir("diag");
  std::vector<DiagnosticRow> rows = {{0, 1, 0b11, 0.0}, {1, 1, 0b101, 0.25}};
  write_diagnostics_csv(dir.file("d.csv"), rows);
  std::ifstream in(dir.file("d.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "frame,joint,subset_bitmask,cost_increment");
  std::getline(in, line);
  CHECK(line == "0,left_eye,3,0");
  std::getline(in, line);
  CHECK(line == "1,left_eye,5,0.25");
}
