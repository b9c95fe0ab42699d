// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "posecap/errors.hpp"

namespace posecap {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw FormatError(where + ": " + what);
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(where, std::string("invalid JSON (") + e.what() + ")");
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where + "." + key, "missing field");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "non-finite number");
  return d;
}

std::string string_value(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

const json& array(const json& v, std::size_t size, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  if (size != 0 && v.size() != size) {
    fail(where, "expected " + std::to_string(size) + " entries, got " +
                    std::to_string(v.size()));
  }
  return v;
}

Vec3 vec3(const json& v, const std::string& where) {
  array(v, 3, where);
  return {number(v[0], where + "[0]"), number(v[1], where + "[1]"),
          number(v[2], where + "[2]")};
}

Mat3 mat3(const json& v, const std::string& where) {
  array(v, 3, where);
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const std::string row = where + "[" + std::to_string(r) + "]";
    array(v[r], 3, row);
    for (int c = 0; c < 3; ++c) {
      m(r, c) = number(v[r][c], row + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

json to_json(const Mat3& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) out.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return out;
}

// %.17g keeps every double lossless and at >= 15 significant digits.
void put_number(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void put_vec3(std::ostream& out, const Vec3& v) {
  out << '[';
  put_number(out, v.x());
  out << ',';
  put_number(out, v.y());
  out << ',';
  put_number(out, v.z());
  out << ']';
}

void put_string_list(std::ostream& out, const auto& names) {
  out << '[';
  bool first = true;
  for (const auto& n : names) {
    out << (first ? "" : ",") << json(std::string(n)).dump();
    first = false;
  }
  out << ']';
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

double sample_rate(const json& doc, const std::string& where) {
  const double rate = number(field(doc, "sample_rate_hz", where),
                             where + ".sample_rate_hz");
  if (!(rate > 0.0)) fail(where + ".sample_rate_hz", "must be positive");
  return rate;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

// --- rig -------------------------------------------------------------------

CameraRig parse_rig(const std::string& text) {
  const json doc = parse_json(text, "rig");
  if (!doc.is_array()) fail("rig", "expected a list of cameras");
  CameraRig rig;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "rig[" + std::to_string(i) + "]";
    const json& c = doc[i];
    CameraParams cam;
    cam.camera_id =
        string_value(field(c, "camera_id", where), where + ".camera_id");
    const Mat3 K = mat3(field(c, "K", where), where + ".K");
    if (K(1, 0) != 0.0 || K(2, 0) != 0.0 || K(2, 1) != 0.0 || K(2, 2) != 1.0) {
      fail(where + ".K", "expected [[fx,0,cx],[0,fy,cy],[0,0,1]]");
    }
    if (K(0, 1) != 0.0) fail(where + ".K", "skew is not supported");
    cam.fx = K(0, 0);
    cam.fy = K(1, 1);
    cam.cx = K(0, 2);
    cam.cy = K(1, 2);
    const json& dist = array(field(c, "dist", where), 2, where + ".dist");
    cam.k1 = number(dist[0], where + ".dist[0]");
    cam.k2 = number(dist[1], where + ".dist[1]");
    cam.R = mat3(field(c, "R", where), where + ".R");
    cam.t = vec3(field(c, "t", where), where + ".t");
    const json& size =
        array(field(c, "image_size", where), 2, where + ".image_size");
    if (!size[0].is_number_integer() || !size[1].is_number_integer()) {
      fail(where + ".image_size", "expected integers");
    }
    cam.width = size[0].get<int>();
    cam.height = size[1].get<int>();
    try {
      validate(cam);
    } catch (const SpecError& e) {
      fail(where, e.what());
    }
    rig.cameras.push_back(std::move(cam));
  }
  validate(rig);
  return rig;
}

CameraRig load_rig(const std::string& path) {
  try {
    return parse_rig(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void save_rig(const CameraRig& rig, const std::string& path) {
  json doc = json::array();
  for (const auto& cam : rig.cameras) {
    doc.push_back({{"camera_id", cam.camera_id},
                   {"K", to_json(cam.intrinsic_matrix())},
                   {"dist", {cam.k1, cam.k2}},
                   {"R", to_json(cam.R)},
                   {"t", {cam.t.x(), cam.t.y(), cam.t.z()}},
                   {"image_size", {cam.width, cam.height}}});
  }
  write_text_file(path, doc.dump(2) + "\n");
}

// --- keypoints -------------------------------------------------------------

std::vector<KeypointFrame> parse_keypoints(const std::string& text) {
  std::vector<KeypointFrame> frames;
  const auto lines = lines_of(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (blank(lines[n])) continue;
    const std::string where = "line " + std::to_string(n + 1);
    const json rec = parse_json(lines[n], where);
    KeypointFrame f;
    const json& idx = field(rec, "frame_index", where);
    if (!idx.is_number_integer() || idx.get<std::int64_t>() < 0) {
      fail(where + ".frame_index", "expected a nonnegative integer");
    }
    f.frame_index = idx.get<std::int64_t>();
    f.camera_id =
        string_value(field(rec, "camera_id", where), where + ".camera_id");
    const json& kps =
        array(field(rec, "keypoints", where), kNumJoints, where + ".keypoints");
    for (int j = 0; j < kNumJoints; ++j) {
      const std::string w = where + ".keypoints[" + std::to_string(j) + "]";
      if (kps[j].is_null()) continue;
      array(kps[j], 3, w);
      Keypoint2D kp{number(kps[j][0], w + "[0]"), number(kps[j][1], w + "[1]"),
                    number(kps[j][2], w + "[2]")};
      if (kp.confidence < 0.0 || kp.confidence > 1.0) {
        fail(w + "[2]", "confidence outside [0, 1]");
      }
      f.keypoints[j] = kp;
    }
    frames.push_back(std::move(f));
  }
  std::stable_sort(frames.begin(), frames.end(),
                   [](const KeypointFrame& a, const KeypointFrame& b) {
                     return a.frame_index != b.frame_index
                                ? a.frame_index < b.frame_index
                                : a.camera_id < b.camera_id;
                   });
  return frames;
}

std::vector<KeypointFrame> load_keypoints(const std::string& path) {
  try {
    return parse_keypoints(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void save_keypoints(const std::vector<KeypointFrame>& frames,
                    const std::string& path) {
  std::ostringstream out;
  for (const auto& f : frames) {
    out << "{\"frame_index\":" << f.frame_index
        << ",\"camera_id\":" << json(f.camera_id).dump() << ",\"keypoints\":[";
    for (int j = 0; j < kNumJoints; ++j) {
      if (j) out << ',';
      if (!f.keypoints[j]) {
        out << "null";
        continue;
      }
      out << '[';
      put_number(out, f.keypoints[j]->u);
      out << ',';
      put_number(out, f.keypoints[j]->v);
      out << ',';
      put_number(out, f.keypoints[j]->confidence);
      out << ']';
    }
    out << "]}\n";
  }
  write_text_file(path, out.str());
}

// --- pose / marker sequences -----------------------------------------------

void save_pose_sequence(const PoseSequence& seq, const std::string& path) {
  validate(seq);
  std::ostringstream out;
  out << "{\"sample_rate_hz\":";
  put_number(out, seq.sample_rate_hz);
  out << ",\"joint_names\":";
  put_string_list(out, Skeleton::coco().joint_names);
  out << ",\"frames\":[";
  for (std::size_t t = 0; t < seq.size(); ++t) {
    out << (t ? ",\n" : "\n") << '[';
    for (int j = 0; j < kNumJoints; ++j) {
      if (j) out << ',';
      put_vec3(out, seq.frames[t][j]);
    }
    out << ']';
  }
  out << "\n]}\n";
  write_text_file(path, out.str());
}

PoseSequence load_pose_sequence(const std::string& path) {
  const json doc = parse_json(read_text_file(path), path);
  PoseSequence seq;
  seq.sample_rate_hz = sample_rate(doc, path);
  if (doc.contains("joint_names")) {
    const json& names = array(doc["joint_names"], kNumJoints,
                              path + ".joint_names");
    for (int j = 0; j < kNumJoints; ++j) {
      if (!names[j].is_string() ||
          names[j].get<std::string>() != Skeleton::coco().name(j)) {
        fail(path + ".joint_names[" + std::to_string(j) + "]",
             "expected '" + std::string(Skeleton::coco().name(j)) + "'");
      }
    }
  }
  const json& frames = array(field(doc, "frames", path), 0, path + ".frames");
  if (frames.empty()) fail(path + ".frames", "at least one frame required");
  seq.frames.resize(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::string where = path + ".frames[" + std::to_string(t) + "]";
    array(frames[t], kNumJoints, where);
    for (int j = 0; j < kNumJoints; ++j) {
      seq.frames[t][j] =
          vec3(frames[t][j], where + "[" + std::to_string(j) + "]");
    }
  }
  return seq;
}

void save_marker_sequence(const MarkerSequence& seq, const std::string& path) {
  std::ostringstream out;
  out << "{\"sample_rate_hz\":";
  put_number(out, seq.sample_rate_hz);
  out << ",\"marker_names\":";
  put_string_list(out, seq.marker_names);
  out << ",\"frames\":[";
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (seq.frames[t].size() != seq.marker_names.size()) {
      throw ShapeError("marker frame " + std::to_string(t) +
                       " does not match the marker list");
    }
    out << (t ? ",\n" : "\n") << '[';
    for (std::size_t m = 0; m < seq.frames[t].size(); ++m) {
      if (m) out << ',';
      if (const auto& p = seq.frames[t][m]) {
        put_vec3(out, *p);
      } else {
        out << "null";
      }
    }
    out << ']';
  }
  out << "\n]}\n";
  write_text_file(path, out.str());
}

MarkerSequence load_marker_sequence(const std::string& path) {
  const json doc = parse_json(read_text_file(path), path);
  MarkerSequence seq;
  seq.sample_rate_hz = sample_rate(doc, path);
  const json& names =
      array(field(doc, "marker_names", path), 0, path + ".marker_names");
  for (std::size_t m = 0; m < names.size(); ++m) {
    seq.marker_names.push_back(
        string_value(names[m], path + ".marker_names[" + std::to_string(m) + "]"));
  }
  const json& frames = array(field(doc, "frames", path), 0, path + ".frames");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::string where = path + ".frames[" + std::to_string(t) + "]";
    array(frames[t], names.size(), where);
    std::vector<std::optional<Vec3>> row(names.size());
    for (std::size_t m = 0; m < names.size(); ++m) {
      if (!frames[t][m].is_null()) {
        row[m] = vec3(frames[t][m], where + "[" + std::to_string(m) + "]");
      }
    }
    seq.frames.push_back(std::move(row));
  }
  return seq;
}

// --- calibration inputs ----------------------------------------------------

PlanarObservationSet load_planar(const std::string& path) {
  const json doc = parse_json(read_text_file(path), path);
  array(doc, 0, path);
  PlanarObservationSet obs;
  for (std::size_t v = 0; v < doc.size(); ++v) {
    const std::string where = path + "[" + std::to_string(v) + "]";
    array(doc[v], 0, where);
    PlanarView view;
    for (std::size_t i = 0; i < doc[v].size(); ++i) {
      const std::string w = where + "[" + std::to_string(i) + "]";
      const json& c = array(doc[v][i], 4, w);
      view.push_back({Vec2(number(c[0], w + "[0]"), number(c[1], w + "[1]")),
                      Vec2(number(c[2], w + "[2]"), number(c[3], w + "[3]"))});
    }
    obs.views.push_back(std::move(view));
  }
  return obs;
}

void save_planar(const PlanarObservationSet& obs, const std::string& path) {
  json doc = json::array();
  for (const auto& view : obs.views) {
    json v = json::array();
    for (const auto& c : view) {
      v.push_back({c.board.x(), c.board.y(), c.pixel.x(), c.pixel.y()});
    }
    doc.push_back(std::move(v));
  }
  write_text_file(path, doc.dump() + "\n");
}

std::vector<CameraCalibrationInput> load_calibration_index(
    const std::string& path) {
  const json doc = parse_json(read_text_file(path), path);
  const json& cams = array(field(doc, "cameras", path), 0, path + ".cameras");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<CameraCalibrationInput> out;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const std::string where = path + ".cameras[" + std::to_string(i) + "]";
    CameraCalibrationInput in;
    in.camera_id =
        string_value(field(cams[i], "camera_id", where), where + ".camera_id");
    const json& size =
        array(field(cams[i], "image_size", where), 2, where + ".image_size");
    if (!size[0].is_number_integer() || !size[1].is_number_integer() ||
        size[0].get<int>() <= 0 || size[1].get<int>() <= 0) {
      fail(where + ".image_size", "expected positive integers");
    }
    in.width = size[0].get<int>();
    in.height = size[1].get<int>();
    const std::string planar =
        string_value(field(cams[i], "planar", where), where + ".planar");
    in.planar = load_planar((base / planar).string());
    out.push_back(std::move(in));
  }
  return out;
}

void save_calibration_index(const std::vector<CameraCalibrationInput>& cameras,
                            const std::string& path) {
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  json doc;
  doc["cameras"] = json::array();
  for (const auto& cam : cameras) {
    const std::string file = cam.camera_id + "_planar.json";
    save_planar(cam.planar, (base / file).string());
    doc["cameras"].push_back({{"camera_id", cam.camera_id},
                              {"image_size", {cam.width, cam.height}},
                              {"planar", file}});
  }
  write_text_file(path, doc.dump(2) + "\n");
}

std::vector<Observation3D> load_observations(const std::string& path) {
  std::vector<Observation3D> out;
  const auto lines = lines_of(read_text_file(path));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (blank(lines[n])) continue;
    const std::string where = path + ":" + std::to_string(n + 1);
    const json rec = parse_json(lines[n], where);
    Observation3D o;
    o.camera_id =
        string_value(field(rec, "camera_id", where), where + ".camera_id");
    const json& id = field(rec, "point_id", where);
    if (!id.is_number_integer()) fail(where + ".point_id", "expected integer");
    o.point_id = id.get<int>();
    o.pixel = Vec2(number(field(rec, "u", where), where + ".u"),
                   number(field(rec, "v", where), where + ".v"));
    out.push_back(std::move(o));
  }
  return out;
}

void save_observations(const std::vector<Observation3D>& obs,
                       const std::string& path) {
  std::ostringstream out;
  for (const auto& o : obs) {
    out << "{\"camera_id\":" << json(o.camera_id).dump()
        << ",\"point_id\":" << o.point_id << ",\"u\":";
    put_number(out, o.pixel.x());
    out << ",\"v\":";
    put_number(out, o.pixel.y());
    out << "}\n";
  }
  write_text_file(path, out.str());
}

// --- alignment models ------------------------------------------------------

namespace {

std::array<std::string, 3> triad(const json& v, const std::string& where) {
  array(v, 3, where);
  std::array<std::string, 3> out;
  for (int k = 0; k < 3; ++k) {
    out[k] = string_value(v[k], where + "[" + std::to_string(k) + "]");
  }
  return out;
}

}  // namespace

JointOffsetModel load_offset_model(const std::string& path) {
  const json doc = parse_json(read_text_file(path), path);
  if (!doc.is_object()) fail(path, "expected an object keyed by joint name");
  JointOffsetModel model;
  for (const auto& [name, entry] : doc.items()) {
    const std::string where = path + "." + name;
    if (!Skeleton::coco().index_of(name)) fail(where, "unknown joint name");
    JointOffset off;
    off.markers = triad(field(entry, "markers", where), where + ".markers");
    off.weights = vec3(field(entry, "w", where), where + ".w");
    model.joints[name] = off;
  }
  return model;
}

void save_offset_model(const JointOffsetModel& model, const std::string& path) {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (const auto& [name, off] : model.joints) {
    out << (first ? "\n  " : ",\n  ") << json(name).dump() << ": {\"markers\": ";
    put_string_list(out, off.markers);
    out << ", \"w\": ";
    put_vec3(out, off.weights);
    out << "}";
    first = false;
  }
  out << "\n}\n";
  write_text_file(path, out.str());
}

std::map<std::string, std::array<std::string, 3>> load_triad_overrides(
    const std::string& path) {
  const json doc = parse_json(read_text_file(path), path);
  if (!doc.is_object()) fail(path, "expected an object keyed by joint name");
  std::map<std::string, std::array<std::string, 3>> out;
  for (const auto& [name, entry] : doc.items()) {
    if (!Skeleton::coco().index_of(name)) {
      fail(path + "." + name, "unknown joint name");
    }
    out[name] = triad(entry, path + "." + name);
  }
  return out;
}

void save_triad_overrides(
    const std::map<std::string, std::array<std::string, 3>>& table,
    const std::string& path) {
  json doc = json::object();
  for (const auto& [name, t] : table) doc[name] = {t[0], t[1], t[2]};
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace posecap
