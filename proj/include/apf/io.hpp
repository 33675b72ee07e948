#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "apf/frame.hpp"
#include "apf/geometry.hpp"
#include "apf/graspability.hpp"
#include "apf/grid.hpp"
#include "apf/scene.hpp"
#include "apf/volumes.hpp"

namespace apf {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace io_detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline std::uint32_t read_u32(std::istream& in, const std::string& file) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError(file + ": truncated at offset " + std::to_string(in.tellg()));
  return v;
}

}  // namespace io_detail

// Grid files: magic "APFG", u32 kind (0 scalar, 1 vec2), u32 width, u32
// height, then row-major float64 payload (pairs dx,dy for vec2). All fields
// little-endian.
inline constexpr std::uint32_t grid_kind_scalar = 0;
inline constexpr std::uint32_t grid_kind_vec2 = 1;

inline void write_grid(const std::filesystem::path& path, const Grid<double>& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write("APFG", 4);
  io_detail::write_u32(out, grid_kind_scalar);
  io_detail::write_u32(out, static_cast<std::uint32_t>(g.width()));
  io_detail::write_u32(out, static_cast<std::uint32_t>(g.height()));
  out.write(reinterpret_cast<const char*>(g.data().data()),
            static_cast<std::streamsize>(g.data().size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_grid(const std::filesystem::path& path, const FlowField& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write("APFG", 4);
  io_detail::write_u32(out, grid_kind_vec2);
  io_detail::write_u32(out, static_cast<std::uint32_t>(g.width()));
  io_detail::write_u32(out, static_cast<std::uint32_t>(g.height()));
  for (const auto& v : g.data()) {
    out.write(reinterpret_cast<const char*>(&v.x), sizeof(double));
    out.write(reinterpret_cast<const char*>(&v.y), sizeof(double));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::uint32_t read_grid_header(std::istream& in, const std::string& file, int& width,
                                      int& height) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "APFG", 4) != 0) throw IoError(file + ": bad magic (offset 0)");
  const std::uint32_t kind = io_detail::read_u32(in, file);
  width = static_cast<int>(io_detail::read_u32(in, file));
  height = static_cast<int>(io_detail::read_u32(in, file));
  if (width <= 0 || height <= 0 || width > 1 << 16 || height > 1 << 16)
    throw IoError(file + ": implausible dimensions");
  return kind;
}

inline Grid<double> read_scalar_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  int w = 0, h = 0;
  if (read_grid_header(in, path.string(), w, h) != grid_kind_scalar)
    throw IoError(path.string() + ": expected scalar grid");
  Grid<double> g(w, h, 0.0);
  in.read(reinterpret_cast<char*>(g.data().data()),
          static_cast<std::streamsize>(g.data().size() * sizeof(double)));
  if (!in) throw IoError(path.string() + ": truncated payload at offset " + std::to_string(in.gcount() + 16));
  return g;
}

inline FlowField read_flow_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  int w = 0, h = 0;
  if (read_grid_header(in, path.string(), w, h) != grid_kind_vec2)
    throw IoError(path.string() + ": expected vec2 grid");
  FlowField g(w, h, Vec2{});
  for (auto& v : g.data()) {
    in.read(reinterpret_cast<char*>(&v.x), sizeof(double));
    in.read(reinterpret_cast<char*>(&v.y), sizeof(double));
  }
  if (!in) throw IoError(path.string() + ": truncated payload");
  return g;
}

// Candidate tables: '#'-prefixed header, then one candidate per line:
// x y z ax ay az roll p (space-separated, full double precision).
inline void write_candidates(const std::filesystem::path& path, const GraspCandidateSet& z) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "# grasp candidates: x y z ax ay az roll p\n";
  out.precision(17);
  for (const auto& c : z.candidates) {
    out << c.position.x << ' ' << c.position.y << ' ' << c.position.z << ' ' << c.pose.approach.x
        << ' ' << c.pose.approach.y << ' ' << c.pose.approach.z << ' ' << c.pose.roll << ' '
        << c.success << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline GraspCandidateSet read_candidates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  GraspCandidateSet z;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    GraspCandidate c;
    if (!(ss >> c.position.x >> c.position.y >> c.position.z >> c.pose.approach.x >>
          c.pose.approach.y >> c.pose.approach.z >> c.pose.roll >> c.success))
      throw IoError(path.string() + ": malformed candidate at line " + std::to_string(line_no));
    c.pose.position = c.position;
    z.candidates.push_back(std::move(c));
  }
  return z;
}

// ---- JSON helpers ----

inline nlohmann::json to_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::json to_json(const CameraModel& cam) {
  return {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx},
          {"cy", cam.cy}, {"width", cam.width}, {"height", cam.height}};
}

inline CameraModel camera_from_json(const nlohmann::json& j) {
  CameraModel cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  cam.validate();
  return cam;
}

inline nlohmann::json to_json(const ManipVolume& v) {
  nlohmann::json j;
  j["type"] = v.kind == ManipVolume::Kind::sphere ? "sphere" : "box";
  j["center"] = to_json(v.center);
  if (v.kind == ManipVolume::Kind::sphere)
    j["radius"] = v.radius;
  else
    j["half_extents"] = to_json(v.half_extents);
  j["label"] = v.label;
  return j;
}

inline ManipVolume volume_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "sphere")
    return ManipVolume::make_sphere(vec3_from_json(j.at("center")), j.at("radius").get<double>(),
                                    j.value("label", std::string{}));
  if (type == "box")
    return ManipVolume::make_box(vec3_from_json(j.at("center")), vec3_from_json(j.at("half_extents")),
                                 j.value("label", std::string{}));
  throw IoError("unknown volume type: " + type);
}

inline Lighting lighting_from_string(const std::string& s) {
  if (s == "well_lit") return Lighting::well_lit;
  if (s == "dark") return Lighting::dark;
  throw IoError("unknown lighting: " + s);
}

inline Clutter clutter_from_string(const std::string& s) {
  if (s == "clean") return Clutter::clean;
  if (s == "cluttered") return Clutter::cluttered;
  throw IoError("unknown clutter: " + s);
}

inline nlohmann::json to_json(const Scene& scene) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : scene.objects) {
    nlohmann::json jo;
    jo["name"] = o.name;
    if (o.shape.kind == Shape::Kind::box) {
      jo["shape"] = {{"type", "box"}, {"half_extents", to_json(o.shape.half_extents)}};
    } else {
      jo["shape"] = {{"type", "cylinder"},
                     {"radius", o.shape.radius},
                     {"half_height", o.shape.half_height},
                     {"axis", o.shape.axis}};
    }
    jo["position"] = to_json(o.position);
    jo["velocity"] = to_json(o.velocity);
    jo["appear_frame"] = o.appear_frame;
    jo["is_distractor"] = o.is_distractor;
    jo["clutter_only"] = o.clutter_only;
    jo["graspable"] = o.graspable;
    nlohmann::json vols = nlohmann::json::array();
    for (const auto& v : o.volumes) vols.push_back(to_json(v));
    jo["volumes"] = vols;
    nlohmann::json avols = nlohmann::json::array();
    for (const auto& v : o.appearance_volumes) avols.push_back(to_json(v));
    jo["appearance_volumes"] = avols;
    objects.push_back(std::move(jo));
  }
  return {{"name", scene.name}, {"length", scene.length}, {"camera", to_json(scene.cam)},
          {"objects", objects}};
}

inline Scene scene_from_json(const nlohmann::json& j) {
  Scene scene;
  scene.name = j.at("name").get<std::string>();
  scene.length = j.at("length").get<int>();
  scene.cam = camera_from_json(j.at("camera"));
  for (const auto& jo : j.at("objects")) {
    SceneObject o;
    o.name = jo.at("name").get<std::string>();
    const auto& js = jo.at("shape");
    const std::string type = js.at("type").get<std::string>();
    if (type == "box") {
      o.shape.kind = Shape::Kind::box;
      o.shape.half_extents = vec3_from_json(js.at("half_extents"));
    } else if (type == "cylinder") {
      o.shape.kind = Shape::Kind::cylinder;
      o.shape.radius = js.at("radius").get<double>();
      o.shape.half_height = js.at("half_height").get<double>();
      o.shape.axis = js.value("axis", 1);
    } else {
      throw IoError("unknown shape type: " + type);
    }
    o.position = vec3_from_json(jo.at("position"));
    o.velocity = vec3_from_json(jo.value("velocity", nlohmann::json::array({0.0, 0.0, 0.0})));
    o.appear_frame = jo.value("appear_frame", 0);
    o.is_distractor = jo.value("is_distractor", false);
    o.clutter_only = jo.value("clutter_only", false);
    o.graspable = jo.value("graspable", true);
    for (const auto& jv : jo.value("volumes", nlohmann::json::array()))
      o.volumes.push_back(volume_from_json(jv));
    for (const auto& jv : jo.value("appearance_volumes", nlohmann::json::array()))
      o.appearance_volumes.push_back(volume_from_json(jv));
    if (o.is_distractor && !o.volumes.empty())
      throw IoError("scene object '" + o.name + "': distractors cannot carry volumes");
    scene.objects.push_back(std::move(o));
  }
  return scene;
}

/// Parses a JSON file, rephrasing syntax errors as file:line diagnostics.
inline nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw IoError(path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
}

inline void save_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

// ---- Frame export / replay ----

inline void export_frame(const std::filesystem::path& dir, const SceneFrame& frame,
                         bool include_ground_truth = true) {
  std::filesystem::create_directories(dir);
  write_grid(dir / "depth.grid", frame.depth);
  write_grid(dir / "heatmap.grid", frame.move_meas.heatmap);
  write_grid(dir / "flow.grid", frame.flow);
  write_candidates(dir / "candidates.txt", frame.grasp_meas);
  nlohmann::json meta;
  meta["frame_id"] = frame.frame_id;
  meta["camera"] = to_json(frame.cam);
  meta["has_ground_truth"] = include_ground_truth && frame.has_ground_truth;
  if (include_ground_truth && frame.has_ground_truth) {
    nlohmann::json gt = nlohmann::json::array();
    for (const auto& v : frame.ground_truth) gt.push_back(to_json(v));
    meta["ground_truth"] = gt;
  }
  save_json_file(dir / "frame.json", meta);
}

inline SceneFrame load_frame(const std::filesystem::path& dir) {
  SceneFrame frame;
  const auto meta = load_json_file(dir / "frame.json");
  frame.frame_id = meta.at("frame_id").get<int>();
  frame.cam = camera_from_json(meta.at("camera"));
  frame.has_ground_truth = meta.value("has_ground_truth", false);
  if (frame.has_ground_truth)
    for (const auto& jv : meta.at("ground_truth")) frame.ground_truth.push_back(volume_from_json(jv));
  frame.depth = read_scalar_grid(dir / "depth.grid");
  frame.move_meas.heatmap = read_scalar_grid(dir / "heatmap.grid");
  frame.move_meas.frame_id = frame.frame_id;
  frame.flow = read_flow_grid(dir / "flow.grid");
  frame.grasp_meas = read_candidates(dir / "candidates.txt");
  frame.grasp_meas.frame_id = frame.frame_id;
  if (frame.depth.width() != frame.cam.width || frame.depth.height() != frame.cam.height)
    throw IoError(dir.string() + ": depth size does not match camera");
  validate_depth(frame.depth);
  validate_heatmap(frame.move_meas.heatmap);
  return frame;
}

inline void export_sequence(const std::filesystem::path& dir, const std::vector<SceneFrame>& frames,
                            const std::string& scene_name, const Condition& condition,
                            std::uint64_t seed, bool include_ground_truth = true) {
  std::filesystem::create_directories(dir);
  char name[32];
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::snprintf(name, sizeof(name), "frame_%04zu", t);
    export_frame(dir / name, frames[t], include_ground_truth);
  }
  nlohmann::json manifest;
  manifest["scene"] = scene_name;
  manifest["lighting"] = to_string(condition.lighting);
  manifest["clutter"] = to_string(condition.clutter);
  manifest["seed"] = seed;
  manifest["frames"] = frames.size();
  save_json_file(dir / "manifest.json", manifest);
}

struct RecordedSequence {
  std::string scene;
  Condition condition;
  std::uint64_t seed = 0;
  std::vector<SceneFrame> frames;
};

inline RecordedSequence load_sequence(const std::filesystem::path& dir) {
  RecordedSequence seq;
  const auto manifest = load_json_file(dir / "manifest.json");
  seq.scene = manifest.at("scene").get<std::string>();
  seq.condition.lighting = lighting_from_string(manifest.at("lighting").get<std::string>());
  seq.condition.clutter = clutter_from_string(manifest.at("clutter").get<std::string>());
  seq.seed = manifest.at("seed").get<std::uint64_t>();
  const auto n = manifest.at("frames").get<std::size_t>();
  char name[32];
  for (std::size_t t = 0; t < n; ++t) {
    std::snprintf(name, sizeof(name), "frame_%04zu", t);
    seq.frames.push_back(load_frame(dir / name));
  }
  return seq;
}

}  // namespace apf
