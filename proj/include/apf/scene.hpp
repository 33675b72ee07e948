#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apf/frame.hpp"
#include "apf/geometry.hpp"
#include "apf/graspability.hpp"
#include "apf/grid.hpp"
#include "apf/rng.hpp"
#include "apf/volumes.hpp"

namespace apf {

/// Axis-aligned primitive in camera-aligned axes.
struct Shape {
  enum class Kind { box, cylinder };

  Kind kind = Kind::box;
  Vec3 half_extents;       // box
  double radius = 0.0;     // cylinder
  double half_height = 0.0;
  int axis = 1;            // cylinder axis: 0=x, 1=y, 2=z
};

struct SceneObject {
  std::string name;
  Shape shape;
  Vec3 position;  // center at frame 0
  Vec3 velocity;  // meters per frame, translation only
  int appear_frame = 0;
  bool is_distractor = false;  // no interaction volumes; graspable decoys and furniture
  bool clutter_only = false;   // present only under the cluttered condition
  bool graspable = true;       // surfaces yield grasp candidates
  std::vector<ManipVolume> volumes;  // object frame, relative to center
  // Regions the appearance-based movability source fires on. Typically a
  // superset of the interaction volumes (a human touches the whole drawer
  // front, a robot needs the handle). Empty means identical to volumes.
  std::vector<ManipVolume> appearance_volumes;

  Vec3 center_at(int t) const { return position + static_cast<double>(t) * velocity; }

  bool active(int t, const Condition& condition) const {
    if (t < appear_frame) return false;
    if (clutter_only && condition.clutter != Clutter::cluttered) return false;
    return true;
  }
};

struct Scene {
  std::string name;
  int length = 30;
  CameraModel cam;
  std::vector<SceneObject> objects;
};

/// Measurement-corruption knobs. Encodes the qualitative failure modes of
/// the simulated sources: appearance noise and darkness hit the heatmap,
/// geometric ambiguity puts spurious grasps on depth edges.
struct NoiseModel {
  double heatmap_blur_sigma = 1.5;     // pixels
  double heatmap_fp_rate = 0.4;        // per blob slot (8 slots per frame)
  double heatmap_fp_amplitude = 1.0;
  double heatmap_fp_sigma = 3.5;       // blob radius in pixels
  double heatmap_fp_clearance = 0.08;  // min distance of blob centers to true regions, meters
  double heatmap_outage_rate = 0.1;    // appearance inference failure per frame (t >= 1)
  double dark_attenuation = 0.3;       // true-region response factor when dark
  double grasp_edge_fp_rate = 0.4;     // per edge-candidate slot
  double grasp_outage_rate = 0.1;      // true candidates missing per frame (t >= 1)
  double grasp_position_sigma = 0.01;  // meters
  double grasp_p_noise = 0.08;         // std of success perturbation
  int candidates_per_object = 12;
  double edge_threshold = 0.05;        // meters, simulator-side discontinuity test
  std::uint64_t rng_seed = 0;

  void validate() const {
    auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!rate(heatmap_fp_rate) || !rate(grasp_edge_fp_rate) || !rate(heatmap_fp_amplitude) ||
        !rate(dark_attenuation) || !rate(heatmap_outage_rate) || !rate(grasp_outage_rate))
      throw std::invalid_argument("NoiseModel: rates must be in [0,1]");
    if (heatmap_blur_sigma < 0.0 || grasp_position_sigma < 0.0 || grasp_p_noise < 0.0)
      throw std::invalid_argument("NoiseModel: sigmas must be >= 0");
    if (candidates_per_object < 0) throw std::invalid_argument("NoiseModel: candidate count < 0");
    if (!(edge_threshold > 0.0)) throw std::invalid_argument("NoiseModel: edge_threshold must be > 0");
  }
};

namespace detail {

struct RayHit {
  double t = std::numeric_limits<double>::infinity();
  int object = -1;
};

// Ray from the origin through direction d (d.z == 1, so t equals z-depth).
inline std::optional<double> intersect_box(const Vec3& d, const Vec3& center, const Vec3& half) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  const double o[3] = {0.0, 0.0, 0.0};
  const double dir[3] = {d.x, d.y, d.z};
  const double c[3] = {center.x, center.y, center.z};
  const double h[3] = {half.x, half.y, half.z};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-12) {
      if (std::abs(o[a] - c[a]) > h[a]) return std::nullopt;
      continue;
    }
    double t1 = (c[a] - h[a] - o[a]) / dir[a];
    double t2 = (c[a] + h[a] - o[a]) / dir[a];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return std::nullopt;
  }
  if (tmax < 1e-9) return std::nullopt;
  return tmin > 1e-9 ? tmin : tmax;
}

inline std::optional<double> intersect_cylinder(const Vec3& d, const Vec3& center, double radius,
                                                double half_height, int axis) {
  const int i = (axis + 1) % 3;
  const int j = (axis + 2) % 3;
  const double dir[3] = {d.x, d.y, d.z};
  const double c[3] = {center.x, center.y, center.z};
  const double a = dir[i] * dir[i] + dir[j] * dir[j];
  const double b = -2.0 * (dir[i] * c[i] + dir[j] * c[j]);
  const double cc = c[i] * c[i] + c[j] * c[j] - radius * radius;

  double best = std::numeric_limits<double>::infinity();
  if (a > 1e-14) {
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t > 1e-9 && std::abs(t * dir[axis] - c[axis]) <= half_height) best = std::min(best, t);
      }
    }
  }
  // End caps.
  if (std::abs(dir[axis]) > 1e-12) {
    for (double sign : {-1.0, 1.0}) {
      const double t = (c[axis] + sign * half_height) / dir[axis];
      if (t <= 1e-9) continue;
      const double pi = t * dir[i] - c[i];
      const double pj = t * dir[j] - c[j];
      if (pi * pi + pj * pj <= radius * radius) best = std::min(best, t);
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

inline std::optional<double> intersect(const Vec3& d, const Shape& shape, const Vec3& center) {
  if (shape.kind == Shape::Kind::box) return intersect_box(d, center, shape.half_extents);
  return intersect_cylinder(d, center, shape.radius, shape.half_height, shape.axis);
}

inline Vec3 surface_normal(const Shape& shape, const Vec3& center, const Vec3& p) {
  const Vec3 rel = p - center;
  if (shape.kind == Shape::Kind::box) {
    const double rx = std::abs(rel.x) / shape.half_extents.x;
    const double ry = std::abs(rel.y) / shape.half_extents.y;
    const double rz = std::abs(rel.z) / shape.half_extents.z;
    if (rx >= ry && rx >= rz) return {rel.x >= 0 ? 1.0 : -1.0, 0.0, 0.0};
    if (ry >= rz) return {0.0, rel.y >= 0 ? 1.0 : -1.0, 0.0};
    return {0.0, 0.0, rel.z >= 0 ? 1.0 : -1.0};
  }
  const int axis = shape.axis;
  const int i = (axis + 1) % 3;
  const int j = (axis + 2) % 3;
  const double r[3] = {rel.x, rel.y, rel.z};
  if (std::abs(std::abs(r[axis]) - shape.half_height) < 1e-6) {
    Vec3 n{0, 0, 0};
    (&n.x)[axis] = r[axis] >= 0 ? 1.0 : -1.0;
    return n;
  }
  Vec3 n{0, 0, 0};
  const double len = std::sqrt(r[i] * r[i] + r[j] * r[j]);
  if (len < 1e-12) {
    (&n.x)[axis] = 1.0;
    return n;
  }
  (&n.x)[i] = r[i] / len;
  (&n.x)[j] = r[j] / len;
  return n;
}

inline void gaussian_blur(Grid<double>& g, double sigma) {
  if (sigma <= 0.0) return;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    total += kernel[k + radius];
  }
  for (auto& k : kernel) k /= total;

  Grid<double> tmp(g.width(), g.height(), 0.0);
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * g.at(std::clamp(x + k, 0, g.width() - 1), y);
      tmp.at(x, y) = acc;
    }
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * tmp.at(x, std::clamp(y + k, 0, g.height() - 1));
      g.at(x, y) = acc;
    }
}

}  // namespace detail

/// Seed-independent per-frame geometry: depth, flow to the next frame,
/// per-pixel object ids, ground-truth volumes and appearance regions in
/// camera frame.
struct GeometryFrame {
  DepthImage depth;
  FlowField flow;
  Grid<int> object_id;
  std::vector<ManipVolume> ground_truth;
  std::vector<ManipVolume> appearance_regions;
  int frame_id = 0;
};

inline GeometryFrame render_geometry(const Scene& scene, int t, const Condition& condition) {
  const CameraModel& cam = scene.cam;
  GeometryFrame out;
  out.frame_id = t;
  out.depth = DepthImage(cam.width, cam.height, 0.0);
  out.flow = FlowField(cam.width, cam.height, Vec2{0.0, 0.0});
  out.object_id = Grid<int>(cam.width, cam.height, -1);

  std::vector<int> active;
  for (std::size_t k = 0; k < scene.objects.size(); ++k)
    if (scene.objects[k].active(t, condition)) active.push_back(static_cast<int>(k));

  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const Vec3 dir{(x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0};
      detail::RayHit hit;
      for (int k : active) {
        const auto& obj = scene.objects[k];
        if (const auto tz = detail::intersect(dir, obj.shape, obj.center_at(t))) {
          if (*tz < hit.t) hit = {*tz, k};
        }
      }
      if (hit.object < 0) continue;
      out.depth.at(x, y) = hit.t;
      out.object_id.at(x, y) = hit.object;
      if (t + 1 < scene.length) {
        const auto& obj = scene.objects[hit.object];
        const Vec3 p = hit.t * dir;
        if (const auto moved = project(cam, p + obj.velocity))
          out.flow.at(x, y) = Vec2{moved->x - x, moved->y - y};
      }
    }
  }

  for (int k : active) {
    const auto& obj = scene.objects[k];
    const Vec3 c = obj.center_at(t);
    auto to_world = [&](const ManipVolume& vol) {
      ManipVolume world = vol;
      world.center = c + vol.center;
      world.label = obj.name + ":" + (vol.label.empty() ? "part" : vol.label);
      return world;
    };
    if (!obj.is_distractor)
      for (const auto& vol : obj.volumes) out.ground_truth.push_back(to_world(vol));
    const auto& appearance = obj.appearance_volumes.empty() ? obj.volumes : obj.appearance_volumes;
    for (const auto& vol : appearance) out.appearance_regions.push_back(to_world(vol));
  }
  return out;
}

/// Heatmap standing in for an appearance-based movability predictor:
/// ground-truth regions blurred, attenuated in the dark, plus transient
/// false-positive blobs away from the true regions.
inline MovabilityMeasurement synth_movability(const Scene& scene, const GeometryFrame& geom,
                                              const NoiseModel& noise, const Condition& condition,
                                              Rng& rng) {
  const CameraModel& cam = scene.cam;
  // Inference failure: the appearance response on true regions collapses for
  // this frame; false positives are unaffected. Never on the first frame.
  const bool outage = rng.uniform01() < noise.heatmap_outage_rate && geom.frame_id > 0;
  const double response = outage ? 0.0 : 1.0;
  Heatmap heat(cam.width, cam.height, 0.0);
  std::vector<std::size_t> blob_pool, foreground_pool;
  std::vector<double> valid_depths;
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const double d = geom.depth.at(x, y);
      if (d <= 0.0) continue;
      valid_depths.push_back(d);
      const Vec3 p = backproject(cam, x, y, d);
      if (distance_to_nearest(geom.appearance_regions, p) == 0.0) heat.at(x, y) = response;
      if (distance_to_nearest(geom.ground_truth, p) >= noise.heatmap_fp_clearance)
        blob_pool.push_back(static_cast<std::size_t>(y) * cam.width + x);
    }
  // Appearance false positives prefer foreground surfaces (textured objects)
  // over the far background. Foreground cutoff from robust depth extremes.
  if (!valid_depths.empty()) {
    const std::size_t lo_k = valid_depths.size() / 100;
    const std::size_t hi_k = valid_depths.size() * 19 / 20;
    std::nth_element(valid_depths.begin(), valid_depths.begin() + lo_k, valid_depths.end());
    const double d_lo = valid_depths[lo_k];
    std::nth_element(valid_depths.begin(), valid_depths.begin() + hi_k, valid_depths.end());
    const double d_hi = valid_depths[hi_k];
    const double fg_depth = d_lo + 0.35 * (d_hi - d_lo);
    for (const std::size_t pix : blob_pool) {
      const int x = static_cast<int>(pix) % cam.width;
      const int y = static_cast<int>(pix) / cam.width;
      if (geom.depth.at(x, y) <= fg_depth) foreground_pool.push_back(pix);
    }
  }

  detail::gaussian_blur(heat, noise.heatmap_blur_sigma);
  if (condition.lighting == Lighting::dark)
    for (auto& v : heat.data()) v *= noise.dark_attenuation;

  const double blob_sigma = std::max(noise.heatmap_fp_sigma, noise.heatmap_blur_sigma);
  const int blob_radius = static_cast<int>(std::ceil(3.0 * blob_sigma));
  for (int slot = 0; slot < 8; ++slot) {
    if (rng.uniform01() >= noise.heatmap_fp_rate) continue;
    const bool prefer_foreground = rng.uniform01() < 0.65 && !foreground_pool.empty();
    const auto& pool = prefer_foreground ? foreground_pool : blob_pool;
    if (pool.empty()) continue;
    const std::size_t pix = pool[rng.uniform_index(pool.size())];
    const int x = static_cast<int>(pix) % cam.width;
    const int y = static_cast<int>(pix) / cam.width;
    const double amplitude = noise.heatmap_fp_amplitude * rng.uniform(0.6, 1.0);
    for (int dy = -blob_radius; dy <= blob_radius; ++dy)
      for (int dx = -blob_radius; dx <= blob_radius; ++dx) {
        if (!heat.in_bounds(x + dx, y + dy)) continue;
        const double r2 = static_cast<double>(dx * dx + dy * dy);
        heat.at(x + dx, y + dy) += amplitude * std::exp(-r2 / (2.0 * blob_sigma * blob_sigma));
      }
  }

  for (auto& v : heat.data()) v = std::clamp(v, 0.0, 1.0);
  MovabilityMeasurement m;
  m.heatmap = std::move(heat);
  m.frame_id = geom.frame_id;
  return m;
}

/// Candidate grasps standing in for a geometry-based grasp predictor: true
/// candidates on visible surfaces of every graspable object (distractors
/// included), plus spurious candidates on depth discontinuities.
inline GraspCandidateSet synth_grasps(const Scene& scene, const GeometryFrame& geom,
                                      const NoiseModel& noise, const Condition& condition,
                                      Rng& rng) {
  const CameraModel& cam = scene.cam;
  GraspCandidateSet out;
  out.frame_id = geom.frame_id;

  std::vector<std::vector<std::size_t>> pixels_of(scene.objects.size());
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const int k = geom.object_id.at(x, y);
      if (k >= 0)
        pixels_of[k].push_back(static_cast<std::size_t>(y) * cam.width + x);
    }

  auto jittered = [&](const Vec3& p) {
    return p + Vec3{noise.grasp_position_sigma * rng.normal(),
                    noise.grasp_position_sigma * rng.normal(),
                    noise.grasp_position_sigma * rng.normal()};
  };

  // Predictor failure: only the spurious edge candidates survive this frame.
  const bool outage = rng.uniform01() < noise.grasp_outage_rate && geom.frame_id > 0;

  constexpr double two_pi = 6.283185307179586476925286766559;
  for (std::size_t k = 0; k < scene.objects.size() && !outage; ++k) {
    const auto& obj = scene.objects[k];
    if (!obj.graspable || pixels_of[k].empty()) continue;
    for (int c = 0; c < noise.candidates_per_object; ++c) {
      const std::size_t pix = pixels_of[k][rng.uniform_index(pixels_of[k].size())];
      const int x = static_cast<int>(pix % cam.width);
      const int y = static_cast<int>(pix / cam.width);
      const Vec3 p = backproject(cam, x, y, geom.depth.at(x, y));
      GraspCandidate cand;
      cand.position = jittered(p);
      cand.pose.position = cand.position;
      cand.pose.approach = detail::surface_normal(obj.shape, obj.center_at(geom.frame_id), p);
      cand.pose.roll = rng.uniform(0.0, two_pi);
      cand.success = std::clamp(rng.uniform(0.6, 1.0) + noise.grasp_p_noise * rng.normal(), 0.0, 1.0);
      out.candidates.push_back(std::move(cand));
    }
  }

  // Spurious candidates on geometric ambiguities. Clutter doubles the
  // opportunities (more silhouette edges, table rims).
  GraspabilityParams edge_params;
  edge_params.discontinuity_threshold = noise.edge_threshold;
  const auto mask = depth_discontinuity_mask(geom.depth, edge_params);
  std::vector<std::size_t> edge_pixels;
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x)
      if (mask.at(x, y) && geom.depth.at(x, y) > 0.0)
        edge_pixels.push_back(static_cast<std::size_t>(y) * cam.width + x);

  const int slots = condition.clutter == Clutter::cluttered ? 16 : 8;
  if (!edge_pixels.empty()) {
    for (int slot = 0; slot < slots; ++slot) {
      if (rng.uniform01() >= noise.grasp_edge_fp_rate) continue;
      const std::size_t pix = edge_pixels[rng.uniform_index(edge_pixels.size())];
      const int x = static_cast<int>(pix % cam.width);
      const int y = static_cast<int>(pix / cam.width);
      const Vec3 p = backproject(cam, x, y, geom.depth.at(x, y));
      GraspCandidate cand;
      cand.position = jittered(p);
      cand.pose.position = cand.position;
      cand.pose.approach = Vec3{0.0, 0.0, -1.0};
      cand.pose.roll = rng.uniform(0.0, two_pi);
      cand.success = rng.uniform(0.5, 0.9);
      out.candidates.push_back(std::move(cand));
    }
  }
  return out;
}

/// Full simulated frame. Pure function of (scene, t, noise, condition):
/// the per-frame draw stream is derived from the noise seed, scene name,
/// condition, and t, so frames can be rendered in any order.
inline SceneFrame render_frame(const Scene& scene, int t, const NoiseModel& noise,
                               const Condition& condition) {
  noise.validate();
  scene.cam.validate();
  GeometryFrame geom = render_geometry(scene, t, condition);
  Rng rng(derive_seed(noise.rng_seed,
                      scene.name + "|" + to_string(condition.lighting) + "|" +
                          to_string(condition.clutter) + "|frame",
                      static_cast<std::uint64_t>(t)));
  SceneFrame frame;
  frame.cam = scene.cam;
  frame.move_meas = synth_movability(scene, geom, noise, condition, rng);
  frame.grasp_meas = synth_grasps(scene, geom, noise, condition, rng);
  frame.depth = std::move(geom.depth);
  frame.flow = std::move(geom.flow);
  frame.ground_truth = std::move(geom.ground_truth);
  frame.has_ground_truth = true;
  frame.frame_id = t;
  return frame;
}

inline std::vector<SceneFrame> render_sequence(const Scene& scene, int n_frames,
                                               const NoiseModel& noise, const Condition& condition) {
  std::vector<SceneFrame> frames;
  frames.reserve(n_frames);
  for (int t = 0; t < n_frames; ++t) frames.push_back(render_frame(scene, t, noise, condition));
  return frames;
}

/// The named benchmark scenes:
///   two_region      - grasp support in A and B, movability support only in A
///   tabletop_drawer - sliding drawer with a handle on a table, edge decoys
///   shelf_appear    - an object enters the shelf mid-sequence
///   two_part        - one object with two separated manipulable parts
inline std::vector<Scene> make_benchmark_suite(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "benchmark-suite"));
  CameraModel cam{130.0, 130.0, 80.0, 60.0, 160, 120};

  auto wall = [](double z) {
    SceneObject o;
    o.name = "wall";
    o.shape = {Shape::Kind::box, Vec3{1.6, 1.2, 0.05}, 0.0, 0.0, 1};
    o.position = {0.0, 0.0, z};
    o.is_distractor = true;
    o.graspable = false;
    return o;
  };

  std::vector<Scene> suite;

  {
    Scene s;
    s.name = "two_region";
    s.length = 31;
    s.cam = cam;
    SceneObject a;
    a.name = "target_a";
    a.shape = {Shape::Kind::box, Vec3{0.07, 0.07, 0.07}, 0.0, 0.0, 1};
    a.position = {-0.22, 0.05, 1.0};
    // Interaction volume with 1 cm margin so the visible surface sits
    // strictly inside it.
    a.volumes = {ManipVolume::make_box({0, 0, 0}, {0.09, 0.09, 0.09}, "body")};
    SceneObject b;
    b.name = "decoy_b";
    b.shape = {Shape::Kind::box, Vec3{0.07, 0.07, 0.07}, 0.0, 0.0, 1};
    b.position = {0.22, 0.05, 1.0};
    b.is_distractor = true;  // graspable but not movable
    s.objects = {a, b, wall(2.1)};
    suite.push_back(std::move(s));
  }

  {
    Scene s;
    s.name = "tabletop_drawer";
    s.length = 31;
    s.cam = cam;
    SceneObject table;
    table.name = "table";
    table.shape = {Shape::Kind::box, Vec3{0.5, 0.02, 0.32}, 0.0, 0.0, 1};
    table.position = {0.0, 0.25, 1.05};
    table.is_distractor = true;
    table.graspable = false;
    SceneObject drawer;
    drawer.name = "drawer";
    drawer.shape = {Shape::Kind::box, Vec3{0.10, 0.06, 0.08}, 0.0, 0.0, 1};
    drawer.position = {0.0, 0.17, 1.02};
    drawer.velocity = {0.0, 0.0, -0.004};  // slides toward the camera
    drawer.volumes = {ManipVolume::make_sphere({0.0, 0.0, -0.08}, 0.055, "handle")};
    s.objects = {table, drawer, wall(2.1)};
    for (int i = 0; i < 3; ++i) {
      SceneObject d;
      d.name = "clutter_" + std::to_string(i);
      double x = rng.uniform(-0.42, 0.42);
      for (int tries = 0; std::abs(x) < 0.18 && tries < 20; ++tries)
        x = rng.uniform(-0.42, 0.42);  // keep the drawer front clear
      if (i == 2) {
        d.shape = {Shape::Kind::cylinder, Vec3{}, 0.035, 0.06, 1};
        d.position = {x, 0.23 - 0.06, 1.0 + rng.uniform(-0.08, 0.12)};
      } else {
        d.shape = {Shape::Kind::box, Vec3{0.04, 0.05, 0.04}, 0.0, 0.0, 1};
        d.position = {x, 0.23 - 0.05, 1.0 + rng.uniform(-0.08, 0.12)};
      }
      d.is_distractor = true;
      d.clutter_only = true;
      s.objects.push_back(std::move(d));
    }
    suite.push_back(std::move(s));
  }

  {
    Scene s;
    s.name = "shelf_appear";
    s.length = 31;
    s.cam = cam;
    SceneObject board;
    board.name = "shelf_board";
    board.shape = {Shape::Kind::box, Vec3{0.45, 0.015, 0.2}, 0.0, 0.0, 1};
    board.position = {0.0, 0.1, 1.1};
    board.is_distractor = true;
    board.graspable = false;
    SceneObject existing;
    existing.name = "resident";
    existing.shape = {Shape::Kind::box, Vec3{0.05, 0.05, 0.05}, 0.0, 0.0, 1};
    existing.position = {-0.24, 0.035, 1.05};
    // Margin on the visible faces only; the downward face stays clear of
    // the shelf board.
    existing.volumes = {ManipVolume::make_box({0, -0.005, -0.005}, {0.065, 0.05, 0.065}, "body")};
    SceneObject arrival;
    arrival.name = "arrival";
    arrival.shape = {Shape::Kind::cylinder, Vec3{}, 0.065, 0.07, 1};
    arrival.position = {0.21, 0.015, 1.02};
    arrival.appear_frame = 4;
    arrival.volumes = {ManipVolume::make_sphere({0, -0.02, 0}, 0.08, "body")};
    s.objects = {board, existing, arrival, wall(2.1)};
    suite.push_back(std::move(s));
  }

  {
    Scene s;
    s.name = "two_part";
    s.length = 31;
    s.cam = cam;
    SceneObject bar;
    bar.name = "bar";
    bar.shape = {Shape::Kind::box, Vec3{0.22, 0.04, 0.05}, 0.0, 0.0, 1};
    bar.position = {0.0, 0.05, 1.0};
    bar.velocity = {0.002, 0.0, 0.0};
    // Handle volumes centered on the camera-facing face of the bar.
    bar.volumes = {ManipVolume::make_sphere({-0.18, 0.0, -0.05}, 0.06, "left_handle"),
                   ManipVolume::make_sphere({0.18, 0.0, -0.05}, 0.06, "right_handle")};
    s.objects = {bar, wall(2.1)};
    suite.push_back(std::move(s));
  }

  return suite;
}

inline const Scene& find_scene(const std::vector<Scene>& scenes, std::string_view name) {
  for (const auto& s : scenes)
    if (s.name == name) return s;
  throw std::invalid_argument("unknown scene: " + std::string(name));
}

}  // namespace apf
