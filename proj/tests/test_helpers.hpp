#pragma once

#include <cmath>
#include <vector>

#include "apf/filter.hpp"
#include "apf/geometry.hpp"
#include "apf/graspability.hpp"
#include "apf/grid.hpp"

namespace apf::testing {

inline CameraModel simple_camera() { return CameraModel{100.0, 100.0, 50.0, 50.0, 100, 100}; }

inline DepthImage flat_depth(const CameraModel& cam, double depth) {
  return DepthImage(cam.width, cam.height, depth);
}

inline FlowField uniform_flow(const CameraModel& cam, double dx, double dy) {
  return FlowField(cam.width, cam.height, Vec2{dx, dy});
}

/// Rodrigues rotation of v about a unit axis.
inline Vec3 rotate(const Vec3& v, const Vec3& axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return c * v + s * cross(axis, v) + (1.0 - c) * dot(axis, v) * axis;
}

/// Particles lying exactly on the depth surface at the given pixels.
inline Belief on_surface_belief(const CameraModel& cam, const DepthImage& depth,
                                const std::vector<std::pair<int, int>>& pixels) {
  Belief b;
  for (const auto& [x, y] : pixels) {
    Particle p;
    p.position = backproject(cam, x, y, depth.at(x, y));
    p.tracked_depth = depth.at(x, y);
    p.weight = 1.0 / pixels.size();
    b.particles.push_back(p);
  }
  return b;
}

inline GraspCandidate candidate_at(const Vec3& pos, const Vec3& approach, double p) {
  GraspCandidate c;
  c.position = pos;
  c.pose.position = pos;
  c.pose.approach = approach;
  c.success = p;
  return c;
}

}  // namespace apf::testing
