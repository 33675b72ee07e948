#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "apf/geometry.hpp"

namespace apf {

/// Ground-truth interaction region: sphere or axis-aligned box.
/// Distance is Euclidean distance to the boundary, 0 inside.
struct ManipVolume {
  enum class Kind { sphere, box };

  Kind kind = Kind::sphere;
  Vec3 center;
  double radius = 0.0;  // sphere
  Vec3 half_extents;    // box
  std::string label;

  double distance(const Vec3& p) const {
    if (kind == Kind::sphere) {
      return std::max(0.0, (p - center).norm() - radius);
    }
    const double dx = std::max(0.0, std::abs(p.x - center.x) - half_extents.x);
    const double dy = std::max(0.0, std::abs(p.y - center.y) - half_extents.y);
    const double dz = std::max(0.0, std::abs(p.z - center.z) - half_extents.z);
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }

  bool contains(const Vec3& p) const { return distance(p) == 0.0; }

  static ManipVolume make_sphere(const Vec3& c, double r, std::string label = {}) {
    ManipVolume v;
    v.kind = Kind::sphere;
    v.center = c;
    v.radius = r;
    v.label = std::move(label);
    return v;
  }

  static ManipVolume make_box(const Vec3& c, const Vec3& half, std::string label = {}) {
    ManipVolume v;
    v.kind = Kind::box;
    v.center = c;
    v.half_extents = half;
    v.label = std::move(label);
    return v;
  }
};

inline double distance_to_nearest(std::span<const ManipVolume> volumes, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : volumes) best = std::min(best, v.distance(p));
  return best;
}

/// Index of the nearest volume, or -1 if none.
inline int nearest_volume(std::span<const ManipVolume> volumes, const Vec3& p) {
  int best_i = -1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    const double d = volumes[i].distance(p);
    if (d < best) {
      best = d;
      best_i = static_cast<int>(i);
    }
  }
  return best_i;
}

}  // namespace apf
