#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

namespace apf {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double squared_norm() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(squared_norm()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

using Point3 = Vec3;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline Vec3 operator*(const Vec3& v, double s) { return s * v; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) { a = a + b; return a; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }
inline double squared_distance(const Vec3& a, const Vec3& b) { return (a - b).squared_norm(); }

inline Vec3 normalized(const Vec3& v) {
  const double n = v.norm();
  if (n <= 0.0) throw std::invalid_argument("normalized: zero-length vector");
  return {v.x / n, v.y / n, v.z / n};
}

/// Gripper hypothesis: position, approach direction (unit), roll about the
/// approach axis. Only the approach vector enters pose similarity; roll is
/// carried for downstream execution.
struct GripperPose {
  Vec3 position;
  Vec3 approach{0.0, 0.0, 1.0};
  double roll = 0.0;
};

/// Pinhole camera. Right-handed frame, +z into the scene, pixel origin
/// top-left, valid pixel coordinates half-open [0,width) x [0,height).
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("CameraModel: focal lengths must be > 0");
    if (width <= 0 || height <= 0) throw std::invalid_argument("CameraModel: image size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
      throw std::invalid_argument("CameraModel: principal point outside image");
  }
};

/// Projects a camera-frame point to continuous pixel coordinates.
/// Returns nullopt for points behind the camera or outside the image.
inline std::optional<Vec2> project(const CameraModel& cam, const Vec3& p) {
  if (!(p.z > 0.0)) return std::nullopt;
  const double u = cam.fx * (p.x / p.z) + cam.cx;
  const double v = cam.fy * (p.y / p.z) + cam.cy;
  if (u < 0.0 || u >= cam.width || v < 0.0 || v >= cam.height) return std::nullopt;
  return Vec2{u, v};
}

/// Lifts pixel (u,v) at the given depth back to a camera-frame point.
inline Vec3 backproject(const CameraModel& cam, double u, double v, double depth) {
  if (!(depth > 0.0)) throw std::invalid_argument("backproject: depth must be > 0");
  return {(u - cam.cx) / cam.fx * depth, (v - cam.cy) / cam.fy * depth, depth};
}

/// exp(-|a-b|^2 / (2 sigma^2)), in (0,1].
inline double gaussian_kernel(const Vec3& a, const Vec3& b, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
  return std::exp(-squared_distance(a, b) / (2.0 * sigma * sigma));
}

/// Dot product of unit vectors; rejects inputs whose norm deviates from 1 by
/// more than 1e-6.
inline double cosine_similarity(const Vec3& a, const Vec3& b) {
  if (std::abs(a.norm() - 1.0) > 1e-6 || std::abs(b.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("cosine_similarity: inputs must be unit vectors");
  return dot(a, b);
}

}  // namespace apf
