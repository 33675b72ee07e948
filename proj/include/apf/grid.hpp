#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "apf/geometry.hpp"

namespace apf {

/// Dense row-major W x H raster. Cell values sit at integer pixel centers.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("Grid: size must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

  T& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool operator==(const Grid& other) const {
    return width_ == other.width_ && height_ == other.height_ && data_ == other.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Depth in meters; 0 encodes invalid.
using DepthImage = Grid<double>;
/// Values in [0,1].
using Heatmap = Grid<double>;
/// Pixel displacements to the next frame.
using FlowField = Grid<Vec2>;

inline int nearest_pixel(double c, int extent) {
  const int i = static_cast<int>(std::lround(c));
  return std::clamp(i, 0, extent - 1);
}

/// Bilinear sample at continuous pixel coordinates; edges clamp.
inline double bilinear_sample(const Grid<double>& g, double u, double v) {
  const double cu = std::clamp(u, 0.0, static_cast<double>(g.width() - 1));
  const double cv = std::clamp(v, 0.0, static_cast<double>(g.height() - 1));
  const int x0 = static_cast<int>(std::floor(cu));
  const int y0 = static_cast<int>(std::floor(cv));
  const int x1 = std::min(x0 + 1, g.width() - 1);
  const int y1 = std::min(y0 + 1, g.height() - 1);
  const double ax = cu - x0;
  const double ay = cv - y0;
  const double top = (1.0 - ax) * g.at(x0, y0) + ax * g.at(x1, y0);
  const double bot = (1.0 - ax) * g.at(x0, y1) + ax * g.at(x1, y1);
  return (1.0 - ay) * top + ay * bot;
}

inline void validate_heatmap(const Heatmap& h) {
  for (double v : h.data())
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("Heatmap: cell outside [0,1]");
}

inline void validate_depth(const DepthImage& d) {
  for (double v : d.data())
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("DepthImage: negative or non-finite depth");
}

}  // namespace apf
