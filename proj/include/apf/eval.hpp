#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "apf/filter.hpp"
#include "apf/fusion.hpp"
#include "apf/geometry.hpp"
#include "apf/grid.hpp"
#include "apf/rng.hpp"
#include "apf/volumes.hpp"

namespace apf {

struct ZeroMass : std::runtime_error {
  ZeroMass() : std::runtime_error("prediction has no mass to sample") {}
};

/// Mass-proportional affordance points from a particle belief.
template <class P>
std::vector<Vec3> sample_affordance_points(const BeliefT<P>& belief, int n, Rng& rng) {
  std::vector<double> w;
  w.reserve(belief.size());
  for (const auto& p : belief.particles) w.push_back(particle_base(p).weight);
  DiscreteSampler sampler(w);
  if (sampler.empty()) throw ZeroMass();
  std::vector<Vec3> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i)
    out.push_back(particle_base(belief.particles[sampler.sample(rng)]).position);
  return out;
}

/// Score-proportional points from per-candidate scores (naive fusion,
/// raw grasp measurements).
inline std::vector<Vec3> sample_affordance_points(std::span<const ScoredPoint> scored, int n,
                                                  Rng& rng) {
  std::vector<double> w;
  w.reserve(scored.size());
  for (const auto& s : scored) w.push_back(s.score);
  DiscreteSampler sampler(w);
  if (sampler.empty()) throw ZeroMass();
  std::vector<Vec3> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(scored[sampler.sample(rng)].position);
  return out;
}

/// Cell-mass-proportional points from a fused score grid (late fusion).
inline std::vector<Vec3> sample_affordance_points(const ScoreGrid& grid, int n, Rng& rng) {
  DiscreteSampler sampler(grid.score);
  if (sampler.empty()) throw ZeroMass();
  std::vector<Vec3> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(grid.cell_center(sampler.sample(rng)));
  return out;
}

/// Heatmap-mass-proportional points lifted through the depth image
/// (raw movability measurements).
inline std::vector<Vec3> sample_affordance_points(const Heatmap& heatmap, const DepthImage& depth,
                                                  const CameraModel& cam, int n, Rng& rng) {
  std::vector<double> mass(heatmap.data().size(), 0.0);
  for (int y = 0; y < heatmap.height(); ++y)
    for (int x = 0; x < heatmap.width(); ++x)
      if (depth.at(x, y) > 0.0)
        mass[static_cast<std::size_t>(y) * heatmap.width() + x] = heatmap.at(x, y);
  DiscreteSampler sampler(mass);
  if (sampler.empty()) throw ZeroMass();
  std::vector<Vec3> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const std::size_t pix = sampler.sample(rng);
    const int x = static_cast<int>(pix) % heatmap.width();
    const int y = static_cast<int>(pix) / heatmap.width();
    out.push_back(backproject(cam, x, y, depth.at(x, y)));
  }
  return out;
}

/// Fraction of samples within `tolerance` of the nearest volume (closed
/// boundary: exactly at tolerance counts).
inline double precision(std::span<const Vec3> samples, std::span<const ManipVolume> volumes,
                        double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("precision: tolerance must be > 0");
  if (samples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : samples)
    if (distance_to_nearest(volumes, s) <= tolerance) ++hits;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

/// Per-part hit fractions; each hit is assigned to its nearest labeled part.
/// Fractions sum to the overall precision.
inline std::map<std::string, double> part_distribution(std::span<const Vec3> samples,
                                                       std::span<const ManipVolume> parts,
                                                       double tolerance) {
  if (parts.empty()) throw std::invalid_argument("part_distribution: need at least one part");
  std::map<std::string, double> fractions;
  for (const auto& part : parts) fractions[part.label];  // all labels present in the output
  if (samples.empty()) return fractions;
  const double unit = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const int idx = nearest_volume(parts, s);
    if (idx >= 0 && parts[idx].distance(s) <= tolerance) fractions[parts[idx].label] += unit;
  }
  return fractions;
}

/// Particle position maximizing the leave-one-out kernel density of the
/// belief; ties break to the lowest particle index.
template <class P>
Vec3 densest_region(const BeliefT<P>& belief, double sigma = 0.05) {
  if (belief.particles.empty()) throw std::invalid_argument("densest_region: empty belief");
  if (!(sigma > 0.0)) throw std::invalid_argument("densest_region: sigma must be > 0");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::size_t best_i = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    const Vec3& xi = particle_base(belief.particles[i]).position;
    double density = 0.0;
    for (std::size_t j = 0; j < belief.size(); ++j) {
      if (j == i) continue;
      density += std::exp(-squared_distance(xi, particle_base(belief.particles[j]).position) * inv);
    }
    if (density > best) {
      best = density;
      best_i = i;
    }
  }
  return particle_base(belief.particles[best_i]).position;
}

}  // namespace apf
