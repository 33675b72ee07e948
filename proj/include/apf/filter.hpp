#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "apf/geometry.hpp"
#include "apf/grid.hpp"
#include "apf/rng.hpp"

namespace apf {

struct DegenerateBelief : std::runtime_error {
  DegenerateBelief() : std::runtime_error("belief degenerate: all weights zero") {}
};

struct AllZeroMeasurement : std::runtime_error {
  AllZeroMeasurement() : std::runtime_error("first measurement has no support") {}
};

/// Weighted 3D hypothesis. tracked_depth is the depth at the last
/// observation that passed the consistency check; prediction falls back to
/// it when the flow-implied depth change is rejected.
struct Particle {
  Vec3 position;
  double tracked_depth = 0.0;
  double weight = 0.0;
};

inline Particle& particle_base(Particle& p) { return p; }
inline const Particle& particle_base(const Particle& p) { return p; }

template <class P>
struct BeliefT {
  std::vector<P> particles;
  long generation = 0;

  std::size_t size() const { return particles.size(); }
};

using Belief = BeliefT<Particle>;

struct FilterParams {
  int n_particles = 1000;
  double prediction_noise_sigma = 0.01;  // meters
  double depth_consistency_tol = 0.15;   // meters
  double injection_fraction = 0.1;
  int injection_grid_cells = 8;  // per image axis
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (n_particles < 10) throw std::invalid_argument("FilterParams: n_particles must be >= 10");
    if (!(prediction_noise_sigma >= 0.0))
      throw std::invalid_argument("FilterParams: prediction_noise_sigma must be >= 0");
    if (!(depth_consistency_tol > 0.0))
      throw std::invalid_argument("FilterParams: depth_consistency_tol must be > 0");
    if (!(injection_fraction >= 0.0 && injection_fraction < 0.5))
      throw std::invalid_argument("FilterParams: injection_fraction must be in [0, 0.5)");
    if (injection_grid_cells < 1)
      throw std::invalid_argument("FilterParams: injection_grid_cells must be >= 1");
  }
};

/// Occupancy mask over the injection grid (cells_per_axis^2 image cells).
struct CellMask {
  int cells_per_axis = 1;
  int image_width = 0;
  int image_height = 0;
  std::vector<std::uint8_t> allowed;

  int cell_of(double u, double v) const {
    const int cx = std::min(cells_per_axis - 1,
                            static_cast<int>(u * cells_per_axis / image_width));
    const int cy = std::min(cells_per_axis - 1,
                            static_cast<int>(v * cells_per_axis / image_height));
    return cy * cells_per_axis + cx;
  }

  bool allows(double u, double v) const { return allowed[cell_of(u, v)] != 0; }
};

namespace detail {

template <class P>
std::vector<int> cell_occupancy(const BeliefT<P>& belief, const CameraModel& cam, int cells) {
  std::vector<int> counts(static_cast<std::size_t>(cells) * cells, 0);
  CellMask geometry{cells, cam.width, cam.height, {}};
  for (const auto& p : belief.particles) {
    const auto px = project(cam, particle_base(p).position);
    if (px) counts[geometry.cell_of(px->x, px->y)]++;
  }
  return counts;
}

}  // namespace detail

/// Low-density grid cells: occupancy strictly below the mean occupancy of
/// the occupied cells. Empty cells always qualify. The mean over occupied
/// cells keeps sparsely-seeded regions eligible for further injection while
/// the belief's bulk cells stay excluded; a global median would be zero for
/// any concentrated belief and disable injection entirely.
template <class P>
CellMask low_density_cells(const BeliefT<P>& belief, const CameraModel& cam, int cells_per_axis) {
  const auto counts = detail::cell_occupancy(belief, cam, cells_per_axis);
  long total = 0;
  long occupied = 0;
  for (int c : counts) {
    total += c;
    if (c > 0) ++occupied;
  }
  const double mean = occupied > 0 ? static_cast<double>(total) / static_cast<double>(occupied) : 1.0;
  CellMask mask{cells_per_axis, cam.width, cam.height, std::vector<std::uint8_t>(counts.size(), 0)};
  for (std::size_t i = 0; i < counts.size(); ++i) mask.allowed[i] = counts[i] < mean ? 1 : 0;
  return mask;
}

/// Draws N particles from the first measurement; uniform weights.
/// Sampler: see HeatmapSampler / CandidateSampler.
template <class Sampler>
BeliefT<typename Sampler::particle_type> initialize(const Sampler& sampler,
                                                    const FilterParams& params, Rng& rng) {
  params.validate();
  if (!sampler.has_support()) throw AllZeroMeasurement();
  BeliefT<typename Sampler::particle_type> belief;
  belief.particles.reserve(params.n_particles);
  const double w = 1.0 / params.n_particles;
  for (int i = 0; i < params.n_particles; ++i) {
    auto p = sampler.sample(rng);
    particle_base(p).weight = w;
    belief.particles.push_back(std::move(p));
  }
  belief.generation = 0;
  return belief;
}

/// Flow-based propagation with depth-consistency rejection.
///
/// Each particle is projected, displaced by the flow at its pixel, and
/// re-lifted at the displaced pixel's depth in the new frame. A depth jump
/// beyond depth_consistency_tol (or invalid depth) is rejected: lateral
/// motion is applied but the particle keeps tracked_depth. Isotropic noise
/// is added last. Out-of-frame particles keep their position plus noise.
template <class P>
void predict(BeliefT<P>& belief, const FlowField& flow, const DepthImage& new_depth,
             const CameraModel& cam, const FilterParams& params, Rng& rng) {
  const double sigma = params.prediction_noise_sigma;
  for (auto& particle : belief.particles) {
    auto& b = particle_base(particle);
    const Vec3 noise{sigma * rng.normal(), sigma * rng.normal(), sigma * rng.normal()};
    const auto px = project(cam, b.position);
    if (!px) {
      b.position += noise;
      continue;
    }
    const Vec2 f = flow.at(nearest_pixel(px->x, flow.width()), nearest_pixel(px->y, flow.height()));
    const double u = px->x + f.x;
    const double v = px->y + f.y;
    if (u < 0.0 || u >= cam.width || v < 0.0 || v >= cam.height) {
      b.position += noise;
      continue;
    }
    const double d_new =
        new_depth.at(nearest_pixel(u, new_depth.width()), nearest_pixel(v, new_depth.height()));
    const bool consistent = d_new > 0.0 && std::abs(d_new - b.tracked_depth) <= params.depth_consistency_tol;
    const double d = consistent ? d_new : b.tracked_depth;
    if (consistent) b.tracked_depth = d_new;
    b.position = backproject(cam, u, v, d) + noise;
  }
}

/// Replaces the floor(injection_fraction * N) lowest-weight particles with
/// measurement draws restricted to low-density grid cells. No-op when the
/// measurement has no support there. N is unchanged; injected particles get
/// weight 1/N.
template <class P, class Sampler>
void inject(BeliefT<P>& belief, const Sampler& sampler, const CameraModel& cam,
            const FilterParams& params, Rng& rng) {
  const std::size_t n = belief.size();
  const std::size_t k = static_cast<std::size_t>(params.injection_fraction * static_cast<double>(n));
  if (k == 0) return;
  const CellMask mask = low_density_cells(belief, cam, params.injection_grid_cells);
  if (!sampler.has_support_in(mask)) return;

  // Random tie-breaking among equal weights. Weights are uniform right after
  // resampling, and systematic resampling preserves array order, so a
  // deterministic index tie-break would keep replacing the particles injected
  // one step earlier.
  std::vector<std::uint64_t> priority(n);
  for (auto& p : priority) p = rng.next_u64();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](std::size_t a, std::size_t b) {
    const double wa = particle_base(belief.particles[a]).weight;
    const double wb = particle_base(belief.particles[b]).weight;
    return wa != wb ? wa < wb : priority[a] < priority[b];
  });

  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < k; ++i) {
    auto sampled = sampler.sample_in_cells(mask, rng);
    if (!sampled) break;  // support exhausted mid-way: keep remaining particles
    particle_base(*sampled).weight = w;
    belief.particles[order[i]] = std::move(*sampled);
  }
}

/// Scales weights to sum to 1. Throws DegenerateBelief when the total is
/// zero; the caller decides how to recover (pipelines reset to uniform).
template <class P>
void normalize(BeliefT<P>& belief) {
  double total = 0.0;
  for (const auto& p : belief.particles) total += particle_base(p).weight;
  if (!(total > 0.0)) throw DegenerateBelief();
  for (auto& p : belief.particles) particle_base(p).weight /= total;
}

/// normalize() with the standard recovery: degenerate beliefs reset to
/// uniform weights. Returns true when the reset happened.
template <class P>
bool normalize_or_reset(BeliefT<P>& belief) {
  try {
    normalize(belief);
    return false;
  } catch (const DegenerateBelief&) {
    const double w = 1.0 / static_cast<double>(belief.size());
    for (auto& p : belief.particles) particle_base(p).weight = w;
    return true;
  }
}

/// Index selection of systematic resampling: strata (u0 + k) / n_out over
/// the cumulative weights. Copy count of entry i is n_out * w_i up to the
/// stratification rounding (+-1).
inline std::vector<std::size_t> systematic_indices(std::span<const double> weights,
                                                   std::size_t n_out, double u0) {
  std::vector<std::size_t> out;
  out.reserve(n_out);
  std::size_t i = 0;
  double c = weights.empty() ? 0.0 : weights[0];
  for (std::size_t k = 0; k < n_out; ++k) {
    const double u = (u0 + static_cast<double>(k)) / static_cast<double>(n_out);
    while (u > c && i + 1 < weights.size()) {
      ++i;
      c += weights[i];
    }
    out.push_back(i);
  }
  return out;
}

/// Systematic resampling: one uniform offset, stride 1/N over the cumulative
/// weights. Output weights are uniform.
template <class P>
void resample(BeliefT<P>& belief, Rng& rng) {
  const std::size_t n = belief.size();
  const double u0 = rng.uniform01();
  std::vector<double> weights;
  weights.reserve(n);
  for (const auto& p : belief.particles) weights.push_back(particle_base(p).weight);
  std::vector<P> out;
  out.reserve(n);
  for (std::size_t idx : systematic_indices(weights, n, u0)) out.push_back(belief.particles[idx]);
  const double w = 1.0 / static_cast<double>(n);
  for (auto& p : out) particle_base(p).weight = w;
  belief.particles = std::move(out);
  belief.generation++;
}

template <class P>
std::vector<Vec3> positions(const BeliefT<P>& belief) {
  std::vector<Vec3> out;
  out.reserve(belief.size());
  for (const auto& p : belief.particles) out.push_back(particle_base(p).position);
  return out;
}

/// Assigns per-particle weights (replaces, does not multiply: resampling
/// runs every step, so the prior is uniform).
template <class P>
void set_weights(BeliefT<P>& belief, std::span<const double> weights) {
  if (weights.size() != belief.size()) throw std::invalid_argument("set_weights: size mismatch");
  for (std::size_t i = 0; i < weights.size(); ++i) particle_base(belief.particles[i]).weight = weights[i];
}

}  // namespace apf
