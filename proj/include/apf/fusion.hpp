#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "apf/coupling.hpp"
#include "apf/filter.hpp"
#include "apf/frame.hpp"
#include "apf/graspability.hpp"
#include "apf/movability.hpp"

namespace apf {

enum class FusionScheme {
  coupled,
  naive,
  early,
  late,
  grasp_only,
  move_only,
  raw_grasp,
  raw_move,
};

inline constexpr std::array<FusionScheme, 8> all_schemes = {
    FusionScheme::coupled,   FusionScheme::naive,     FusionScheme::early,
    FusionScheme::late,      FusionScheme::grasp_only, FusionScheme::move_only,
    FusionScheme::raw_grasp, FusionScheme::raw_move,
};

inline std::string to_string(FusionScheme s) {
  switch (s) {
    case FusionScheme::coupled: return "coupled";
    case FusionScheme::naive: return "naive";
    case FusionScheme::early: return "early";
    case FusionScheme::late: return "late";
    case FusionScheme::grasp_only: return "grasp_only";
    case FusionScheme::move_only: return "move_only";
    case FusionScheme::raw_grasp: return "raw_grasp";
    case FusionScheme::raw_move: return "raw_move";
  }
  return "unknown";
}

inline FusionScheme parse_scheme(std::string_view name) {
  for (auto s : all_schemes)
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown fusion scheme: " + std::string(name));
}

struct ScoredPoint {
  Vec3 position;
  double score = 0.0;
};

/// Single-frame combination, no recursion: each candidate scores
/// p_j * heatmap value at its projection.
inline std::vector<ScoredPoint> naive_fusion(const GraspCandidateSet& grasp_meas,
                                             const MovabilityMeasurement& move_meas,
                                             const CameraModel& cam) {
  std::vector<ScoredPoint> out;
  out.reserve(grasp_meas.candidates.size());
  for (const auto& c : grasp_meas.candidates) {
    double heat = 0.0;
    if (const auto px = project(cam, c.position)) heat = bilinear_sample(move_meas.heatmap, px->x, px->y);
    out.push_back({c.position, c.success * heat});
  }
  return out;
}

/// Per-candidate masses for the early-fusion belief: the combined signal
/// p_j * heatmap(y_j).
inline std::vector<double> combined_candidate_masses(const SceneFrame& frame) {
  std::vector<double> masses;
  masses.reserve(frame.grasp_meas.candidates.size());
  for (const auto& s : naive_fusion(frame.grasp_meas, frame.move_meas, frame.cam))
    masses.push_back(s.score);
  return masses;
}

/// One step of the early-fusion baseline: a single filter whose measurement
/// weight is the product of the two instantiations' weights.
inline bool early_fusion_step(GraspBelief& belief, const FlowField& flow, const SceneFrame& frame,
                              const FilterParams& fp, const GraspabilityParams& gp, Rng& rng,
                              bool resample_at_end = true) {
  predict(belief, flow, frame.depth, frame.cam, fp, rng);
  inject(belief,
         CandidateSampler(frame.grasp_meas, combined_candidate_masses(frame), frame.depth,
                          frame.cam, fp.prediction_noise_sigma, gp.pose_jitter_deg),
         frame.cam, fp, rng);
  const auto discontinuity = depth_discontinuity_mask(frame.depth, gp);
  for (auto& p : belief.particles) {
    const double wg = weight_graspability(p, frame.grasp_meas, discontinuity, frame.cam, gp);
    const double wm = weight_movability(p.base, frame.move_meas.heatmap, frame.cam);
    p.base.weight = wg * wm;
  }
  const bool degenerate = normalize_or_reset(belief);
  if (resample_at_end) resample(belief, rng);
  return degenerate;
}

/// Shared 3D histogram grid for late fusion.
struct ScoreGrid {
  Vec3 origin;
  double cell = 0.02;
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> score;

  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(iz) * ny + iy) * nx + ix;
  }

  Vec3 cell_center(std::size_t flat) const {
    const int ix = static_cast<int>(flat % nx);
    const int iy = static_cast<int>((flat / nx) % ny);
    const int iz = static_cast<int>(flat / (static_cast<std::size_t>(nx) * ny));
    return origin + Vec3{(ix + 0.5) * cell, (iy + 0.5) * cell, (iz + 0.5) * cell};
  }

  double total() const {
    double t = 0.0;
    for (double s : score) t += s;
    return t;
  }
};

namespace detail {

template <class P>
void accumulate_histogram(const BeliefT<P>& belief, ScoreGrid& grid, std::vector<double>& hist) {
  hist.assign(grid.score.size(), 0.0);
  double total = 0.0;
  for (const auto& p : belief.particles) {
    const Vec3 rel = particle_base(p).position - grid.origin;
    const int ix = static_cast<int>(std::floor(rel.x / grid.cell));
    const int iy = static_cast<int>(std::floor(rel.y / grid.cell));
    const int iz = static_cast<int>(std::floor(rel.z / grid.cell));
    if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny || iz < 0 || iz >= grid.nz) continue;
    hist[grid.index(ix, iy, iz)] += particle_base(p).weight;
    total += particle_base(p).weight;
  }
  if (total > 0.0)
    for (auto& h : hist) h /= total;
}

}  // namespace detail

/// Late fusion: bin both final beliefs into a shared grid and multiply the
/// normalized histograms cell-wise.
inline ScoreGrid late_fusion(const GraspBelief& grasp_belief, const Belief& move_belief,
                             double cell_size = 0.02) {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
  auto expand = [&](const Vec3& p) {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
  };
  for (const auto& p : grasp_belief.particles) expand(p.base.position);
  for (const auto& p : move_belief.particles) expand(p.position);

  ScoreGrid grid;
  grid.cell = cell_size;
  grid.origin = lo - Vec3{0.5 * cell_size, 0.5 * cell_size, 0.5 * cell_size};
  grid.nx = std::max(1, static_cast<int>(std::ceil((hi.x - grid.origin.x) / cell_size)) + 1);
  grid.ny = std::max(1, static_cast<int>(std::ceil((hi.y - grid.origin.y) / cell_size)) + 1);
  grid.nz = std::max(1, static_cast<int>(std::ceil((hi.z - grid.origin.z) / cell_size)) + 1);
  grid.score.assign(static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz, 0.0);

  std::vector<double> grasp_hist, move_hist;
  detail::accumulate_histogram(grasp_belief, grid, grasp_hist);
  detail::accumulate_histogram(move_belief, grid, move_hist);
  for (std::size_t i = 0; i < grid.score.size(); ++i) grid.score[i] = grasp_hist[i] * move_hist[i];
  return grid;
}

}  // namespace apf
