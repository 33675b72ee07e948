#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "apf/filter.hpp"
#include "apf/frame.hpp"
#include "apf/geometry.hpp"
#include "apf/graspability.hpp"
#include "apf/movability.hpp"
#include "apf/rng.hpp"

namespace apf {

/// Saturation interval for a weight factor. lo == hi degenerates the factor
/// to a constant, which switches that term of the fusion off.
struct ClipRange {
  double lo = 0.0;
  double hi = 1.0;

  void validate() const {
    if (!(lo <= hi)) throw std::invalid_argument("ClipRange: lo must be <= hi");
    if (!std::isfinite(lo)) throw std::invalid_argument("ClipRange: lo must be finite");
  }
};

struct CouplingParams {
  double sigma = 0.05;  // kernel bandwidth of the cross-modal density
  ClipRange grasp_measurement_clip{0.2, 0.25};
  ClipRange grasp_crossmodal_clip{0.3, 0.6};
  ClipRange move_measurement_clip{0.2, 0.3};
  ClipRange move_crossmodal_clip{0.45, 0.55};
  // Optional affine remap of [lo,hi] onto [0,1] after clamping, for
  // sensitivity studies; default is the pure clamp.
  bool rescale_after_clip = false;

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("CouplingParams: sigma must be > 0");
    grasp_measurement_clip.validate();
    grasp_crossmodal_clip.validate();
    move_measurement_clip.validate();
    move_crossmodal_clip.validate();
  }

  /// Coupling switched off: measurement factor passes through unchanged,
  /// cross-modal factor is the constant 1.
  static CouplingParams disabled() {
    CouplingParams p;
    p.grasp_measurement_clip = {0.0, std::numeric_limits<double>::infinity()};
    p.move_measurement_clip = {0.0, std::numeric_limits<double>::infinity()};
    p.grasp_crossmodal_clip = {1.0, 1.0};
    p.move_crossmodal_clip = {1.0, 1.0};
    return p;
  }
};

/// Unnormalized kernel density of x under the other belief's particle set:
/// sum over y of exp(-|x-y|^2 / (2 sigma^2)). Exact brute-force sum; any
/// accelerated replacement must match it to 1e-6 relative error.
inline double crossmodal_density(const Vec3& x, std::span<const Vec3> other_positions, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("crossmodal_density: sigma must be > 0");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double sum = 0.0;
  for (const auto& y : other_positions) sum += std::exp(-squared_distance(x, y) * inv);
  return sum;
}

template <class P>
double crossmodal_density(const Vec3& x, const BeliefT<P>& other, double sigma) {
  if (other.particles.empty()) throw std::invalid_argument("crossmodal_density: empty belief");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double sum = 0.0;
  for (const auto& p : other.particles) sum += std::exp(-squared_distance(x, particle_base(p).position) * inv);
  return sum;
}

inline double clip(double value, const ClipRange& range) {
  return std::min(range.hi, std::max(range.lo, value));
}

namespace detail {

inline double clip_factor(double value, const ClipRange& range, bool rescale) {
  const double c = clip(value, range);
  if (!rescale) return c;
  if (range.hi == range.lo) return 1.0;
  return (c - range.lo) / (range.hi - range.lo);
}

}  // namespace detail

/// Fused weight w = f_u(w_meas) * f_c(w_cross). w_cross must already be
/// normalized by the other belief's particle count so the clip ranges are
/// scale-free in N.
inline double fuse_weights(double w_meas, double w_cross, const ClipRange& measurement_clip,
                           const ClipRange& crossmodal_clip, bool rescale_after_clip = false) {
  return detail::clip_factor(w_meas, measurement_clip, rescale_after_clip) *
         detail::clip_factor(w_cross, crossmodal_clip, rescale_after_clip);
}

struct CoupledStepStats {
  bool grasp_degenerate = false;
  bool move_degenerate = false;
};

/// One coupled timestep for both filters: per-filter predict / inject /
/// measurement weighting, then the cross-modal barrier, then normalize and
/// resample. Both cross-modal passes read frozen position snapshots taken
/// after the measurement update, so the exchange is order-independent.
/// `flow` maps the previous frame's pixels into `frame`.
inline CoupledStepStats coupled_step(GraspBelief& grasp_belief, Belief& move_belief,
                                     const FlowField& flow, const SceneFrame& frame,
                                     const FilterParams& fp, const GraspabilityParams& gp,
                                     const CouplingParams& cp, Rng& grasp_rng, Rng& move_rng,
                                     bool resample_at_end = true) {
  predict(grasp_belief, flow, frame.depth, frame.cam, fp, grasp_rng);
  inject(grasp_belief,
         CandidateSampler(frame.grasp_meas, frame.depth, frame.cam, fp.prediction_noise_sigma,
                          gp.pose_jitter_deg),
         frame.cam, fp, grasp_rng);
  const auto discontinuity = depth_discontinuity_mask(frame.depth, gp);
  const auto grasp_meas_w = weight_graspability(grasp_belief, frame.grasp_meas, discontinuity,
                                                frame.cam, gp);

  predict(move_belief, flow, frame.depth, frame.cam, fp, move_rng);
  inject(move_belief,
         HeatmapSampler(frame.move_meas.heatmap, frame.depth, frame.cam, fp.prediction_noise_sigma),
         frame.cam, fp, move_rng);
  const auto move_meas_w = weight_movability(move_belief, frame.move_meas, frame.cam);

  // Cross-modal barrier: frozen snapshots of both post-update beliefs. The
  // raw kernel sums are normalized by their per-filter maximum, which keeps
  // the clip ranges scale-free in N and meaningful when the other belief
  // splits into several clusters (a per-count normalization saturates the
  // clip floor as soon as the other belief is multi-modal).
  const auto grasp_pos = positions(grasp_belief);
  const auto move_pos = positions(move_belief);

  std::vector<double> grasp_cross(grasp_pos.size()), move_cross(move_pos.size());
  double grasp_max = 0.0, move_max = 0.0;
  for (std::size_t i = 0; i < grasp_pos.size(); ++i) {
    grasp_cross[i] = crossmodal_density(grasp_pos[i], std::span<const Vec3>(move_pos), cp.sigma);
    grasp_max = std::max(grasp_max, grasp_cross[i]);
  }
  for (std::size_t i = 0; i < move_pos.size(); ++i) {
    move_cross[i] = crossmodal_density(move_pos[i], std::span<const Vec3>(grasp_pos), cp.sigma);
    move_max = std::max(move_max, move_cross[i]);
  }

  for (std::size_t i = 0; i < grasp_belief.size(); ++i) {
    const double norm = grasp_max > 0.0 ? grasp_cross[i] / grasp_max : 0.0;
    grasp_belief.particles[i].base.weight =
        fuse_weights(grasp_meas_w[i], norm, cp.grasp_measurement_clip, cp.grasp_crossmodal_clip,
                     cp.rescale_after_clip);
  }
  for (std::size_t i = 0; i < move_belief.size(); ++i) {
    const double norm = move_max > 0.0 ? move_cross[i] / move_max : 0.0;
    move_belief.particles[i].weight =
        fuse_weights(move_meas_w[i], norm, cp.move_measurement_clip, cp.move_crossmodal_clip,
                     cp.rescale_after_clip);
  }

  CoupledStepStats stats;
  stats.grasp_degenerate = normalize_or_reset(grasp_belief);
  stats.move_degenerate = normalize_or_reset(move_belief);
  if (resample_at_end) {
    resample(grasp_belief, grasp_rng);
    resample(move_belief, move_rng);
  }
  return stats;
}

/// Uncoupled movability step (the move_only baseline and one late-fusion leg).
inline bool move_step(Belief& belief, const FlowField& flow, const SceneFrame& frame,
                      const FilterParams& fp, Rng& rng, bool resample_at_end = true) {
  predict(belief, flow, frame.depth, frame.cam, fp, rng);
  inject(belief,
         HeatmapSampler(frame.move_meas.heatmap, frame.depth, frame.cam, fp.prediction_noise_sigma),
         frame.cam, fp, rng);
  const auto w = weight_movability(belief, frame.move_meas, frame.cam);
  set_weights(belief, w);
  const bool degenerate = normalize_or_reset(belief);
  if (resample_at_end) resample(belief, rng);
  return degenerate;
}

/// Uncoupled graspability step (the grasp_only baseline and the other leg).
inline bool grasp_step(GraspBelief& belief, const FlowField& flow, const SceneFrame& frame,
                       const FilterParams& fp, const GraspabilityParams& gp, Rng& rng,
                       bool resample_at_end = true) {
  predict(belief, flow, frame.depth, frame.cam, fp, rng);
  inject(belief,
         CandidateSampler(frame.grasp_meas, frame.depth, frame.cam, fp.prediction_noise_sigma,
                          gp.pose_jitter_deg),
         frame.cam, fp, rng);
  const auto discontinuity = depth_discontinuity_mask(frame.depth, gp);
  const auto w = weight_graspability(belief, frame.grasp_meas, discontinuity, frame.cam, gp);
  set_weights(belief, w);
  const bool degenerate = normalize_or_reset(belief);
  if (resample_at_end) resample(belief, rng);
  return degenerate;
}

}  // namespace apf
