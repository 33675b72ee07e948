#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "apf/filter.hpp"
#include "apf/geometry.hpp"
#include "apf/grid.hpp"
#include "apf/rng.hpp"

namespace apf {

/// Position hypothesis plus the gripper pose that would realize it.
struct GraspParticle {
  Particle base;
  GripperPose pose;
};

inline Particle& particle_base(GraspParticle& p) { return p.base; }
inline const Particle& particle_base(const GraspParticle& p) { return p.base; }

using GraspBelief = BeliefT<GraspParticle>;

struct GraspCandidate {
  Vec3 position;     // y_j
  GripperPose pose;  // upsilon_j
  double success = 0.0;  // p_j in [0,1]
};

struct GraspCandidateSet {
  std::vector<GraspCandidate> candidates;
  long frame_id = 0;

  bool empty() const { return candidates.empty(); }
};

struct GraspabilityParams {
  double kernel_sigma = 0.05;             // meters, K in the proximity terms
  double discontinuity_threshold = 0.05;  // meters, 4-neighbor depth jump
  double discontinuity_penalty = 0.1;     // multiplier on discontinuity pixels
  double pose_jitter_deg = 5.0;           // approach jitter at init/injection

  void validate() const {
    if (!(kernel_sigma > 0.0)) throw std::invalid_argument("GraspabilityParams: kernel_sigma must be > 0");
    if (!(discontinuity_threshold > 0.0))
      throw std::invalid_argument("GraspabilityParams: discontinuity_threshold must be > 0");
    if (!(discontinuity_penalty >= 0.0 && discontinuity_penalty <= 1.0))
      throw std::invalid_argument("GraspabilityParams: discontinuity_penalty must be in [0,1]");
    if (!(pose_jitter_deg >= 0.0))
      throw std::invalid_argument("GraspabilityParams: pose_jitter_deg must be >= 0");
  }
};

/// Grasp success likelihood: v = max_j p_j K(x, y_j). Empty sets score 0.
inline double grasp_success_likelihood_v(const Vec3& x, const GraspCandidateSet& z,
                                         const GraspabilityParams& params) {
  double v = 0.0;
  for (const auto& c : z.candidates) v = std::max(v, c.success * gaussian_kernel(x, c.position, params.kernel_sigma));
  return v;
}

/// Pose-aware likelihood: u = max_j p_j K(x, y_j) max(0, S(nu, upsilon_j)).
/// The cosine term is clamped at 0 before the max, so a particle opposed by
/// every candidate scores 0 rather than negative.
inline double grasp_pose_similarity_u(const Vec3& x, const GripperPose& pose,
                                      const GraspCandidateSet& z, const GraspabilityParams& params) {
  double u = 0.0;
  for (const auto& c : z.candidates) {
    const double s = std::max(0.0, cosine_similarity(pose.approach, c.pose.approach));
    u = std::max(u, c.success * gaussian_kernel(x, c.position, params.kernel_sigma) * s);
  }
  return u;
}

/// True where the max absolute depth difference to a 4-neighbor exceeds the
/// threshold; invalid-depth pixels are always marked.
inline Grid<std::uint8_t> depth_discontinuity_mask(const DepthImage& depth,
                                                   const GraspabilityParams& params) {
  Grid<std::uint8_t> mask(depth.width(), depth.height(), 0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double d = depth.at(x, y);
      if (d <= 0.0) {
        mask.at(x, y) = 1;
        continue;
      }
      double max_diff = 0.0;
      if (x > 0) max_diff = std::max(max_diff, std::abs(d - depth.at(x - 1, y)));
      if (x + 1 < depth.width()) max_diff = std::max(max_diff, std::abs(d - depth.at(x + 1, y)));
      if (y > 0) max_diff = std::max(max_diff, std::abs(d - depth.at(x, y - 1)));
      if (y + 1 < depth.height()) max_diff = std::max(max_diff, std::abs(d - depth.at(x, y + 1)));
      if (max_diff > params.discontinuity_threshold) mask.at(x, y) = 1;
    }
  }
  return mask;
}

/// Measurement weight u*v, down-weighted by discontinuity_penalty when the
/// particle projects onto a discontinuity pixel.
inline double weight_graspability(const GraspParticle& particle, const GraspCandidateSet& z,
                                  const Grid<std::uint8_t>& discontinuity,
                                  const CameraModel& cam, const GraspabilityParams& params) {
  const Vec3& x = particle.base.position;
  double w = grasp_pose_similarity_u(x, particle.pose, z, params) *
             grasp_success_likelihood_v(x, z, params);
  const auto px = project(cam, x);
  if (px) {
    const int ix = nearest_pixel(px->x, discontinuity.width());
    const int iy = nearest_pixel(px->y, discontinuity.height());
    if (discontinuity.at(ix, iy)) w *= params.discontinuity_penalty;
  }
  return w;
}

inline std::vector<double> weight_graspability(const GraspBelief& belief, const GraspCandidateSet& z,
                                               const Grid<std::uint8_t>& discontinuity,
                                               const CameraModel& cam,
                                               const GraspabilityParams& params) {
  std::vector<double> out;
  out.reserve(belief.size());
  for (const auto& p : belief.particles)
    out.push_back(weight_graspability(p, z, discontinuity, cam, params));
  return out;
}

/// Draws grasp particles from a candidate set. Mass defaults to p_j but can
/// be overridden (early fusion weights candidates by the combined signal).
/// Particles inherit the drawn candidate's pose with small angular jitter.
class CandidateSampler {
 public:
  using particle_type = GraspParticle;

  CandidateSampler(const GraspCandidateSet& z, const DepthImage& depth, const CameraModel& cam,
                   double position_jitter_sigma, double pose_jitter_deg)
      : CandidateSampler(z, default_masses(z), depth, cam, position_jitter_sigma, pose_jitter_deg) {}

  CandidateSampler(const GraspCandidateSet& z, std::vector<double> masses, const DepthImage& depth,
                   const CameraModel& cam, double position_jitter_sigma, double pose_jitter_deg)
      : z_(&z),
        depth_(&depth),
        cam_(&cam),
        position_jitter_(position_jitter_sigma),
        pose_jitter_rad_(pose_jitter_deg * 0.017453292519943295),
        masses_(std::move(masses)),
        sampler_(masses_) {}

  bool has_support() const { return !sampler_.empty(); }

  bool has_support_in(const CellMask& mask) const {
    for (std::size_t j = 0; j < z_->candidates.size(); ++j)
      if (masses_[j] > 0.0 && in_mask(j, mask)) return true;
    return false;
  }

  GraspParticle sample(Rng& rng) const { return make_particle(sampler_.sample(rng), rng); }

  std::optional<GraspParticle> sample_in_cells(const CellMask& mask, Rng& rng) const {
    std::vector<double> restricted(masses_.size(), 0.0);
    bool any = false;
    for (std::size_t j = 0; j < masses_.size(); ++j) {
      if (masses_[j] > 0.0 && in_mask(j, mask)) {
        restricted[j] = masses_[j];
        any = true;
      }
    }
    if (!any) return std::nullopt;
    DiscreteSampler s(restricted);
    return make_particle(s.sample(rng), rng);
  }

 private:
  static std::vector<double> default_masses(const GraspCandidateSet& z) {
    std::vector<double> m;
    m.reserve(z.candidates.size());
    for (const auto& c : z.candidates) m.push_back(c.success);
    return m;
  }

  bool in_mask(std::size_t j, const CellMask& mask) const {
    const auto px = project(*cam_, z_->candidates[j].position);
    return px && mask.allows(px->x, px->y);
  }

  GraspParticle make_particle(std::size_t j, Rng& rng) const {
    const auto& c = z_->candidates[j];
    GraspParticle p;
    p.base.position = c.position + Vec3{position_jitter_ * rng.normal(),
                                        position_jitter_ * rng.normal(),
                                        position_jitter_ * rng.normal()};
    p.pose = c.pose;
    p.pose.position = p.base.position;
    const Vec3 wobble{pose_jitter_rad_ * rng.normal(), pose_jitter_rad_ * rng.normal(),
                      pose_jitter_rad_ * rng.normal()};
    p.pose.approach = normalized(c.pose.approach + wobble);
    const auto px = project(*cam_, p.base.position);
    double d = p.base.position.z;
    if (px) {
      const double img = depth_->at(nearest_pixel(px->x, depth_->width()),
                                    nearest_pixel(px->y, depth_->height()));
      if (img > 0.0) d = img;
    }
    p.base.tracked_depth = d;
    return p;
  }

  const GraspCandidateSet* z_;
  const DepthImage* depth_;
  const CameraModel* cam_;
  double position_jitter_;
  double pose_jitter_rad_;
  std::vector<double> masses_;
  DiscreteSampler sampler_;
};

}  // namespace apf
