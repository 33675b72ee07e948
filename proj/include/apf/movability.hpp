#pragma once

#include <optional>
#include <vector>

#include "apf/filter.hpp"
#include "apf/geometry.hpp"
#include "apf/grid.hpp"
#include "apf/rng.hpp"

namespace apf {

struct MovabilityMeasurement {
  Heatmap heatmap;
  long frame_id = 0;
};

/// Measurement weight: bilinear heatmap value at the particle's projection,
/// 0 off-frame. Always in [0,1].
inline double weight_movability(const Particle& particle, const Heatmap& heatmap,
                                const CameraModel& cam) {
  const auto px = project(cam, particle.position);
  if (!px) return 0.0;
  return bilinear_sample(heatmap, px->x, px->y);
}

inline std::vector<double> weight_movability(const Belief& belief, const MovabilityMeasurement& m,
                                             const CameraModel& cam) {
  std::vector<double> out;
  out.reserve(belief.size());
  for (const auto& p : belief.particles) out.push_back(weight_movability(p, m.heatmap, cam));
  return out;
}

/// Draws position-only particles from a heatmap, mass-proportional over
/// pixels with valid depth, lifted through the depth image. Small isotropic
/// jitter keeps the set diverse.
class HeatmapSampler {
 public:
  using particle_type = Particle;

  HeatmapSampler(const Heatmap& heatmap, const DepthImage& depth, const CameraModel& cam,
                 double jitter_sigma)
      : heatmap_(&heatmap), depth_(&depth), cam_(&cam), jitter_sigma_(jitter_sigma) {
    std::vector<double> mass(heatmap.data().size(), 0.0);
    for (int y = 0; y < heatmap.height(); ++y)
      for (int x = 0; x < heatmap.width(); ++x)
        if (depth.at(x, y) > 0.0)
          mass[static_cast<std::size_t>(y) * heatmap.width() + x] = heatmap.at(x, y);
    mass_ = std::move(mass);
    sampler_ = DiscreteSampler(mass_);
  }

  bool has_support() const { return !sampler_.empty(); }

  bool has_support_in(const CellMask& mask) const { return restricted_total(mask) > 0.0; }

  Particle sample(Rng& rng) const { return make_particle(sampler_.sample(rng), rng); }

  std::optional<Particle> sample_in_cells(const CellMask& mask, Rng& rng) const {
    std::vector<double> restricted(mass_.size(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
      if (mass_[i] <= 0.0) continue;
      const int x = static_cast<int>(i) % heatmap_->width();
      const int y = static_cast<int>(i) / heatmap_->width();
      if (mask.allows(x, y)) {
        restricted[i] = mass_[i];
        any = true;
      }
    }
    if (!any) return std::nullopt;
    DiscreteSampler s(restricted);
    return make_particle(s.sample(rng), rng);
  }

 private:
  double restricted_total(const CellMask& mask) const {
    double total = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
      if (mass_[i] <= 0.0) continue;
      const int x = static_cast<int>(i) % heatmap_->width();
      const int y = static_cast<int>(i) / heatmap_->width();
      if (mask.allows(x, y)) total += mass_[i];
    }
    return total;
  }

  Particle make_particle(std::size_t pixel, Rng& rng) const {
    const int x = static_cast<int>(pixel) % heatmap_->width();
    const int y = static_cast<int>(pixel) / heatmap_->width();
    const double d = depth_->at(x, y);
    Particle p;
    p.position = backproject(*cam_, x, y, d) +
                 Vec3{jitter_sigma_ * rng.normal(), jitter_sigma_ * rng.normal(),
                      jitter_sigma_ * rng.normal()};
    p.tracked_depth = d;
    return p;
  }

  const Heatmap* heatmap_;
  const DepthImage* depth_;
  const CameraModel* cam_;
  double jitter_sigma_;
  std::vector<double> mass_;
  DiscreteSampler sampler_;
};

}  // namespace apf
