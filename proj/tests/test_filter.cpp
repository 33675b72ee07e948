#include "apf/filter.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "apf/graspability.hpp"
#include "apf/movability.hpp"
#include "test_helpers.hpp"

using namespace apf;
using apf::testing::candidate_at;
using apf::testing::flat_depth;
using apf::testing::on_surface_belief;
using apf::testing::simple_camera;
using apf::testing::uniform_flow;

namespace {

FilterParams small_params(int n) {
  FilterParams p;
  p.n_particles = n;
  return p;
}

}  // namespace

TEST(Initialize, SingleCellHeatmap) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 2.0);
  Heatmap heat(cam.width, cam.height, 0.0);
  heat.at(30, 40) = 1.0;
  FilterParams params = small_params(200);
  Rng rng(1);
  const auto belief = initialize(HeatmapSampler(heat, depth, cam, params.prediction_noise_sigma),
                                 params, rng);
  ASSERT_EQ(belief.size(), 200u);
  const Vec3 expected = backproject(cam, 30, 40, 2.0);
  const double bound = 3.0 * params.prediction_noise_sigma * std::sqrt(3.0);
  for (const auto& p : belief.particles) {
    EXPECT_LE(distance(p.position, expected), bound * 2.0);  // 3-sigma per axis, generous norm bound
    EXPECT_DOUBLE_EQ(p.weight, 1.0 / 200.0);
    EXPECT_DOUBLE_EQ(p.tracked_depth, 2.0);
  }
}

TEST(Initialize, TwoCellProportions) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  Heatmap heat(cam.width, cam.height, 0.0);
  heat.at(20, 50) = 0.8;
  heat.at(80, 50) = 0.2;
  FilterParams params = small_params(1000);
  params.prediction_noise_sigma = 1e-4;
  Rng rng(42);
  const auto belief = initialize(HeatmapSampler(heat, depth, cam, params.prediction_noise_sigma),
                                 params, rng);
  int left = 0;
  for (const auto& p : belief.particles)
    if (p.position.x < 0.0) ++left;
  // Binomial oracle: mean 800, sd = sqrt(1000 * 0.8 * 0.2) ~ 12.65.
  const double sd = std::sqrt(1000 * 0.8 * 0.2);
  EXPECT_NEAR(left, 800.0, 3.0 * sd);
}

TEST(Initialize, SingleCandidate) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  GraspCandidateSet z;
  z.candidates.push_back(candidate_at({0.1, 0.0, 1.0}, {0, 0, -1}, 1.0));
  FilterParams params = small_params(100);
  Rng rng(3);
  const auto belief = initialize(
      CandidateSampler(z, depth, cam, params.prediction_noise_sigma, 5.0), params, rng);
  for (const auto& p : belief.particles) {
    EXPECT_LE(distance(p.base.position, {0.1, 0.0, 1.0}), 6.0 * params.prediction_noise_sigma);
    EXPECT_NEAR(p.pose.approach.norm(), 1.0, 1e-12);
  }
}

TEST(Initialize, AllZeroMeasurementThrows) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  Heatmap heat(cam.width, cam.height, 0.0);
  FilterParams params = small_params(50);
  Rng rng(1);
  EXPECT_THROW(initialize(HeatmapSampler(heat, depth, cam, 0.01), params, rng), AllZeroMeasurement);

  GraspCandidateSet empty;
  EXPECT_THROW(initialize(CandidateSampler(empty, depth, cam, 0.01, 5.0), params, rng),
               AllZeroMeasurement);
}

TEST(Predict, IdentityWithZeroFlowZeroNoise) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.5);
  auto belief = on_surface_belief(cam, depth, {{10, 10}, {50, 50}, {77, 31}});
  const auto before = positions(belief);
  FilterParams params = small_params(10);
  params.prediction_noise_sigma = 0.0;
  Rng rng(5);
  predict(belief, uniform_flow(cam, 0.0, 0.0), depth, cam, params, rng);
  const auto after = positions(belief);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_LT(distance(before[i], after[i]), 1e-12);
}

TEST(Predict, UniformFlowShiftsProjections) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  auto belief = on_surface_belief(cam, depth, {{10, 20}, {40, 60}, {70, 15}});
  FilterParams params = small_params(10);
  params.prediction_noise_sigma = 0.0;
  Rng rng(5);
  const auto before = positions(belief);
  predict(belief, uniform_flow(cam, 5.0, 0.0), depth, cam, params, rng);
  for (std::size_t i = 0; i < belief.size(); ++i) {
    const auto p0 = project(cam, before[i]);
    const auto p1 = project(cam, belief.particles[i].position);
    ASSERT_TRUE(p0 && p1);
    EXPECT_NEAR(p1->x - p0->x, 5.0, 1e-9);
    EXPECT_NEAR(p1->y - p0->y, 0.0, 1e-9);
  }
}

TEST(Predict, DepthJumpRejected) {
  const auto cam = simple_camera();
  DepthImage depth(cam.width, cam.height, 1.0);
  for (int y = 0; y < cam.height; ++y)
    for (int x = 60; x < cam.width; ++x) depth.at(x, y) = 3.0;  // background half

  auto belief = on_surface_belief(cam, depth, {{40, 50}});
  FilterParams params = small_params(10);
  params.prediction_noise_sigma = 0.0;
  params.depth_consistency_tol = 0.1;
  Rng rng(5);
  predict(belief, uniform_flow(cam, 25.0, 0.0), depth, cam, params, rng);
  // Landed on the 3.0 m background: the jump is rejected, depth held.
  EXPECT_DOUBLE_EQ(belief.particles[0].position.z, 1.0);
  EXPECT_DOUBLE_EQ(belief.particles[0].tracked_depth, 1.0);
  const auto px = project(cam, belief.particles[0].position);
  ASSERT_TRUE(px.has_value());
  EXPECT_NEAR(px->x, 65.0, 1e-9);  // lateral motion still applied

  // Small step within tolerance: depth updates.
  auto belief2 = on_surface_belief(cam, depth, {{40, 50}});
  depth.at(45, 50) = 1.05;
  predict(belief2, uniform_flow(cam, 5.0, 0.0), depth, cam, params, rng);
  EXPECT_DOUBLE_EQ(belief2.particles[0].tracked_depth, 1.05);
}

TEST(Predict, OutOfFrameParticlesKeepPositionPlusNoise) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  Belief belief;
  Particle p;
  p.position = {5.0, 0.0, 1.0};  // projects far outside the image
  p.tracked_depth = 1.0;
  p.weight = 1.0;
  belief.particles = {p};
  FilterParams params = small_params(10);
  params.prediction_noise_sigma = 0.0;
  Rng rng(4);
  predict(belief, uniform_flow(cam, 3.0, 0.0), depth, cam, params, rng);
  EXPECT_EQ(distance(belief.particles[0].position, p.position), 0.0);

  // With noise the particle moves, but only by the noise scale.
  params.prediction_noise_sigma = 0.01;
  predict(belief, uniform_flow(cam, 3.0, 0.0), depth, cam, params, rng);
  const double moved = distance(belief.particles[0].position, p.position);
  EXPECT_GT(moved, 0.0);
  EXPECT_LT(moved, 6.0 * 0.01 * std::sqrt(3.0));
}

TEST(Inject, SupportOnlyInDenseCellsIsNoop) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  // Belief concentrated within a single grid cell; measurement support only
  // on the very same pixels, nowhere else.
  std::vector<std::pair<int, int>> pixels;
  for (int i = 0; i < 60; ++i) pixels.push_back({4 + (i % 5), 4 + (i / 5) % 5});
  auto belief = on_surface_belief(cam, depth, pixels);
  Heatmap heat(cam.width, cam.height, 0.0);
  for (const auto& [x, y] : pixels) heat.at(x, y) = 1.0;

  FilterParams params = small_params(60);
  params.injection_fraction = 0.2;
  Rng rng(8);
  const auto before = positions(belief);
  inject(belief, HeatmapSampler(heat, depth, cam, 1e-4), cam, params, rng);
  const auto after = positions(belief);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(distance(before[i], after[i]), 0.0);
}

TEST(Inject, MovesMassIntoEmptyRegion) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  // Belief concentrated on the left half.
  std::vector<std::pair<int, int>> pixels;
  for (int i = 0; i < 100; ++i) pixels.push_back({5 + (i % 40), 5 + (i % 90)});
  auto belief = on_surface_belief(cam, depth, pixels);
  // Measurement support only on the right half.
  Heatmap heat(cam.width, cam.height, 0.0);
  for (int y = 0; y < cam.height; ++y)
    for (int x = 75; x < cam.width; ++x) heat.at(x, y) = 1.0;

  FilterParams params = small_params(100);
  params.injection_fraction = 0.1;
  Rng rng(11);
  inject(belief, HeatmapSampler(heat, depth, cam, 1e-4), cam, params, rng);
  ASSERT_EQ(belief.size(), 100u);
  int right = 0;
  for (const auto& p : belief.particles)
    if (p.position.x > 0.0) ++right;
  EXPECT_GE(right, 10);
}

TEST(Inject, ZeroFractionIsNoop) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  auto belief = on_surface_belief(cam, depth, {{10, 10}, {20, 20}, {30, 30}});
  Heatmap heat(cam.width, cam.height, 1.0);
  FilterParams params = small_params(10);
  params.injection_fraction = 0.0;
  Rng rng(2);
  const auto before = positions(belief);
  inject(belief, HeatmapSampler(heat, depth, cam, 0.01), cam, params, rng);
  const auto after = positions(belief);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(distance(before[i], after[i]), 0.0);
}

TEST(Inject, ZeroMeasurementIsNoop) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  auto belief = on_surface_belief(cam, depth, {{10, 10}, {20, 20}, {30, 30}});
  Heatmap heat(cam.width, cam.height, 0.0);
  FilterParams params = small_params(10);
  params.injection_fraction = 0.3;
  Rng rng(2);
  const auto before = positions(belief);
  inject(belief, HeatmapSampler(heat, depth, cam, 0.01), cam, params, rng);
  const auto after = positions(belief);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(distance(before[i], after[i]), 0.0);
}

TEST(Inject, OccupiedCellsDoNotDecrease) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  FilterParams params = small_params(200);
  params.injection_fraction = 0.1;
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    // Two well-populated blobs; measurement support includes empty cells.
    std::vector<std::pair<int, int>> pixels;
    const int ax = 5 + static_cast<int>(rng.uniform_index(30));
    const int ay = 5 + static_cast<int>(rng.uniform_index(80));
    for (int i = 0; i < 200; ++i)
      pixels.push_back({ax + static_cast<int>(rng.uniform_index(8)),
                        ay + static_cast<int>(rng.uniform_index(8))});
    auto belief = on_surface_belief(cam, depth, pixels);
    Heatmap heat(cam.width, cam.height, 0.01);  // support everywhere
    const auto count_cells = [&](const Belief& b) {
      const auto mask = low_density_cells(b, cam, params.injection_grid_cells);
      std::set<int> occupied;
      for (const auto& p : b.particles) {
        const auto px = project(cam, p.position);
        if (px) occupied.insert(mask.cell_of(px->x, px->y));
      }
      return occupied.size();
    };
    const auto before = count_cells(belief);
    inject(belief, HeatmapSampler(heat, depth, cam, 1e-4), cam, params, rng);
    EXPECT_GE(count_cells(belief), before);
  }
}

TEST(Normalize, Basics) {
  Belief b;
  b.particles = {Particle{{0, 0, 1}, 1.0, 2.0}, Particle{{0, 0, 1}, 1.0, 2.0}};
  normalize(b);
  EXPECT_DOUBLE_EQ(b.particles[0].weight, 0.5);
  EXPECT_DOUBLE_EQ(b.particles[1].weight, 0.5);

  Belief c;
  c.particles = {Particle{{0, 0, 1}, 1.0, 0.0}, Particle{{0, 0, 1}, 1.0, 3.0},
                 Particle{{0, 0, 1}, 1.0, 1.0}};
  normalize(c);
  EXPECT_DOUBLE_EQ(c.particles[0].weight, 0.0);
  EXPECT_DOUBLE_EQ(c.particles[1].weight, 0.75);
  EXPECT_DOUBLE_EQ(c.particles[2].weight, 0.25);
}

TEST(Normalize, DegenerateThrowsAndResetRecovers) {
  Belief b;
  b.particles = {Particle{{0, 0, 1}, 1.0, 0.0}, Particle{{0, 0, 1}, 1.0, 0.0}};
  EXPECT_THROW(normalize(b), DegenerateBelief);
  EXPECT_TRUE(normalize_or_reset(b));
  EXPECT_DOUBLE_EQ(b.particles[0].weight, 0.5);
  EXPECT_DOUBLE_EQ(b.particles[1].weight, 0.5);
  EXPECT_FALSE(normalize_or_reset(b));
}

TEST(Normalize, Idempotent) {
  Belief b;
  b.particles = {Particle{{0, 0, 1}, 1.0, 0.3}, Particle{{0, 0, 1}, 1.0, 0.9}};
  normalize(b);
  const double w0 = b.particles[0].weight;
  const double w1 = b.particles[1].weight;
  normalize(b);
  EXPECT_DOUBLE_EQ(b.particles[0].weight, w0);
  EXPECT_DOUBLE_EQ(b.particles[1].weight, w1);
}

TEST(Resample, UniformWeightsCopyEachOnce) {
  Belief b;
  for (int i = 0; i < 25; ++i) b.particles.push_back(Particle{{double(i), 0, 1}, 1.0, 1.0 / 25});
  Rng rng(9);
  resample(b, rng);
  std::set<double> xs;
  for (const auto& p : b.particles) xs.insert(p.position.x);
  EXPECT_EQ(xs.size(), 25u);
  for (const auto& p : b.particles) EXPECT_DOUBLE_EQ(p.weight, 1.0 / 25);
}

TEST(Resample, DegenerateWeightVector) {
  Belief b;
  b.particles.push_back(Particle{{7, 0, 1}, 1.0, 1.0});
  for (int i = 0; i < 9; ++i) b.particles.push_back(Particle{{double(i), 0, 1}, 1.0, 0.0});
  Rng rng(9);
  resample(b, rng);
  for (const auto& p : b.particles) EXPECT_DOUBLE_EQ(p.position.x, 7.0);
}

TEST(Resample, ExactStrataForSeventyThirty) {
  // Enumerating the strata: u_k = (u0 + k) / 10 crosses 0.7 exactly after
  // seven samples for any u0 in (0,1).
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const auto idx = systematic_indices(std::vector<double>{0.7, 0.3}, 10, rng.uniform01());
    std::map<std::size_t, int> counts;
    for (auto i : idx) counts[i]++;
    EXPECT_EQ(counts[0], 7);
    EXPECT_EQ(counts[1], 3);
  }
}

TEST(Resample, CopyFrequencyMatchesWeights) {
  // 1000 resamples of a fixed belief: empirical copy frequency of each
  // particle within 3 standard errors of its weight. Under systematic
  // resampling the per-trial copy count is two-valued with success
  // probability frac(N*C_i) - frac(N*C_{i-1}) mod 1, which gives the exact
  // standard error.
  const int n = 100;
  const int trials = 1000;
  Rng weight_rng(31);
  std::vector<double> weights(n);
  double total = 0.0;
  for (auto& w : weights) {
    w = weight_rng.uniform01();
    total += w;
  }
  for (auto& w : weights) w /= total;

  std::vector<long> copies(n, 0);
  Rng rng(78);
  for (int t = 0; t < trials; ++t)
    for (auto i : systematic_indices(weights, n, rng.uniform01())) copies[i]++;

  double cum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = n * cum;
    cum += weights[i];
    const double b = n * cum;
    double f = (b - std::floor(b)) - (a - std::floor(a));
    if (f < 0.0) f += 1.0;
    const double se = std::sqrt(f * (1.0 - f)) / (n * std::sqrt(double(trials)));
    const double freq = static_cast<double>(copies[i]) / (double(trials) * n);
    EXPECT_NEAR(freq, weights[i], 3.0 * se + 1e-9) << "particle " << i;
  }
}

TEST(Pipeline, ParticleCountInvariant) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  Heatmap heat(cam.width, cam.height, 0.5);
  FilterParams params = small_params(64);
  params.injection_fraction = 0.2;
  Rng rng(15);
  auto belief = initialize(HeatmapSampler(heat, depth, cam, 0.01), params, rng);
  for (int step = 0; step < 5; ++step) {
    predict(belief, uniform_flow(cam, 1.0, -1.0), depth, cam, params, rng);
    inject(belief, HeatmapSampler(heat, depth, cam, 0.01), cam, params, rng);
    for (auto& p : belief.particles) p.weight = 0.5;
    normalize(belief);
    resample(belief, rng);
    ASSERT_EQ(belief.size(), 64u);
  }
  EXPECT_EQ(belief.generation, 5);
}

TEST(FilterParams, Validation) {
  FilterParams p;
  EXPECT_NO_THROW(p.validate());
  p.n_particles = 5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = FilterParams{};
  p.injection_fraction = 0.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = FilterParams{};
  p.prediction_noise_sigma = 0.0;  // explicitly allowed: noiseless dynamics
  EXPECT_NO_THROW(p.validate());
  p.depth_consistency_tol = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
