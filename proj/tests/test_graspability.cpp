#include "apf/graspability.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_helpers.hpp"

using namespace apf;
using apf::testing::candidate_at;
using apf::testing::flat_depth;
using apf::testing::simple_camera;

namespace {

GraspabilityParams default_params() { return GraspabilityParams{}; }

GraspCandidateSet two_region_set() {
  GraspCandidateSet z;
  z.candidates.push_back(candidate_at({-0.2, 0.0, 1.0}, {0, 0, -1}, 0.9));
  z.candidates.push_back(candidate_at({0.2, 0.0, 1.0}, {0, 1, 0}, 0.7));
  return z;
}

}  // namespace

TEST(GraspLikelihoodV, AtCandidate) {
  GraspCandidateSet z;
  z.candidates.push_back(candidate_at({0.1, 0.2, 1.0}, {0, 0, -1}, 0.9));
  EXPECT_DOUBLE_EQ(grasp_success_likelihood_v({0.1, 0.2, 1.0}, z, default_params()), 0.9);
}

TEST(GraspLikelihoodV, OneSigmaAway) {
  GraspCandidateSet z;
  z.candidates.push_back(candidate_at({0.05, 0.0, 1.0}, {0, 0, -1}, 1.0));
  EXPECT_NEAR(grasp_success_likelihood_v({0.0, 0.0, 1.0}, z, default_params()), std::exp(-0.5),
              1e-12);
}

TEST(GraspLikelihoodV, MaxOverCandidates) {
  // p=0.5 at distance 0 beats p=1 at distance 2 sigma (exp(-2) < 0.5).
  GraspCandidateSet z;
  z.candidates.push_back(candidate_at({0.0, 0.0, 1.0}, {0, 0, -1}, 0.5));
  z.candidates.push_back(candidate_at({0.1, 0.0, 1.0}, {0, 0, -1}, 1.0));
  EXPECT_DOUBLE_EQ(grasp_success_likelihood_v({0.0, 0.0, 1.0}, z, default_params()), 0.5);
}

TEST(GraspLikelihoodV, EmptySetIsZero) {
  EXPECT_DOUBLE_EQ(grasp_success_likelihood_v({0, 0, 1}, GraspCandidateSet{}, default_params()), 0.0);
}

TEST(GraspPoseSimilarityU, PerfectMatch) {
  GraspCandidateSet z;
  z.candidates.push_back(candidate_at({0.0, 0.0, 1.0}, {0, 0, -1}, 1.0));
  GripperPose pose;
  pose.approach = {0, 0, -1};
  EXPECT_DOUBLE_EQ(grasp_pose_similarity_u({0.0, 0.0, 1.0}, pose, z, default_params()), 1.0);
}

TEST(GraspPoseSimilarityU, OrthogonalApproach) {
  GraspCandidateSet z;
  z.candidates.push_back(candidate_at({0.0, 0.0, 1.0}, {0, 0, -1}, 1.0));
  GripperPose pose;
  pose.approach = {1, 0, 0};
  EXPECT_DOUBLE_EQ(grasp_pose_similarity_u({0.0, 0.0, 1.0}, pose, z, default_params()), 0.0);
}

TEST(GraspPoseSimilarityU, HandEvaluated) {
  // p=0.8, distance sigma, 60 degree angle: 0.8 * exp(-0.5) * 0.5.
  GraspCandidateSet z;
  z.candidates.push_back(candidate_at({0.05, 0.0, 1.0}, {0, 0, -1}, 0.8));
  GripperPose pose;
  const double angle = 60.0 * M_PI / 180.0;
  pose.approach = {std::sin(angle), 0.0, -std::cos(angle)};
  EXPECT_NEAR(grasp_pose_similarity_u({0.0, 0.0, 1.0}, pose, z, default_params()),
              0.8 * std::exp(-0.5) * 0.5, 1e-12);
}

TEST(GraspPoseSimilarityU, OpposedApproachClampsToZero) {
  GraspCandidateSet z;
  z.candidates.push_back(candidate_at({0.0, 0.0, 1.0}, {0, 0, -1}, 1.0));
  GripperPose pose;
  pose.approach = {0, 0, 1};
  EXPECT_DOUBLE_EQ(grasp_pose_similarity_u({0.0, 0.0, 1.0}, pose, z, default_params()), 0.0);
}

TEST(DiscontinuityMask, ConstantPlaneIsClear) {
  const auto depth = flat_depth(simple_camera(), 1.3);
  const auto mask = depth_discontinuity_mask(depth, default_params());
  for (auto v : mask.data()) EXPECT_EQ(v, 0);
}

TEST(DiscontinuityMask, TwoHalfPlanesSeam) {
  GraspabilityParams params;
  params.discontinuity_threshold = 0.1;
  DepthImage depth(10, 4, 1.0);
  for (int y = 0; y < 4; ++y)
    for (int x = 5; x < 10; ++x) depth.at(x, y) = 1.5;
  const auto mask = depth_discontinuity_mask(depth, params);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 10; ++x)
      EXPECT_EQ(mask.at(x, y), (x == 4 || x == 5) ? 1 : 0) << "x=" << x << " y=" << y;
}

TEST(DiscontinuityMask, InvalidHoleIsMarked) {
  DepthImage depth(5, 5, 1.0);
  depth.at(2, 2) = 0.0;
  const auto mask = depth_discontinuity_mask(depth, default_params());
  EXPECT_EQ(mask.at(2, 2), 1);
}

TEST(WeightGraspability, ProductAndPenalty) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  GraspabilityParams params;
  const auto clear_mask = depth_discontinuity_mask(depth, params);

  GraspCandidateSet z;
  z.candidates.push_back(candidate_at({0.0, 0.0, 1.0}, {0, 0, -1}, 1.0));
  GraspParticle particle;
  particle.base.position = {0.0, 0.0, 1.0};
  particle.pose.approach = {0, 0, -1};
  EXPECT_DOUBLE_EQ(weight_graspability(particle, z, clear_mask, cam, params), 1.0);

  // u = 0.8 exp(-0.5) * 0.5 at distance sigma with 60 degrees, v = exp(-0.5) * 0.8.
  GraspCandidateSet z2;
  z2.candidates.push_back(candidate_at({0.05, 0.0, 1.0}, {0, 0, -1}, 0.8));
  GraspParticle p2;
  p2.base.position = {0.0, 0.0, 1.0};
  const double angle = 60.0 * M_PI / 180.0;
  p2.pose.approach = {std::sin(angle), 0.0, -std::cos(angle)};
  const double u = 0.8 * std::exp(-0.5) * 0.5;
  const double v = 0.8 * std::exp(-0.5);
  EXPECT_NEAR(weight_graspability(p2, z2, clear_mask, cam, params), u * v, 1e-12);

  // Same particle on a discontinuity pixel: multiplied by the penalty.
  Grid<std::uint8_t> marked(cam.width, cam.height, 1);
  EXPECT_NEAR(weight_graspability(p2, z2, marked, cam, params), u * v * 0.1, 1e-12);
}

TEST(GraspabilityProperties, RandomizedInvariants) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  GraspabilityParams params;
  const auto mask = depth_discontinuity_mask(depth, params);
  Rng rng(21);

  for (int trial = 0; trial < 50; ++trial) {
    GraspCandidateSet z;
    const int m = 1 + static_cast<int>(rng.uniform_index(6));
    for (int j = 0; j < m; ++j)
      z.candidates.push_back(candidate_at(
          {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.7, 1.3)},
          normalized({rng.normal(), rng.normal(), rng.normal()}), rng.uniform01()));

    GraspParticle particle;
    particle.base.position = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.7, 1.3)};
    particle.pose.approach = normalized({rng.normal(), rng.normal(), rng.normal()});

    const double v = grasp_success_likelihood_v(particle.base.position, z, params);
    const double u = grasp_pose_similarity_u(particle.base.position, particle.pose, z, params);
    EXPECT_GE(u, 0.0);
    EXPECT_LE(u, v + 1e-15);
    EXPECT_LE(v, 1.0);

    // Permutation invariance.
    GraspCandidateSet shuffled = z;
    std::reverse(shuffled.candidates.begin(), shuffled.candidates.end());
    EXPECT_DOUBLE_EQ(grasp_success_likelihood_v(particle.base.position, shuffled, params), v);
    EXPECT_DOUBLE_EQ(grasp_pose_similarity_u(particle.base.position, particle.pose, shuffled, params), u);

    // Adding a candidate never decreases u or v.
    GraspCandidateSet extended = z;
    extended.candidates.push_back(candidate_at(
        {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.7, 1.3)},
        normalized({rng.normal(), rng.normal(), rng.normal()}), rng.uniform01()));
    EXPECT_GE(grasp_success_likelihood_v(particle.base.position, extended, params) + 1e-15, v);
    EXPECT_GE(grasp_pose_similarity_u(particle.base.position, particle.pose, extended, params) + 1e-15,
              u);

    // Scaling every p_j by c scales v and u by c and the weight by c^2.
    const double c = rng.uniform(0.1, 1.0);
    GraspCandidateSet scaled = z;
    for (auto& cand : scaled.candidates) cand.success *= c;
    EXPECT_NEAR(grasp_success_likelihood_v(particle.base.position, scaled, params), c * v, 1e-12);
    EXPECT_NEAR(grasp_pose_similarity_u(particle.base.position, particle.pose, scaled, params),
                c * u, 1e-12);
    const double w = weight_graspability(particle, z, mask, cam, params);
    const double w_scaled = weight_graspability(particle, scaled, mask, cam, params);
    EXPECT_NEAR(w_scaled, c * c * w, 1e-12);
  }
}

TEST(GraspabilityParams, Validation) {
  GraspabilityParams p;
  EXPECT_NO_THROW(p.validate());
  p.kernel_sigma = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = GraspabilityParams{};
  p.discontinuity_penalty = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(CandidateSampler, RestrictedSampling) {
  const auto cam = simple_camera();
  const auto depth = flat_depth(cam, 1.0);
  const auto z = two_region_set();
  CandidateSampler sampler(z, depth, cam, 1e-4, 5.0);

  CellMask mask{2, cam.width, cam.height, {0, 0, 0, 0}};
  EXPECT_FALSE(sampler.has_support_in(mask));
  // Allow only the right half: only the x=0.2 candidate qualifies.
  mask.allowed = {0, 1, 0, 1};
  ASSERT_TRUE(sampler.has_support_in(mask));
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto p = sampler.sample_in_cells(mask, rng);
    ASSERT_TRUE(p.has_value());
    EXPECT_GT(p->base.position.x, 0.1);
  }
}
