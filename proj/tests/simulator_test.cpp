#include <set>

#include <gtest/gtest.h>

#include "bevreg/errors.hpp"
#include "bevreg/registration.hpp"
#include "bevreg/simulator.hpp"
#include "support/random_cases.hpp"

using namespace bevreg;

namespace {

SceneGroundTruth single_camera(const Pose2D& camera, std::vector<Pose2D> subjects) {
  SceneGroundTruth gt;
  gt.subjects.push_back({0, camera});
  gt.cameras.push_back({0, 0, camera});
  for (std::size_t i = 0; i < subjects.size(); ++i) gt.subjects.push_back({static_cast<int>(i) + 1, subjects[i]});
  return gt;
}

SceneSpec seeded(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST(GenerateScene, SameSeedSameScene) {
  EXPECT_EQ(generate_scene(seeded(7)), generate_scene(seeded(7)));
  EXPECT_NE(generate_scene(seeded(7)), generate_scene(seeded(8)));
}

TEST(GenerateScene, CountsIdsAndArenaBounds) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SceneSpec spec = seeded(seed);
    const SceneGroundTruth gt = generate_scene(spec);
    EXPECT_GE(gt.subjects.size(), 10u);
    EXPECT_LE(gt.subjects.size(), 25u);
    ASSERT_EQ(gt.cameras.size(), 5u);
    std::set<int> ids;
    for (const auto& s : gt.subjects) {
      EXPECT_TRUE(ids.insert(s.id).second);
      EXPECT_GE(s.pose.x, 0.0);
      EXPECT_LE(s.pose.x, 25.0);
      EXPECT_GE(s.pose.y, 0.0);
      EXPECT_LE(s.pose.y, 25.0);
    }
    for (const auto& c : gt.cameras) {
      const SubjectState* wearer = gt.find_subject(c.wearer_id);
      ASSERT_NE(wearer, nullptr);
      EXPECT_EQ(wearer->pose, c.pose);
      for (const auto& other : gt.cameras) {
        if (other.view_id != c.view_id) {
          EXPECT_GE(planar_distance(c.pose, other.pose), spec.min_wearer_spacing);
        }
      }
    }
  }
}

TEST(GenerateScene, InvalidSpecThrows) {
  SceneSpec spec;
  spec.arena_width = 0;
  EXPECT_THROW(generate_scene(spec), ConfigError);
  spec = SceneSpec{};
  spec.min_free_subjects = 9;
  spec.max_free_subjects = 3;
  EXPECT_THROW(generate_scene(spec), ConfigError);
  spec = SceneSpec{};
  spec.min_common_visible = 30;
  spec.max_attempts = 5;
  EXPECT_THROW(generate_scene(spec), ConfigError);
}

TEST(ObserveView, IdentityCameraSeesGlobalPoses) {
  const auto gt = single_camera({0, 0, 0}, {{5, 1, 0.3}, {8, -2, -1.0}});
  const auto obs = observe_view(gt, 0, SceneSpec{}, NoiseModel{});
  ASSERT_EQ(obs.detections.size(), 2u);
  EXPECT_EQ(obs.detections[0].pose, Pose2D(5, 1, 0.3));
  EXPECT_EQ(obs.detections[1].pose, Pose2D(8, -2, -1.0));
  EXPECT_EQ(obs.detections[0].identity, 1);
}

TEST(ObserveView, RelativePoseOfRotatedCamera) {
  // (2, 3) lies 56 degrees off the optical axis, so a 90 degree field of
  // view would hide it.
  SceneSpec spec;
  spec.fov = deg_to_rad(150);
  const auto gt = single_camera({1, -1, kPi / 2}, {{-2, 1, 3 * kPi / 4}});
  const auto obs = observe_view(gt, 0, spec, NoiseModel{});
  ASSERT_EQ(obs.detections.size(), 1u);
  EXPECT_NEAR(obs.detections[0].pose.x, 2, 1e-12);
  EXPECT_NEAR(obs.detections[0].pose.y, 3, 1e-12);
  EXPECT_NEAR(angular_distance(obs.detections[0].pose.theta, kPi / 4), 0.0, 1e-12);

  EXPECT_TRUE(observe_view(gt, 0, SceneSpec{}, NoiseModel{}).detections.empty());
}

TEST(ObserveView, SubjectBehindCameraIsHidden) {
  const auto gt = single_camera({0, 0, 0}, {{-5, 0, 0}, {5, 0, 0}});
  const auto obs = observe_view(gt, 0, SceneSpec{}, NoiseModel{});
  ASSERT_EQ(obs.detections.size(), 1u);
  EXPECT_EQ(obs.detections[0].identity, 2);
}

TEST(ObserveView, OcclusionHidesSubjectOnTheSameRay) {
  SceneSpec spec;
  spec.occlusion = true;
  const auto gt = single_camera({0, 0, 0}, {{3, 0, 0}, {6, 0.1, 0}, {6, 3, 0}});
  const auto obs = observe_view(gt, 0, spec, NoiseModel{});
  std::set<int> ids;
  for (const auto& d : obs.detections) ids.insert(*d.identity);
  EXPECT_EQ(ids, (std::set<int>{1, 3}));
}

TEST(ObserveView, WearerNeverSeesThemself) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SceneSpec spec = seeded(seed);
    const auto gt = generate_scene(spec);
    for (std::size_t c = 0; c < gt.cameras.size(); ++c) {
      for (const auto& d : observe_view(gt, c, spec, NoiseModel{}).detections) {
        EXPECT_NE(*d.identity, gt.cameras[c].wearer_id);
      }
    }
  }
}

TEST(ObserveView, VisibilityMonotoneInFovAndRange) {
  testgen::CaseGen gen(41);
  for (int trial = 0; trial < 50; ++trial) {
    SceneSpec narrow = seeded(static_cast<std::uint64_t>(trial));
    narrow.fov = deg_to_rad(gen.uniform(20, 180));
    narrow.max_range = gen.uniform(3, 20);
    narrow.min_common_visible = 0;
    SceneSpec wide = narrow;
    wide.fov = std::min(kTwoPi, narrow.fov + gen.uniform(0, 1));
    wide.max_range = narrow.max_range + gen.uniform(0, 5);
    const auto gt = generate_scene(narrow);
    for (std::size_t c = 0; c < gt.cameras.size(); ++c) {
      for (std::size_t s = 0; s < gt.subjects.size(); ++s) {
        if (is_visible(gt, c, s, narrow)) {
          EXPECT_TRUE(is_visible(gt, c, s, wide));
        }
      }
    }
  }
}

TEST(ObserveView, ZeroNoiseRoundTripRecoversCamera) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SceneSpec spec = seeded(seed);
    const auto gt = generate_scene(spec);
    for (std::size_t c = 0; c < gt.cameras.size(); ++c) {
      for (const auto& d : observe_view(gt, c, spec, NoiseModel{}).detections) {
        const RigidTransform2D t = estimate_transform(d.pose, gt.find_subject(*d.identity)->pose);
        EXPECT_NEAR(t.dx, gt.cameras[c].pose.x, 1e-9);
        EXPECT_NEAR(t.dy, gt.cameras[c].pose.y, 1e-9);
        EXPECT_NEAR(angular_distance(t.dtheta, gt.cameras[c].pose.theta), 0.0, 1e-9);
      }
    }
  }
}

TEST(ObserveView, NoiseAndDropsAreSeeded) {
  const SceneSpec spec = seeded(3);
  const auto gt = generate_scene(spec);
  NoiseModel noise;
  noise.sigma_pos = 0.3;
  noise.sigma_ang = 0.1;
  noise.drop_prob = 0.3;
  noise.seed = 99;
  const auto a = observe_view(gt, 1, spec, noise), b = observe_view(gt, 1, spec, noise);
  ASSERT_EQ(a.detections.size(), b.detections.size());
  for (std::size_t i = 0; i < a.detections.size(); ++i) EXPECT_EQ(a.detections[i].pose, b.detections[i].pose);

  noise.drop_prob = 1.0;
  EXPECT_TRUE(observe_view(gt, 1, spec, noise).detections.empty());
}

TEST(SynthSimilarity, NoiselessAndSeeded) {
  ViewObservation a{0, {{{}, 1, {}}, {{}, 2, {}}}}, b{1, {{{}, 2, {}}, {{}, 3, {}}}};
  const auto m = synth_similarity(a, b, NoiseModel{});
  EXPECT_EQ(m.values(0, 0), 0.0);
  EXPECT_EQ(m.values(1, 0), 1.0);
  EXPECT_EQ(m.values(1, 1), 0.0);

  NoiseModel noise;
  noise.sim_sigma = 0.2;
  noise.seed = 5;
  const auto n1 = synth_similarity(a, b, noise), n2 = synth_similarity(a, b, noise);
  EXPECT_EQ(n1.values, n2.values);
  EXPECT_NO_THROW(n1.validate());
}

TEST(SynthSimilarity, MissingIdentityThrows) {
  ViewObservation a{0, {{{}, std::nullopt, {}}}}, b{1, {{{}, 1, {}}}};
  EXPECT_THROW(synth_similarity(a, b, NoiseModel{}), ContractError);
}

TEST(NoiseModel, Validation) {
  NoiseModel n;
  n.drop_prob = 1.5;
  EXPECT_THROW(n.validate(), ConfigError);
  n = NoiseModel{};
  n.sigma_pos = -1;
  EXPECT_THROW(n.validate(), ConfigError);
}

TEST(Simulator, ZeroNoiseRegistrationMatchesGroundTruth) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SceneSpec spec = seeded(seed);
    const auto gt = generate_scene(spec);
    const auto obs = observe_all(gt, spec, NoiseModel{});
    const auto sims = synth_all(obs, NoiseModel{});
    const auto local = ground_truth_in_frame(gt, gt.cameras[0].pose);
    const RegisteredScene scene = register_multi(obs, sims, MatchingConfig{});
    EXPECT_TRUE(scene.unregistered.empty());
    for (const auto& cam : local.cameras) {
      const Pose2D& p = scene.camera_poses.at(cam.view_id);
      EXPECT_NEAR(p.x, cam.pose.x, 1e-9);
      EXPECT_NEAR(p.y, cam.pose.y, 1e-9);
      EXPECT_NEAR(angular_distance(p.theta, cam.pose.theta), 0.0, 1e-9);
    }
  }
}
