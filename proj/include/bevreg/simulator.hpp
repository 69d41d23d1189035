#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "bevreg/association.hpp"
#include "bevreg/geometry.hpp"
#include "bevreg/observation.hpp"

namespace bevreg {

// Parameters of a randomly generated scene. Wearers carry the cameras and
// are people in the scene themselves.
struct SceneSpec {
  double arena_width = 25.0;   // meters
  double arena_height = 25.0;  // meters
  int min_free_subjects = 5;
  int max_free_subjects = 20;
  int camera_wearers = 5;
  double fov = deg_to_rad(90.0);  // full horizontal field of view
  double max_range = 30.0;        // meters
  double min_wearer_spacing = 1.0;
  // Every camera other than the first must see at least this many subjects
  // that the first camera also sees. Scenes are re-drawn until it holds.
  int min_common_visible = 3;
  // Wearers face the free subjects' centroid, perturbed uniformly within
  // +-jitter. Unset: uniform random facing like everybody else.
  std::optional<double> camera_aim_jitter = deg_to_rad(30.0);
  bool occlusion = false;
  double occlusion_radius = 0.3;
  int max_attempts = 10000;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SceneSpec&) const = default;
};

struct SubjectState {
  int id = 0;
  Pose2D pose;

  bool operator==(const SubjectState&) const = default;
};

struct CameraState {
  ViewId view_id = 0;
  int wearer_id = 0;
  Pose2D pose;

  bool operator==(const CameraState&) const = default;
};

struct SceneGroundTruth {
  std::vector<SubjectState> subjects;
  std::vector<CameraState> cameras;

  const SubjectState* find_subject(int id) const;
  bool operator==(const SceneGroundTruth&) const = default;
};

// Observation and appearance-similarity error model.
struct NoiseModel {
  double sigma_pos = 0.0;  // meters, per axis
  double sigma_ang = 0.0;  // radians
  double drop_prob = 0.0;
  double sim_same_mean = 0.8;
  double sim_diff_mean = 0.3;
  double sim_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// splitmix64-style seed derivation for independent random streams.
std::uint64_t seed_combine(std::uint64_t base, std::uint64_t value);

SceneGroundTruth generate_scene(const SceneSpec& spec);

// Zero-noise visibility: inside the field of view, within range, not the
// camera's own wearer and (optionally) not hidden behind another subject.
bool is_visible(const SceneGroundTruth& gt, std::size_t camera_index, std::size_t subject_index,
                const SceneSpec& spec);

ViewObservation observe_view(const SceneGroundTruth& gt, std::size_t camera_index, const SceneSpec& spec,
                             const NoiseModel& noise);

// Identity-driven stand-in for an appearance network. Requires identities
// on every detection (ContractError otherwise).
SimilarityMatrix synth_similarity(const ViewObservation& a, const ViewObservation& b, const NoiseModel& noise);

// Observations of every camera and similarity matrices for every view pair
// (a < b, rows = a).
std::vector<ViewObservation> observe_all(const SceneGroundTruth& gt, const SceneSpec& spec, const NoiseModel& noise);
SimilarityCollection synth_all(const std::vector<ViewObservation>& observations, const NoiseModel& noise);

// The whole ground truth re-expressed in the local frame of `frame`.
SceneGroundTruth ground_truth_in_frame(const SceneGroundTruth& gt, const Pose2D& frame);

}  // namespace bevreg
