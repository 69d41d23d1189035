#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "bevreg/association.hpp"
#include "bevreg/io.hpp"
#include "bevreg/metrics.hpp"
#include "bevreg/pseudolabel.hpp"
#include "bevreg/registration.hpp"
#include "bevreg/simulator.hpp"

namespace bevreg {

// Everything a pipeline run depends on. The per-scene scene and noise seeds
// are derived from `base_seed`, so `scene.seed` and `noise.seed` are ignored.
//
// JSON layout (every key optional, unknown keys rejected):
//   {"scenes", "base_seed", "jobs", "out_dir",
//    "scene":        {"arena_width", "arena_height", "min_free_subjects",
//                     "max_free_subjects", "camera_wearers", "fov_deg",
//                     "max_range", "min_wearer_spacing", "min_common_visible",
//                     "camera_aim_jitter_deg", "occlusion", "occlusion_radius",
//                     "max_attempts"},
//    "noise":        {"sigma_pos", "sigma_ang_deg", "drop_prob",
//                     "sim_same_mean", "sim_diff_mean", "sim_sigma"},
//    "matching":     {"similarity_threshold", "distance_threshold",
//                     "angle_threshold_deg", "top_k", "enforce_constraints"},
//    "pseudo_label": {"alpha", "epsilon"},
//    "registration": {"reference_view", "strict_k", "strategy"},
//    "evaluation":   {"correspondence"}}
struct RunConfig {
  SceneSpec scene;
  NoiseModel noise;
  MatchingConfig matching;
  PseudoLabelConfig pseudo_label;
  RegistrationOptions registration;
  Correspondence correspondence = Correspondence::kByIdentity;
  std::optional<std::filesystem::path> out_dir;
  int scenes = 10;
  std::uint64_t base_seed = 0;
  int jobs = 0;  // 0: one worker per hardware thread

  // Throws ConfigError when any nested setting is out of range.
  void validate() const;
};

RunConfig config_from_json(const io::Json& j);
io::Json config_to_json(const RunConfig& cfg);

// Defaults when `path` is unset. IoError if the file cannot be read,
// ConfigError if it does not describe a valid configuration.
RunConfig load_config(const std::optional<std::filesystem::path>& path);

}  // namespace bevreg
