#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bevreg/config.hpp"

namespace bevreg {

struct SimulatedScene {
  std::string id;
  SceneSpec spec;
  SceneGroundTruth gt;
  std::vector<ViewObservation> observations;
  SimilarityCollection similarities;
};

// "scene_0000", "scene_0001", ...
std::string scene_id(int index);

// Scene `index` of a run: scene seed base_seed + index, noise seed derived
// from the scene seed.
SimulatedScene simulate_scene(const RunConfig& cfg, int index);

RegisteredScene register_scene(const RunConfig& cfg, const std::string& id, std::span<const ViewObservation> observations,
                               const SimilarityCollection& similarities);

// Scores a registered scene against ground truth expressed in the reference
// camera's frame. Only subjects seen by at least one camera are scored.
SceneMetrics evaluate_scene(const std::string& id, const RegisteredScene& scene, const SceneGroundTruth& gt,
                            std::span<const ViewObservation> observations, Correspondence mode);

// Simulate, register and evaluate scene `index` in memory.
SceneMetrics run_scene(const RunConfig& cfg, int index);

// Spatial pseudo-label matrices for every pair of registered views (rows <
// cols).
std::vector<SimilarityMatrix> pseudo_labels(const RegisteredScene& scene, const PseudoLabelConfig& cfg);

// Runs fn(0..n-1) on up to `jobs` threads (0: hardware concurrency). The
// exception of the lowest failing index is rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace bevreg
