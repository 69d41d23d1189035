#include "bevreg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "bevreg/errors.hpp"

namespace bevreg {

namespace {

// FNV-1a, so the selection seed only depends on the scene name.
std::uint64_t hash_id(const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string scene_id(int index) { return fmt::format("scene_{:04d}", index); }

SimulatedScene simulate_scene(const RunConfig& cfg, int index) {
  SimulatedScene s;
  s.id = scene_id(index);
  s.spec = cfg.scene;
  s.spec.seed = cfg.base_seed + static_cast<std::uint64_t>(index);
  NoiseModel noise = cfg.noise;
  noise.seed = seed_combine(s.spec.seed, 1);
  s.gt = generate_scene(s.spec);
  s.observations = observe_all(s.gt, s.spec, noise);
  s.similarities = synth_all(s.observations, noise);
  return s;
}

RegisteredScene register_scene(const RunConfig& cfg, const std::string& id, std::span<const ViewObservation> observations,
                               const SimilarityCollection& similarities) {
  RegistrationOptions opts = cfg.registration;
  opts.selection_seed = seed_combine(cfg.base_seed, hash_id(id));
  return register_multi(observations, similarities, cfg.matching, opts);
}

SceneMetrics evaluate_scene(const std::string& id, const RegisteredScene& scene, const SceneGroundTruth& gt,
                            std::span<const ViewObservation> observations, Correspondence mode) {
  const auto ref_cam = std::find_if(gt.cameras.begin(), gt.cameras.end(),
                                    [&](const CameraState& c) { return c.view_id == scene.reference_view; });
  if (ref_cam == gt.cameras.end()) throw ContractError(id + ": reference view missing from ground truth");
  const SceneGroundTruth local = ground_truth_in_frame(gt, ref_cam->pose);

  SceneMetrics m;
  m.scene_id = id;

  std::map<ViewId, Pose2D> gt_cameras;
  for (const auto& c : local.cameras) gt_cameras[c.view_id] = c.pose;
  m.camera = camera_metrics(scene.camera_poses, gt_cameras, scene.reference_view);

  std::map<ViewId, const ViewObservation*> by_view;
  std::set<int> seen;
  for (const auto& obs : observations) {
    by_view[obs.view_id] = &obs;
    for (const auto& d : obs.detections) {
      if (!d.identity) throw ContractError(id + ": evaluation needs identities on every detection");
      seen.insert(*d.identity);
    }
  }
  auto identity_of = [&](const NodeId& n) -> int {
    auto it = by_view.find(n.view);
    if (it == by_view.end() || n.index < 0 || static_cast<std::size_t>(n.index) >= it->second->detections.size()) {
      throw ContractError(id + ": registered subject refers to an unknown observation");
    }
    return *it->second->detections[static_cast<std::size_t>(n.index)].identity;
  };

  std::vector<SubjectState> observed;
  for (const auto& s : local.subjects) {
    if (seen.contains(s.id)) observed.push_back(s);
  }
  std::vector<LocatedSubject> predicted;
  std::map<int, Eigen::Vector2d> predicted_layout;
  for (const auto& s : scene.subjects) {
    const int identity = identity_of(s.representative);
    predicted.push_back({s.pose, identity});
    predicted_layout.emplace(identity, Eigen::Vector2d(s.pose.x, s.pose.y));
  }
  m.subject = subject_metrics(predicted, observed, mode);

  std::map<NodeId, int> identities;
  for (const auto& v : scene.projected) {
    for (std::size_t i = 0; i < v.poses.size(); ++i) {
      const NodeId n{v.view_id, static_cast<int>(i)};
      identities[n] = identity_of(n);
    }
  }
  m.association = association_metrics(scene.clusters, identities);

  std::map<int, Eigen::Vector2d> reference_layout;
  for (const auto& s : observed) reference_layout.emplace(s.id, Eigen::Vector2d(s.pose.x, s.pose.y));
  m.geo_similarity = geo_similarity(predicted_layout, reference_layout);
  return m;
}

SceneMetrics run_scene(const RunConfig& cfg, int index) {
  const SimulatedScene s = simulate_scene(cfg, index);
  const RegisteredScene reg = register_scene(cfg, s.id, s.observations, s.similarities);
  return evaluate_scene(s.id, reg, s.gt, s.observations, cfg.correspondence);
}

std::vector<SimilarityMatrix> pseudo_labels(const RegisteredScene& scene, const PseudoLabelConfig& cfg) {
  std::vector<SimilarityMatrix> out;
  for (std::size_t a = 0; a < scene.projected.size(); ++a) {
    for (std::size_t b = a + 1; b < scene.projected.size(); ++b) {
      out.push_back(spatial_pseudo_labels(scene.projected[a], scene.projected[b], cfg));
    }
  }
  return out;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = n;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace bevreg
