#include "bevreg/registration.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bevreg/errors.hpp"

namespace bevreg {

std::string to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::kCentroid: return "centroid";
    case SelectionStrategy::kMax: return "max";
    case SelectionStrategy::kRandom: return "random";
  }
  return "centroid";
}

SelectionStrategy parse_selection_strategy(const std::string& name) {
  if (name == "centroid") return SelectionStrategy::kCentroid;
  if (name == "max") return SelectionStrategy::kMax;
  if (name == "random") return SelectionStrategy::kRandom;
  throw ConfigError("unknown selection strategy '" + name + "' (expected centroid, max or random)");
}

std::string to_string(FusionRule r) {
  switch (r) {
    case FusionRule::kMeanOfTwo: return "mean-of-two";
    case FusionRule::kCentroidMember: return "centroid-member";
    case FusionRule::kSingleton: return "singleton";
  }
  return "singleton";
}

FusionRule parse_fusion_rule(const std::string& name) {
  if (name == "mean-of-two") return FusionRule::kMeanOfTwo;
  if (name == "centroid-member") return FusionRule::kCentroidMember;
  if (name == "singleton") return FusionRule::kSingleton;
  throw ContractError("unknown fusion rule '" + name + "'");
}

namespace {

// Index of the point nearest to the centroid of `points`; first index wins ties.
std::size_t nearest_to_centroid(const std::vector<Eigen::Vector2d>& points, Eigen::Vector2d* centroid_out,
                                std::vector<double>* distances_out) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  std::vector<double> distances;
  distances.reserve(points.size());
  for (const auto& p : points) distances.push_back((p - centroid).norm());

  const auto best = static_cast<std::size_t>(std::min_element(distances.begin(), distances.end()) - distances.begin());
  if (centroid_out) *centroid_out = centroid;
  if (distances_out) *distances_out = std::move(distances);
  return best;
}

}  // namespace

CandidateSet candidate_poses(std::span<const OrientedPair> pairs) {
  if (pairs.empty()) throw NoCandidates("no matching pairs to build candidate camera poses from");
  CandidateSet cs;
  std::vector<Eigen::Vector2d> positions;
  for (const auto& pair : pairs) {
    const RigidTransform2D t = estimate_transform(pair.unr, pair.ref);
    cs.candidates.push_back({t, pair.source});
    positions.emplace_back(t.dx, t.dy);
  }
  nearest_to_centroid(positions, &cs.centroid, &cs.distances);
  return cs;
}

std::size_t select_candidate(const CandidateSet& cs) {
  if (cs.empty()) throw NoCandidates("empty candidate set");
  return static_cast<std::size_t>(std::min_element(cs.distances.begin(), cs.distances.end()) - cs.distances.begin());
}

std::size_t select_candidate(const CandidateSet& cs, SelectionStrategy strategy, std::uint64_t seed) {
  if (cs.empty()) throw NoCandidates("empty candidate set");
  switch (strategy) {
    case SelectionStrategy::kCentroid:
      return select_candidate(cs);
    case SelectionStrategy::kMax: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < cs.size(); ++i) {
        if (cs.candidates[i].source.score > cs.candidates[best].source.score) best = i;
      }
      return best;
    }
    case SelectionStrategy::kRandom: {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<std::size_t> pick(0, cs.size() - 1);
      return pick(rng);
    }
  }
  return 0;
}

PairRegistration register_pair(const ViewObservation& ref, const ViewObservation& unr, const SimilarityMatrix& m_pred,
                               const MatchingConfig& cfg, const RegistrationOptions& opts) {
  cfg.validate();
  const auto n_ref = static_cast<Eigen::Index>(ref.detections.size());
  const auto n_unr = static_cast<Eigen::Index>(unr.detections.size());
  if (m_pred.values.rows() != n_ref || m_pred.values.cols() != n_unr) {
    throw ShapeError("similarity matrix " + std::to_string(m_pred.values.rows()) + "x" +
                     std::to_string(m_pred.values.cols()) + " does not match views with " + std::to_string(n_ref) +
                     " and " + std::to_string(n_unr) + " detections");
  }

  PairRegistration out;
  int k = cfg.top_k;
  const auto available = static_cast<int>(m_pred.values.size());
  if (available < k && !opts.strict_k && available > 0) {
    out.warning = "only " + std::to_string(available) + " candidate pairs between views " +
                  std::to_string(ref.view_id) + " and " + std::to_string(unr.view_id) + "; using K=" +
                  std::to_string(available) + " instead of " + std::to_string(k);
    k = available;
  }
  const std::vector<ScoredPair> top = top_k_pairs(m_pred, k);

  std::vector<OrientedPair> pairs;
  pairs.reserve(top.size());
  for (const auto& p : top) {
    pairs.push_back({unr.detections[static_cast<std::size_t>(p.col)].pose,
                     ref.detections[static_cast<std::size_t>(p.row)].pose, p});
  }
  out.candidates = candidate_poses(pairs);
  out.selected = select_candidate(out.candidates, opts.strategy, opts.selection_seed);
  out.transform = out.candidates.candidates[out.selected].transform;
  out.effective_k = k;
  return out;
}

std::vector<FusedSubject> fuse_subjects(std::span<const SubjectCluster> clusters, std::span<const ViewPoses> registered) {
  std::map<ViewId, const ViewPoses*> by_view;
  for (const auto& v : registered) by_view[v.view_id] = &v;
  auto pose_of = [&](const NodeId& n) -> const Pose2D& {
    auto it = by_view.find(n.view);
    if (it == by_view.end()) throw ContractError("cluster member from unregistered view " + std::to_string(n.view));
    return it->second->poses.at(static_cast<std::size_t>(n.index));
  };

  std::vector<FusedSubject> out;
  out.reserve(clusters.size());
  for (const auto& cluster : clusters) {
    if (cluster.members.empty()) throw ContractError("empty subject cluster");
    FusedSubject fused;
    fused.sources = cluster;
    fused.representative = cluster.members.front();
    if (cluster.members.size() == 1) {
      fused.rule = FusionRule::kSingleton;
      fused.pose = pose_of(cluster.members.front());
    } else if (cluster.members.size() == 2) {
      const Pose2D& a = pose_of(cluster.members[0]);
      const Pose2D& b = pose_of(cluster.members[1]);
      fused.rule = FusionRule::kMeanOfTwo;
      const double theta = std::atan2(std::sin(a.theta) + std::sin(b.theta), std::cos(a.theta) + std::cos(b.theta));
      fused.pose = Pose2D(0.5 * (a.x + b.x), 0.5 * (a.y + b.y), theta);
    } else {
      std::vector<Eigen::Vector2d> positions;
      for (const auto& m : cluster.members) {
        const Pose2D& p = pose_of(m);
        positions.emplace_back(p.x, p.y);
      }
      const std::size_t keep = nearest_to_centroid(positions, nullptr, nullptr);
      fused.rule = FusionRule::kCentroidMember;
      fused.representative = cluster.members[keep];
      fused.pose = pose_of(cluster.members[keep]);
    }
    out.push_back(std::move(fused));
  }
  return out;
}

RegisteredScene register_multi(std::span<const ViewObservation> observations, const SimilarityCollection& m_pred,
                               const MatchingConfig& cfg, const RegistrationOptions& opts) {
  if (observations.size() < 2) throw ContractError("registration needs at least two views");
  cfg.validate();

  std::map<ViewId, const ViewObservation*> by_view;
  for (const auto& obs : observations) {
    if (!by_view.emplace(obs.view_id, &obs).second) {
      throw ContractError("view " + std::to_string(obs.view_id) + " listed twice");
    }
  }

  RegisteredScene scene;
  scene.reference_view = opts.reference_view.value_or(by_view.begin()->first);
  auto ref_it = by_view.find(scene.reference_view);
  if (ref_it == by_view.end()) {
    throw ConfigError("reference view " + std::to_string(scene.reference_view) + " not among the observations");
  }
  const ViewObservation& ref = *ref_it->second;
  scene.camera_poses[scene.reference_view] = Pose2D(0.0, 0.0, 0.0);
  scene.projected.push_back({ref.view_id, ref.poses()});

  for (const auto& [view, obs] : by_view) {
    if (view == scene.reference_view) continue;
    auto sim = m_pred.find(scene.reference_view, view);
    if (!sim) {
      scene.unregistered[view] = "no similarity matrix against the reference view";
      continue;
    }
    try {
      RegistrationOptions pair_opts = opts;
      pair_opts.selection_seed = opts.selection_seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(view + 1));
      PairRegistration reg = register_pair(ref, *obs, *sim, cfg, pair_opts);
      scene.camera_poses[view] = as_pose(reg.transform);
      ViewPoses projected{view, {}};
      for (const auto& d : obs->detections) projected.poses.push_back(apply_transform(reg.transform, d.pose));
      scene.projected.push_back(std::move(projected));
      scene.registrations.emplace(view, std::move(reg));
    } catch (const InsufficientPairs& e) {
      scene.unregistered[view] = e.what();
    } catch (const NoCandidates& e) {
      scene.unregistered[view] = e.what();
    }
  }

  std::sort(scene.projected.begin(), scene.projected.end(),
            [](const ViewPoses& a, const ViewPoses& b) { return a.view_id < b.view_id; });
  scene.clusters = associate(scene.projected, m_pred, cfg);
  scene.subjects = fuse_subjects(scene.clusters, scene.projected);
  return scene;
}

double cam_loss_value(const CandidateSet& candidates, const RigidTransform2D& gt) {
  double loss = 0.0;
  for (const auto& c : candidates.candidates) {
    loss += std::hypot(c.transform.dx - gt.dx, c.transform.dy - gt.dy);
    loss += angular_distance(c.transform.dtheta, gt.dtheta);
  }
  return loss;
}

}  // namespace bevreg
