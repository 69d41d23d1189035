#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bevreg/association.hpp"
#include "bevreg/geometry.hpp"
#include "bevreg/observation.hpp"

namespace bevreg {

// A matching pair: the same person seen in the unregistered and the
// reference view. `source` records where the pair came from in M_pred.
struct OrientedPair {
  Pose2D unr;
  Pose2D ref;
  ScoredPair source{};
};

struct Candidate {
  RigidTransform2D transform;  // unregistered camera pose in the reference frame
  ScoredPair source{};
};

struct CandidateSet {
  std::vector<Candidate> candidates;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  std::vector<double> distances;  // distances[i] = |(dx_i, dy_i) - centroid|

  std::size_t size() const { return candidates.size(); }
  bool empty() const { return candidates.empty(); }
};

enum class SelectionStrategy { kCentroid, kMax, kRandom };

std::string to_string(SelectionStrategy s);
SelectionStrategy parse_selection_strategy(const std::string& name);

// One candidate transform per pair plus the centroid diagnostics.
// Throws NoCandidates for an empty input.
CandidateSet candidate_poses(std::span<const OrientedPair> pairs);

// Index of the candidate closest to the centroid of candidate positions;
// ties go to the lowest index.
std::size_t select_candidate(const CandidateSet& cs);

// kMax takes the candidate with the highest source score, kRandom a uniform
// draw seeded by `seed`.
std::size_t select_candidate(const CandidateSet& cs, SelectionStrategy strategy, std::uint64_t seed);

struct RegistrationOptions {
  std::optional<ViewId> reference_view;  // lowest view id when unset
  bool strict_k = false;
  SelectionStrategy strategy = SelectionStrategy::kCentroid;
  std::uint64_t selection_seed = 0;
};

struct PairRegistration {
  RigidTransform2D transform;
  CandidateSet candidates;
  std::size_t selected = 0;
  int effective_k = 0;
  std::string warning;  // non-empty when K was reduced
};

// Estimates the pose of `unr`'s camera in `ref`'s frame. `m_pred` rows index
// the reference view, columns the unregistered view.
PairRegistration register_pair(const ViewObservation& ref, const ViewObservation& unr, const SimilarityMatrix& m_pred,
                               const MatchingConfig& cfg, const RegistrationOptions& opts = {});

enum class FusionRule { kMeanOfTwo, kCentroidMember, kSingleton };

std::string to_string(FusionRule r);
FusionRule parse_fusion_rule(const std::string& name);

struct FusedSubject {
  Pose2D pose;
  SubjectCluster sources;
  FusionRule rule = FusionRule::kSingleton;
  // Member whose pose was kept (kCentroidMember, kSingleton) or the first
  // member (kMeanOfTwo).
  NodeId representative;
};

// 1 member: unchanged. 2 members: mean position, circular-mean angle.
// 3+ members: the member closest to the members' position centroid.
std::vector<FusedSubject> fuse_subjects(std::span<const SubjectCluster> clusters, std::span<const ViewPoses> registered);

struct RegisteredScene {
  ViewId reference_view = 0;
  std::map<ViewId, Pose2D> camera_poses;  // reference is exactly (0, 0, 0)
  std::map<ViewId, PairRegistration> registrations;
  std::map<ViewId, std::string> unregistered;  // view -> failure reason
  std::vector<ViewPoses> projected;            // registered views only
  std::vector<SubjectCluster> clusters;
  std::vector<FusedSubject> subjects;
};

// Registers every view against the reference view, projects all subjects into
// the reference frame, then associates and fuses them. A view that cannot be
// registered is recorded in `unregistered` and left out of fusion.
RegisteredScene register_multi(std::span<const ViewObservation> observations, const SimilarityCollection& m_pred,
                               const MatchingConfig& cfg, const RegistrationOptions& opts = {});

// Sum over candidates of position error plus wrapped angle error (radians).
double cam_loss_value(const CandidateSet& candidates, const RigidTransform2D& gt);

}  // namespace bevreg
