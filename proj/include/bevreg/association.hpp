#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bevreg/geometry.hpp"
#include "bevreg/observation.hpp"

namespace bevreg {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Cross-view appearance similarity. Rows index subjects of `row_view`,
// columns index subjects of `col_view`; every entry lies in [0, 1].
struct SimilarityMatrix {
  Eigen::MatrixXd values;
  ViewId row_view = 0;
  ViewId col_view = 1;

  // Throws DomainError if any entry is outside [0, 1] or not finite.
  void validate() const;
  SimilarityMatrix transposed() const { return {values.transpose(), col_view, row_view}; }
};

struct MatchingConfig {
  double similarity_threshold = 0.25;
  double distance_threshold = 2.0;             // meters
  double angle_threshold = deg_to_rad(15.0);  // radians
  int top_k = 3;
  // When false, union-find components are returned as clusters without the
  // per-view uniqueness split.
  bool enforce_constraints = true;

  void validate() const;
};

struct ScoredPair {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double score = 0.0;

  bool operator==(const ScoredPair&) const = default;
};

// The k largest entries in descending score order, ties broken by (row, col).
// Throws InsufficientPairs when the matrix holds fewer than k entries.
std::vector<ScoredPair> top_k_pairs(const SimilarityMatrix& m, int k);

// Pairwise planar distances / facing-angle differences between two pose sets.
Eigen::MatrixXd distance_matrix(std::span<const Pose2D> rows, std::span<const Pose2D> cols);
Eigen::MatrixXd angle_matrix(std::span<const Pose2D> rows, std::span<const Pose2D> cols);

// Entry (i, j) is true iff similarity >= threshold, distance <= threshold and
// angle <= threshold. All bounds are inclusive.
BoolMatrix threshold_mask(const SimilarityMatrix& m_pred, const Eigen::MatrixXd& m_dis,
                          const Eigen::MatrixXd& m_ang, const MatchingConfig& cfg);

// Keyed store of similarity matrices between view pairs. Lookups in either
// direction succeed; the reverse orientation is returned transposed.
class SimilarityCollection {
 public:
  void insert(SimilarityMatrix m);
  std::optional<SimilarityMatrix> find(ViewId rows, ViewId cols) const;
  bool contains(ViewId a, ViewId b) const;
  const std::map<std::pair<ViewId, ViewId>, SimilarityMatrix>& entries() const { return entries_; }

 private:
  std::map<std::pair<ViewId, ViewId>, SimilarityMatrix> entries_;
};

// A subject observation: (view, detection index).
struct NodeId {
  ViewId view = 0;
  int index = 0;

  auto operator<=>(const NodeId&) const = default;
};

struct SubjectCluster {
  std::vector<NodeId> members;  // sorted

  bool operator==(const SubjectCluster&) const = default;
};

// Subjects of several views in a common frame.
struct ViewPoses {
  ViewId view_id = 0;
  std::vector<Pose2D> poses;
};

// Nodes are the subject observations of all views, kept in (view, index)
// order. Every cross-view pair may carry a raw similarity score; the subset of
// pairs that passed the threshold filter are the mask edges.
class MatchGraph {
 public:
  struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    double score = 0.0;
  };

  MatchGraph() = default;
  explicit MatchGraph(std::vector<NodeId> nodes);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const NodeId& node(std::size_t i) const { return nodes_.at(i); }
  std::optional<std::size_t> find(const NodeId& n) const;

  void set_score(std::size_t a, std::size_t b, double score);
  std::optional<double> score(std::size_t a, std::size_t b) const;

  // Adds a masked-in edge. Both endpoints must belong to different views.
  void connect(std::size_t a, std::size_t b);
  bool connected(std::size_t a, std::size_t b) const;
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_.at(i); }
  std::vector<Edge> edges() const;

 private:
  std::vector<NodeId> nodes_;
  Eigen::MatrixXd scores_;  // NaN where unknown
  std::vector<std::vector<std::size_t>> adjacency_;
};

// Builds the graph for views already expressed in one frame: distance and
// angle matrices per view pair, threshold mask, raw scores.
MatchGraph build_match_graph(std::span<const ViewPoses> views, const SimilarityCollection& m_pred,
                             const MatchingConfig& cfg);

// Union-find over mask edges. Each set is sorted and sets are ordered by
// their smallest member.
std::vector<std::vector<std::size_t>> connected_components(const MatchGraph& g);

// Splits one union-find component into clusters with at most one node per
// view, growing each cluster view by view from a pivot and always taking the
// highest-scoring reachable node of the next view.
std::vector<SubjectCluster> resolve_uniqueness(std::span<const std::size_t> component,
                                               const MatchGraph& g);

// Full matching pipeline for registered views. The result partitions every
// observation of `views`.
std::vector<SubjectCluster> associate(std::span<const ViewPoses> views, const SimilarityCollection& m_pred,
                                      const MatchingConfig& cfg);

}  // namespace bevreg
