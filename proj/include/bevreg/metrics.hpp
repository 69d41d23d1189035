#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bevreg/association.hpp"
#include "bevreg/geometry.hpp"
#include "bevreg/simulator.hpp"

namespace bevreg {

inline constexpr std::array<double, 3> kPositionThresholds{0.5, 1.0, 1.5};       // meters
inline constexpr std::array<double, 3> kOrientationThresholdsDeg{5.0, 10.0, 15.0};  // degrees

// Raw per-item errors. Missing items (unregistered cameras, unmatched
// subjects) count as beyond every threshold but do not enter the averages.
struct ErrorPool {
  std::vector<double> position;
  std::vector<double> orientation_deg;
  std::size_t misses = 0;

  void merge(const ErrorPool& other);
};

struct ErrorSummary {
  double pos_avg = 0.0;
  double ori_avg = 0.0;
  double pos_median = 0.0;
  std::array<double, 3> pos_at{};  // percent within kPositionThresholds
  std::array<double, 3> ori_at{};  // percent within kOrientationThresholdsDeg
  std::size_t evaluated = 0;
  std::size_t missing = 0;
};

// Averages and medians are NaN for an empty pool; percentages are NaN when
// there is nothing to count at all.
ErrorSummary summarize(const ErrorPool& pool);

// Camera errors for every non-reference view of `gt`; views absent from
// `pred` are misses.
ErrorPool camera_metrics(const std::map<ViewId, Pose2D>& pred, const std::map<ViewId, Pose2D>& gt,
                         ViewId reference_view);

enum class Correspondence { kByIdentity, kHungarian };

std::string to_string(Correspondence c);
Correspondence parse_correspondence(const std::string& name);

struct LocatedSubject {
  Pose2D pose;
  std::optional<int> identity;
};

// Per ground-truth subject errors. By identity, each GT subject takes the
// nearest prediction carrying its id; the Hungarian mode ignores ids and
// minimises total distance. GT subjects left without a prediction are misses.
ErrorPool subject_metrics(std::span<const LocatedSubject> predicted, std::span<const SubjectState> gt,
                          Correspondence mode);

struct AssociationCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  // Percentages. With no predicted positives precision is 0 if ground-truth
  // positives exist and 100 otherwise; recall mirrors that.
  double precision() const;
  double recall() const;
  double f1() const;
  void merge(const AssociationCounts& other);
};

// Pair-level counts over all cross-view observation pairs. `identities`
// lists every observation; observations missing from `clusters` are
// treated as singletons.
AssociationCounts association_metrics(std::span<const SubjectCluster> clusters,
                                       const std::map<NodeId, int>& identities);

// Cosine similarity of the pairwise-distance vectors of the subjects present
// in both layouts (pairs ordered by id). Undefined below two common ids.
std::optional<double> geo_similarity(const std::map<int, Eigen::Vector2d>& predicted,
                                     const std::map<int, Eigen::Vector2d>& reference);

struct MetricsReport {
  ErrorSummary camera;
  ErrorSummary subject;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> geo_similarity;
  std::size_t n_scenes = 0;

  // Throws std::logic_error on out-of-range percentages, non-monotone
  // threshold curves, an F1 that is not the harmonic mean or a geometric
  // similarity outside [-1, 1].
  void check_invariants() const;
};

struct SceneMetrics {
  std::string scene_id;
  ErrorPool camera;
  ErrorPool subject;
  AssociationCounts association;
  std::optional<double> geo_similarity;
};

MetricsReport make_report(const SceneMetrics& scene);

// Pools all scene errors before summarising; the result does not depend on
// scene order.
MetricsReport aggregate(std::span<const SceneMetrics> scenes);

}  // namespace bevreg
