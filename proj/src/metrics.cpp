#include "bevreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bevreg/errors.hpp"
#include "bevreg/hungarian.hpp"

namespace bevreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sorted before summing so pooled results are independent of insertion order.
double sorted_mean(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

std::array<double, 3> percent_within(const std::vector<double>& errors, std::size_t misses,
                                     const std::array<double, 3>& thresholds) {
  std::array<double, 3> out{};
  const std::size_t total = errors.size() + misses;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    if (total == 0) {
      out[t] = kNaN;
      continue;
    }
    const auto within = std::count_if(errors.begin(), errors.end(), [&](double e) { return e <= thresholds[t]; });
    out[t] = 100.0 * static_cast<double>(within) / static_cast<double>(total);
  }
  return out;
}

void check_summary(const ErrorSummary& s, const std::string& what) {
  for (const auto* curve : {&s.pos_at, &s.ori_at}) {
    for (std::size_t i = 0; i < curve->size(); ++i) {
      const double v = (*curve)[i];
      if (std::isnan(v)) continue;
      if (v < 0.0 || v > 100.0) throw std::logic_error(what + ": percentage outside [0, 100]");
      if (i > 0 && !std::isnan((*curve)[i - 1]) && v < (*curve)[i - 1]) {
        throw std::logic_error(what + ": threshold curve is not monotone");
      }
    }
  }
}

}  // namespace

void ErrorPool::merge(const ErrorPool& other) {
  position.insert(position.end(), other.position.begin(), other.position.end());
  orientation_deg.insert(orientation_deg.end(), other.orientation_deg.begin(), other.orientation_deg.end());
  misses += other.misses;
}

ErrorSummary summarize(const ErrorPool& pool) {
  ErrorSummary s;
  s.pos_avg = sorted_mean(pool.position);
  s.ori_avg = sorted_mean(pool.orientation_deg);
  s.pos_median = median(pool.position);
  s.pos_at = percent_within(pool.position, pool.misses, kPositionThresholds);
  s.ori_at = percent_within(pool.orientation_deg, pool.misses, kOrientationThresholdsDeg);
  s.evaluated = pool.position.size();
  s.missing = pool.misses;
  return s;
}

ErrorPool camera_metrics(const std::map<ViewId, Pose2D>& pred, const std::map<ViewId, Pose2D>& gt,
                         ViewId reference_view) {
  ErrorPool pool;
  for (const auto& [view, truth] : gt) {
    if (view == reference_view) continue;
    auto it = pred.find(view);
    if (it == pred.end()) {
      ++pool.misses;
      continue;
    }
    pool.position.push_back(planar_distance(it->second, truth));
    pool.orientation_deg.push_back(rad_to_deg(angular_distance(it->second.theta, truth.theta)));
  }
  return pool;
}

std::string to_string(Correspondence c) {
  return c == Correspondence::kHungarian ? "hungarian" : "identity";
}

Correspondence parse_correspondence(const std::string& name) {
  if (name == "identity") return Correspondence::kByIdentity;
  if (name == "hungarian") return Correspondence::kHungarian;
  throw ConfigError("unknown correspondence mode '" + name + "' (expected identity or hungarian)");
}

ErrorPool subject_metrics(std::span<const LocatedSubject> predicted, std::span<const SubjectState> gt,
                          Correspondence mode) {
  ErrorPool pool;
  auto record = [&](const Pose2D& p, const Pose2D& truth) {
    pool.position.push_back(planar_distance(p, truth));
    pool.orientation_deg.push_back(rad_to_deg(angular_distance(p.theta, truth.theta)));
  };

  if (mode == Correspondence::kByIdentity) {
    for (const auto& truth : gt) {
      const LocatedSubject* best = nullptr;
      double best_dist = std::numeric_limits<double>::infinity();
      for (const auto& p : predicted) {
        if (p.identity != truth.id) continue;
        const double d = planar_distance(p.pose, truth.pose);
        if (d < best_dist) {
          best_dist = d;
          best = &p;
        }
      }
      if (best) {
        record(best->pose, truth.pose);
      } else {
        ++pool.misses;
      }
    }
    return pool;
  }

  Eigen::MatrixXd cost(static_cast<Eigen::Index>(gt.size()), static_cast<Eigen::Index>(predicted.size()));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < predicted.size(); ++j) {
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = planar_distance(gt[i].pose, predicted[j].pose);
    }
  }
  const std::vector<int> assignment = solve_assignment(cost);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (assignment[i] < 0) {
      ++pool.misses;
    } else {
      record(predicted[static_cast<std::size_t>(assignment[i])].pose, gt[i].pose);
    }
  }
  return pool;
}

double AssociationCounts::precision() const {
  if (tp + fp == 0) return fn > 0 ? 0.0 : 100.0;
  return 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double AssociationCounts::recall() const {
  if (tp + fn == 0) return fp > 0 ? 0.0 : 100.0;
  return 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double AssociationCounts::f1() const {
  const double p = precision();
  const double r = recall();
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

void AssociationCounts::merge(const AssociationCounts& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
}

AssociationCounts association_metrics(std::span<const SubjectCluster> clusters,
                                      const std::map<NodeId, int>& identities) {
  std::map<NodeId, std::size_t> label;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (const auto& m : clusters[c].members) label[m] = c;
  }
  std::vector<std::pair<NodeId, int>> nodes(identities.begin(), identities.end());
  std::vector<std::size_t> node_label(nodes.size());
  std::size_t next = clusters.size();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto it = label.find(nodes[i].first);
    node_label[i] = it != label.end() ? it->second : next++;
  }

  AssociationCounts counts;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i].first.view == nodes[j].first.view) continue;
      const bool predicted = node_label[i] == node_label[j];
      const bool truth = nodes[i].second == nodes[j].second;
      if (predicted && truth) ++counts.tp;
      if (predicted && !truth) ++counts.fp;
      if (!predicted && truth) ++counts.fn;
    }
  }
  return counts;
}

std::optional<double> geo_similarity(const std::map<int, Eigen::Vector2d>& predicted,
                                     const std::map<int, Eigen::Vector2d>& reference) {
  std::vector<int> ids;
  for (const auto& [id, p] : predicted) {
    if (reference.contains(id)) ids.push_back(id);
  }
  if (ids.size() < 2) return std::nullopt;

  std::vector<double> a, b;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      a.push_back((predicted.at(ids[i]) - predicted.at(ids[j])).norm());
      b.push_back((reference.at(ids[i]) - reference.at(ids[j])).norm());
    }
  }
  const Eigen::Map<const Eigen::VectorXd> va(a.data(), static_cast<Eigen::Index>(a.size()));
  const Eigen::Map<const Eigen::VectorXd> vb(b.data(), static_cast<Eigen::Index>(b.size()));
  const double na = va.norm();
  const double nb = vb.norm();
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return std::clamp((va / na).dot(vb / nb), -1.0, 1.0);
}

void MetricsReport::check_invariants() const {
  check_summary(camera, "camera");
  check_summary(subject, "subject");
  for (double v : {precision, recall, f1}) {
    if (std::isnan(v) || v < 0.0 || v > 100.0) throw std::logic_error("association percentage outside [0, 100]");
  }
  if (precision + recall > 0.0) {
    const double expected = 2.0 * precision * recall / (precision + recall);
    if (std::abs(f1 - expected) > 1e-9) throw std::logic_error("F1 is not the harmonic mean of precision and recall");
  }
  if (geo_similarity && (*geo_similarity < -1.0 || *geo_similarity > 1.0)) {
    throw std::logic_error("geometric similarity outside [-1, 1]");
  }
}

MetricsReport make_report(const SceneMetrics& scene) { return aggregate(std::span(&scene, 1)); }

MetricsReport aggregate(std::span<const SceneMetrics> scenes) {
  ErrorPool camera, subject;
  AssociationCounts assoc;
  std::vector<double> geo;
  for (const auto& s : scenes) {
    camera.merge(s.camera);
    subject.merge(s.subject);
    assoc.merge(s.association);
    if (s.geo_similarity) geo.push_back(*s.geo_similarity);
  }
  MetricsReport r;
  r.camera = summarize(camera);
  r.subject = summarize(subject);
  r.precision = assoc.precision();
  r.recall = assoc.recall();
  r.f1 = assoc.f1();
  if (!geo.empty()) r.geo_similarity = sorted_mean(geo);
  r.n_scenes = scenes.size();
  return r;
}

}  // namespace bevreg
