#include "bevreg/association.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

#include "bevreg/errors.hpp"

namespace bevreg {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

// Nodes reachable from `sources` along mask edges, passing only through
// nodes with passable[n] set. Sources are always reachable.
std::vector<char> reachable_from(const MatchGraph& g, std::span<const std::size_t> sources,
                                 const std::vector<char>& passable) {
  std::vector<char> seen(g.size(), 0);
  std::deque<std::size_t> queue;
  for (std::size_t s : sources) {
    seen[s] = 1;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (std::size_t nb : g.neighbors(cur)) {
      if (seen[nb] || !passable[nb]) continue;
      seen[nb] = 1;
      queue.push_back(nb);
    }
  }
  return seen;
}

}  // namespace

void SimilarityMatrix::validate() const {
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const double v = values(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw DomainError("similarity entry (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") outside [0, 1]: " + std::to_string(v));
      }
    }
  }
}

void MatchingConfig::validate() const {
  if (!(similarity_threshold > 0.0)) throw ConfigError("similarity_threshold must be positive");
  if (!(distance_threshold > 0.0)) throw ConfigError("distance_threshold must be positive");
  if (!(angle_threshold > 0.0)) throw ConfigError("angle_threshold must be positive");
  if (top_k < 1) throw ConfigError("top_k must be at least 1");
}

std::vector<ScoredPair> top_k_pairs(const SimilarityMatrix& m, int k) {
  if (k < 1) throw ConfigError("top_k must be at least 1");
  const auto total = static_cast<std::size_t>(m.values.size());
  const auto wanted = static_cast<std::size_t>(k);
  if (total < wanted) {
    throw InsufficientPairs("similarity matrix " + std::to_string(m.values.rows()) + "x" +
                            std::to_string(m.values.cols()) + " has fewer than " + std::to_string(k) +
                            " entries");
  }
  std::vector<ScoredPair> all;
  all.reserve(total);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) all.push_back({i, j, m.values(i, j)});
  }
  auto better = [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(wanted), all.end(), better);
  all.resize(wanted);
  return all;
}

Eigen::MatrixXd distance_matrix(std::span<const Pose2D> rows, std::span<const Pose2D> cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = planar_distance(rows[i], cols[j]);
    }
  }
  return out;
}

Eigen::MatrixXd angle_matrix(std::span<const Pose2D> rows, std::span<const Pose2D> cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          angular_distance(rows[i].theta, cols[j].theta);
    }
  }
  return out;
}

BoolMatrix threshold_mask(const SimilarityMatrix& m_pred, const Eigen::MatrixXd& m_dis, const Eigen::MatrixXd& m_ang,
                          const MatchingConfig& cfg) {
  require_same_shape(m_pred.values, m_dis, "similarity vs distance matrix");
  require_same_shape(m_pred.values, m_ang, "similarity vs angle matrix");
  BoolMatrix mask(m_pred.values.rows(), m_pred.values.cols());
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      mask(i, j) = m_pred.values(i, j) >= cfg.similarity_threshold && m_dis(i, j) <= cfg.distance_threshold &&
                   m_ang(i, j) <= cfg.angle_threshold;
    }
  }
  return mask;
}

void SimilarityCollection::insert(SimilarityMatrix m) {
  if (m.row_view == m.col_view) {
    throw ContractError("similarity matrix must relate two different views, got view " +
                        std::to_string(m.row_view) + " twice");
  }
  entries_.erase({m.col_view, m.row_view});
  const auto key = std::make_pair(m.row_view, m.col_view);
  entries_.insert_or_assign(key, std::move(m));
}

std::optional<SimilarityMatrix> SimilarityCollection::find(ViewId rows, ViewId cols) const {
  if (auto it = entries_.find({rows, cols}); it != entries_.end()) return it->second;
  if (auto it = entries_.find({cols, rows}); it != entries_.end()) return it->second.transposed();
  return std::nullopt;
}

bool SimilarityCollection::contains(ViewId a, ViewId b) const {
  return entries_.contains({a, b}) || entries_.contains({b, a});
}

MatchGraph::MatchGraph(std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw ContractError("duplicate node in match graph");
  }
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  scores_ = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  adjacency_.resize(nodes_.size());
}

std::optional<std::size_t> MatchGraph::find(const NodeId& n) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), n);
  if (it == nodes_.end() || *it != n) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

void MatchGraph::set_score(std::size_t a, std::size_t b, double score) {
  if (nodes_.at(a).view == nodes_.at(b).view) throw ContractError("score between nodes of the same view");
  scores_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = score;
  scores_(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = score;
}

std::optional<double> MatchGraph::score(std::size_t a, std::size_t b) const {
  const double s = scores_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  if (std::isnan(s)) return std::nullopt;
  return s;
}

void MatchGraph::connect(std::size_t a, std::size_t b) {
  if (nodes_.at(a).view == nodes_.at(b).view) throw ContractError("edge between nodes of the same view");
  if (connected(a, b)) return;
  adjacency_[a].push_back(b);
  adjacency_[b].push_back(a);
  std::sort(adjacency_[a].begin(), adjacency_[a].end());
  std::sort(adjacency_[b].begin(), adjacency_[b].end());
}

bool MatchGraph::connected(std::size_t a, std::size_t b) const {
  const auto& adj = adjacency_.at(a);
  return std::binary_search(adj.begin(), adj.end(), b);
}

std::vector<MatchGraph::Edge> MatchGraph::edges() const {
  std::vector<Edge> out;
  for (std::size_t a = 0; a < adjacency_.size(); ++a) {
    for (std::size_t b : adjacency_[a]) {
      if (a < b) out.push_back({a, b, score(a, b).value_or(std::numeric_limits<double>::quiet_NaN())});
    }
  }
  return out;
}

MatchGraph build_match_graph(std::span<const ViewPoses> views, const SimilarityCollection& m_pred,
                             const MatchingConfig& cfg) {
  std::vector<const ViewPoses*> ordered;
  for (const auto& v : views) ordered.push_back(&v);
  std::sort(ordered.begin(), ordered.end(),
            [](const ViewPoses* a, const ViewPoses* b) { return a->view_id < b->view_id; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->view_id == ordered[i - 1]->view_id) {
      throw ContractError("view " + std::to_string(ordered[i]->view_id) + " listed twice");
    }
  }

  std::vector<NodeId> nodes;
  for (const auto* v : ordered) {
    for (std::size_t i = 0; i < v->poses.size(); ++i) nodes.push_back({v->view_id, static_cast<int>(i)});
  }
  MatchGraph g(std::move(nodes));

  for (std::size_t a = 0; a < ordered.size(); ++a) {
    for (std::size_t b = a + 1; b < ordered.size(); ++b) {
      const ViewPoses& va = *ordered[a];
      const ViewPoses& vb = *ordered[b];
      auto sim = m_pred.find(va.view_id, vb.view_id);
      if (!sim) continue;
      const Eigen::MatrixXd dis = distance_matrix(va.poses, vb.poses);
      const Eigen::MatrixXd ang = angle_matrix(va.poses, vb.poses);
      const BoolMatrix mask = threshold_mask(*sim, dis, ang, cfg);
      for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        const std::size_t na = *g.find({va.view_id, static_cast<int>(i)});
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
          const std::size_t nb = *g.find({vb.view_id, static_cast<int>(j)});
          g.set_score(na, nb, sim->values(i, j));
          if (mask(i, j)) g.connect(na, nb);
        }
      }
    }
  }
  return g;
}

std::vector<std::vector<std::size_t>> connected_components(const MatchGraph& g) {
  UnionFind uf(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t b : g.neighbors(a)) uf.unite(a, b);
  }
  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t n = 0; n < g.size(); ++n) by_root[uf.find(n)].push_back(n);

  std::vector<std::vector<std::size_t>> out;
  out.reserve(by_root.size());
  for (auto& [root, members] : by_root) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

std::vector<SubjectCluster> resolve_uniqueness(std::span<const std::size_t> component, const MatchGraph& g) {
  std::vector<std::size_t> sorted(component.begin(), component.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  // Layers in ascending view order; graph indices already follow (view, index).
  std::map<ViewId, std::vector<std::size_t>> layers;
  std::vector<char> alive(g.size(), 0);
  for (std::size_t n : sorted) {
    layers[g.node(n).view].push_back(n);
    alive[n] = 1;
  }

  std::vector<SubjectCluster> out;
  while (!layers.empty()) {
    auto first = layers.begin();
    const std::size_t pivot = first->second.front();
    first->second.erase(first->second.begin());
    alive[pivot] = 0;

    std::vector<std::size_t> cluster{pivot};
    // Unselected nodes of layers already visited are cut off from the cluster.
    std::vector<char> cut(g.size(), 0);
    for (std::size_t n : first->second) cut[n] = 1;

    for (auto layer = std::next(layers.begin()); layer != layers.end(); ++layer) {
      std::vector<char> passable(g.size(), 0);
      for (std::size_t n = 0; n < g.size(); ++n) passable[n] = alive[n] && !cut[n];
      const std::vector<char> reach = reachable_from(g, cluster, passable);

      std::optional<std::size_t> best;
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t cand : layer->second) {
        if (!reach[cand]) continue;
        std::optional<double> cand_score;
        for (std::size_t member : cluster) {
          if (auto s = g.score(member, cand); s && (!cand_score || *s > *cand_score)) cand_score = s;
        }
        if (cand_score && *cand_score > best_score) {
          best_score = *cand_score;
          best = cand;
        }
      }
      auto& nodes = layer->second;
      if (best) {
        cluster.push_back(*best);
        alive[*best] = 0;
        nodes.erase(std::find(nodes.begin(), nodes.end(), *best));
      }
      for (std::size_t n : nodes) cut[n] = 1;
    }

    SubjectCluster c;
    for (std::size_t n : cluster) c.members.push_back(g.node(n));
    std::sort(c.members.begin(), c.members.end());
    out.push_back(std::move(c));

    std::erase_if(layers, [](const auto& kv) { return kv.second.empty(); });
  }
  return out;
}

std::vector<SubjectCluster> associate(std::span<const ViewPoses> views, const SimilarityCollection& m_pred,
                                      const MatchingConfig& cfg) {
  cfg.validate();
  const MatchGraph g = build_match_graph(views, m_pred, cfg);
  std::vector<SubjectCluster> out;
  for (const auto& component : connected_components(g)) {
    if (cfg.enforce_constraints) {
      auto parts = resolve_uniqueness(component, g);
      std::move(parts.begin(), parts.end(), std::back_inserter(out));
    } else {
      SubjectCluster c;
      for (std::size_t n : component) c.members.push_back(g.node(n));
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace bevreg
