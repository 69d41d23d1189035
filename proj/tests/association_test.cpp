#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "bevreg/association.hpp"
#include "bevreg/errors.hpp"
#include "support/random_cases.hpp"

using namespace bevreg;

namespace {

SimilarityMatrix sim(ViewId r, ViewId c, Eigen::MatrixXd values) { return {std::move(values), r, c}; }

std::vector<std::vector<NodeId>> members(const std::vector<SubjectCluster>& clusters) {
  std::vector<std::vector<NodeId>> out;
  for (const auto& c : clusters) out.push_back(c.members);
  return out;
}

// Views 1:{A}, 2:{B, C}, 3:{D, E} from the worked uniqueness example. Every
// subject stands at the origin so only similarity decides the mask.
struct WorkedExample {
  std::vector<ViewPoses> views{{1, {Pose2D{}}}, {2, {Pose2D{}, Pose2D{}}}, {3, {Pose2D{}, Pose2D{}}}};
  SimilarityCollection m_pred;

  WorkedExample() {
    Eigen::MatrixXd ab(1, 2), ad(1, 2), bd(2, 2);
    ab << 0.40, 0.30;               // A-B, A-C
    ad << 0.35, 0.10;               // A-D, A-E
    bd << 0.37, 0.36, 0.10, 0.10;   // B-D, B-E, C-D, C-E
    m_pred.insert(sim(1, 2, ab));
    m_pred.insert(sim(1, 3, ad));
    m_pred.insert(sim(2, 3, bd));
  }
};

const NodeId A{1, 0}, B{2, 0}, C{2, 1}, D{3, 0}, E{3, 1};

}  // namespace

TEST(TopKPairs, Examples) {
  Eigen::MatrixXd m(2, 3);
  m << 0.9, 0.2, 0.4, 0.1, 0.8, 0.5;
  const auto top = top_k_pairs(sim(0, 1, m), 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0], (ScoredPair{0, 0, 0.9}));
  EXPECT_EQ(top[1], (ScoredPair{1, 1, 0.8}));
  EXPECT_EQ(top[2], (ScoredPair{1, 2, 0.5}));

  Eigen::MatrixXd single(1, 1);
  single << 0.7;
  EXPECT_EQ(top_k_pairs(sim(0, 1, single), 1), (std::vector<ScoredPair>{{0, 0, 0.7}}));
  EXPECT_THROW(top_k_pairs(sim(0, 1, single), 3), InsufficientPairs);
}

TEST(TopKPairs, TiesBrokenByRowThenColumn) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(2, 2, 0.5);
  const auto top = top_k_pairs(sim(0, 1, m), 3);
  EXPECT_EQ(top[0], (ScoredPair{0, 0, 0.5}));
  EXPECT_EQ(top[1], (ScoredPair{0, 1, 0.5}));
  EXPECT_EQ(top[2], (ScoredPair{1, 0, 0.5}));
}

TEST(TopKPairs, MatchesFullSort) {
  testgen::CaseGen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd m(gen.integer(1, 6), gen.integer(1, 6));
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = gen.integer(0, 4) / 4.0;
    const int k = gen.integer(1, static_cast<int>(m.size()));
    std::vector<ScoredPair> all;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) all.push_back({r, c, m(r, c)});
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    all.resize(static_cast<std::size_t>(k));
    EXPECT_EQ(top_k_pairs(sim(0, 1, m), k), all);
  }
}

TEST(SimilarityMatrix, RejectsOutOfRangeEntries) {
  Eigen::MatrixXd m(1, 2);
  m << 0.5, 1.5;
  EXPECT_THROW(sim(0, 1, m).validate(), DomainError);
}

TEST(ThresholdMask, Examples) {
  const MatchingConfig cfg;
  auto one = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
  EXPECT_TRUE(threshold_mask(sim(0, 1, one(0.30)), one(1.0), one(deg_to_rad(10)), cfg)(0, 0));
  EXPECT_FALSE(threshold_mask(sim(0, 1, one(0.30)), one(2.5), one(deg_to_rad(10)), cfg)(0, 0));
  EXPECT_FALSE(threshold_mask(sim(0, 1, one(0.20)), one(1.0), one(deg_to_rad(5)), cfg)(0, 0));
}

TEST(ThresholdMask, BoundsAreInclusive) {
  const MatchingConfig cfg;
  auto one = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
  EXPECT_TRUE(threshold_mask(sim(0, 1, one(0.25)), one(2.0), one(cfg.angle_threshold), cfg)(0, 0));
}

TEST(ThresholdMask, ShapeMismatchThrows) {
  const MatchingConfig cfg;
  EXPECT_THROW(threshold_mask(sim(0, 1, Eigen::MatrixXd::Zero(2, 2)), Eigen::MatrixXd::Zero(2, 3),
                              Eigen::MatrixXd::Zero(2, 2), cfg),
               ShapeError);
}

TEST(ThresholdMask, MonotoneInThresholds) {
  testgen::CaseGen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd p(3, 4), d(3, 4), a(3, 4);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      p(i) = gen.uniform(0, 1);
      d(i) = gen.uniform(0, 4);
      a(i) = gen.uniform(0, 0.6);
    }
    MatchingConfig loose;
    MatchingConfig strict = loose;
    strict.similarity_threshold = gen.uniform(0.25, 1.0);
    strict.distance_threshold = gen.uniform(0.1, 2.0);
    strict.angle_threshold = gen.uniform(0.01, loose.angle_threshold);
    const BoolMatrix l = threshold_mask(sim(0, 1, p), d, a, loose);
    const BoolMatrix s = threshold_mask(sim(0, 1, p), d, a, strict);
    for (Eigen::Index i = 0; i < l.size(); ++i) EXPECT_TRUE(!s(i) || l(i));
  }
}

TEST(ConnectedComponents, Examples) {
  MatchGraph g({{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  EXPECT_EQ(connected_components(g), (std::vector<std::vector<std::size_t>>{{0}, {1}, {2}, {3}}));

  MatchGraph chain({{0, 0}, {1, 0}, {2, 0}});  // A, B, E
  chain.connect(0, 1);
  chain.connect(1, 2);
  EXPECT_EQ(connected_components(chain), (std::vector<std::vector<std::size_t>>{{0, 1, 2}}));

  MatchGraph two({{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  two.connect(0, 1);
  two.connect(2, 3);
  EXPECT_EQ(connected_components(two), (std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}}));
}

TEST(ConnectedComponents, SameViewEdgeRejected) {
  MatchGraph g({{0, 0}, {0, 1}});
  EXPECT_THROW(g.connect(0, 1), ContractError);
}

TEST(ResolveUniqueness, WorkedExample) {
  WorkedExample ex;
  const MatchGraph g = build_match_graph(ex.views, ex.m_pred, MatchingConfig{});
  const auto components = connected_components(g);
  ASSERT_EQ(components.size(), 1u);
  const auto clusters = resolve_uniqueness(components[0], g);
  ASSERT_FALSE(clusters.empty());
  EXPECT_EQ(clusters[0].members, (std::vector<NodeId>{A, B, D}));
  EXPECT_EQ(members(clusters), (std::vector<std::vector<NodeId>>{{A, B, D}, {C}, {E}}));
}

TEST(ResolveUniqueness, TrivialCases) {
  MatchGraph single({{0, 0}});
  const std::vector<std::size_t> just_a{0};
  EXPECT_EQ(members(resolve_uniqueness(just_a, single)), (std::vector<std::vector<NodeId>>{{{0, 0}}}));

  MatchGraph chain({{0, 0}, {1, 0}, {2, 0}});
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) {
      chain.set_score(a, b, 0.9);
      chain.connect(a, b);
    }
  }
  const std::vector<std::size_t> all{0, 1, 2};
  EXPECT_EQ(members(resolve_uniqueness(all, chain)), (std::vector<std::vector<NodeId>>{{{0, 0}, {1, 0}, {2, 0}}}));
}

TEST(Associate, WorkedExampleThroughPipeline) {
  WorkedExample ex;
  EXPECT_EQ(members(associate(ex.views, ex.m_pred, MatchingConfig{})),
            (std::vector<std::vector<NodeId>>{{A, B, D}, {C}, {E}}));
}

TEST(Associate, WithoutConstraintsKeepsWholeComponent) {
  WorkedExample ex;
  MatchingConfig cfg;
  cfg.enforce_constraints = false;
  EXPECT_EQ(members(associate(ex.views, ex.m_pred, cfg)), (std::vector<std::vector<NodeId>>{{A, B, C, D, E}}));
}

TEST(Associate, IdenticalViewsPairByIndex) {
  std::vector<Pose2D> poses{{0, 0, 0}, {5, 0, 1}, {0, 5, -1}, {5, 5, 2}};
  std::vector<ViewPoses> views{{0, poses}, {1, poses}};
  SimilarityCollection m_pred;
  m_pred.insert(sim(0, 1, Eigen::MatrixXd::Identity(4, 4)));
  const auto clusters = associate(views, m_pred, MatchingConfig{});
  ASSERT_EQ(clusters.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(clusters[i].members, (std::vector<NodeId>{{0, i}, {1, i}}));
}

TEST(Associate, LowSimilarityGivesSingletons) {
  std::vector<ViewPoses> views{{0, {Pose2D{}, Pose2D{}}}, {1, {Pose2D{}, Pose2D{}}}};
  SimilarityCollection m_pred;
  m_pred.insert(sim(0, 1, Eigen::MatrixXd::Constant(2, 2, 0.2)));
  EXPECT_EQ(associate(views, m_pred, MatchingConfig{}).size(), 4u);
}

TEST(Associate, PartitionUniquenessAndDeterminismProperties) {
  testgen::CaseGen gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int n_views = gen.integer(2, 5);
    std::vector<ViewPoses> views;
    for (int v = 0; v < n_views; ++v) {
      ViewPoses vp{v, {}};
      const int n = gen.integer(0, 6);
      for (int i = 0; i < n; ++i) vp.poses.push_back({gen.uniform(0, 4), gen.uniform(0, 4), gen.uniform(-0.4, 0.4)});
      views.push_back(std::move(vp));
    }
    SimilarityCollection m_pred;
    for (int a = 0; a < n_views; ++a) {
      for (int b = a + 1; b < n_views; ++b) {
        Eigen::MatrixXd m(views[a].poses.size(), views[b].poses.size());
        for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = gen.uniform(0, 1);
        m_pred.insert(sim(a, b, m));
      }
    }
    const MatchingConfig cfg;
    const auto clusters = associate(views, m_pred, cfg);
    EXPECT_EQ(members(clusters), members(associate(views, m_pred, cfg)));

    const MatchGraph g = build_match_graph(views, m_pred, cfg);
    std::vector<std::size_t> component_of(g.size());
    const auto components = connected_components(g);
    for (std::size_t c = 0; c < components.size(); ++c)
      for (std::size_t n : components[c]) component_of[n] = c;

    std::set<NodeId> seen;
    for (const auto& c : clusters) {
      std::set<ViewId> cluster_views;
      for (const auto& m : c.members) {
        EXPECT_TRUE(seen.insert(m).second);
        EXPECT_TRUE(cluster_views.insert(m.view).second);
        EXPECT_EQ(component_of[*g.find(m)], component_of[*g.find(c.members.front())]);
      }
    }
    EXPECT_EQ(seen.size(), g.size());
  }
}
