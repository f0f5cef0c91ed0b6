#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "sbfc/graph.hpp"
#include "sbfc/random.hpp"

namespace sbfc {
namespace {

constexpr Feature R = kNoParent;
constexpr Group N = Group::noise;
constexpr Group S = Group::signal;

// Ten-node stand-in for the illustrated example (features X1..X10 -> 0..9):
// Group 1: {X1,X2,X3}, {X5,X7}; Group 0: {X4,X6,X10}, {X8}, {X9}.
Graph example_graph() {
  //            X1 X2 X3 X4 X5 X6 X7 X8 X9 X10
  return Graph::from_parents({R, 0, 1, R, R, 3, 4, R, R, 5}, {S, S, S, N, S, N, S, N, N, N});
}

std::set<Feature> as_set(const std::vector<Feature>& v) { return {v.begin(), v.end()}; }

TEST(EmptyGraph, AllNoiseRoots) {
  const auto g = empty_graph(3);
  EXPECT_EQ(g.parents(), (std::vector<Feature>{R, R, R}));
  EXPECT_EQ(g.groups(), (std::vector<Group>{N, N, N}));
  EXPECT_EQ(g.tree_count(), 3u);
  EXPECT_EQ(empty_graph(1).tree_count(), 1u);
  EXPECT_EQ(structure_counts(empty_graph(7)), (StructureCounts{0, 0, 0}));
  EXPECT_THROW(empty_graph(0), std::invalid_argument);
}

TEST(ParentSet, FourNodeKinds) {
  const auto g = Graph::from_parents({R, R, R, R, R, 4}, {N, N, S, N, S, S});
  EXPECT_EQ(parent_set(g, 5), (ParentSet{4, true}));
  EXPECT_EQ(parent_set(g, 0), (ParentSet{std::nullopt, false}));
  EXPECT_EQ(parent_set(g, 2), (ParentSet{std::nullopt, true}));
  const auto h = Graph::from_parents({R, 0}, {N, N});
  EXPECT_EQ(parent_set(h, 1), (ParentSet{0, false}));
}

TEST(Descendants, Basics) {
  const auto g = Graph::from_parents({R, 0, 1}, {N, N, N});
  EXPECT_EQ(as_set(descendants(g, 1)), (std::set<Feature>{1, 2}));
  EXPECT_EQ(as_set(descendants(g, 2)), (std::set<Feature>{2}));
  EXPECT_EQ(as_set(descendants(g, 0)), (std::set<Feature>{0, 1, 2}));
}

TEST(Reattach, LeafJoinsGroupOfNewParent) {
  const auto g = example_graph();
  const auto h = reattach_subtree(g, 9, Feature{0}, N);
  EXPECT_EQ(h.parent(9), 0u);
  EXPECT_EQ(h.group(9), S);
  h.check_invariants();
}

TEST(Reattach, SameParentIsIdentity) {
  const auto g = example_graph();
  EXPECT_EQ(reattach_subtree(g, 2, Feature{1}, N), g);
}

TEST(Reattach, SplitMakesRoot) {
  const auto g = example_graph();
  const auto h = reattach_subtree(g, 5, std::nullopt, N);
  EXPECT_TRUE(h.is_root(5));
  EXPECT_EQ(h.tree_count(), g.tree_count() + 1);
  EXPECT_EQ(h.tree_of(9), h.tree_of(5));
  EXPECT_NE(h.tree_of(3), h.tree_of(5));
  h.check_invariants();
}

TEST(Reattach, SubtreeMovesAcrossGroups) {
  // Reassign X6 (with child X10) under X8, then flip it into Group 1 under X1.
  auto g = example_graph();
  g.reattach_subtree(5, Feature{7}, S);
  EXPECT_EQ(g.parent(5), 7u);
  EXPECT_EQ(g.tree_of(9), g.tree_of(7));
  g.reattach_subtree(5, Feature{0}, N);
  EXPECT_EQ(g.group(5), S);
  EXPECT_EQ(g.group(9), S);
  g.check_invariants();
}

TEST(Reattach, CycleRejected) {
  const auto g = example_graph();
  EXPECT_THROW(reattach_subtree(g, 0, Feature{2}, N), CycleError);
  EXPECT_THROW(reattach_subtree(g, 1, Feature{1}, N), CycleError);
}

TEST(Switch, SingletonAndTreeAndInvolution) {
  const auto g = example_graph();
  const auto x8 = switch_tree_group(g, g.tree_of(7));
  EXPECT_EQ(x8.group(7), S);
  const auto t57 = switch_tree_group(g, g.tree_of(4));
  EXPECT_EQ(t57.group(4), N);
  EXPECT_EQ(t57.group(6), N);
  EXPECT_EQ(t57.group(0), S);
  EXPECT_EQ(switch_tree_group(t57, t57.tree_of(4)), g);
}

TEST(Pivot, IdentityAndPathReversal) {
  const auto chain = Graph::from_parents({R, 0, 1}, {N, N, N});
  EXPECT_EQ(pivot_tree(chain, 0), chain);
  const auto rev = pivot_tree(chain, 2);
  EXPECT_EQ(rev.parents(), (std::vector<Feature>{1, 2, R}));
  rev.check_invariants();
}

TEST(Pivot, ExampleNewRoots) {
  auto g = example_graph();
  g.pivot_tree(5);
  g.pivot_tree(9);
  EXPECT_TRUE(g.is_root(9));
  EXPECT_EQ(g.parent(5), 9u);
  EXPECT_EQ(g.parent(3), 5u);
  EXPECT_EQ(undirected_edges(g), undirected_edges(example_graph()));
  g.check_invariants();
}

TEST(StructureCounts, Examples) {
  const auto g = Graph::from_parents({R, 0, 1, R, R}, {S, S, S, N, N});
  EXPECT_EQ(structure_counts(g), (StructureCounts{0, 2, 3}));
  EXPECT_EQ(structure_counts(example_graph()), (StructureCounts{2, 3, 5}));
}

TEST(Json, RoundTrip) {
  const auto g = example_graph();
  const auto j = graph_to_json(g);
  EXPECT_TRUE(j["parents"][0].is_null());
  EXPECT_EQ(j["parents"][1], 0);
  EXPECT_EQ(graph_from_json(j), g);
  EXPECT_THROW(graph_from_json(nlohmann::json{{"parents", {1, 0}}, {"groups", {0, 0}}}), CycleError);
  EXPECT_THROW(graph_from_json(nlohmann::json{{"parents", {nullptr, 0}}, {"groups", {0, 1}}}), std::logic_error);
}

TEST(FromParents, RejectsMixedGroupsAndBadIndices) {
  EXPECT_THROW(Graph::from_parents({R, 0}, {N, S}), std::logic_error);
  EXPECT_THROW(Graph::from_parents({R, 5}, {N, N}), std::invalid_argument);
  EXPECT_THROW(Graph::from_parents({0}, {N}), std::invalid_argument);
}

// Random edit sequences keep every invariant; pivot preserves edges and counts;
// each tree of m nodes has m - 1 edges.
TEST(GraphProperty, RandomEditSequences) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.below(12);
    Graph g = empty_graph(d);
    for (int step = 0; step < 60; ++step) {
      const auto op = rng.below(3);
      if (op == 0) {
        const auto j = static_cast<Feature>(rng.below(d));
        std::vector<Feature> outside;
        for (Feature p = 0; p < d; ++p)
          if (!g.is_descendant(p, j)) outside.push_back(p);
        const std::size_t pick = rng.below(outside.size() + 2);
        if (pick < outside.size())
          g.reattach_subtree(j, outside[pick], N);
        else
          g.reattach_subtree(j, std::nullopt, pick == outside.size() ? N : S);
      } else if (op == 1) {
        const auto t = static_cast<TreeId>(rng.below(g.tree_count()));
        const auto before = g;
        g.switch_tree_group(t);
        EXPECT_EQ(switch_tree_group(g, t), before);
      } else {
        const auto x = static_cast<Feature>(rng.below(d));
        const auto edges = undirected_edges(g);
        const auto counts = structure_counts(g);
        const auto groups = g.groups();
        g.pivot_tree(x);
        EXPECT_TRUE(g.is_root(x));
        EXPECT_EQ(undirected_edges(g), edges);
        EXPECT_EQ(structure_counts(g), counts);
        EXPECT_EQ(g.groups(), groups);
      }
      ASSERT_NO_THROW(g.check_invariants());
    }
    std::size_t edges = 0;
    for (TreeId t = 0; t < g.tree_count(); ++t) {
      const auto members = g.tree_members(t);
      std::size_t internal = 0;
      for (auto x : members) internal += g.is_root(x) ? 0 : 1;
      EXPECT_EQ(internal, members.size() - 1);
      edges += internal;
    }
    EXPECT_EQ(edges, undirected_edges(g).size());
  }
}

}  // namespace
}  // namespace sbfc
