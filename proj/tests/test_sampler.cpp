#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "sbfc/bundled.hpp"
#include "sbfc/sampler.hpp"
#include "support.hpp"

namespace sbfc {
namespace {

constexpr Feature R = kNoParent;
constexpr Group N = Group::noise;
constexpr Group S = Group::signal;

TEST(SamplerConfig, DefaultsAndSampleCount) {
  EXPECT_EQ(SamplerConfig::default_iterations(50), 10000u);
  EXPECT_EQ(SamplerConfig::default_iterations(2000), 20000u);
  SamplerConfig c;
  EXPECT_EQ(c.burnin_iterations(), 2000u);
  EXPECT_EQ(c.expected_samples(), 160u);
}

TEST(SamplerConfig, Validation) {
  SamplerConfig c;
  c.thin = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.burnin_fraction = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.iterations = 10;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RunChain, RetainsExpectedSamples) {
  const auto ds = bundled::tiny(2);
  const auto hp = Hyperparams::for_data(ds);
  SamplerConfig c;
  c.seed = 3;
  const auto trace = run_chain(ds, hp, c);
  EXPECT_EQ(trace.size(), 160u);
  EXPECT_EQ(trace.iterations.front(), 2050u);
  EXPECT_EQ(trace.iterations.back(), 10000u);
  FamilyScoreCache cache(ds.d());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    trace.samples[i].check_invariants();
    EXPECT_NEAR(trace.log_scores[i], graph_log_score(trace.samples[i], ds, hp, cache), 1e-9);
  }
}

TEST(RunChain, DeterministicBySeed) {
  const auto ds = bundled::random_dataset(60, 6, 3, 2, 2);
  const auto hp = Hyperparams::for_data(ds);
  SamplerConfig c;
  c.iterations = 2000;
  c.thin = 10;
  c.seed = 42;
  const auto a = run_chain(ds, hp, c);
  const auto b = run_chain(ds, hp, c);
  EXPECT_EQ(a.samples, b.samples);
  c.seed = 43;
  EXPECT_NE(run_chain(ds, hp, c).samples, a.samples);
}

TEST(RunChains, ConcatenatesIndependentChains) {
  const auto ds = bundled::tiny(3);
  const auto hp = Hyperparams::for_data(ds);
  SamplerConfig c;
  c.iterations = 1000;
  c.thin = 10;
  c.seed = 5;
  const auto one = run_chain(ds, hp, c);
  const auto two = run_chains(ds, hp, c, 2);
  ASSERT_EQ(two.size(), 2 * one.size());
  EXPECT_EQ(two.chains, 2u);
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(two.samples[i], one.samples[i]);
  EXPECT_THROW(run_chains(ds, hp, c, 0), ConfigError);
}

TEST(SwitchTrees, AcceptedWithinBounds) {
  const auto ds = bundled::random_dataset(40, 12, 2, 2, 6);
  const auto hp = Hyperparams::for_data(ds);
  auto s = ChainState::initial(ds, hp, 1);
  for (int i = 0; i < 50; ++i) {
    const auto trees = s.graph.tree_count();
    EXPECT_LE(switch_trees_move(s, ds, hp, 3), std::min<std::size_t>(3, trees));
    EXPECT_EQ(s.graph.tree_count(), trees);
    reassign_subtree_move(s, ds, hp);
  }
  FamilyScoreCache cache(ds.d());
  EXPECT_NEAR(s.current_log_score, graph_log_score(s.graph, ds, hp, cache), 1e-9);
}

TEST(ReassignConditional, WeightsMatchFullRecomputation) {
  const auto ds = bundled::random_dataset(50, 7, 3, 2, 21);
  const auto hp = Hyperparams::for_data(ds);
  FamilyScoreCache cache(ds.d());
  const Scorer scorer(ds, hp, cache);
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = testing::random_graph(ds.d(), rng);
    const auto j = static_cast<Feature>(rng.below(ds.d()));
    const auto cands = reassign_conditional(g, scorer, j);
    EXPECT_EQ(cands.size(), ds.d() - g.descendants(j).size() + 2);
    const double base = graph_log_score_uncached(g, ds, hp);
    for (const auto& c : cands) {
      const auto h = reattach_subtree(g, j, c.candidate.new_parent, c.candidate.target_group);
      EXPECT_NEAR(c.log_weight, graph_log_score_uncached(h, ds, hp) - base, 1e-9);
    }
  }
}

TEST(ReassignConditional, SingleFeatureHasTwoCandidates) {
  const auto ds = bundled::tiny(1);
  const auto hp = Hyperparams::for_data(ds);
  FamilyScoreCache cache(1);
  const Scorer scorer(ds, hp, cache);
  const auto cands = reassign_conditional(empty_graph(1), scorer, 0);
  ASSERT_EQ(cands.size(), 2u);
  EXPECT_EQ(cands[0].candidate, (ReassignCandidate{std::nullopt, N}));
  EXPECT_EQ(cands[0].log_weight, 0.0);
  const double family_delta = family_log_score(count_family(ds, 0, {std::nullopt, true}), hp) -
                              family_log_score(count_family(ds, 0, {}), hp);
  EXPECT_NEAR(cands[1].log_weight, family_delta, 1e-12);
}

TEST(ReassignConditional, DescendantsExcluded) {
  const auto ds = bundled::tiny(3);
  const auto hp = Hyperparams::for_data(ds);
  FamilyScoreCache cache(3);
  const Scorer scorer(ds, hp, cache);
  const auto g = Graph::from_parents({R, 0, 1}, {N, N, N});
  const auto cands = reassign_conditional(g, scorer, 1);
  ASSERT_EQ(cands.size(), 3u);
  EXPECT_EQ(cands[0].candidate.new_parent, Feature{0});
  EXPECT_FALSE(cands[1].candidate.new_parent.has_value());
  EXPECT_FALSE(cands[2].candidate.new_parent.has_value());
}

TEST(SwitchTrees, SingletonFlipDelta) {
  const auto ds = bundled::tiny(3);
  const auto hp = Hyperparams::for_data(ds);
  FamilyScoreCache cache(3);
  const Scorer scorer(ds, hp, cache);
  const auto g = empty_graph(3);
  const double expected = -std::log(3.0) / 2 + family_log_score(count_family(ds, 1, {std::nullopt, true}), hp) -
                          family_log_score(count_family(ds, 1, {}), hp);
  EXPECT_NEAR(scorer.delta_switch(g, g.tree_of(1)), expected, 1e-12);
}

TEST(SwitchTrees, ReversedMoveNegatesDelta) {
  const auto ds = bundled::random_dataset(50, 8, 3, 2, 31);
  const auto hp = Hyperparams::for_data(ds);
  FamilyScoreCache cache(ds.d());
  const Scorer scorer(ds, hp, cache);
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = testing::random_graph(ds.d(), rng);
    const auto t = static_cast<TreeId>(rng.below(g.tree_count()));
    const auto h = switch_tree_group(g, t);
    EXPECT_NEAR(scorer.delta_switch(h, t), -scorer.delta_switch(g, t), 1e-9);
  }
}

TEST(SwitchTrees, FewerTreesThanKProposesEachOnce) {
  const auto ds = bundled::tiny(3);
  const auto hp = Hyperparams::for_data(ds);
  auto s = ChainState::initial(ds, hp, 5);
  const Scorer scorer(ds, hp, s.cache);
  std::vector<double> deltas;
  for (TreeId t = 0; t < s.graph.tree_count(); ++t) deltas.push_back(scorer.delta_switch(s.graph, t));
  const auto before = s.graph;
  const auto accepted = switch_trees_move(s, ds, hp, 10);
  std::size_t flipped = 0;
  for (Feature j = 0; j < 3; ++j) flipped += s.graph.group(j) != before.group(j);
  EXPECT_EQ(accepted, flipped);
  EXPECT_LE(accepted, 3u);
  // Singletons only, so deltas are independent; a non-negative delta is always accepted.
  for (TreeId t = 0; t < 3; ++t) {
    if (deltas[t] >= 0.0) {
      EXPECT_NE(s.graph.group(before.root_of_tree(t)), before.group(before.root_of_tree(t)));
    }
  }
}

TEST(SampleLogWeights, FrequenciesFollowWeights) {
  Rng rng(4);
  const std::vector<double> logw{std::log(1.0) - 700, std::log(2.0) - 700, std::log(7.0) - 700};
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_log_weights(logw, rng)];
  const double p[3] = {0.1, 0.2, 0.7};
  for (int k = 0; k < 3; ++k) {
    const double se = std::sqrt(p[k] * (1 - p[k]) / n);
    EXPECT_NEAR(counts[k] / double(n), p[k], 4 * se);
  }
}

TEST(Trace, JsonlRoundTrip) {
  const auto ds = bundled::tiny(3);
  const auto hp = Hyperparams::for_data(ds);
  SamplerConfig c;
  c.iterations = 500;
  c.thin = 5;
  c.seed = 9;
  const auto trace = run_chain(ds, hp, c);
  std::stringstream ss;
  write_trace_jsonl(ss, trace);
  const auto back = read_trace_jsonl(ss);
  EXPECT_EQ(back.samples, trace.samples);
  EXPECT_EQ(back.iterations, trace.iterations);
  EXPECT_EQ(back.feature_names, trace.feature_names);
  EXPECT_EQ(back.config.seed, 9u);
  EXPECT_EQ(back.rng_algorithm, "mt19937_64");
  for (std::size_t i = 0; i < trace.size(); ++i) EXPECT_DOUBLE_EQ(back.log_scores[i], trace.log_scores[i]);
}

TEST(Trace, MalformedInputIsParseError) {
  std::stringstream none("");
  EXPECT_THROW(read_trace_jsonl(none), ParseError);
  std::stringstream no_header("{\"groups\":[0],\"parents\":[null],\"iter\":1,\"log_score\":0}\n");
  EXPECT_THROW(read_trace_jsonl(no_header), ParseError);
  std::stringstream garbage(
      "{\"type\":\"header\",\"config\":{\"iterations\":1,\"thin\":1,\"burnin_fraction\":0,\"switch_k\":1,\"seed\":0},"
      "\"feature_names\":[\"a\"]}\nnot json\n");
  EXPECT_THROW(read_trace_jsonl(garbage), ParseError);
}

TEST(Enumeration, ClassCounts) {
  EXPECT_EQ(enumerate_exact_posterior(bundled::tiny(1), Hyperparams{}).size(), 2u);
  EXPECT_EQ(enumerate_exact_posterior(bundled::tiny(2), Hyperparams{}).size(), 6u);
  // Forests on 3 labeled nodes: 1 empty (8 labelings), 3 one-edge (4 each), 3 spanning (2 each).
  EXPECT_EQ(enumerate_exact_posterior(bundled::tiny(3), Hyperparams{}).size(), 26u);
}

TEST(Enumeration, RefusesLargeD) {
  const auto ds = bundled::random_dataset(10, 6, 2, 2, 1);
  EXPECT_THROW(enumerate_exact_posterior(ds, Hyperparams{}), ConfigError);
}

TEST(Enumeration, MatchesHandListedGraphsForTwoFeatures) {
  const auto ds = bundled::tiny(2);
  const auto hp = Hyperparams::for_data(ds);
  std::map<ForestClass, double> mass;
  std::vector<Graph> graphs;
  for (Group a : {N, S})
    for (Group b : {N, S}) graphs.push_back(Graph::from_parents({R, R}, {a, b}));
  for (Group a : {N, S}) {
    graphs.push_back(Graph::from_parents({R, 0}, {a, a}));
    graphs.push_back(Graph::from_parents({1, R}, {a, a}));
  }
  ASSERT_EQ(graphs.size(), 8u);
  double total = 0.0;
  const double ref = graph_log_score_uncached(graphs[0], ds, hp);
  for (const auto& g : graphs) {
    const double w = std::exp(graph_log_score_uncached(g, ds, hp) - ref);
    mass[forest_class(g)] += w;
    total += w;
  }
  const auto exact = enumerate_exact_posterior(ds, hp);
  ASSERT_EQ(exact.size(), mass.size());
  double sum = 0.0;
  for (const auto& [cls, p] : exact) {
    EXPECT_NEAR(p, mass.at(cls) / total, 1e-12);
    sum += p;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(TotalVariation, Basics) {
  const auto exact = enumerate_exact_posterior(bundled::tiny(2), Hyperparams{});
  EXPECT_EQ(total_variation(exact, exact), 0.0);
  ClassDistribution point;
  point[exact.begin()->first] = 1.0;
  EXPECT_NEAR(total_variation(exact, point), 1.0 - exact.begin()->second, 1e-12);
  ClassDistribution other;
  other[ForestClass{{}, {S, S, S}}] = 1.0;
  EXPECT_NEAR(total_variation(point, other), 1.0, 1e-12);
}

}  // namespace
}  // namespace sbfc
