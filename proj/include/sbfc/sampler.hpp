#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sbfc/random.hpp"
#include "sbfc/score.hpp"

namespace sbfc {

struct SamplerConfig {
  std::size_t iterations = 10000;
  std::size_t thin = 50;
  double burnin_fraction = 0.2;
  std::size_t switch_k = 10;
  std::uint64_t seed = 0;

  static std::size_t default_iterations(std::size_t d) { return std::max<std::size_t>(10000, 10 * d); }

  void validate() const {
    if (thin < 1) throw ConfigError("thin must be at least 1");
    if (iterations < thin) throw ConfigError("iterations must be at least thin");
    if (!(burnin_fraction >= 0.0 && burnin_fraction < 1.0)) throw ConfigError("burn-in fraction must be in [0, 1)");
  }

  std::size_t burnin_iterations() const {
    return static_cast<std::size_t>(std::floor(burnin_fraction * static_cast<double>(iterations)));
  }
  std::size_t expected_samples() const { return (iterations - burnin_iterations()) / thin; }
};

inline void to_json(nlohmann::json& j, const SamplerConfig& c) {
  j = {{"iterations", c.iterations},
       {"thin", c.thin},
       {"burnin_fraction", c.burnin_fraction},
       {"switch_k", c.switch_k},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, SamplerConfig& c) {
  c.iterations = j.at("iterations").get<std::size_t>();
  c.thin = j.at("thin").get<std::size_t>();
  c.burnin_fraction = j.at("burnin_fraction").get<double>();
  c.switch_k = j.at("switch_k").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
}

struct ChainState {
  Graph graph;
  FamilyScoreCache cache;
  double current_log_score = 0.0;
  std::uint64_t iteration = 0;
  Rng rng;

  static ChainState initial(const Dataset& data, const Hyperparams& hp, std::uint64_t seed) {
    ChainState s{empty_graph(data.d()), FamilyScoreCache(data.d()), 0.0, 0, Rng(seed)};
    s.current_log_score = Scorer(data, hp, s.cache).graph_score(s.graph);
    return s;
  }

  static ChainState at(const Graph& g, const Dataset& data, const Hyperparams& hp, std::uint64_t seed) {
    ChainState s{g, FamilyScoreCache(data.d()), 0.0, 0, Rng(seed)};
    s.current_log_score = Scorer(data, hp, s.cache).graph_score(s.graph);
    return s;
  }
};

// ---------------------------------------------------------------------------
// Switch Trees
// ---------------------------------------------------------------------------

// Proposes a group flip for min(k, #trees) distinct trees in turn, each a
// Metropolis step on the bare posterior ratio. Returns the number accepted.
inline std::size_t switch_trees_move(ChainState& s, const Dataset& data, const Hyperparams& hp, std::size_t switch_k) {
  const Scorer scorer(data, hp, s.cache);
  const std::size_t n_trees = s.graph.tree_count();
  const std::size_t picks = std::min(switch_k, n_trees);
  std::vector<TreeId> ids(n_trees);
  std::iota(ids.begin(), ids.end(), TreeId{0});
  for (std::size_t i = 0; i < picks; ++i) std::swap(ids[i], ids[i + s.rng.below(n_trees - i)]);
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < picks; ++i) {
    const double delta = scorer.delta_switch(s.graph, ids[i]);
    const double u = s.rng.uniform();
    if (delta >= 0.0 || u < std::exp(delta)) {
      s.graph.switch_tree_group(ids[i]);
      s.current_log_score += delta;
      ++accepted;
    }
  }
  return accepted;
}

// ---------------------------------------------------------------------------
// Reassign Subtree
// ---------------------------------------------------------------------------

struct WeightedCandidate {
  ReassignCandidate candidate;
  double log_weight = 0.0;  // log score change relative to the current graph
};

// Full conditional over new attachments of the subtree at j: every node
// outside the subtree as parent (ascending), then a null parent in Group 0
// and in Group 1.
inline std::vector<WeightedCandidate> reassign_conditional(const Graph& g, const Scorer& scorer, Feature j) {
  const std::size_t d = g.size();
  const auto subtree = g.descendants(j);
  std::vector<char> in_subtree(d, 0);
  for (auto x : subtree) in_subtree[x] = 1;

  const double as_root[2] = {scorer.subtree_term(subtree, g, j, Group::noise),
                             scorer.subtree_term(subtree, g, j, Group::signal)};
  const double j_root[2] = {scorer.node_term(j, kNoParent, Group::noise),
                            scorer.node_term(j, kNoParent, Group::signal)};
  const Group cur = g.group(j);
  const double base = as_root[group_index(cur)] - j_root[group_index(cur)] + scorer.node_term(j, g.parent(j), cur);

  std::vector<WeightedCandidate> out;
  out.reserve(d - subtree.size() + 2);
  for (Feature p = 0; p < d; ++p) {
    if (in_subtree[p]) continue;
    const Group gp = g.group(p);
    const int gi = group_index(gp);
    out.push_back({{p, gp}, as_root[gi] - j_root[gi] + scorer.node_term(j, p, gp) - base});
  }
  out.push_back({{std::nullopt, Group::noise}, as_root[0] - base});
  out.push_back({{std::nullopt, Group::signal}, as_root[1] - base});
  return out;
}

// Index drawn with probability proportional to exp(log_weights), max-subtracted.
inline std::size_t sample_log_weights(std::span<const double> log_weights, Rng& rng) {
  const double mx = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> cumulative(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    total += std::exp(log_weights[i] - mx);
    cumulative[i] = total;
  }
  const double u = rng.uniform() * total;
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), log_weights.size() - 1);
}

// Gibbs step for a fixed node under the current rooting. Returns the chosen candidate.
inline ReassignCandidate reassign_node(ChainState& s, const Scorer& scorer, Feature j) {
  const auto candidates = reassign_conditional(s.graph, scorer, j);
  std::vector<double> logw(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) logw[i] = candidates[i].log_weight;
  const auto& chosen = candidates[sample_log_weights(logw, s.rng)];
  s.graph.reattach_subtree(j, chosen.candidate.new_parent, chosen.candidate.target_group);
  s.current_log_score += chosen.log_weight;
  return chosen.candidate;
}

// Picks a node uniformly, pivots its tree to a uniformly drawn root (the lazy
// form of the Pivot Trees move), then performs the Gibbs reattachment.
inline void reassign_subtree_move(ChainState& s, const Dataset& data, const Hyperparams& hp) {
  const Scorer scorer(data, hp, s.cache);
  const auto j = static_cast<Feature>(s.rng.below(s.graph.size()));
  const auto members = s.graph.tree_members(s.graph.tree_of(j));
  s.graph.pivot_tree(members[s.rng.below(members.size())]);
  reassign_node(s, scorer, j);
}

// ---------------------------------------------------------------------------
// Chains and traces
// ---------------------------------------------------------------------------

struct SampleTrace {
  std::vector<Graph> samples;
  std::vector<double> log_scores;
  std::vector<std::uint64_t> iterations;
  SamplerConfig config;
  std::size_t chains = 1;
  double alpha = 5.0;
  std::vector<std::string> feature_names;
  std::string rng_algorithm{Rng::algorithm};

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::size_t dimension() const { return samples.empty() ? feature_names.size() : samples.front().size(); }
};

inline constexpr std::uint64_t kDriftCheckInterval = 1000;
inline constexpr double kDriftTolerance = 1e-6;

// Runs one chain from the empty graph; each iteration is one Switch Trees
// sweep followed by one Reassign Subtree move. on_sample is called for every
// retained (post burn-in, thinned) state with the 1-based iteration number.
inline void run_chain(const Dataset& data, const Hyperparams& hp, const SamplerConfig& config,
                      const std::function<void(const ChainState&)>& on_sample) {
  config.validate();
  ChainState s = ChainState::initial(data, hp, config.seed);
  const std::size_t burnin = config.burnin_iterations();
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    switch_trees_move(s, data, hp, config.switch_k);
    reassign_subtree_move(s, data, hp);
    s.iteration = it;
    if (it % kDriftCheckInterval == 0) {
      const double fresh = Scorer(data, hp, s.cache).graph_score(s.graph);
      if (std::abs(fresh - s.current_log_score) > kDriftTolerance) {
        throw std::logic_error("chain log score drifted from recomputation");
      }
      s.current_log_score = fresh;
    }
    if (it > burnin && (it - burnin) % config.thin == 0) on_sample(s);
  }
}

inline SampleTrace run_chain(const Dataset& data, const Hyperparams& hp, const SamplerConfig& config) {
  SampleTrace trace;
  trace.config = config;
  trace.alpha = hp.alpha;
  trace.feature_names = data.feature_names();
  trace.samples.reserve(config.expected_samples());
  run_chain(data, hp, config, [&](const ChainState& s) {
    trace.samples.push_back(s.graph);
    trace.log_scores.push_back(s.current_log_score);
    trace.iterations.push_back(s.iteration);
  });
  return trace;
}

// Independent chains (chain 0 uses the configured seed, the rest derived
// seeds), run concurrently and concatenated in chain order.
inline SampleTrace run_chains(const Dataset& data, const Hyperparams& hp, const SamplerConfig& config,
                              std::size_t chains) {
  if (chains < 1) throw ConfigError("need at least one chain");
  config.validate();
  std::vector<SampleTrace> traces(chains);
  std::vector<std::exception_ptr> errors(chains);
  std::vector<std::thread> workers;
  for (std::size_t c = 0; c < chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        SamplerConfig cfg = config;
        if (c > 0) cfg.seed = Rng::derive_seed(config.seed, c);
        traces[c] = run_chain(data, hp, cfg);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  SampleTrace merged = std::move(traces.front());
  merged.chains = chains;
  for (std::size_t c = 1; c < chains; ++c) {
    auto& t = traces[c];
    std::move(t.samples.begin(), t.samples.end(), std::back_inserter(merged.samples));
    merged.log_scores.insert(merged.log_scores.end(), t.log_scores.begin(), t.log_scores.end());
    merged.iterations.insert(merged.iterations.end(), t.iterations.begin(), t.iterations.end());
  }
  return merged;
}

// JSON-lines: a header echoing config and RNG, then one snapshot per line.
inline void write_trace_jsonl(std::ostream& out, const SampleTrace& trace) {
  nlohmann::json header{{"type", "header"},
                        {"format", "sbfc-trace"},
                        {"version", 1},
                        {"rng", trace.rng_algorithm},
                        {"config", trace.config},
                        {"chains", trace.chains},
                        {"alpha", trace.alpha},
                        {"d", trace.dimension()},
                        {"feature_names", trace.feature_names}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) {
    nlohmann::json line = graph_to_json(trace.samples[i]);
    line["iter"] = trace.iterations[i];
    line["log_score"] = trace.log_scores[i];
    out << line.dump() << '\n';
  }
}

inline SampleTrace read_trace_jsonl(std::istream& in) {
  SampleTrace trace;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (!have_header) {
        if (j.value("type", "") != "header") throw ParseError("trace: first line is not a header");
        trace.config = j.at("config").get<SamplerConfig>();
        trace.chains = j.value("chains", std::size_t{1});
        trace.alpha = j.value("alpha", 5.0);
        trace.rng_algorithm = j.value("rng", std::string{});
        trace.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        have_header = true;
        continue;
      }
      Graph g = graph_from_json(j);
      if (g.size() != trace.feature_names.size()) throw ParseError("trace: snapshot dimension mismatch");
      trace.samples.push_back(std::move(g));
      trace.log_scores.push_back(j.at("log_score").get<double>());
      trace.iterations.push_back(j.at("iter").get<std::uint64_t>());
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw ParseError("trace: missing header");
  return trace;
}

// ---------------------------------------------------------------------------
// Exact posterior by enumeration (small d)
// ---------------------------------------------------------------------------

// Likelihood-equivalence class of a graph: undirected edges plus groups.
struct ForestClass {
  std::vector<std::pair<Feature, Feature>> edges;
  std::vector<Group> groups;

  auto operator<=>(const ForestClass&) const = default;
};

inline ForestClass forest_class(const Graph& g) { return {undirected_edges(g), g.groups()}; }

using ClassDistribution = std::map<ForestClass, double>;

inline constexpr std::size_t kDefaultEnumerationLimit = 5;

// Posterior mass of every equivalence class, summing over all rooted labeled
// forests with per-tree group labels.
inline ClassDistribution enumerate_exact_posterior(const Dataset& data, const Hyperparams& hp,
                                                   std::size_t d_max = kDefaultEnumerationLimit) {
  const std::size_t d = data.d();
  if (d > d_max) {
    throw ConfigError("exact enumeration refused: d = " + std::to_string(d) + " exceeds limit " +
                      std::to_string(d_max));
  }
  FamilyScoreCache cache(d);
  const Scorer scorer(data, hp, cache);
  std::map<ForestClass, std::vector<double>> log_terms;

  // Parent choice per node: 0 = root, otherwise feature (choice - 1).
  std::vector<std::size_t> choice(d, 0);
  std::vector<Feature> parents(d);
  while (true) {
    bool valid = true;
    for (std::size_t j = 0; j < d && valid; ++j) {
      parents[j] = choice[j] == 0 ? kNoParent : static_cast<Feature>(choice[j] - 1);
      if (parents[j] == j) valid = false;
    }
    if (valid) {
      for (Feature j = 0; j < d && valid; ++j) {
        std::size_t steps = 0;
        for (Feature x = parents[j]; x != kNoParent; x = parents[x])
          if (++steps > d) {
            valid = false;
            break;
          }
      }
    }
    if (valid) {
      Graph base = Graph::from_parents(parents, std::vector<Group>(d, Group::noise));
      const std::size_t trees = base.tree_count();
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << trees); ++mask) {
        Graph g = base;
        for (TreeId t = 0; t < trees; ++t)
          if (mask >> t & 1U) g.switch_tree_group(t);
        log_terms[forest_class(g)].push_back(scorer.graph_score(g));
      }
    }
    std::size_t pos = 0;
    while (pos < d && ++choice[pos] > d) choice[pos++] = 0;
    if (pos == d) break;
  }

  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& [cls, terms] : log_terms)
    for (double t : terms) mx = std::max(mx, t);
  ClassDistribution dist;
  double total = 0.0;
  for (const auto& [cls, terms] : log_terms) {
    double mass = 0.0;
    for (double t : terms) mass += std::exp(t - mx);
    dist[cls] = mass;
    total += mass;
  }
  for (auto& [cls, p] : dist) p /= total;
  return dist;
}

inline double total_variation(const ClassDistribution& a, const ClassDistribution& b) {
  double tv = 0.0;
  for (const auto& [cls, p] : a) {
    const auto it = b.find(cls);
    tv += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [cls, q] : b)
    if (!a.count(cls)) tv += q;
  return 0.5 * tv;
}

// Tallies class frequencies; accumulate with add(), read with distribution().
class ClassTally {
 public:
  void add(const Graph& g) {
    ++counts_[forest_class(g)];
    ++total_;
  }
  std::size_t total() const { return total_; }
  ClassDistribution distribution() const {
    ClassDistribution out;
    for (const auto& [cls, c] : counts_) out[cls] = static_cast<double>(c) / static_cast<double>(total_);
    return out;
  }

 private:
  std::map<ForestClass, std::size_t> counts_;
  std::size_t total_ = 0;
};

}  // namespace sbfc
