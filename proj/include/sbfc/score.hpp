#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "sbfc/dataio.hpp"
#include "sbfc/graph.hpp"

namespace sbfc {

inline double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

struct Hyperparams {
  double alpha = 5.0;
  double prior_edge_coeff = 4.0;
  std::size_t class_arity = 2;

  static Hyperparams for_data(const Dataset& data, double alpha = 5.0) {
    Hyperparams hp;
    hp.alpha = alpha;
    hp.class_arity = data.class_arity();
    hp.validate();
    return hp;
  }

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
    if (class_arity < 2) throw ConfigError("class arity must be at least 2");
  }
};

// Sufficient statistics n_jkl for one family: rows are parent configurations
// (w of them), columns are the feature's values (v of them).
struct CountTable {
  Feature feature = 0;
  std::size_t parent_config_arity = 1;
  std::size_t value_arity = 1;
  std::vector<std::uint32_t> counts;      // row-major w x v
  std::vector<std::uint32_t> row_totals;  // length w

  std::uint32_t at(std::size_t config, std::size_t value) const { return counts[config * value_arity + value]; }
};

// Log prior (unnormalized): -(c*(E0 + E1/v) + D1/v) * ln d, with c the edge coefficient.
inline double log_prior(const StructureCounts& sc, std::size_t d, const Hyperparams& hp) {
  const double v = static_cast<double>(hp.class_arity);
  const double exponent = -hp.prior_edge_coeff * (static_cast<double>(sc.noise_edges) +
                                                  static_cast<double>(sc.signal_edges) / v) -
                          static_cast<double>(sc.signal_nodes) / v;
  return exponent * std::log(static_cast<double>(d));
}

// Tallies counts for feature j under parent set ps. Parent configuration index
// is parent_value * v + y when both parents are present.
inline CountTable count_family(const Dataset& data, Feature j, const ParentSet& ps) {
  CountTable ct;
  ct.feature = j;
  ct.value_arity = data.arity(j);
  const std::size_t parent_arity = ps.feature_parent ? data.arity(*ps.feature_parent) : 1;
  const std::size_t class_arity = ps.includes_class ? data.class_arity() : 1;
  ct.parent_config_arity = parent_arity * class_arity;
  ct.counts.assign(ct.parent_config_arity * ct.value_arity, 0);
  ct.row_totals.assign(ct.parent_config_arity, 0);

  const auto x = data.column(j);
  const std::size_t v = ct.value_arity;
  if (ps.feature_parent && ps.includes_class) {
    const auto p = data.column(*ps.feature_parent);
    const auto y = data.labels();
    for (std::size_t i = 0; i < data.n(); ++i) ++ct.counts[(p[i] * class_arity + y[i]) * v + x[i]];
  } else if (ps.feature_parent) {
    const auto p = data.column(*ps.feature_parent);
    for (std::size_t i = 0; i < data.n(); ++i) ++ct.counts[p[i] * v + x[i]];
  } else if (ps.includes_class) {
    const auto y = data.labels();
    for (std::size_t i = 0; i < data.n(); ++i) ++ct.counts[y[i] * v + x[i]];
  } else {
    for (std::size_t i = 0; i < data.n(); ++i) ++ct.counts[x[i]];
  }
  for (std::size_t l = 0; l < ct.parent_config_arity; ++l) {
    std::uint32_t total = 0;
    for (std::size_t k = 0; k < v; ++k) total += ct.counts[l * v + k];
    ct.row_totals[l] = total;
  }
  return ct;
}

// Dirichlet-multinomial (BD) log marginal likelihood of a family with total
// pseudo-count alpha spread evenly over the w * v cells.
inline double family_log_score(const CountTable& ct, const Hyperparams& hp) {
  const double w = static_cast<double>(ct.parent_config_arity);
  const double v = static_cast<double>(ct.value_arity);
  const double a_row = hp.alpha / w;
  const double a_cell = hp.alpha / (w * v);
  const double lg_row = log_gamma(a_row);
  const double lg_cell = log_gamma(a_cell);
  double score = 0.0;
  for (std::size_t l = 0; l < ct.parent_config_arity; ++l) {
    const std::uint32_t total = ct.row_totals[l];
    if (total == 0) continue;
    score += lg_row - log_gamma(a_row + total);
    for (std::size_t k = 0; k < ct.value_arity; ++k) {
      const std::uint32_t c = ct.at(l, k);
      if (c != 0) score += log_gamma(a_cell + c) - lg_cell;
    }
  }
  return score;
}

// Dirichlet-multinomial marginal of the class vector, pseudo-count alpha/v per class.
inline double class_log_marginal(const Dataset& data, const Hyperparams& hp) {
  const double v = static_cast<double>(data.class_arity());
  const double a = hp.alpha / v;
  double score = log_gamma(hp.alpha) - log_gamma(hp.alpha + static_cast<double>(data.labels().size()));
  for (auto c : data.class_counts()) score += log_gamma(a + static_cast<double>(c)) - log_gamma(a);
  return score;
}

// Memo of family scores keyed by (feature, feature parent or none, class flag).
// Rows are allocated on first use, so memory grows with the families visited
// (at most 2 d (d + 1) entries).
class FamilyScoreCache {
 public:
  FamilyScoreCache() = default;
  explicit FamilyScoreCache(std::size_t d) : d_(d), rows_(d) {}

  std::size_t dimension() const { return d_; }

  double get_or_compute(const Dataset& data, const Hyperparams& hp, Feature j, Feature parent, bool signal) {
    auto& row = rows_[j];
    if (row.empty()) row.assign(2 * (d_ + 1), kEmpty);
    const std::size_t slot = 2 * (parent == kNoParent ? d_ : parent) + (signal ? 1 : 0);
    double& cell = row[slot];
    if (std::isnan(cell)) {
      ParentSet ps;
      if (parent != kNoParent) ps.feature_parent = parent;
      ps.includes_class = signal;
      cell = family_log_score(count_family(data, j, ps), hp);
      ++misses_;
    }
    return cell;
  }

  std::size_t misses() const { return misses_; }

  std::size_t filled() const {
    std::size_t total = 0;
    for (const auto& row : rows_)
      for (double v : row) total += std::isnan(v) ? 0 : 1;
    return total;
  }

  void clear() {
    for (auto& row : rows_) row.clear();
    misses_ = 0;
  }

 private:
  static constexpr double kEmpty = std::numeric_limits<double>::quiet_NaN();
  std::size_t d_ = 0;
  std::vector<std::vector<double>> rows_;
  std::size_t misses_ = 0;
};

// Per-node decomposition of the log posterior. Each node contributes its
// family score plus its share of the prior: an edge penalty if it has a
// feature parent and a signal penalty if it sits in Group 1.
class Scorer {
 public:
  Scorer(const Dataset& data, const Hyperparams& hp, FamilyScoreCache& cache)
      : data_(&data), hp_(hp), cache_(&cache) {
    const double log_d = std::log(static_cast<double>(data.d()));
    const double v = static_cast<double>(hp.class_arity);
    noise_edge_penalty_ = hp.prior_edge_coeff * log_d;
    signal_edge_penalty_ = hp.prior_edge_coeff * log_d / v;
    signal_node_penalty_ = log_d / v;
    if (cache.dimension() != data.d()) throw std::invalid_argument("score cache dimension mismatch");
  }

  const Dataset& data() const { return *data_; }
  const Hyperparams& hyperparams() const { return hp_; }

  double family(Feature j, Feature parent, Group g) const {
    return cache_->get_or_compute(*data_, hp_, j, parent, g == Group::signal);
  }

  double prior_term(Feature parent, Group g) const {
    double t = 0.0;
    if (g == Group::signal) t -= signal_node_penalty_;
    if (parent != kNoParent) t -= g == Group::signal ? signal_edge_penalty_ : noise_edge_penalty_;
    return t;
  }

  double node_term(Feature j, Feature parent, Group g) const { return family(j, parent, g) + prior_term(parent, g); }

  double class_term() const {
    if (std::isnan(class_term_)) class_term_ = class_log_marginal(*data_, hp_);
    return class_term_;
  }

  double graph_score(const Graph& g) const {
    double s = class_term();
    for (Feature j = 0; j < g.size(); ++j) s += node_term(j, g.parent(j), g.group(j));
    return s;
  }

  // Sum of node terms over a set of nodes placed in group g, with `root`
  // treated as parentless.
  double subtree_term(std::span<const Feature> nodes, const Graph& graph, Feature root, Group g) const {
    double s = 0.0;
    for (auto x : nodes) s += node_term(x, x == root ? kNoParent : graph.parent(x), g);
    return s;
  }

  // Change in log score from flipping the group of tree t.
  double delta_switch(const Graph& g, TreeId t) const {
    const auto members = g.tree_members(t);
    const Group from = g.group(members.front());
    const Group to = opposite(from);
    double delta = 0.0;
    for (auto x : members) delta += node_term(x, g.parent(x), to) - node_term(x, g.parent(x), from);
    return delta;
  }

  // Fills every family score (O(d^2 n)); optional, the cache fills lazily otherwise.
  void warm_all() const {
    const auto d = static_cast<Feature>(data_->d());
    for (Feature j = 0; j < d; ++j) {
      for (int s = 0; s < 2; ++s) {
        const Group g = static_cast<Group>(s);
        family(j, kNoParent, g);
        for (Feature p = 0; p < d; ++p)
          if (p != j) family(j, p, g);
      }
    }
  }

 private:
  const Dataset* data_;
  Hyperparams hp_;
  FamilyScoreCache* cache_;
  double noise_edge_penalty_ = 0.0;
  double signal_edge_penalty_ = 0.0;
  double signal_node_penalty_ = 0.0;
  mutable double class_term_ = std::numeric_limits<double>::quiet_NaN();
};

inline double graph_log_score(const Graph& g, const Dataset& data, const Hyperparams& hp, FamilyScoreCache& cache) {
  return Scorer(data, hp, cache).graph_score(g);
}

// Recounts every family from the data; no cache involved.
inline double graph_log_score_uncached(const Graph& g, const Dataset& data, const Hyperparams& hp) {
  double s = log_prior(g.structure_counts(), data.d(), hp) + class_log_marginal(data, hp);
  for (Feature j = 0; j < g.size(); ++j) s += family_log_score(count_family(data, j, g.parent_set(j)), hp);
  return s;
}

// Proposed outcome of a Reassign Subtree step for a chosen node.
struct ReassignCandidate {
  std::optional<Feature> new_parent;
  Group target_group = Group::noise;

  friend bool operator==(const ReassignCandidate&, const ReassignCandidate&) = default;
};

// Score change of reattaching the subtree at j as described by `candidate`.
// Only j's family, the subtree's class-flag families and the prior terms are
// touched.
inline double delta_score_reassign(const Graph& g, const Scorer& scorer, Feature j, const ReassignCandidate& candidate) {
  if (candidate.new_parent && g.is_descendant(*candidate.new_parent, j)) {
    throw CycleError("delta_score_reassign: candidate parent is inside the subtree");
  }
  const auto subtree = g.descendants(j);
  const Group cur = g.group(j);
  const Group next = candidate.new_parent ? g.group(*candidate.new_parent) : candidate.target_group;
  const Feature np = candidate.new_parent.value_or(kNoParent);
  if (np == g.parent(j) && next == cur) return 0.0;
  double delta = scorer.node_term(j, np, next) - scorer.node_term(j, g.parent(j), cur);
  if (next != cur) {
    for (auto x : subtree) {
      if (x == j) continue;
      delta += scorer.node_term(x, g.parent(x), next) - scorer.node_term(x, g.parent(x), cur);
    }
  }
  return delta;
}

inline double delta_score_reassign(const Graph& g, const Dataset& data, const Hyperparams& hp, FamilyScoreCache& cache,
                                   Feature j, const ReassignCandidate& candidate) {
  return delta_score_reassign(g, Scorer(data, hp, cache), j, candidate);
}

// Per-family breakdown for debugging dumps.
inline nlohmann::json score_breakdown_json(const Graph& g, const Scorer& scorer) {
  nlohmann::json families = nlohmann::json::array();
  for (Feature j = 0; j < g.size(); ++j) {
    nlohmann::json f{{"feature", j},
                     {"name", scorer.data().feature_names()[j]},
                     {"group", group_index(g.group(j))},
                     {"family_log_score", scorer.family(j, g.parent(j), g.group(j))},
                     {"prior_term", scorer.prior_term(g.parent(j), g.group(j))}};
    f["parent"] = g.is_root(j) ? nlohmann::json(nullptr) : nlohmann::json(g.parent(j));
    families.push_back(std::move(f));
  }
  return {{"class_log_marginal", scorer.class_term()},
          {"log_prior", log_prior(g.structure_counts(), g.size(), scorer.hyperparams())},
          {"total", scorer.graph_score(g)},
          {"families", std::move(families)}};
}

}  // namespace sbfc
