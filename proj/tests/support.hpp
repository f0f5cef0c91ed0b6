#pragma once

#include <vector>

#include "sbfc/graph.hpp"
#include "sbfc/random.hpp"

namespace sbfc::testing {

// Random valid partitioned forest built from a random edit sequence.
inline Graph random_graph(std::size_t d, Rng& rng, int steps = 0) {
  Graph g = empty_graph(d);
  if (steps == 0) steps = static_cast<int>(3 * d);
  for (int s = 0; s < steps; ++s) {
    const auto j = static_cast<Feature>(rng.below(d));
    std::vector<Feature> outside;
    for (Feature p = 0; p < d; ++p)
      if (!g.is_descendant(p, j)) outside.push_back(p);
    const std::size_t pick = rng.below(outside.size() + 2);
    if (pick < outside.size())
      g.reattach_subtree(j, outside[pick], Group::noise);
    else
      g.reattach_subtree(j, std::nullopt, pick == outside.size() ? Group::noise : Group::signal);
    if (rng.below(4) == 0) g.switch_tree_group(static_cast<TreeId>(rng.below(g.tree_count())));
  }
  return g;
}

// Non-descendant parents of j plus two null options, as (parent, group) pairs.
inline std::vector<std::pair<std::optional<Feature>, Group>> all_candidates(const Graph& g, Feature j) {
  std::vector<std::pair<std::optional<Feature>, Group>> out;
  for (Feature p = 0; p < g.size(); ++p)
    if (!g.is_descendant(p, j)) out.emplace_back(p, g.group(p));
  out.emplace_back(std::nullopt, Group::noise);
  out.emplace_back(std::nullopt, Group::signal);
  return out;
}

}  // namespace sbfc::testing
