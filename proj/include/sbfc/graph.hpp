#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sbfc/error.hpp"

namespace sbfc {

using Feature = std::uint32_t;
using TreeId = std::uint32_t;

inline constexpr Feature kNoParent = std::numeric_limits<Feature>::max();

enum class Group : std::uint8_t { noise = 0, signal = 1 };

inline Group opposite(Group g) { return g == Group::noise ? Group::signal : Group::noise; }
inline int group_index(Group g) { return static_cast<int>(g); }

// Parent set of one feature's family: optional feature parent, plus the class
// label for signal features.
struct ParentSet {
  std::optional<Feature> feature_parent;
  bool includes_class = false;

  friend bool operator==(const ParentSet&, const ParentSet&) = default;
};

// E0, E1: feature-feature edges within each group; D1: signal node count.
struct StructureCounts {
  std::size_t noise_edges = 0;
  std::size_t signal_edges = 0;
  std::size_t signal_nodes = 0;

  friend bool operator==(const StructureCounts&, const StructureCounts&) = default;
};

// A group-partitioned forest over d features, stored as child -> parent
// pointers. Tree ids are kept dense in [0, tree_count()) and are updated
// incrementally by every edit; all nodes of a tree share one group.
class Graph {
 public:
  Graph() = default;

  // Every feature a singleton root in the noise group.
  explicit Graph(std::size_t d)
      : parent_(d, kNoParent), group_(d, Group::noise), tree_(d), roots_(d), children_(d) {
    for (Feature j = 0; j < d; ++j) {
      tree_[j] = j;
      roots_[j] = j;
    }
  }

  // Builds from explicit parent pointers and groups; throws CycleError or
  // std::invalid_argument if the result is not a valid partitioned forest.
  static Graph from_parents(std::vector<Feature> parents, std::vector<Group> groups) {
    if (parents.size() != groups.size()) throw std::invalid_argument("graph: parents/groups size mismatch");
    const std::size_t d = parents.size();
    Graph g;
    g.parent_ = std::move(parents);
    g.group_ = std::move(groups);
    g.children_.assign(d, {});
    for (Feature j = 0; j < d; ++j) {
      const Feature p = g.parent_[j];
      if (p == kNoParent) continue;
      if (p >= d || p == j) throw std::invalid_argument("graph: bad parent index");
      g.children_[p].push_back(j);
    }
    g.rebuild_trees();
    g.check_invariants();
    return g;
  }

  std::size_t size() const { return parent_.size(); }
  Feature parent(Feature j) const { return parent_[j]; }
  bool is_root(Feature j) const { return parent_[j] == kNoParent; }
  Group group(Feature j) const { return group_[j]; }
  TreeId tree_of(Feature j) const { return tree_[j]; }
  std::size_t tree_count() const { return roots_.size(); }
  Feature root_of_tree(TreeId t) const { return roots_[t]; }
  const std::vector<Feature>& children(Feature j) const { return children_[j]; }
  const std::vector<Feature>& parents() const { return parent_; }
  const std::vector<Group>& groups() const { return group_; }
  const std::vector<TreeId>& tree_ids() const { return tree_; }

  ParentSet parent_set(Feature j) const {
    ParentSet ps;
    if (!is_root(j)) ps.feature_parent = parent_[j];
    ps.includes_class = group_[j] == Group::signal;
    return ps;
  }

  // Subtree rooted at j, including j, in breadth-first order.
  std::vector<Feature> descendants(Feature j) const {
    std::vector<Feature> out{j};
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto& ch = children_[out[i]];
      out.insert(out.end(), ch.begin(), ch.end());
    }
    return out;
  }

  std::vector<Feature> tree_members(TreeId t) const { return descendants(roots_[t]); }

  bool is_descendant(Feature candidate, Feature of) const {
    for (Feature x = candidate; x != kNoParent; x = parent_[x]) {
      if (x == of) return true;
    }
    return false;
  }

  // Detaches the subtree at j and hangs it under new_parent (or makes j a
  // root). The subtree takes the group of its new parent, or target_group
  // when it becomes a root.
  void reattach_subtree(Feature j, std::optional<Feature> new_parent, Group target_group) {
    if (new_parent && is_descendant(*new_parent, j)) {
      throw CycleError("reattach_subtree: node " + std::to_string(*new_parent) + " lies in the subtree of " +
                       std::to_string(j));
    }
    const Feature old_parent = parent_[j];
    const Feature np = new_parent.value_or(kNoParent);
    const Group new_group = new_parent ? group_[*new_parent] : target_group;
    if (np == old_parent && new_group == group_[j]) return;

    const auto subtree = descendants(j);
    // Detach: the subtree becomes its own tree.
    if (old_parent != kNoParent) {
      auto& siblings = children_[old_parent];
      siblings.erase(std::find(siblings.begin(), siblings.end(), j));
      parent_[j] = kNoParent;
      const auto id = static_cast<TreeId>(roots_.size());
      roots_.push_back(j);
      for (auto x : subtree) tree_[x] = id;
    }
    // Attach.
    if (np != kNoParent) {
      const TreeId freed = tree_[j];
      parent_[j] = np;
      children_[np].push_back(j);
      for (auto x : subtree) tree_[x] = tree_[np];
      release_tree_id(freed);
    }
    for (auto x : subtree) group_[x] = new_group;
  }

  void switch_tree_group(TreeId t) {
    const Group g = opposite(group_[roots_[t]]);
    for (auto x : tree_members(t)) group_[x] = g;
  }

  // Re-roots the tree containing new_root by reversing the path to the old root.
  void pivot_tree(Feature new_root) {
    if (is_root(new_root)) return;
    Feature prev = kNoParent;
    Feature cur = new_root;
    while (cur != kNoParent) {
      const Feature next = parent_[cur];
      if (next != kNoParent) {
        auto& sib = children_[next];
        sib.erase(std::find(sib.begin(), sib.end(), cur));
        children_[cur].push_back(next);
      }
      parent_[cur] = prev;
      prev = cur;
      cur = next;
    }
    roots_[tree_[new_root]] = new_root;
  }

  StructureCounts structure_counts() const {
    StructureCounts c;
    for (std::size_t j = 0; j < size(); ++j) {
      const bool signal = group_[j] == Group::signal;
      if (signal) ++c.signal_nodes;
      if (parent_[j] != kNoParent) ++(signal ? c.signal_edges : c.noise_edges);
    }
    return c;
  }

  // Full validation: acyclic parents, one group per tree, tree ids equal to
  // connected components, consistent child lists and roots.
  void check_invariants() const {
    const std::size_t d = size();
    if (group_.size() != d || tree_.size() != d || children_.size() != d)
      throw std::logic_error("graph: inconsistent array sizes");
    for (Feature j = 0; j < d; ++j) {
      std::size_t steps = 0;
      for (Feature x = parent_[j]; x != kNoParent; x = parent_[x]) {
        if (x >= d) throw std::logic_error("graph: parent index out of range");
        if (++steps > d) throw CycleError("graph: parent pointers contain a cycle");
      }
    }
    std::vector<Feature> component(d);
    for (Feature j = 0; j < d; ++j) {
      Feature r = j;
      while (parent_[r] != kNoParent) r = parent_[r];
      component[j] = r;
      if (group_[j] != group_[r]) throw std::logic_error("graph: tree mixes groups");
    }
    std::vector<TreeId> tree_of_root(d, std::numeric_limits<TreeId>::max());
    std::size_t n_roots = 0;
    for (Feature j = 0; j < d; ++j) {
      if (parent_[j] != kNoParent) continue;
      ++n_roots;
      const TreeId t = tree_[j];
      if (t >= roots_.size() || roots_[t] != j) throw std::logic_error("graph: root table mismatch");
      tree_of_root[j] = t;
    }
    if (n_roots != roots_.size()) throw std::logic_error("graph: tree count mismatch");
    for (Feature j = 0; j < d; ++j) {
      if (tree_[j] != tree_of_root[component[j]]) throw std::logic_error("graph: tree id is not the component");
    }
    std::size_t n_children = 0;
    for (Feature p = 0; p < d; ++p) {
      for (auto c : children_[p]) {
        if (parent_[c] != p) throw std::logic_error("graph: child list mismatch");
        ++n_children;
      }
    }
    const auto edges = static_cast<std::size_t>(std::count_if(parent_.begin(), parent_.end(),
                                                              [](Feature p) { return p != kNoParent; }));
    if (n_children != edges) throw std::logic_error("graph: child list count mismatch");
  }

  // Structure equality: same parents and groups (tree labels may differ).
  friend bool operator==(const Graph& a, const Graph& b) {
    return a.parent_ == b.parent_ && a.group_ == b.group_;
  }

 private:
  // Moves the highest tree id into the freed slot to keep ids dense.
  void release_tree_id(TreeId freed) {
    const auto last = static_cast<TreeId>(roots_.size() - 1);
    if (freed != last) {
      const Feature moved_root = roots_[last];
      roots_[freed] = moved_root;
      for (auto x : descendants(moved_root)) tree_[x] = freed;
    }
    roots_.pop_back();
  }

  void rebuild_trees() {
    const std::size_t d = size();
    tree_.assign(d, 0);
    roots_.clear();
    for (Feature j = 0; j < d; ++j) {
      if (parent_[j] != kNoParent) continue;
      const auto id = static_cast<TreeId>(roots_.size());
      roots_.push_back(j);
      // Bounded walk so a cyclic input is reported by check_invariants, not looped on.
      std::vector<Feature> stack{j};
      std::size_t visited = 0;
      while (!stack.empty() && visited <= d) {
        const Feature x = stack.back();
        stack.pop_back();
        ++visited;
        tree_[x] = id;
        stack.insert(stack.end(), children_[x].begin(), children_[x].end());
      }
    }
  }

  std::vector<Feature> parent_;
  std::vector<Group> group_;
  std::vector<TreeId> tree_;
  std::vector<Feature> roots_;
  std::vector<std::vector<Feature>> children_;
};

inline Graph empty_graph(std::size_t d) {
  if (d < 1) throw std::invalid_argument("empty_graph: need at least one feature");
  return Graph(d);
}

inline ParentSet parent_set(const Graph& g, Feature j) { return g.parent_set(j); }
inline std::vector<Feature> descendants(const Graph& g, Feature j) { return g.descendants(j); }
inline StructureCounts structure_counts(const Graph& g) { return g.structure_counts(); }

inline Graph reattach_subtree(Graph g, Feature j, std::optional<Feature> new_parent, Group target_group) {
  g.reattach_subtree(j, new_parent, target_group);
  return g;
}

inline Graph switch_tree_group(Graph g, TreeId tree) {
  g.switch_tree_group(tree);
  return g;
}

inline Graph pivot_tree(Graph g, Feature new_root) {
  g.pivot_tree(new_root);
  return g;
}

// Undirected edge set as sorted (min, max) pairs.
inline std::vector<std::pair<Feature, Feature>> undirected_edges(const Graph& g) {
  std::vector<std::pair<Feature, Feature>> edges;
  for (Feature j = 0; j < g.size(); ++j) {
    if (!g.is_root(j)) edges.emplace_back(std::min(j, g.parent(j)), std::max(j, g.parent(j)));
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

// {"groups": [...], "parents": [..., null for roots]}
inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json parents = nlohmann::json::array();
  nlohmann::json groups = nlohmann::json::array();
  for (Feature j = 0; j < g.size(); ++j) {
    groups.push_back(group_index(g.group(j)));
    if (g.is_root(j))
      parents.push_back(nullptr);
    else
      parents.push_back(g.parent(j));
  }
  return {{"groups", std::move(groups)}, {"parents", std::move(parents)}};
}

inline Graph graph_from_json(const nlohmann::json& j) {
  const auto& jp = j.at("parents");
  const auto& jg = j.at("groups");
  std::vector<Feature> parents;
  std::vector<Group> groups;
  for (const auto& p : jp) parents.push_back(p.is_null() ? kNoParent : p.get<Feature>());
  for (const auto& g : jg) {
    const int v = g.get<int>();
    if (v != 0 && v != 1) throw std::invalid_argument("graph json: group must be 0 or 1");
    groups.push_back(static_cast<Group>(v));
  }
  return Graph::from_parents(std::move(parents), std::move(groups));
}

}  // namespace sbfc
