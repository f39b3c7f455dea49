#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "percolab/lattice.hpp"
#include "percolab/trees.hpp"

namespace percolab::conntree {

using lattice::Configuration;

// Connectivity tree on graph vertex ids. Edges point from child to parent;
// the root is marked[0].
struct ConnTree {
  std::vector<int> marked;
  std::vector<int> vertices;   // sorted
  std::map<int, int> parent;   // absent for the root
  int root = -1;

  std::vector<int> children(int v) const;
};

enum class Degeneracy { marked_not_leaf, indegree_ge_3 };

struct TreeClassification {
  bool binary = false;
  std::optional<trees::AbstractTree> tree;
  std::optional<Degeneracy> reason;
};

std::string to_string(Degeneracy d);

// Chain C_i = [x_i, tails of pivotals for x_i <-> x_0 in order from x_i, x_0].
std::vector<int> pivotal_chain(const Configuration& config, int xi, int x0);

ConnTree build_connectivity_tree(const Configuration& config, const std::vector<int>& marked);
TreeClassification classify_tree(const ConnTree& tree);

// Structural checks: edges = vertices - 1, all chains end at the root, leaves
// are marked.
bool tree_invariants_hold(const ConnTree& tree);

}  // namespace percolab::conntree
