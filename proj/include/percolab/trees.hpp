#pragma once

#include <optional>
#include <string>
#include <vector>

namespace percolab::trees {

// Binary branching tree with k labelled leaves, oriented toward leaf 0.
// Node ids: leaves are 0..k-1 (id = label); internal vertices are k..2k-3,
// numbered in canonical preorder.
class AbstractTree {
 public:
  // parent[node] for every node, -1 for leaf 0. Throws DomainError when the
  // invariants fail. The result is renumbered canonically.
  AbstractTree(int k, const std::vector<int>& parent);

  // Parses the canonical text form, e.g. "((1,2),3)0;".
  static AbstractTree from_newick(const std::string& text);

  int leaves() const { return k_; }
  int internal_count() const { return k_ - 2; }
  int edge_count() const { return 2 * k_ - 3; }
  int node_count() const { return 2 * k_ - 2; }
  bool is_leaf(int node) const { return node < k_; }
  int parent(int node) const { return parent_.at(static_cast<std::size_t>(node)); }
  const std::vector<int>& children(int node) const { return children_.at(static_cast<std::size_t>(node)); }
  // Smallest leaf label in the subtree below node.
  int min_label(int node) const { return min_label_.at(static_cast<std::size_t>(node)); }

  // Canonical text form: the subtree hanging below leaf 0, children ordered by
  // smallest leaf label, followed by "0;".
  const std::string& canonical() const { return canonical_; }
  std::string newick() const { return canonical_; }

  bool operator==(const AbstractTree& o) const { return canonical_ == o.canonical_; }
  bool operator<(const AbstractTree& o) const { return canonical_ < o.canonical_; }

 private:
  std::string subtree_text(int node) const;

  int k_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<int> min_label_;
  std::string canonical_;
};

// All elements of the labelled tree set with k leaves, sorted by canonical form.
std::vector<AbstractTree> enumerate_trees(int k);

// (2k-5)!!
long long tree_count(int k);

struct ReductionSite {
  int I;
  int J;
  int v;  // internal node id
};

// Cherry whose leaves are I, J (both nonzero) with I the largest such label.
ReductionSite select_IJV(const AbstractTree& t);

struct PhiResult {
  AbstractTree reduced;
  std::vector<std::optional<int>> label_map;  // old label -> new label; I, J absent
  int v_label;                                // label given to v in the reduced tree
};

// Deletes leaves I and J; v becomes leaf k-2; other labels keep their order.
PhiResult phi_reduce(const AbstractTree& t);

}  // namespace percolab::trees
