#include "percolab/conntree.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "percolab/pivotals.hpp"

namespace percolab::conntree {

std::vector<int> ConnTree::children(int v) const {
  std::vector<int> out;
  for (const auto& [c, p] : parent)
    if (p == v) out.push_back(c);
  return out;
}

std::string to_string(Degeneracy d) {
  return d == Degeneracy::marked_not_leaf ? "marked-not-leaf" : "indegree-ge-3";
}

std::vector<int> pivotal_chain(const Configuration& config, int xi, int x0) {
  std::vector<int> chain{xi};
  for (const auto& e : pivotals::open_pivotals(config, xi, x0).edges)
    if (e.tail != chain.back()) chain.push_back(e.tail);
  if (chain.back() != x0) chain.push_back(x0);
  return chain;
}

ConnTree build_connectivity_tree(const Configuration& config, const std::vector<int>& marked) {
  if (marked.size() < 2) throw DomainError("connectivity tree needs at least two marked vertices");
  std::set<int> distinct(marked.begin(), marked.end());
  if (distinct.size() != marked.size()) throw DomainError("marked vertices must be distinct");
  const int x0 = marked[0];
  for (std::size_t i = 1; i < marked.size(); ++i)
    if (!lattice::connected(config, marked[i], x0))
      throw DomainError("marked vertices are not all connected: " +
                        lattice::to_string(config.graph().point(marked[i])));

  const std::size_t k = marked.size() - 1;
  std::vector<std::vector<int>> chain(k + 1);
  std::vector<std::set<int>> tails(k + 1);
  for (std::size_t i = 1; i <= k; ++i) {
    for (const auto& e : pivotals::open_pivotals(config, marked[i], x0).edges) tails[i].insert(e.tail);
    chain[i] = pivotal_chain(config, marked[i], x0);
  }

  ConnTree t;
  t.marked = marked;
  t.root = x0;
  std::set<int> vs(marked.begin(), marked.end());
  for (std::size_t i = 1; i <= k; ++i)
    for (std::size_t j = i + 1; j <= k; ++j) {
      int m = x0;
      for (int v : chain[i])
        if (tails[i].count(v) && tails[j].count(v)) {
          m = v;
          break;
        }
      vs.insert(m);
    }
  t.vertices.assign(vs.begin(), vs.end());

  for (int v : t.vertices) {
    if (v == x0) continue;
    bool placed = false;
    for (std::size_t i = 1; i <= k && !placed; ++i) {
      auto it = std::find(chain[i].begin(), chain[i].end(), v);
      if (it == chain[i].end()) continue;
      for (++it; it != chain[i].end(); ++it)
        if (vs.count(*it)) {
          t.parent[v] = *it;
          placed = true;
          break;
        }
    }
    if (!placed) throw std::logic_error("connectivity tree vertex outside every chain");
  }
  return t;
}

TreeClassification classify_tree(const ConnTree& tree) {
  std::map<int, int> indeg;
  for (const auto& [c, p] : tree.parent) ++indeg[p];
  std::set<int> marked(tree.marked.begin(), tree.marked.end());
  TreeClassification out;
  for (int x : tree.marked) {
    int d = indeg.count(x) ? indeg[x] : 0;
    bool leaf = (x == tree.root) ? d == 1 : d == 0;
    if (!leaf) {
      out.reason = Degeneracy::marked_not_leaf;
      return out;
    }
  }
  for (const auto& [v, d] : indeg)
    if (d >= 3) {
      out.reason = Degeneracy::indegree_ge_3;
      return out;
    }
  const int leaves = static_cast<int>(tree.marked.size());
  std::map<int, int> id;
  for (int i = 0; i < leaves; ++i) id[tree.marked[static_cast<std::size_t>(i)]] = i;
  int next = leaves;
  for (int v : tree.vertices)
    if (!marked.count(v)) {
      if (indeg[v] != 2) throw std::logic_error("unmarked tree vertex with in-degree below 2");
      id[v] = next++;
    }
  if (next != 2 * leaves - 2) throw std::logic_error("binary tree with wrong vertex count");
  std::vector<int> parent(static_cast<std::size_t>(next), -1);
  for (const auto& [c, p] : tree.parent) parent[static_cast<std::size_t>(id[c])] = id[p];
  out.binary = true;
  out.tree = trees::AbstractTree(leaves, parent);
  return out;
}

bool tree_invariants_hold(const ConnTree& tree) {
  if (tree.parent.size() + 1 != tree.vertices.size()) return false;
  std::set<int> vs(tree.vertices.begin(), tree.vertices.end());
  std::set<int> marked(tree.marked.begin(), tree.marked.end());
  if (!vs.count(tree.root) || tree.parent.count(tree.root)) return false;
  for (int v : tree.vertices) {
    if (v == tree.root) continue;
    auto it = tree.parent.find(v);
    if (it == tree.parent.end() || !vs.count(it->second)) return false;
    std::size_t steps = 0;
    for (int x = v; x != tree.root; x = tree.parent.at(x))
      if (++steps > vs.size()) return false;
  }
  std::map<int, int> kids;
  for (const auto& [c, p] : tree.parent) ++kids[p];
  for (int v : tree.vertices)
    if (v != tree.root && !kids.count(v) && !marked.count(v)) return false;
  return true;
}

}  // namespace percolab::conntree
