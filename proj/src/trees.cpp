#include "percolab/trees.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

#include "percolab/common.hpp"

namespace percolab::trees {

AbstractTree::AbstractTree(int k, const std::vector<int>& parent) : k_(k) {
  if (k < 2) throw DomainError("tree needs at least 2 leaves");
  const int n = 2 * k - 2;
  if (static_cast<int>(parent.size()) != n)
    throw DomainError("tree with " + std::to_string(k) + " leaves needs " + std::to_string(n) + " nodes");
  if (parent[0] != -1) throw DomainError("leaf 0 must be the root");
  std::vector<std::vector<int>> kids(static_cast<std::size_t>(n));
  for (int v = 1; v < n; ++v) {
    int p = parent[static_cast<std::size_t>(v)];
    if (p < 0 || p >= n || p == v) throw DomainError("bad parent for node " + std::to_string(v));
    if (p > 0 && p < k) throw DomainError("leaf " + std::to_string(p) + " has a child");
    kids[static_cast<std::size_t>(p)].push_back(v);
  }
  if (kids[0].size() != 1) throw DomainError("leaf 0 must have exactly one neighbour");
  for (int v = k; v < n; ++v)
    if (kids[static_cast<std::size_t>(v)].size() != 2)
      throw DomainError("internal vertex without in-degree 2");
  for (int v = 1; v < n; ++v) {
    int steps = 0;
    for (int x = v; x != 0; x = parent[static_cast<std::size_t>(x)])
      if (++steps > n) throw DomainError("parent map has a cycle");
  }

  // Canonical renumbering of internal vertices (preorder, children by min label).
  std::vector<int> minl(static_cast<std::size_t>(n), 0);
  std::function<int(int)> fill_min = [&](int v) {
    if (v < k) return minl[static_cast<std::size_t>(v)] = v;
    int m = k;
    for (int c : kids[static_cast<std::size_t>(v)]) m = std::min(m, fill_min(c));
    return minl[static_cast<std::size_t>(v)] = m;
  };
  fill_min(kids[0][0]);
  std::vector<int> rename(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < k; ++v) rename[static_cast<std::size_t>(v)] = v;
  int next = k;
  std::function<void(int)> visit = [&](int v) {
    if (v < k) return;
    rename[static_cast<std::size_t>(v)] = next++;
    auto c = kids[static_cast<std::size_t>(v)];
    std::sort(c.begin(), c.end(), [&](int a, int b) { return minl[static_cast<std::size_t>(a)] < minl[static_cast<std::size_t>(b)]; });
    for (int x : c) visit(x);
  };
  visit(kids[0][0]);

  parent_.assign(static_cast<std::size_t>(n), -1);
  children_.assign(static_cast<std::size_t>(n), {});
  min_label_.assign(static_cast<std::size_t>(n), 0);
  for (int v = 1; v < n; ++v)
    parent_[static_cast<std::size_t>(rename[static_cast<std::size_t>(v)])] = rename[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
  for (int v = 0; v < n; ++v) min_label_[static_cast<std::size_t>(rename[static_cast<std::size_t>(v)])] = minl[static_cast<std::size_t>(v)];
  min_label_[0] = 0;
  for (int v = 1; v < n; ++v) children_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(v)])].push_back(v);
  for (auto& c : children_)
    std::sort(c.begin(), c.end(), [&](int a, int b) { return min_label_[static_cast<std::size_t>(a)] < min_label_[static_cast<std::size_t>(b)]; });
  canonical_ = subtree_text(children_[0][0]) + "0;";
}

std::string AbstractTree::subtree_text(int node) const {
  if (is_leaf(node)) return std::to_string(node);
  const auto& c = children(node);
  return "(" + subtree_text(c[0]) + "," + subtree_text(c[1]) + ")";
}

AbstractTree AbstractTree::from_newick(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  std::size_t pos = 0;
  std::vector<std::pair<int, int>> edges;  // (child, parent) with provisional ids
  std::vector<int> leaf_labels;
  int next_internal = 0;
  auto fail = [&](const std::string& why) { return DomainError("newick: " + why + " in '" + text + "'"); };
  // Provisional ids: leaves encoded as label, internal as -(1+n).
  std::function<int()> parse = [&]() -> int {
    if (pos >= s.size()) throw fail("unexpected end");
    if (s[pos] == '(') {
      ++pos;
      int a = parse();
      if (pos >= s.size() || s[pos] != ',') throw fail("expected ','");
      ++pos;
      int b = parse();
      if (pos >= s.size() || s[pos] != ')') throw fail("expected ')'");
      ++pos;
      int me = -(1 + next_internal++);
      edges.emplace_back(a, me);
      edges.emplace_back(b, me);
      return me;
    }
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos) throw fail("expected label");
    int label = std::stoi(s.substr(start, pos - start));
    leaf_labels.push_back(label);
    return label;
  };
  int top = parse();
  if (s.substr(pos) != "0;") throw fail("expected trailing '0;'");
  int k = static_cast<int>(leaf_labels.size()) + 1;
  std::set<int> labels(leaf_labels.begin(), leaf_labels.end());
  labels.insert(0);
  if (static_cast<int>(labels.size()) != k || *labels.rbegin() != k - 1) throw fail("labels must be 0..k-1 without repeats");
  auto id = [&](int x) { return x >= 0 ? x : k + (-x - 1); };
  std::vector<int> parent(static_cast<std::size_t>(2 * k - 2), -1);
  if (next_internal != k - 2) throw fail("not binary");
  for (auto [c, p] : edges) parent[static_cast<std::size_t>(id(c))] = id(p);
  parent[static_cast<std::size_t>(id(top))] = 0;
  return AbstractTree(k, parent);
}

long long tree_count(int k) {
  if (k < 3) throw DomainError("tree count needs k >= 3");
  long long r = 1;
  for (int j = 2 * k - 5; j > 1; j -= 2) r *= j;
  return r;
}

std::vector<AbstractTree> enumerate_trees(int k) {
  if (k < 3) throw DomainError("enumerate_trees needs k >= 3");
  // Stepwise insertion: leaf l subdivides any of the current edges.
  std::vector<std::vector<int>> current{{-1, 3, 3, 0}};  // k=3 star, internal id 3
  for (int l = 3; l < k; ++l) {
    std::vector<std::vector<int>> grown;
    for (const auto& par : current) {
      const int n_old = static_cast<int>(par.size());  // 2l-2 nodes
      for (int child = 1; child < n_old; ++child) {
        // Ids: leaves 0..l, old internal shifted by +1, new internal at the end.
        std::vector<int> np(static_cast<std::size_t>(n_old + 2), -1);
        auto shift = [&](int x) { return x >= l ? x + 1 : x; };
        for (int v = 1; v < n_old; ++v) np[static_cast<std::size_t>(shift(v))] = shift(par[static_cast<std::size_t>(v)]);
        int w = n_old + 1;
        np[static_cast<std::size_t>(w)] = np[static_cast<std::size_t>(shift(child))];
        np[static_cast<std::size_t>(shift(child))] = w;
        np[static_cast<std::size_t>(l)] = w;
        grown.push_back(std::move(np));
      }
    }
    current = std::move(grown);
  }
  std::set<AbstractTree> unique;
  for (const auto& par : current) unique.insert(AbstractTree(k, par));
  return {unique.begin(), unique.end()};
}

ReductionSite select_IJV(const AbstractTree& t) {
  if (t.leaves() < 3) throw DomainError("select_IJV needs k >= 3");
  std::optional<ReductionSite> best;
  for (int v = t.leaves(); v < t.node_count(); ++v) {
    const auto& c = t.children(v);
    if (!t.is_leaf(c[0]) || !t.is_leaf(c[1])) continue;
    int hi = std::max(c[0], c[1]), lo = std::min(c[0], c[1]);
    if (!best || hi > best->I || (hi == best->I && lo > best->J)) best = ReductionSite{hi, lo, v};
  }
  if (!best) throw std::logic_error("binary tree without an eligible cherry");
  return *best;
}

PhiResult phi_reduce(const AbstractTree& t) {
  const int k = t.leaves();
  if (k < 4) throw DomainError("phi_reduce needs k >= 4");
  ReductionSite site = select_IJV(t);
  std::vector<std::optional<int>> map(static_cast<std::size_t>(k));
  int next = 0;
  for (int l = 0; l < k; ++l)
    if (l != site.I && l != site.J) map[static_cast<std::size_t>(l)] = next++;
  const int v_label = k - 2;
  // New ids: leaves 0..k-2, internal k-1.. for surviving internal vertices.
  std::vector<int> rename(static_cast<std::size_t>(t.node_count()), -1);
  for (int l = 0; l < k; ++l)
    if (map[static_cast<std::size_t>(l)]) rename[static_cast<std::size_t>(l)] = *map[static_cast<std::size_t>(l)];
  rename[static_cast<std::size_t>(site.v)] = v_label;
  int next_internal = k - 1;
  for (int v = k; v < t.node_count(); ++v)
    if (v != site.v) rename[static_cast<std::size_t>(v)] = next_internal++;
  std::vector<int> parent(static_cast<std::size_t>(2 * (k - 1) - 2), -1);
  for (int v = 1; v < t.node_count(); ++v) {
    if (v == site.I || v == site.J) continue;
    parent[static_cast<std::size_t>(rename[static_cast<std::size_t>(v)])] = rename[static_cast<std::size_t>(t.parent(v))];
  }
  return PhiResult{AbstractTree(k - 1, parent), std::move(map), v_label};
}

}  // namespace percolab::trees
