#include "percolab/pivotals.hpp"

#include <algorithm>
#include <set>

namespace percolab::pivotals {

using lattice::Graph;

namespace {

void require_connected(const Configuration& config, int u, int v) {
  if (!lattice::connected(config, u, v))
    throw NotConnectedError("no open connection between " + lattice::to_string(config.graph().point(u)) +
                            " and " + lattice::to_string(config.graph().point(v)));
}

}  // namespace

std::vector<char> open_bridges(const Configuration& config) {
  const Graph& g = config.graph();
  const int n = g.num_vertices();
  std::vector<char> bridge(static_cast<std::size_t>(g.num_edges()), 0);
  std::vector<int> disc(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  struct Frame {
    int v;
    int via;  // edge used to enter v
    std::size_t next;
  };
  int timer = 0;
  std::vector<Frame> stack;
  for (int root = 0; root < n; ++root) {
    if (disc[static_cast<std::size_t>(root)] >= 0) continue;
    disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
    stack.push_back({root, -1, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      auto inc = g.incident(f.v);
      if (f.next < inc.size()) {
        const auto& i = inc[f.next++];
        if (!config.is_open(i.edge) || i.edge == f.via) continue;
        int w = i.neighbor;
        if (disc[static_cast<std::size_t>(w)] < 0) {
          disc[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = timer++;
          stack.push_back({w, i.edge, 0});
        } else {
          low[static_cast<std::size_t>(f.v)] = std::min(low[static_cast<std::size_t>(f.v)], disc[static_cast<std::size_t>(w)]);
        }
      } else {
        Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          int p = stack.back().v;
          low[static_cast<std::size_t>(p)] = std::min(low[static_cast<std::size_t>(p)], low[static_cast<std::size_t>(done.v)]);
          if (low[static_cast<std::size_t>(done.v)] > disc[static_cast<std::size_t>(p)])
            bridge[static_cast<std::size_t>(done.via)] = 1;
        }
      }
    }
  }
  return bridge;
}

std::vector<int> bfs_path_edges(const Configuration& config, int u, int v) {
  const Graph& g = config.graph();
  std::vector<int> via(static_cast<std::size_t>(g.num_vertices()), -2);
  via[static_cast<std::size_t>(u)] = -1;
  std::vector<int> queue{u};
  for (std::size_t head = 0; head < queue.size() && via[static_cast<std::size_t>(v)] == -2; ++head) {
    int x = queue[head];
    for (const auto& inc : g.incident(x)) {
      if (!config.is_open(inc.edge) || via[static_cast<std::size_t>(inc.neighbor)] != -2) continue;
      via[static_cast<std::size_t>(inc.neighbor)] = inc.edge;
      queue.push_back(inc.neighbor);
    }
  }
  if (via[static_cast<std::size_t>(v)] == -2) require_connected(config, u, v);
  std::vector<int> path;
  for (int x = v; x != u;) {
    int e = via[static_cast<std::size_t>(x)];
    path.push_back(e);
    x = g.other_end(e, x);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

PivotalList pivotals_with_bridges(const Configuration& config, int u, int v, const std::vector<char>& bridge) {
  const Graph& g = config.graph();
  PivotalList out{u, {v}, {}};
  if (u == v) return out;
  int at = u;
  for (int e : bfs_path_edges(config, u, v)) {
    int next = g.other_end(e, at);
    if (bridge[static_cast<std::size_t>(e)]) out.edges.push_back({at, next, e});
    at = next;
  }
  return out;
}

CommonPivotals intersect(const std::vector<PivotalList>& lists) {
  CommonPivotals out;
  if (lists.empty()) return out;
  std::vector<std::set<int>> ids;
  for (const auto& l : lists) {
    std::set<int> s;
    for (const auto& e : l.edges) s.insert(e.edge);
    ids.push_back(std::move(s));
  }
  for (const auto& e : lists.front().edges) {
    bool common = std::all_of(ids.begin(), ids.end(), [&](const std::set<int>& s) { return s.count(e.edge) > 0; });
    if (!common) continue;
    if (!out.first) out.first = e;
    out.last = e;
  }
  return out;
}

}  // namespace

PivotalList open_pivotals(const Configuration& config, int u, int v) {
  require_connected(config, u, v);
  return pivotals_with_bridges(config, u, v, open_bridges(config));
}

PivotalList open_pivotals_definitional(const Configuration& config, int u, int v) {
  require_connected(config, u, v);
  const Graph& g = config.graph();
  PivotalList out{u, {v}, {}};
  std::vector<Configuration> closed;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (!config.is_open(e)) continue;
    Configuration c = config.with_edge(e, false);
    if (lattice::connected(c, u, v)) continue;
    auto [a, b] = g.edge(e);
    // The tail is the endpoint still reachable from u once e is closed.
    DirectedEdge d = lattice::connected(c, u, a) ? DirectedEdge{a, b, e} : DirectedEdge{b, a, e};
    out.edges.push_back(d);
    closed.push_back(std::move(c));
  }
  // e precedes f when closing f leaves both endpoints of e reachable from u.
  std::vector<std::size_t> idx(out.edges.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    const auto& e = out.edges[i];
    return lattice::connected(closed[j], u, e.head);
  });
  std::vector<DirectedEdge> sorted;
  for (auto i : idx) sorted.push_back(out.edges[i]);
  out.edges = std::move(sorted);
  return out;
}

CommonPivotals common_pivotal_extremes(const Configuration& config, int u, const std::vector<int>& targets) {
  for (int t : targets) require_connected(config, u, t);
  auto bridge = open_bridges(config);
  std::vector<PivotalList> lists;
  for (int t : targets) lists.push_back(pivotals_with_bridges(config, u, t, bridge));
  return intersect(lists);
}

CommonPivotals common_pivotal_extremes_definitional(const Configuration& config, int u,
                                                    const std::vector<int>& targets) {
  std::vector<PivotalList> lists;
  for (int t : targets) lists.push_back(open_pivotals_definitional(config, u, t));
  return intersect(lists);
}

bool order_consistent(const Configuration& config, const PivotalList& list, const std::vector<int>& path_edges) {
  const Graph& g = config.graph();
  int at = list.source;
  std::size_t k = 0;
  for (int e : path_edges) {
    int next = g.other_end(e, at);
    if (k < list.edges.size() && list.edges[k].edge == e) {
      if (list.edges[k].tail != at || list.edges[k].head != next) return false;
      ++k;
    } else {
      for (std::size_t j = k; j < list.edges.size(); ++j)
        if (list.edges[j].edge == e) return false;
    }
    at = next;
  }
  return k == list.edges.size();
}

std::vector<std::vector<int>> random_open_paths(const Configuration& config, int u, int v, int max_paths,
                                                std::uint64_t seed) {
  const Graph& g = config.graph();
  std::set<std::vector<int>> found;
  const int attempts = max_paths * 8;
  for (int a = 0; a < attempts && static_cast<int>(found.size()) < max_paths; ++a) {
    CounterRng rng(seed, {0x70617468ULL, static_cast<std::uint64_t>(a)});
    std::vector<char> on(static_cast<std::size_t>(g.num_vertices()), 0);
    std::vector<int> path;
    // Randomized DFS with backtracking; returns the first path reaching v.
    std::function<bool(int)> dfs = [&](int x) {
      if (x == v) return true;
      std::vector<lattice::Incidence> nb(g.incident(x).begin(), g.incident(x).end());
      for (std::size_t i = nb.size(); i > 1; --i) std::swap(nb[i - 1], nb[rng.below(i)]);
      for (const auto& inc : nb) {
        if (!config.is_open(inc.edge) || on[static_cast<std::size_t>(inc.neighbor)]) continue;
        on[static_cast<std::size_t>(inc.neighbor)] = 1;
        path.push_back(inc.edge);
        if (dfs(inc.neighbor)) return true;
        path.pop_back();
      }
      return false;
    };
    on[static_cast<std::size_t>(u)] = 1;
    if (dfs(u)) found.insert(path);
  }
  return {found.begin(), found.end()};
}

}  // namespace percolab::pivotals
