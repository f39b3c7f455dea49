#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "percolab/lattice.hpp"

namespace percolab::pivotals {

using lattice::Configuration;
using lattice::DirectedEdge;

class NotConnectedError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Open pivotal edges for source <-> targets, ordered from the source and
// oriented so every open path from the source traverses tail -> head.
struct PivotalList {
  int source = -1;
  std::vector<int> targets;
  std::vector<DirectedEdge> edges;
};

struct CommonPivotals {
  std::optional<DirectedEdge> first;  // closest to the source
  std::optional<DirectedEdge> last;   // furthest from the source
};

// Bridge flags of the open subgraph, indexed by edge id.
std::vector<char> open_bridges(const Configuration& config);

// Edge ids of the canonical BFS open path u -> v (deterministic in incidence order).
std::vector<int> bfs_path_edges(const Configuration& config, int u, int v);

// Fast path: bridges of the open subgraph that lie on the canonical BFS path.
PivotalList open_pivotals(const Configuration& config, int u, int v);
// Oracle: close each open edge and test disconnection; order by closure tests.
PivotalList open_pivotals_definitional(const Configuration& config, int u, int v);

CommonPivotals common_pivotal_extremes(const Configuration& config, int u,
                                       const std::vector<int>& targets);
CommonPivotals common_pivotal_extremes_definitional(const Configuration& config, int u,
                                                    const std::vector<int>& targets);

// True when the edges of `path` (a u -> v edge sequence) traverse the pivotal
// list in exactly its order and orientation.
bool order_consistent(const Configuration& config, const PivotalList& list,
                      const std::vector<int>& path_edges);

// Up to `max_paths` distinct simple open u -> v paths found by randomized DFS.
std::vector<std::vector<int>> random_open_paths(const Configuration& config, int u, int v,
                                                int max_paths, std::uint64_t seed);

}  // namespace percolab::pivotals
