#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "percolab/lattice.hpp"
#include "percolab/oracle.hpp"
#include "percolab/trees.hpp"

namespace percolab::battery {

using lattice::DirectedEdge;
using lattice::GraphPtr;
using lattice::Point;

// Small hand-built graphs shared by the verification suites.
struct MarkedGraph {
  std::string name;
  GraphPtr graph;
  std::vector<int> marked;  // vertex ids, x_0 first
};

GraphPtr make_graph(int dim, const std::vector<std::pair<Point, Point>>& edges);
// All directed edges whose endpoints avoid the marked vertices.
std::vector<DirectedEdge> eligible_edges(const MarkedGraph& g);

// Three or four marked points; at most 13 edges.
std::vector<MarkedGraph> switching_graphs();
// Trees on k leaves whose reduction cherry is {k-2, k-1}.
std::vector<trees::AbstractTree> switching_trees(int k);

struct BubbleInstance {
  GraphPtr graph;
  int K = 1;
  int x1 = -1, x2 = -1;
  std::vector<DirectedEdge> f;  // edges with tail in B(2K) exercised by the suite
  std::vector<int> indicator_set;  // sorted subset of B(2K) used by the indicator G
};

BubbleInstance bubble_instance();

// Three or four marked points; at most 16 edges.
std::vector<MarkedGraph> tree_bound_graphs();

// Every graph of the suites above (deduplicated by name), for pivotal checks.
std::vector<MarkedGraph> all_graphs();

struct BkInstance {
  GraphPtr graph;
  double p = 0.5;
  oracle::EventPtr a, b;
};

// Random connection events on random subgraphs of small boxes (<= 12 edges).
BkInstance random_bk_instance(std::uint64_t seed, std::uint64_t index);
// A and B live on vertex-disjoint components, so P(A o B) = P(A) P(B).
BkInstance disjoint_bk_instance();

// Junction with three arms joined by a cycle around the branch point
// (14 edges); the marked vertices are the arm ends and the root.
MarkedGraph three_branch_junction();

}  // namespace percolab::battery
