#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "percolab/conntree.hpp"
#include "percolab/lattice.hpp"
#include "percolab/trees.hpp"

namespace percolab::oracle {

using lattice::Configuration;
using lattice::DirectedEdge;
using lattice::Graph;
using lattice::GraphPtr;
using lattice::Region;

// Edge-count guards for the exhaustive checks.
inline constexpr int kSwitchingMaxEdges = 22;
inline constexpr int kBubbleSwitchMaxEdges = 20;
inline constexpr int kTreeBoundMaxEdges = 16;
inline constexpr int kBkMaxEdges = 14;
inline constexpr int kMaxEventDepth = 3;

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

enum class Extreme { first, last };

struct Event {
  enum class Kind { connection, multi_connection, doubly, pivotal_equals, tree_equals, all_of, negation, disjoint };
  Kind kind = Kind::connection;
  int x = -1, y = -1;                     // connection, doubly, pivotal source (x)
  std::optional<Region> region;           // connection, doubly
  std::vector<int> points;                // multi_connection, tree_equals marked, pivotal targets
  DirectedEdge edge;                      // pivotal_equals
  Extreme extreme = Extreme::last;        // pivotal_equals
  std::optional<trees::AbstractTree> tree;  // tree_equals
  std::vector<std::shared_ptr<const Event>> children;  // all_of, negation, disjoint
};
using EventPtr = std::shared_ptr<const Event>;

EventPtr connection(int x, int y, std::optional<Region> region = std::nullopt);
EventPtr multi_connection(std::vector<int> points);
EventPtr doubly(int x, int y, std::optional<Region> region = std::nullopt);
// The first/last common open pivotal for source -> targets equals `edge`
// (tail and head included).
EventPtr pivotal_equals(int source, std::vector<int> targets, DirectedEdge edge, Extreme which);
// Gamma(marked) holds and the connectivity tree classifies as binary equal to `tree`.
EventPtr tree_equals(std::vector<int> marked, trees::AbstractTree tree);
EventPtr all_of(std::vector<EventPtr> parts);
EventPtr negation(EventPtr part);
// Disjoint occurrence of connection events.
EventPtr disjoint(std::vector<EventPtr> parts);

int depth(const Event& e);
void validate(const Event& e, const Graph& g);  // throws DomainError
bool evaluate(const Event& e, const Configuration& config);

// ---------------------------------------------------------------------------
// Exact enumeration
// ---------------------------------------------------------------------------

// coeff[j] = sum of f over configurations with exactly j open edges; the
// expectation at p is sum_j coeff[j] p^j (1-p)^(m-j).
struct OpenCountSeries {
  int edges = 0;
  std::vector<double> coeff;
  double at(double p) const;
};

OpenCountSeries exact_series(const GraphPtr& graph, const std::function<double(const Configuration&)>& f,
                             unsigned workers = 1, int max_edges = lattice::kMaxEnumerationEdges);

double exact_event_probability(const GraphPtr& graph, double p, const Event& event, unsigned workers = 1);

// ---------------------------------------------------------------------------
// Switching identity
// ---------------------------------------------------------------------------

struct SwitchingSeries {
  OpenCountSeries lhs;  // P(D_T)
  OpenCountSeries rhs;  // switched event, without the beta factor
};

struct SwitchingReport {
  double p = 0;
  double lhs = 0;
  double rhs = 0;       // before multiplying by beta
  double residual = 0;  // |lhs - beta * rhs|
  bool vacuous = false; // both sides vanish identically
};

// g is eligible when neither endpoint is a marked vertex.
bool switching_edge_eligible(const std::vector<int>& marked, const DirectedEdge& g);

SwitchingSeries switching_series(const GraphPtr& graph, const std::vector<int>& marked,
                                 const trees::AbstractTree& tree, const DirectedEdge& g, unsigned workers = 1);
SwitchingReport switching_report(const SwitchingSeries& s, double p);
SwitchingReport verify_switching(const GraphPtr& graph, double p, const std::vector<int>& marked,
                                 const trees::AbstractTree& tree, const DirectedEdge& g, unsigned workers = 1);

// ---------------------------------------------------------------------------
// Bubble switching
// ---------------------------------------------------------------------------

// Real function on vertex subsets of B(2K); subsets are sorted vertex ids.
using SubsetFunction = std::function<double(const std::vector<int>&)>;

SubsetFunction constant_function(double c);
SubsetFunction indicator_contains(std::vector<int> required);
SubsetFunction seeded_random_function(std::uint64_t seed);

struct BubbleReport {
  double lhs = 0;
  double rhs = 0;  // before beta
  double residual = 0;
};

BubbleReport verify_bubble_switch(const GraphPtr& graph, double p, const DirectedEdge& f, int K, int x1, int x2,
                                  const SubsetFunction& G, unsigned workers = 1);

// ---------------------------------------------------------------------------
// BK and tree-graph bound
// ---------------------------------------------------------------------------

struct BkReport {
  double lhs = 0;  // P(A o B)
  double rhs = 0;  // P(A) P(B)
};

BkReport verify_bk(const GraphPtr& graph, double p, const Event& a, const Event& b, unsigned workers = 1);

struct TreeBoundReport {
  double tau = 0;
  double bound = 0;
};

// All-pairs two-point functions by one enumeration.
std::vector<std::vector<double>> two_point_matrix(const GraphPtr& graph, double p, unsigned workers = 1);
TreeBoundReport verify_tree_bound(const GraphPtr& graph, double p, const std::vector<int>& points,
                                  unsigned workers = 1);

// ---------------------------------------------------------------------------
// Witness structure around a connectivity-tree vertex
// ---------------------------------------------------------------------------

struct CycleWitness {
  int child;  // w_j
  int a, b, c;
};

struct WitnessReport {
  bool spanning_tree = false;
  bool disjoint_pairs = false;
  bool cycles = true;  // vacuous when fewer than three children
  std::vector<CycleWitness> cycle_witnesses;
  std::string failure;
  bool ok() const { return spanning_tree && disjoint_pairs && cycles; }
};

// Edge-disjoint open paths from each source to the sink (one unit per source).
// Returns vertex sequences, or nothing when the flow is too small.
std::optional<std::vector<std::vector<int>>> edge_disjoint_paths(const Configuration& config,
                                                                 const std::vector<int>& sources, int sink);

WitnessReport verify_witness_structure(const Configuration& config, const conntree::ConnTree& tree, int v);

}  // namespace percolab::oracle
