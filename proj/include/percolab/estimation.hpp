#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "percolab/common.hpp"
#include "percolab/lattice.hpp"

namespace percolab::estimation {

using lattice::Configuration;
using lattice::GraphPtr;
using lattice::Point;

inline constexpr std::uint64_t kMaxBoxVertices = 400000;
inline constexpr std::uint64_t kMaxConditionAttempts = 10000000;

// Materialized box B(0; radius) in Z^d.
struct BoxLattice {
  int d = 0;
  int radius = 0;
  GraphPtr graph;

  int vertex(const Point& p) const { return graph->vertex(p); }
  int origin() const { return vertex(Point(static_cast<std::size_t>(d), 0)); }
  // |y|_inf == radius.
  bool on_boundary(int v) const;
};

BoxLattice make_box(int d, int radius, std::uint64_t max_vertices = kMaxBoxVertices);

// Frequency of Gamma(points) over independent configurations; binomial stderr.
MCEstimate estimate_tau_k(const BoxLattice& box, double p, const std::vector<Point>& points, std::uint64_t trials,
                          std::uint64_t seed, unsigned workers = 1);

struct ConditionedSample {
  Configuration config;
  int center = -1;           // conditioning vertex
  int survival_radius = 0;   // R
  std::uint64_t attempts = 0;
};

// Rejection sampling of P( . | center <-> {y in box : |y - center|_inf >= R}).
// Attempt a of stream s uses its own configuration stream, so the result
// depends only on (seed, stream). Throws GuardError past max_attempts.
ConditionedSample conditioned_cluster_sample(const BoxLattice& box, double p, int R, std::uint64_t seed,
                                             std::uint64_t stream = 0, std::optional<Point> center = std::nullopt,
                                             std::uint64_t max_attempts = kMaxConditionAttempts);

struct RhoEstimate {
  MCEstimate value;
  int truncation_M = 0;
  int proxy_R = 0;
};

// Truncated vertex factor: sum over directed edges f with tail in B(M) of
// the probability of E1 (0 doubly connected to the tail in W0), E2 (the
// e_1 cluster of the second sample reaches the box boundary without meeting
// W0 or the head) and E3 (the head reaches the boundary off W0 in a third
// sample conditioned at the head). W0 is the cluster of 0 in the first
// sample; all three samples use the one-arm conditioning above.
RhoEstimate estimate_rho_truncated(const BoxLattice& box, double p, int R, int M, std::uint64_t trials,
                                   std::uint64_t seed, unsigned workers = 1,
                                   std::uint64_t max_attempts = kMaxConditionAttempts);

struct BubbleEstimate {
  MCEstimate value;                // sum over u != 0 of P(0 doubly connected to u)
  std::vector<MCEstimate> shells;  // shells[r]: contribution of |u|_inf = r (shells[0] = 0)
};

BubbleEstimate estimate_bubble(const BoxLattice& box, double p, int R, std::uint64_t trials, std::uint64_t seed,
                               unsigned workers = 1, std::uint64_t max_attempts = kMaxConditionAttempts);

struct ProbeRow {
  int n = 0;
  int box_radius = 0;
  std::vector<Point> points;
  MCEstimate tau;
  double rescaled = 0;         // n^-((4-d)(k-1)-2) tau
  double rescaled_stderr = 0;
};

// x_i = floor(n y_i) on the box of radius ceil(2 n max|y_i|_inf).
std::vector<ProbeRow> scaling_probe(const std::vector<std::vector<double>>& y, int d, double p,
                                    const std::vector<int>& ns, std::uint64_t trials, std::uint64_t seed,
                                    unsigned workers = 1, std::uint64_t max_vertices = kMaxBoxVertices);

}  // namespace percolab::estimation
