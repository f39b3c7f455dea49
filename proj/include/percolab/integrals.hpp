#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "percolab/common.hpp"
#include "percolab/trees.hpp"

namespace percolab::integrals {

using ContinuumPoint = std::vector<double>;

struct LimitInputs {
  double alpha = 1.0;
  double p_c = 0.5;
  double rho = 1.0;
  int d = 7;

  double beta() const { return p_c / (1.0 - p_c); }
  void validate() const;  // throws DomainError
};

struct SamplingParams {
  std::uint64_t samples = 200000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  // Mixture radius as a multiple of the diameter of the point set.
  double radius_factor = 2.0;
};

// Surface area of the unit sphere in R^n.
double sphere_area(int n);

// I_T(y) = integral over internal positions of prod_{edges} |u_a - u_b|^(2-d).
// Internal vertices are drawn in order, each from an equal-weight mixture
// of isotropic laws centred at the leaves and at already-drawn adjacent
// internal vertices; radial density r / R^2 up to R and R^2 / r^3 beyond.
MCEstimate eval_I_T(const trees::AbstractTree& tree, const std::vector<ContinuumPoint>& y, int d,
                    const SamplingParams& mc);

struct QuadParams {
  int radial_nodes = 8;      // Gauss-Legendre nodes per radial panel
  int polar_nodes = 24;      // nodes in the angle off the plane of the poles
  int azimuth_nodes = 48;    // uniform nodes around the plane
  double cutoff_factor = 64; // outer radius as a multiple of the diameter
};

struct QuadResult {
  double value = 0;
  double error = 0;     // refinement delta plus tail uncertainty
  double tail = 0;      // analytic contribution beyond the cutoff
};

// integral over R^d of |x|^(2-d) |x - y1|^(2-d) |x - y2|^(2-d) dx.
// Polar quadrature around each pole under a partition of unity; the
// reported value uses the refined grid and the error is the change from
// the base grid plus the tail uncertainty.
QuadResult quad_I3(const ContinuumPoint& y1, const ContinuumPoint& y2, int d, const QuadParams& params = {});

struct Prediction {
  double value = 0;
  double stderr_ = 0;
  std::vector<MCEstimate> terms;  // one per tree, I_T estimates
};

// sum over trees of alpha^(#edges) (2 d beta rho)^(#internal) I_T(y).
Prediction predicted_kpoint_constant(int k, const std::vector<ContinuumPoint>& y, const LimitInputs& inputs,
                                     const SamplingParams& mc,
                                     const std::optional<std::vector<trees::AbstractTree>>& treeset = std::nullopt);

}  // namespace percolab::integrals
