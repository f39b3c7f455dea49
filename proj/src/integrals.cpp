#include "percolab/integrals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace percolab::integrals {

void LimitInputs::validate() const {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
  if (!(p_c > 0 && p_c < 1)) throw DomainError("p_c must lie in (0, 1)");
  if (!(rho > 0) || !std::isfinite(rho)) throw DomainError("rho must be positive");
  if (d <= 6) throw DomainError("limit inputs require d > 6");
}

double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace {

double dist(const ContinuumPoint& a, const ContinuumPoint& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Checks dimensions and distinctness; returns the diameter.
double check_points(const std::vector<ContinuumPoint>& y, int d) {
  for (const auto& p : y) {
    if (static_cast<int>(p.size()) != d) throw DomainError("point dimension differs from d");
    for (double v : p)
      if (!std::isfinite(v)) throw DomainError("point coordinates must be finite");
  }
  double diam = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = i + 1; j < y.size(); ++j) diam = std::max(diam, dist(y[i], y[j]));
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = i + 1; j < y.size(); ++j)
      if (!(dist(y[i], y[j]) > 1e-9 * diam))
        throw DomainError("points " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
  return diam;
}

// Radial law r / R^2 on [0, R], R^2 / r^3 beyond; half the mass on each side.
double radial_density(double r, double R) { return r <= R ? r / (R * R) : R * R / (r * r * r); }

double radial_draw(double u, double R) {
  return u < 0.5 ? R * std::sqrt(2.0 * u) : R / std::sqrt(2.0 * (1.0 - u));
}

}  // namespace

MCEstimate eval_I_T(const trees::AbstractTree& tree, const std::vector<ContinuumPoint>& y, int d,
                    const SamplingParams& mc) {
  if (d < 5) throw DomainError("I_T needs d >= 5");
  if (mc.samples == 0) throw DomainError("I_T needs at least one sample");
  const int k = tree.leaves();
  if (static_cast<int>(y.size()) != k)
    throw DomainError("tree has " + std::to_string(k) + " leaves but " + std::to_string(y.size()) + " points given");
  if (!(mc.radius_factor > 0)) throw DomainError("radius factor must be positive");
  const double diam = check_points(y, d);
  const double R = mc.radius_factor * diam;
  const double area = sphere_area(d);
  const int nodes = tree.node_count();

  // Proposal centres per internal vertex, in id order (parents first).
  std::vector<std::vector<int>> centres(static_cast<std::size_t>(nodes));
  for (int v = k; v < nodes; ++v) {
    for (int l = 0; l < k; ++l) centres[static_cast<std::size_t>(v)].push_back(l);
    const int p = tree.parent(v);
    if (!tree.is_leaf(p)) centres[static_cast<std::size_t>(v)].push_back(p);
    for (int c : tree.children(v))
      if (!tree.is_leaf(c) && c < v) centres[static_cast<std::size_t>(v)].push_back(c);
  }

  constexpr std::uint64_t kChunk = 4096;
  const std::size_t chunks = static_cast<std::size_t>((mc.samples + kChunk - 1) / kChunk);
  auto parts = map_chunks<Moments>(chunks, mc.workers, [&](std::size_t c) {
    Moments mom;
    CounterRng rng(mc.seed, {0x4954ULL, c});
    std::vector<ContinuumPoint> pos(static_cast<std::size_t>(nodes), ContinuumPoint(static_cast<std::size_t>(d)));
    for (int l = 0; l < k; ++l) pos[static_cast<std::size_t>(l)] = y[static_cast<std::size_t>(l)];
    ContinuumPoint dir(static_cast<std::size_t>(d));
    const std::uint64_t begin = c * kChunk, end = std::min(mc.samples, begin + kChunk);
    for (std::uint64_t s = begin; s < end; ++s) {
      double weight = 1.0;
      for (int v = k; v < nodes && weight > 0; ++v) {
        const auto& cs = centres[static_cast<std::size_t>(v)];
        const auto& ctr = pos[static_cast<std::size_t>(cs[rng.below(cs.size())])];
        double norm = 0;
        for (auto& x : dir) {
          x = rng.normal();
          norm += x * x;
        }
        norm = std::sqrt(norm);
        const double r = radial_draw(rng.uniform(), R);
        auto& z = pos[static_cast<std::size_t>(v)];
        for (int i = 0; i < d; ++i) z[static_cast<std::size_t>(i)] = ctr[static_cast<std::size_t>(i)] + r * dir[static_cast<std::size_t>(i)] / norm;
        double q = 0;
        for (int u : cs) {
          const double t = dist(z, pos[static_cast<std::size_t>(u)]);
          if (t == 0) {
            weight = 0;  // measure zero
            break;
          }
          q += radial_density(t, R) / (area * std::pow(t, d - 1));
        }
        if (weight > 0) weight /= q / static_cast<double>(cs.size());
      }
      if (weight > 0)
        for (int v = 1; v < nodes; ++v)
          weight *= std::pow(dist(pos[static_cast<std::size_t>(v)], pos[static_cast<std::size_t>(tree.parent(v))]), 2.0 - d);
      mom.add(weight);
    }
    return mom;
  });
  Moments total;
  for (const auto& p : parts) total.merge(p);
  return total.estimate(mc.seed);
}

namespace {

struct Rule {
  std::vector<double> x, w;  // on [-1, 1]
};

Rule gauss_legendre(int n) {
  Rule r{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    r.x[static_cast<std::size_t>(i)] = x;
    r.w[static_cast<std::size_t>(i)] = 2.0 / ((1 - x * x) * dp * dp);
  }
  return r;
}

// Poles in plane coordinates; the integrand depends only on the in-plane
// position and the distance h to the plane.
double quad_pass(const std::array<std::array<double, 2>, 3>& poles, int d, double r_cut, double inner,
                 int nr, int nb, int nphi) {
  const Rule gr = gauss_legendre(nr), gb = gauss_legendre(nb);
  const double perp_area = sphere_area(d - 2);
  std::vector<double> edges{0.0};
  for (double e = inner; e < r_cut; e *= 2.0) edges.push_back(e);
  edges.push_back(r_cut);
  CompensatedSum total;
  for (std::size_t p = 0; p < 3; ++p) {
    for (int ib = 0; ib < nb; ++ib) {
      const double beta = 0.25 * std::numbers::pi * (gb.x[static_cast<std::size_t>(ib)] + 1.0);
      const double wb = 0.25 * std::numbers::pi * gb.w[static_cast<std::size_t>(ib)] * perp_area * std::sin(beta) *
                        std::pow(std::cos(beta), d - 3);
      for (int ip = 0; ip < nphi; ++ip) {
        const double phi = 2.0 * std::numbers::pi * (ip + 0.5) / nphi;
        const double wphi = 2.0 * std::numbers::pi / nphi;
        const double ux = std::sin(beta) * std::cos(phi), uy = std::sin(beta) * std::sin(phi), uh = std::cos(beta);
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
          const double a = edges[e], b = edges[e + 1];
          for (int ir = 0; ir < nr; ++ir) {
            const double r = 0.5 * (b - a) * gr.x[static_cast<std::size_t>(ir)] + 0.5 * (a + b);
            const double wr = 0.5 * (b - a) * gr.w[static_cast<std::size_t>(ir)];
            const double px = poles[p][0] + r * ux, py = poles[p][1] + r * uy, h = r * uh;
            std::array<double, 3> d2{};
            for (std::size_t j = 0; j < 3; ++j) {
              const double dx = px - poles[j][0], dy = py - poles[j][1];
              d2[j] = dx * dx + dy * dy + h * h;
            }
            // Partition of unity w_p = |x - y_p|^(-2d) / sum_j |x - y_j|^(-2d).
            double denom = 0;
            for (std::size_t j = 0; j < 3; ++j) denom += std::pow(d2[p] / d2[j], d);
            double f = 1.0;
            for (std::size_t j = 0; j < 3; ++j)
              if (j != p) f *= std::pow(d2[j], 0.5 * (2 - d));
            // |x - y_p|^(2-d) times the Jacobian r^(d-1) leaves r.
            total.add(wr * wb * wphi * r * f / denom);
          }
        }
      }
    }
  }
  return total.value();
}

}  // namespace

QuadResult quad_I3(const ContinuumPoint& y1, const ContinuumPoint& y2, int d, const QuadParams& params) {
  if (d < 5) throw DomainError("quad_I3 needs d >= 5");
  if (params.radial_nodes < 2 || params.polar_nodes < 2 || params.azimuth_nodes < 4 || !(params.cutoff_factor > 1))
    throw DomainError("quadrature grid too coarse");
  const ContinuumPoint origin(static_cast<std::size_t>(d), 0.0);
  const std::vector<ContinuumPoint> pts{origin, y1, y2};
  const double diam = check_points(pts, d);

  // Orthonormal frame of the plane through 0, y1, y2.
  const double n1 = dist(y1, origin);
  ContinuumPoint ea(static_cast<std::size_t>(d)), eb(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) ea[static_cast<std::size_t>(i)] = y1[static_cast<std::size_t>(i)] / n1;
  auto orthogonal_part = [&](const ContinuumPoint& v) {
    double dot = 0;
    for (int i = 0; i < d; ++i) dot += v[static_cast<std::size_t>(i)] * ea[static_cast<std::size_t>(i)];
    ContinuumPoint w(v);
    for (int i = 0; i < d; ++i) w[static_cast<std::size_t>(i)] -= dot * ea[static_cast<std::size_t>(i)];
    return w;
  };
  ContinuumPoint w = orthogonal_part(y2);
  if (dist(w, origin) < 1e-12 * diam) {
    // Collinear poles: any direction orthogonal to y1 spans the plane.
    for (int axis = 0; axis < d; ++axis) {
      ContinuumPoint unit(static_cast<std::size_t>(d), 0.0);
      unit[static_cast<std::size_t>(axis)] = 1.0;
      w = orthogonal_part(unit);
      if (dist(w, origin) > 0.5) break;
    }
  }
  const double nw = dist(w, origin);
  for (int i = 0; i < d; ++i) eb[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / nw;
  double y2a = 0, y2b = 0;
  for (int i = 0; i < d; ++i) {
    y2a += y2[static_cast<std::size_t>(i)] * ea[static_cast<std::size_t>(i)];
    y2b += y2[static_cast<std::size_t>(i)] * eb[static_cast<std::size_t>(i)];
  }
  const std::array<std::array<double, 2>, 3> poles{{{0.0, 0.0}, {n1, 0.0}, {y2a, y2b}}};

  double min_sep = diam;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) min_sep = std::min(min_sep, dist(pts[i], pts[j]));
  const double r_cut = params.cutoff_factor * diam;
  const double inner = min_sep / 8.0;

  QuadResult out;
  out.tail = sphere_area(d) * std::pow(r_cut, 6.0 - 2.0 * d) / (2.0 * d - 6.0);
  const double base = quad_pass(poles, d, r_cut, inner, params.radial_nodes, params.polar_nodes,
                                params.azimuth_nodes);
  const double fine = quad_pass(poles, d, r_cut, inner / 2.0, params.radial_nodes + 4, params.polar_nodes * 3 / 2,
                                params.azimuth_nodes * 3 / 2);
  // The tail uses the far-field |x|^(6-3d); the first correction averages
  // out over the sphere, leaving relative size (d diam / r_cut)^2.
  const double rel = d * diam / r_cut;
  out.value = fine + out.tail;
  out.error = std::fabs(fine - base) + out.tail * rel * rel;
  return out;
}

Prediction predicted_kpoint_constant(int k, const std::vector<ContinuumPoint>& y, const LimitInputs& inputs,
                                     const SamplingParams& mc,
                                     const std::optional<std::vector<trees::AbstractTree>>& treeset) {
  inputs.validate();
  if (static_cast<int>(y.size()) != k) throw DomainError("prediction needs exactly k points");
  const std::vector<trees::AbstractTree> ts = treeset ? *treeset : trees::enumerate_trees(k);
  Prediction out;
  double var = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& t = ts[i];
    if (t.leaves() != k) throw DomainError("tree " + t.canonical() + " does not have k leaves");
    SamplingParams p = mc;
    p.seed = mc.seed + i;
    MCEstimate est = eval_I_T(t, y, inputs.d, p);
    const double coef = std::pow(inputs.alpha, t.edge_count()) *
                        std::pow(2.0 * inputs.d * inputs.beta() * inputs.rho, t.internal_count());
    out.value += coef * est.mean;
    var += coef * coef * est.stderr_ * est.stderr_;
    out.terms.push_back(est);
  }
  out.stderr_ = std::sqrt(var);
  return out;
}

}  // namespace percolab::integrals
