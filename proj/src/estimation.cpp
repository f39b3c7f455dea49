#include "percolab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "percolab/pivotals.hpp"

namespace percolab::estimation {

using lattice::Graph;
using lattice::sampled_edge_open;

namespace {

int norm_inf(const Point& p) {
  int m = 0;
  for (int v : p) m = std::max(m, std::abs(v));
  return m;
}

int dist_inf(const Point& a, const Point& b) {
  int m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Breadth-first search over edges opened lazily from a configuration key.
// Vertices with blocked[v] set are never entered. Stops as soon as `stop`
// returns true for a reached vertex; returns whether it did.
template <typename Stop>
bool lazy_search(const Graph& g, std::uint64_t key, double p, int source, const std::vector<char>* blocked,
                 std::vector<int>& reached, Stop stop) {
  reached.clear();
  if (blocked && (*blocked)[static_cast<std::size_t>(source)]) return false;
  std::vector<char> seen(static_cast<std::size_t>(g.num_vertices()), 0);
  seen[static_cast<std::size_t>(source)] = 1;
  reached.push_back(source);
  if (stop(source)) return true;
  for (std::size_t head = 0; head < reached.size(); ++head) {
    for (const auto& inc : g.incident(reached[head])) {
      const auto w = static_cast<std::size_t>(inc.neighbor);
      if (seen[w] || (blocked && (*blocked)[w])) continue;
      if (!sampled_edge_open(key, inc.edge, p)) continue;
      seen[w] = 1;
      reached.push_back(inc.neighbor);
      if (stop(inc.neighbor)) return true;
    }
  }
  return false;
}

std::uint64_t conditioned_seed(std::uint64_t seed, std::uint64_t stream) {
  return stream_key(seed, {0x434f4e44ULL, stream});
}

struct Acceptance {
  std::uint64_t key;
  std::uint64_t attempt;  // zero-based index of the accepted attempt
};

Acceptance accept(const BoxLattice& box, double p, int R, int center, std::uint64_t seed, std::uint64_t stream,
                  std::uint64_t max_attempts) {
  const Graph& g = *box.graph;
  const Point& c = g.point(center);
  const std::uint64_t base = conditioned_seed(seed, stream);
  std::vector<int> reached;
  auto far = [&](int v) { return dist_inf(g.point(v), c) >= R; };
  for (std::uint64_t a = 0; a < max_attempts; ++a) {
    const std::uint64_t key = lattice::configuration_key(base, a);
    if (lazy_search(g, key, p, center, nullptr, reached, far)) return {key, a};
  }
  throw GuardError("conditioning on " + lattice::to_string(c) + " <-> distance " + std::to_string(R) +
                   " failed: 0 acceptances in " + std::to_string(max_attempts) + " attempts (rate < " +
                   std::to_string(1.0 / static_cast<double>(max_attempts)) + ")");
}

void check_conditioning(const BoxLattice& box, double p, int R) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0,1]");
  if (R < 1) throw DomainError("survival radius must be >= 1");
  if (R > box.radius) throw DomainError("survival radius exceeds the box radius");
}

// Vertices joined to `source` by open paths that avoid bridges.
std::vector<char> two_edge_component(const Configuration& config, int source) {
  const Graph& g = config.graph();
  const std::vector<char> bridge = pivotals::open_bridges(config);
  std::vector<char> in(static_cast<std::size_t>(g.num_vertices()), 0);
  std::vector<int> queue{source};
  in[static_cast<std::size_t>(source)] = 1;
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (const auto& inc : g.incident(queue[h])) {
      const auto w = static_cast<std::size_t>(inc.neighbor);
      if (in[w] || !config.is_open(inc.edge) || bridge[static_cast<std::size_t>(inc.edge)]) continue;
      in[w] = 1;
      queue.push_back(inc.neighbor);
    }
  return in;
}

MCEstimate binomial(std::uint64_t hits, std::uint64_t trials, std::uint64_t seed) {
  const double n = static_cast<double>(trials);
  const double m = static_cast<double>(hits) / n;
  return {m, std::sqrt(m * (1.0 - m) / n), trials, seed};
}

}  // namespace

bool BoxLattice::on_boundary(int v) const { return norm_inf(graph->point(v)) == radius; }

BoxLattice make_box(int d, int radius, std::uint64_t max_vertices) {
  if (d < 1) throw DomainError("dimension must be >= 1");
  if (radius < 0) throw DomainError("box radius must be nonnegative");
  const double n = std::pow(2.0 * radius + 1.0, d);
  if (n > static_cast<double>(max_vertices))
    throw GuardError("box of radius " + std::to_string(radius) + " in d=" + std::to_string(d) + " has " +
                     std::to_string(static_cast<long double>(n)) + " vertices, above the limit " +
                     std::to_string(max_vertices));
  return {d, radius, std::make_shared<const Graph>(Graph::box(d, radius))};
}

MCEstimate estimate_tau_k(const BoxLattice& box, double p, const std::vector<Point>& points, std::uint64_t trials,
                          std::uint64_t seed, unsigned workers) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0,1]");
  if (trials == 0) throw DomainError("tau_k needs at least one trial");
  if (points.empty()) throw DomainError("tau_k needs at least one point");
  const Graph& g = *box.graph;
  std::vector<int> ids;
  for (const auto& pt : points) {
    if (static_cast<int>(pt.size()) != box.d || norm_inf(pt) > box.radius)
      throw DomainError("point " + lattice::to_string(pt) + " lies outside the box");
    ids.push_back(g.vertex(pt));
  }
  std::vector<char> wanted(static_cast<std::size_t>(g.num_vertices()), 0);
  std::size_t distinct = 0;
  for (int v : ids)
    if (!wanted[static_cast<std::size_t>(v)]) {
      wanted[static_cast<std::size_t>(v)] = 1;
      ++distinct;
    }
  constexpr std::uint64_t kChunk = 1024;
  const std::size_t chunks = static_cast<std::size_t>((trials + kChunk - 1) / kChunk);
  auto hits = map_chunks<std::uint64_t>(chunks, workers, [&](std::size_t c) {
    std::uint64_t h = 0;
    std::vector<int> reached;
    const std::uint64_t begin = c * kChunk, end = std::min(trials, begin + kChunk);
    for (std::uint64_t t = begin; t < end; ++t) {
      std::size_t found = 0;
      const bool all = lazy_search(g, lattice::configuration_key(seed, t), p, ids[0], nullptr, reached,
                                   [&](int v) { return wanted[static_cast<std::size_t>(v)] && ++found == distinct; });
      h += all ? 1 : 0;
    }
    return h;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return binomial(total, trials, seed);
}

ConditionedSample conditioned_cluster_sample(const BoxLattice& box, double p, int R, std::uint64_t seed,
                                             std::uint64_t stream, std::optional<Point> center,
                                             std::uint64_t max_attempts) {
  check_conditioning(box, p, R);
  const Point c = center ? *center : Point(static_cast<std::size_t>(box.d), 0);
  if (static_cast<int>(c.size()) != box.d || norm_inf(c) > box.radius)
    throw DomainError("conditioning centre lies outside the box");
  const int v = box.vertex(c);
  const Acceptance a = accept(box, p, R, v, seed, stream, max_attempts);
  return {lattice::sample_configuration(box.graph, p, conditioned_seed(seed, stream), a.attempt), v, R,
          a.attempt + 1};
}

RhoEstimate estimate_rho_truncated(const BoxLattice& box, double p, int R, int M, std::uint64_t trials,
                                   std::uint64_t seed, unsigned workers, std::uint64_t max_attempts) {
  check_conditioning(box, p, R);
  if (M < 0 || 4 * M > box.radius) throw DomainError("truncation M must satisfy 0 <= M <= box radius / 4");
  if (trials == 0) throw DomainError("rho needs at least one trial");
  const Graph& g = *box.graph;
  const int nv = g.num_vertices();
  const int origin = box.origin();
  Point e1p(static_cast<std::size_t>(box.d), 0);
  e1p[0] = 1;
  const int e1 = box.vertex(e1p);
  std::vector<int> tails;
  for (int v = 0; v < nv; ++v)
    if (norm_inf(g.point(v)) <= M) tails.push_back(v);

  constexpr std::uint64_t kChunk = 16;
  const std::size_t chunks = static_cast<std::size_t>((trials + kChunk - 1) / kChunk);
  auto parts = map_chunks<Moments>(chunks, workers, [&](std::size_t c) {
    Moments mom;
    std::vector<int> reached;
    const std::uint64_t begin = c * kChunk, end = std::min(trials, begin + kChunk);
    for (std::uint64_t t = begin; t < end; ++t) {
      const std::uint64_t ts = stream_key(seed, {0x72686fULL, t});
      // First sample: W0 and the vertices doubly connected to 0.
      const Acceptance a0 = accept(box, p, R, origin, ts, 0, max_attempts);
      const Configuration w0c = lattice::sample_configuration(box.graph, p, conditioned_seed(ts, 0), a0.attempt);
      std::vector<char> in_w0(static_cast<std::size_t>(nv), 0);
      for (int v : lattice::cluster_of(w0c, std::vector<int>{origin})) in_w0[static_cast<std::size_t>(v)] = 1;
      const std::vector<char> doubly = two_edge_component(w0c, origin);
      // Second sample: the e_1 cluster must reach the boundary and miss W0.
      const Acceptance a1 = accept(box, p, R, e1, ts, 1, max_attempts);
      lazy_search(g, a1.key, p, e1, nullptr, reached, [](int) { return false; });
      bool e2_base = false;
      std::vector<char> in_c1(static_cast<std::size_t>(nv), 0);
      for (int v : reached) {
        in_c1[static_cast<std::size_t>(v)] = 1;
        if (box.on_boundary(v)) e2_base = true;
      }
      for (int v : reached)
        if (in_w0[static_cast<std::size_t>(v)]) e2_base = false;
      double count = 0;
      if (e2_base) {
        std::map<int, bool> e3;
        for (int tail : tails) {
          if (!doubly[static_cast<std::size_t>(tail)]) continue;
          for (const auto& inc : g.incident(tail)) {
            const int head = inc.neighbor;
            if (in_c1[static_cast<std::size_t>(head)] || in_w0[static_cast<std::size_t>(head)]) continue;
            auto it = e3.find(head);
            if (it == e3.end()) {
              // Third sample, one per head vertex.
              const Acceptance a2 = accept(box, p, R, head, ts, 2 + static_cast<std::uint64_t>(head), max_attempts);
              const bool ok = lazy_search(g, a2.key, p, head, &in_w0, reached,
                                          [&](int v) { return box.on_boundary(v); });
              it = e3.emplace(head, ok).first;
            }
            if (it->second) count += 1.0;
          }
        }
      }
      mom.add(count);
    }
    return mom;
  });
  Moments total;
  for (const auto& m : parts) total.merge(m);
  return {total.estimate(seed), M, R};
}

BubbleEstimate estimate_bubble(const BoxLattice& box, double p, int R, std::uint64_t trials, std::uint64_t seed,
                               unsigned workers, std::uint64_t max_attempts) {
  check_conditioning(box, p, R);
  if (trials == 0) throw DomainError("bubble needs at least one trial");
  const Graph& g = *box.graph;
  const int origin = box.origin();
  const auto shells = static_cast<std::size_t>(box.radius) + 1;
  struct Part {
    Moments total;
    std::vector<Moments> shell;
  };
  constexpr std::uint64_t kChunk = 16;
  const std::size_t chunks = static_cast<std::size_t>((trials + kChunk - 1) / kChunk);
  auto parts = map_chunks<Part>(chunks, workers, [&](std::size_t c) {
    Part part{{}, std::vector<Moments>(shells)};
    const std::uint64_t begin = c * kChunk, end = std::min(trials, begin + kChunk);
    for (std::uint64_t t = begin; t < end; ++t) {
      const ConditionedSample s =
          conditioned_cluster_sample(box, p, R, stream_key(seed, {0x627562ULL, t}), 0, std::nullopt, max_attempts);
      const std::vector<char> doubly = two_edge_component(s.config, origin);
      std::vector<double> per(shells, 0.0);
      for (int v = 0; v < g.num_vertices(); ++v)
        if (v != origin && doubly[static_cast<std::size_t>(v)])
          per[static_cast<std::size_t>(norm_inf(g.point(v)))] += 1.0;
      double sum = 0;
      for (std::size_t r = 0; r < shells; ++r) {
        part.shell[r].add(per[r]);
        sum += per[r];
      }
      part.total.add(sum);
    }
    return part;
  });
  Part total{{}, std::vector<Moments>(shells)};
  for (const auto& pt : parts) {
    total.total.merge(pt.total);
    for (std::size_t r = 0; r < shells; ++r) total.shell[r].merge(pt.shell[r]);
  }
  BubbleEstimate out{total.total.estimate(seed), {}};
  for (const auto& m : total.shell) out.shells.push_back(m.estimate(seed));
  return out;
}

std::vector<ProbeRow> scaling_probe(const std::vector<std::vector<double>>& y, int d, double p,
                                    const std::vector<int>& ns, std::uint64_t trials, std::uint64_t seed,
                                    unsigned workers, std::uint64_t max_vertices) {
  if (y.size() < 2) throw DomainError("scaling probe needs k >= 2 directions");
  double ymax = 0;
  for (const auto& v : y) {
    if (static_cast<int>(v.size()) != d) throw DomainError("direction dimension differs from d");
    for (double c : v) ymax = std::max(ymax, std::fabs(c));
  }
  if (!(ymax > 0)) throw DomainError("all directions are zero");
  const double k = static_cast<double>(y.size());
  const double exponent = -((4.0 - d) * (k - 1.0) - 2.0);
  std::vector<ProbeRow> rows;
  for (int n : ns) {
    if (n < 1) throw DomainError("n must be positive");
    ProbeRow row;
    row.n = n;
    row.box_radius = static_cast<int>(std::ceil(2.0 * n * ymax));
    for (const auto& v : y) {
      Point x;
      for (double c : v) x.push_back(static_cast<int>(std::floor(n * c)));
      row.points.push_back(x);
    }
    const BoxLattice box = make_box(d, row.box_radius, max_vertices);
    row.tau = estimate_tau_k(box, p, row.points, trials, stream_key(seed, {static_cast<std::uint64_t>(n)}), workers);
    const double scale = std::pow(static_cast<double>(n), exponent);
    row.rescaled = scale * row.tau.mean;
    row.rescaled_stderr = scale * row.tau.stderr_;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace percolab::estimation
