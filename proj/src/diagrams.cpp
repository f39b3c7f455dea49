#include "percolab/diagrams.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "percolab/kernels.hpp"

namespace percolab::diagrams {

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

double bracket(std::span<const int> x) {
  double s = 1.0;
  for (int v : x) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

double bracket(std::span<const double> x) {
  double s = 1.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double bracket_diff(const Point& a, const Point& b) {
  if (a.size() != b.size()) throw DomainError("dimension mismatch");
  double s = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double t = static_cast<double>(a[i]) - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

double riesz(std::span<const int> x, const KernelParams& params) { return std::pow(bracket(x), params.exponent); }
double riesz(std::span<const double> x, const KernelParams& params) { return std::pow(bracket(x), params.exponent); }

namespace {

double kernel(const Point& a, const Point& b, double e) { return std::pow(bracket_diff(a, b), e); }

double norm2(const Point& p) {
  double s = 0;
  for (int v : p) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

int norm_inf(const Point& p) {
  int m = 0;
  for (int v : p) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Diagram
// ---------------------------------------------------------------------------

Diagram::Diagram(int d) : d_(d) {
  if (d < 1) throw DomainError("diagram dimension must be >= 1");
}

int Diagram::add_pinned(Point position) {
  if (static_cast<int>(position.size()) != d_) throw DomainError("pin dimension mismatch");
  pins_.emplace_back(std::move(position));
  return vertex_count() - 1;
}

int Diagram::add_free() {
  pins_.emplace_back(std::nullopt);
  return vertex_count() - 1;
}

void Diagram::add_edge(int a, int b, std::optional<double> exponent) {
  if (a < 0 || b < 0 || a >= vertex_count() || b >= vertex_count()) throw DomainError("edge endpoint out of range");
  if (a == b) throw DomainError("self loops are not allowed");
  edges_.push_back({a, b, exponent.value_or(default_exponent())});
}

const Point& Diagram::position(int v) const {
  const auto& p = pins_.at(static_cast<std::size_t>(v));
  if (!p) throw DomainError("vertex " + std::to_string(v) + " is free");
  return *p;
}

std::vector<int> Diagram::free_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < vertex_count(); ++v)
    if (!is_pinned(v)) out.push_back(v);
  return out;
}

std::vector<int> Diagram::pinned_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < vertex_count(); ++v)
    if (is_pinned(v)) out.push_back(v);
  return out;
}

std::vector<int> Diagram::neighbors(int v) const {
  std::vector<int> out;
  for (const auto& e : edges_) {
    if (e.a == v) out.push_back(e.b);
    if (e.b == v) out.push_back(e.a);
  }
  return out;
}

int Diagram::degree(int v) const { return static_cast<int>(neighbors(v).size()); }

int Diagram::max_pin_magnitude() const {
  double m = 0;
  for (const auto& p : pins_)
    if (p) m = std::max(m, norm2(*p));
  return static_cast<int>(std::ceil(m - 1e-12));
}

int default_truncation(const Diagram& diagram) { return std::max(1, 4 * diagram.max_pin_magnitude()); }

// ---------------------------------------------------------------------------
// Exact sums
// ---------------------------------------------------------------------------

namespace {

struct SingleFree {
  std::vector<Point> centers;
  std::vector<double> exponents;
  double constant = 1.0;     // pin-pin edges
  std::vector<int> active;   // coordinates where some centre is nonzero
};

SingleFree single_free_setup(const Diagram& g) {
  const int f = g.free_vertices().at(0);
  SingleFree s;
  for (const auto& e : g.edges()) {
    if (e.a == f || e.b == f) {
      s.centers.push_back(g.position(e.a == f ? e.b : e.a));
      s.exponents.push_back(e.exponent);
    } else {
      s.constant *= kernel(g.position(e.a), g.position(e.b), e.exponent);
    }
  }
  for (int i = 0; i < g.dim(); ++i)
    for (const auto& c : s.centers)
      if (c[static_cast<std::size_t>(i)] != 0) {
        s.active.push_back(i);
        break;
      }
  return s;
}

// N(s) = #{v in [-L,L]^k : |v|^2 = s}.
std::vector<double> square_norm_histogram(int k, int L) {
  std::vector<double> h{1.0};
  for (int r = 0; r < k; ++r) {
    std::vector<double> next(h.size() + static_cast<std::size_t>(L) * L, 0.0);
    for (std::size_t s = 0; s < h.size(); ++s) {
      if (h[s] == 0.0) continue;
      for (int t = -L; t <= L; ++t) next[s + static_cast<std::size_t>(t * t)] += h[s];
    }
    h = std::move(next);
  }
  return h;
}

double ipow(double b, int e) {
  double r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

bool integral(double e) { return std::fabs(e - std::round(e)) < 1e-12; }

double val_single_free(const Diagram& g, int L, unsigned workers) {
  SingleFree s = single_free_setup(g);
  const int d = g.dim();
  const int m = static_cast<int>(s.active.size());
  auto hist = square_norm_histogram(d - m, L);
  std::vector<double> svals, weights;
  for (std::size_t i = 0; i < hist.size(); ++i)
    if (hist[i] != 0.0) {
      svals.push_back(static_cast<double>(i));
      weights.push_back(hist[i]);
    }
  // <x>^e = (1 + |x|^2)^(e/2), so the kernel's half power is e itself.
  const bool simd = std::all_of(s.exponents.begin(), s.exponents.end(), integral);
  std::vector<int> half_pow;
  for (double e : s.exponents) half_pow.push_back(static_cast<int>(std::lround(e)));

  const int side = 2 * L + 1;
  const std::size_t chunks = m == 0 ? 1 : static_cast<std::size_t>(side);
  const std::uint64_t per_chunk = m <= 1 ? 1 : static_cast<std::uint64_t>(ipow(side, m - 1));
  auto parts = map_chunks<CompensatedSum>(chunks, workers, [&](std::size_t c) {
    CompensatedSum acc;
    std::vector<int> u(static_cast<std::size_t>(m));
    std::vector<double> base(s.centers.size());
    for (std::uint64_t idx = 0; idx < per_chunk; ++idx) {
      if (m > 0) {
        u[0] = static_cast<int>(c) - L;
        std::uint64_t r = idx;
        for (int i = m - 1; i >= 1; --i) {
          u[static_cast<std::size_t>(i)] = static_cast<int>(r % static_cast<std::uint64_t>(side)) - L;
          r /= static_cast<std::uint64_t>(side);
        }
      }
      for (std::size_t j = 0; j < s.centers.size(); ++j) {
        double b = 1.0;
        for (int i = 0; i < m; ++i) {
          double t = static_cast<double>(u[static_cast<std::size_t>(i)]) -
                     s.centers[j][static_cast<std::size_t>(s.active[static_cast<std::size_t>(i)])];
          b += t * t;
        }
        base[j] = b;
      }
      if (simd) {
        acc.add(kernels::weighted_power_sum(base, half_pow, svals, weights));
      } else {
        for (std::size_t q = 0; q < svals.size(); ++q) {
          double t = weights[q];
          for (std::size_t j = 0; j < base.size(); ++j) t *= std::pow(base[j] + svals[q], 0.5 * s.exponents[j]);
          acc.add(t);
        }
      }
    }
    return acc;
  });
  CompensatedSum total;
  for (const auto& p : parts) total.add(p);
  return s.constant * total.value();
}

double val_brute(const Diagram& g, int L, unsigned workers) {
  const auto free = g.free_vertices();
  const int d = g.dim();
  const std::uint64_t side = static_cast<std::uint64_t>(2 * L + 1);
  std::uint64_t box = 1;
  for (int i = 0; i < d; ++i) box *= side;
  std::uint64_t inner = 1;
  for (std::size_t i = 1; i < free.size(); ++i) inner *= box;
  auto decode = [&](std::uint64_t idx, Point& p) {
    for (int i = d - 1; i >= 0; --i) {
      p[static_cast<std::size_t>(i)] = static_cast<int>(idx % side) - L;
      idx /= side;
    }
  };
  auto parts = map_chunks<CompensatedSum>(box, workers, [&](std::size_t c) {
    CompensatedSum acc;
    std::vector<Point> pos(static_cast<std::size_t>(g.vertex_count()));
    for (int v : g.pinned_vertices()) pos[static_cast<std::size_t>(v)] = g.position(v);
    for (int v : free) pos[static_cast<std::size_t>(v)] = Point(static_cast<std::size_t>(d));
    decode(c, pos[static_cast<std::size_t>(free[0])]);
    for (std::uint64_t idx = 0; idx < inner; ++idx) {
      std::uint64_t r = idx;
      for (std::size_t i = 1; i < free.size(); ++i) {
        decode(r % box, pos[static_cast<std::size_t>(free[i])]);
        r /= box;
      }
      double t = 1.0;
      for (const auto& e : g.edges())
        t *= kernel(pos[static_cast<std::size_t>(e.a)], pos[static_cast<std::size_t>(e.b)], e.exponent);
      acc.add(t);
    }
    return acc;
  });
  CompensatedSum total;
  for (const auto& p : parts) total.add(p);
  return total.value();
}

}  // namespace

double exact_work(const Diagram& diagram, int L) {
  const auto free = diagram.free_vertices();
  const double side = 2.0 * L + 1.0;
  if (free.empty()) return 1.0;
  if (free.size() == 1) {
    const int m = static_cast<int>(single_free_setup(diagram).active.size());
    return std::pow(side, m) * (static_cast<double>(diagram.dim() - m) * L * L + 1.0);
  }
  return std::pow(side, static_cast<double>(diagram.dim()) * static_cast<double>(free.size()));
}

double val_exact(const Diagram& diagram, int L, unsigned workers) {
  if (L < 0) throw DomainError("truncation radius must be nonnegative");
  for (const auto& e : diagram.edges())
    if (!diagram.is_pinned(e.a) && e.a == e.b) throw DomainError("self loop");
  const double work = exact_work(diagram, L);
  if (work > kExactWorkLimit)
    throw GuardError("exact sum refused: estimated work " + std::to_string(work) + " exceeds " +
                     std::to_string(kExactWorkLimit));
  const auto free = diagram.free_vertices();
  if (free.empty()) {
    double t = 1.0;
    for (const auto& e : diagram.edges()) t *= kernel(diagram.position(e.a), diagram.position(e.b), e.exponent);
    return t;
  }
  if (free.size() == 1) return val_single_free(diagram, L, workers);
  return val_brute(diagram, L, workers);
}

// ---------------------------------------------------------------------------
// Importance sampling
// ---------------------------------------------------------------------------

namespace {

// Lattice point counts by squared norm: count[k][s] = #{y in Z^k : |y|^2 = s}.
struct NormCounts {
  int d;
  std::int64_t max_s;
  std::vector<std::vector<double>> count;
};

NormCounts make_counts(int d, std::int64_t max_s) {
  NormCounts nc{d, max_s, {}};
  nc.count.assign(static_cast<std::size_t>(d) + 1, std::vector<double>(static_cast<std::size_t>(max_s) + 1, 0.0));
  nc.count[0][0] = 1.0;
  for (int k = 1; k <= d; ++k) {
    const auto& prev = nc.count[static_cast<std::size_t>(k) - 1];
    auto& cur = nc.count[static_cast<std::size_t>(k)];
    for (std::int64_t t = 0; t * t <= max_s; ++t) {
      const double mult = t == 0 ? 1.0 : 2.0;
      for (std::int64_t s = t * t; s <= max_s; ++s)
        if (prev[static_cast<std::size_t>(s - t * t)] != 0.0) cur[static_cast<std::size_t>(s)] += mult * prev[static_cast<std::size_t>(s - t * t)];
    }
  }
  return nc;
}

// Uniform point of Z^d with |y|^2 = s, one coordinate at a time.
void sample_on_sphere(CounterRng& rng, const NormCounts& nc, std::int64_t s, std::vector<int>& y) {
  for (int k = nc.d; k >= 1; --k) {
    const auto& prev = nc.count[static_cast<std::size_t>(k) - 1];
    double u = rng.uniform() * nc.count[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
    std::int64_t t = 0;
    for (;; ++t) {
      if (t * t > s) {  // rounding guard: take the last admissible value
        --t;
        while (prev[static_cast<std::size_t>(s - t * t)] == 0.0) --t;
        break;
      }
      double w = prev[static_cast<std::size_t>(s - t * t)] * (t == 0 ? 1.0 : 2.0);
      if (u < w) break;
      u -= w;
    }
    int sign = (t != 0 && rng.uniform() < 0.5) ? -1 : 1;
    y[static_cast<std::size_t>(nc.d - k)] = sign * static_cast<int>(t);
    s -= t * t;
  }
}

// Mass of one point at squared distance s in dimension d: <y>^e inside
// radius R0; beyond it an extra (R0/|y|)^(d+e+2) so the radial mass falls
// like r^-3.
double point_mass(int d, double e, double r0_sq, std::int64_t s) {
  double m = std::pow(1.0 + static_cast<double>(s), 0.5 * e);
  const double t = std::max(0.0, 0.5 * (d + e + 2));
  return static_cast<double>(s) > r0_sq ? m * std::pow(r0_sq / static_cast<double>(s), t) : m;
}

struct ShellTable {
  double exponent;
  std::vector<double> cum;  // cum[s] = sum_{r<=s} N_d(r) point_mass(r)
};

ShellTable make_table(const NormCounts& nc, double e, double r0_sq) {
  ShellTable t{e, std::vector<double>(static_cast<std::size_t>(nc.max_s) + 1)};
  CompensatedSum acc;
  const auto& n = nc.count[static_cast<std::size_t>(nc.d)];
  for (std::int64_t s = 0; s <= nc.max_s; ++s) {
    if (n[static_cast<std::size_t>(s)] != 0.0) acc.add(n[static_cast<std::size_t>(s)] * point_mass(nc.d, e, r0_sq, s));
    t.cum[static_cast<std::size_t>(s)] = acc.value();
  }
  return t;
}

struct Component {
  int center_vertex;  // pinned vertex or earlier free vertex
  std::size_t exponent;  // index into McPlan::exponents
};

struct FreePlan {
  int vertex;
  std::vector<Component> components;
};

// tables[exponent][level] uses tail radius^2 = scales[level]; the scales
// grow by 4 from 1 up to the pin-set diameter squared.
struct McPlan {
  std::vector<double> scales;
  std::vector<double> exponents;
  NormCounts counts;
  std::vector<std::vector<ShellTable>> tables;
  std::vector<FreePlan> order;
};

std::int64_t dist2(const Point& a, const Point& b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<std::int64_t>(a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Squared radius reaching every point of B(L) from c.
std::int64_t cover_radius2(const Point& c, int L) {
  std::int64_t s = 0;
  for (int v : c) s += static_cast<std::int64_t>(L + std::abs(v)) * (L + std::abs(v));
  return s;
}

McPlan make_plan(const Diagram& g, int L) {
  std::int64_t max_s = 0;
  for (int v : g.pinned_vertices()) max_s = std::max(max_s, cover_radius2(g.position(v), L));
  if (g.pinned_vertices().empty()) max_s = cover_radius2(Point(static_cast<std::size_t>(g.dim()), 0), L);
  double r0_sq = 1.0;
  for (int a : g.pinned_vertices())
    for (int b : g.pinned_vertices()) r0_sq = std::max(r0_sq, static_cast<double>(dist2(g.position(a), g.position(b))));
  McPlan plan{{}, {}, make_counts(g.dim(), max_s), {}, {}};
  for (double sc = 1.0; sc < r0_sq; sc *= 4.0) plan.scales.push_back(sc);
  plan.scales.push_back(r0_sq);
  std::map<double, std::size_t> by_exp;
  auto exponent_id = [&](double e) {
    auto it = by_exp.find(e);
    if (it != by_exp.end()) return it->second;
    plan.exponents.push_back(e);
    plan.tables.emplace_back();
    for (double sc : plan.scales) plan.tables.back().push_back(make_table(plan.counts, e, sc));
    by_exp[e] = plan.exponents.size() - 1;
    return plan.exponents.size() - 1;
  };
  std::set<int> drawn;
  for (int f : g.free_vertices()) {
    FreePlan fp{f, {}};
    std::map<int, double> adjacent;
    for (const auto& e : g.edges()) {
      if (e.a == f) adjacent[e.b] += e.exponent;
      if (e.b == f) adjacent[e.a] += e.exponent;
    }
    for (const auto& [v, e] : adjacent)
      if (g.is_pinned(v) || drawn.count(v)) fp.components.push_back({v, exponent_id(e)});
    // Pins and drawn vertices tied to f through undrawn free vertices also
    // attract f.
    std::set<int> seen{f};
    std::vector<int> stack{f};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : g.neighbors(u)) {
        if (!seen.insert(w).second) continue;
        if (g.is_pinned(w) || drawn.count(w)) {
          if (!adjacent.count(w)) fp.components.push_back({w, exponent_id(g.default_exponent())});
        } else {
          stack.push_back(w);
        }
      }
    }
    if (fp.components.empty())
      for (int v : g.pinned_vertices()) fp.components.push_back({v, exponent_id(g.default_exponent())});
    if (g.pinned_vertices().empty() && fp.components.empty())
      fp.components.push_back({-1, exponent_id(g.default_exponent())});
    if (fp.components.empty()) throw DomainError("free vertex " + std::to_string(f) + " has no proposal centre");
    drawn.insert(f);
    plan.order.push_back(std::move(fp));
  }
  return plan;
}

}  // namespace

MCEstimate val_mc(const Diagram& diagram, int L, const McParams& params) {
  if (params.samples == 0) throw DomainError("MC needs at least one sample");
  if (L < 0) throw DomainError("truncation radius must be nonnegative");
  const McPlan plan = make_plan(diagram, L);
  const int d = diagram.dim();
  const Point origin(static_cast<std::size_t>(d), 0);
  constexpr std::uint64_t kChunk = 4096;
  const std::size_t chunks = static_cast<std::size_t>((params.samples + kChunk - 1) / kChunk);
  auto parts = map_chunks<Moments>(chunks, params.workers, [&](std::size_t c) {
    Moments mom;
    CounterRng rng(params.seed, {0x76616cULL, c});
    std::vector<Point> pos(static_cast<std::size_t>(diagram.vertex_count()));
    for (int v : diagram.pinned_vertices()) pos[static_cast<std::size_t>(v)] = diagram.position(v);
    std::vector<int> y(static_cast<std::size_t>(d));
    std::vector<std::size_t> level;
    std::vector<std::int64_t> top;
    auto centre = [&](const Component& comp) -> const Point& {
      return comp.center_vertex < 0 ? origin : pos[static_cast<std::size_t>(comp.center_vertex)];
    };
    const std::uint64_t begin = c * kChunk, end = std::min(params.samples, begin + kChunk);
    for (std::uint64_t s = begin; s < end; ++s) {
      double inv_q = 1.0;
      bool inside = true;
      for (const auto& fp : plan.order) {
        const std::size_t nc = fp.components.size();
        // Each component mixes the tail radii up to the distance to the
        // nearest other centre; its support is capped at B(L) coverage.
        level.assign(nc, plan.scales.size() - 1);
        top.assign(nc, 0);
        for (std::size_t i = 0; i < nc; ++i) {
          const Point& ci = centre(fp.components[i]);
          std::int64_t near = std::numeric_limits<std::int64_t>::max();
          for (std::size_t j = 0; j < nc; ++j)
            if (j != i) near = std::min(near, dist2(ci, centre(fp.components[j])));
          while (level[i] > 0 && plan.scales[level[i] - 1] >= static_cast<double>(near)) --level[i];
          top[i] = std::min(plan.counts.max_s, cover_radius2(ci, L));
        }
        const std::size_t pick = rng.below(nc);
        const auto& comp = fp.components[pick];
        const auto& tab = plan.tables[comp.exponent][rng.below(level[pick] + 1)];
        const std::int64_t tp = top[pick];
        double u = rng.uniform() * tab.cum[static_cast<std::size_t>(tp)];
        auto it = std::upper_bound(tab.cum.begin(), tab.cum.begin() + tp + 1, u);
        std::int64_t r2 = std::min<std::int64_t>(it - tab.cum.begin(), tp);
        while (plan.counts.count[static_cast<std::size_t>(d)][static_cast<std::size_t>(r2)] == 0.0) --r2;
        sample_on_sphere(rng, plan.counts, r2, y);
        Point& z = pos[static_cast<std::size_t>(fp.vertex)];
        z = centre(comp);
        for (int i = 0; i < d; ++i) z[static_cast<std::size_t>(i)] += y[static_cast<std::size_t>(i)];
        if (norm_inf(z) > L) {
          inside = false;
          break;
        }
        double q = 0;
        for (std::size_t i = 0; i < nc; ++i) {
          const std::int64_t o2 = dist2(z, centre(fp.components[i]));
          if (o2 > top[i]) continue;
          const auto& row = plan.tables[fp.components[i].exponent];
          double qi = 0;
          for (std::size_t l = 0; l <= level[i]; ++l)
            qi += point_mass(d, row[l].exponent, plan.scales[l], o2) / row[l].cum[static_cast<std::size_t>(top[i])];
          q += qi / static_cast<double>(level[i] + 1);
        }
        inv_q /= q / static_cast<double>(nc);
      }
      if (!inside) {
        mom.add(0.0);
        continue;
      }
      double f = 1.0;
      for (const auto& e : diagram.edges())
        f *= kernel(pos[static_cast<std::size_t>(e.a)], pos[static_cast<std::size_t>(e.b)], e.exponent);
      mom.add(f * inv_q);
    }
    return mom;
  });
  Moments total;
  for (const auto& p : parts) total.merge(p);
  return total.estimate(params.seed);
}

// ---------------------------------------------------------------------------
// Convolution checks
// ---------------------------------------------------------------------------

std::string to_string(ConvVariant v) {
  switch (v) {
    case ConvVariant::standard: return "std";
    case ConvVariant::log: return "log";
    case ConvVariant::triple: return "triple";
  }
  return "?";
}

ConvVariant parse_conv_variant(const std::string& s) {
  if (s == "std" || s == "standard") return ConvVariant::standard;
  if (s == "log") return ConvVariant::log;
  if (s == "triple") return ConvVariant::triple;
  throw DomainError("unknown convolution variant '" + s + "' (std, log, triple)");
}

namespace {

RatioReport ratio(double lhs, double rhs) { return {lhs, rhs, lhs / rhs}; }

double star_sum(const std::vector<std::pair<Point, double>>& legs, int L, unsigned workers) {
  const int d = static_cast<int>(legs.at(0).first.size());
  Diagram g(d);
  int z = g.add_free();
  for (const auto& [p, e] : legs) g.add_edge(z, g.add_pinned(p), e);
  return val_exact(g, L, workers);
}

void same_dim(std::initializer_list<const Point*> pts) {
  std::size_t d = (*pts.begin())->size();
  for (const Point* p : pts)
    if (p->size() != d) throw DomainError("points have different dimensions");
}

}  // namespace

RatioReport check_convolution(const Point& x, const Point& y, double a, double b, int L, ConvVariant variant,
                              const std::optional<Point>& w, unsigned workers) {
  same_dim({&x, &y});
  const double d = static_cast<double>(x.size());
  const double bxy = bracket_diff(x, y);
  switch (variant) {
    case ConvVariant::standard:
      if (!(a > 0 && b > 0 && a + b < d)) throw DomainError("std convolution needs a, b > 0 and a + b < d");
      return ratio(star_sum({{x, -d + a}, {y, -d + b}}, L, workers), std::pow(bxy, -d + a + b));
    case ConvVariant::log:
      if (!(a == 0 && b > 0 && b < d)) throw DomainError("log convolution needs a = 0 and 0 < b < d");
      if (x == y) throw DomainError("log convolution needs x != y");
      return ratio(star_sum({{x, -d}, {y, -d + b}}, L, workers), std::pow(bxy, -d + b) * std::log(bxy));
    case ConvVariant::triple: {
      if (!w) throw DomainError("triple convolution needs a third point");
      same_dim({&x, w ? &*w : &x});
      if (d <= 4) throw DomainError("triple convolution needs d > 4");
      const std::vector<Point> p{x, y, *w};
      double rhs = 0;
      for (int i = 0; i < 3; ++i) {
        double r1 = bracket_diff(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>((i + 1) % 3)]);
        double r2 = bracket_diff(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>((i + 2) % 3)]);
        double mn = std::min(r1, r2);
        rhs += mn * mn / (std::pow(r1, d - 2) * std::pow(r2, d - 2));
      }
      return ratio(star_sum({{x, 2 - d}, {y, 2 - d}, {*w, 2 - d}}, L, workers), rhs);
    }
  }
  throw DomainError("unknown variant");
}

RatioReport check_interior_delta(const Point& u, const Point& v, const Point& w1, double n, int L, unsigned workers) {
  same_dim({&u, &v, &w1});
  if (!(n >= 1)) throw DomainError("n must be >= 1");
  const double d = static_cast<double>(u.size());
  const double e = 2 - d;
  double lhs = star_sum({{u, e}, {v, e}, {w1, e}}, L, workers);
  double rhs = n * n * (std::pow(n, e) + std::pow(bracket_diff(u, w1), e) + std::pow(bracket_diff(v, w1), e)) *
               std::pow(bracket_diff(u, v), e);
  return ratio(lhs, rhs);
}

RatioReport check_path_reduction(const Point& u, const Point& v, const Point& w1, const Point& w2, const Point& w3,
                                 double n, int L, unsigned workers) {
  same_dim({&u, &v, &w1, &w2, &w3});
  if (!(n >= 1)) throw DomainError("n must be >= 1");
  const double d = static_cast<double>(u.size());
  const double e = 2 - d;
  auto k = [&](const Point& a, const Point& b) { return std::pow(bracket_diff(a, b), e); };
  double lhs = k(u, w2) * k(v, w3) * star_sum({{u, e}, {v, e}, {w1, e}}, L, workers);
  double rhs = std::pow(n, 4 - d) * (k(u, w1) + k(u, w2)) * (k(v, w3) + k(v, w1)) * k(u, v);
  return ratio(lhs, rhs);
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

namespace {

bool pinned_leaf(const Diagram& g, int v) { return g.is_pinned(v) && g.degree(v) == 1; }

// Copy of g without `drop`, plus an edge a - b (old ids).
Diagram rebuild(const Diagram& g, const std::set<int>& drop, int a, int b) {
  Diagram out(g.dim());
  std::vector<int> id(static_cast<std::size_t>(g.vertex_count()), -1);
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (drop.count(v)) continue;
    id[static_cast<std::size_t>(v)] = g.is_pinned(v) ? out.add_pinned(g.position(v)) : out.add_free();
  }
  for (const auto& e : g.edges())
    if (!drop.count(e.a) && !drop.count(e.b))
      out.add_edge(id[static_cast<std::size_t>(e.a)], id[static_cast<std::size_t>(e.b)], e.exponent);
  out.add_edge(id[static_cast<std::size_t>(a)], id[static_cast<std::size_t>(b)]);
  return out;
}

CherryContraction contract_with_parent(const Diagram& g, int v, int p) {
  auto nb = g.neighbors(v);
  std::vector<int> leaves;
  for (int x : nb)
    if (x != p) leaves.push_back(x);
  if (leaves.size() != 2 || !pinned_leaf(g, leaves[0]) || !pinned_leaf(g, leaves[1]))
    throw DomainError("cherry shape mismatch at vertex " + std::to_string(v));
  const int w1 = leaves[0], w2 = leaves[1];
  CherryContraction c{rebuild(g, {v, w2}, p, w1), rebuild(g, {v, w1}, p, w2),
                      {4.0 - g.dim(), "val(S) <= C n^(4-d) (val(S1) + val(S2))"}};
  return c;
}

}  // namespace

CherryContraction contract_cherry(const Diagram& diagram, int free_vertex) {
  if (free_vertex < 0 || free_vertex >= diagram.vertex_count() || diagram.is_pinned(free_vertex))
    throw DomainError("contract_cherry needs a free vertex");
  auto nb = diagram.neighbors(free_vertex);
  if (nb.size() != 3 || std::set<int>(nb.begin(), nb.end()).size() != 3)
    throw DomainError("cherry vertex must have degree 3 with distinct neighbours");
  std::vector<int> leaves, others;
  for (int x : nb) (pinned_leaf(diagram, x) ? leaves : others).push_back(x);
  if (leaves.size() < 2) throw DomainError("cherry vertex needs two pinned leaf neighbours");
  // With three leaf neighbours the first one is taken as the parent.
  int p = others.empty() ? leaves[0] : others[0];
  return contract_with_parent(diagram, free_vertex, p);
}

ReductionLedger tree_reduce(const Diagram& diagram, std::optional<int> root) {
  const int n = diagram.vertex_count();
  if (static_cast<int>(diagram.edges().size()) != n - 1) throw DomainError("tree_reduce needs a tree");
  {
    std::vector<int> seen{0};
    std::set<int> vis{0};
    for (std::size_t h = 0; h < seen.size(); ++h)
      for (int x : diagram.neighbors(seen[h]))
        if (vis.insert(x).second) seen.push_back(x);
    if (static_cast<int>(vis.size()) != n) throw DomainError("tree_reduce needs a connected diagram");
  }
  for (int v = 0; v < n; ++v) {
    if (diagram.is_pinned(v) && diagram.degree(v) != 1) throw DomainError("pinned vertices must be leaves");
    if (!diagram.is_pinned(v) && diagram.degree(v) != 3) throw DomainError("non-binary tree: free vertex degree != 3");
  }
  const auto pins = diagram.pinned_vertices();
  const int r = root.value_or(pins.at(0));
  if (!diagram.is_pinned(r)) throw DomainError("root must be a pinned leaf");
  const Point root_pos = diagram.position(r);

  ReductionLedger led;
  led.leaves = static_cast<int>(pins.size());
  const int ell = led.leaves - 1;
  led.steps = static_cast<int>(diagram.free_vertices().size());
  led.exponent = (4.0 - diagram.dim()) * led.steps;
  led.apriori_exponent = (4.0 - diagram.dim()) * ell - 2.0;

  std::set<std::pair<Point, Point>> residual;
  std::vector<Diagram> work{diagram};
  while (!work.empty()) {
    Diagram g = std::move(work.back());
    work.pop_back();
    const auto free = g.free_vertices();
    if (free.empty()) {
      const auto& e = g.edges().at(0);
      residual.insert({g.position(e.a), g.position(e.b)});
      continue;
    }
    bool done = false;
    for (int v : free) {
      auto nb = g.neighbors(v);
      std::vector<int> leaves, others;
      for (int x : nb) {
        bool is_root = g.is_pinned(x) && g.position(x) == root_pos;
        (pinned_leaf(g, x) && !is_root ? leaves : others).push_back(x);
      }
      if (leaves.size() == 2 && others.size() == 1) {
        auto c = contract_with_parent(g, v, others[0]);
        work.push_back(std::move(c.first));
        work.push_back(std::move(c.second));
        done = true;
        break;
      }
    }
    if (!done) throw std::logic_error("binary tree without a contractible cherry");
  }
  led.residual.assign(residual.begin(), residual.end());
  return led;
}

Diagram tree_diagram(const trees::AbstractTree& tree, const std::vector<Point>& pins) {
  const int k = tree.leaves();
  if (static_cast<int>(pins.size()) != k) throw DomainError("tree_diagram: one pin per leaf");
  Diagram g(static_cast<int>(pins.at(0).size()));
  for (int l = 0; l < k; ++l) g.add_pinned(pins[static_cast<std::size_t>(l)]);
  for (int v = k; v < tree.node_count(); ++v) g.add_free();
  for (int v = 1; v < tree.node_count(); ++v) g.add_edge(v, tree.parent(v));
  return g;
}

Diagram four_cycle_diagram(const std::vector<Point>& pins) {
  if (pins.size() != 4) throw DomainError("four_cycle_diagram needs four pins");
  Diagram g(static_cast<int>(pins[0].size()));
  std::vector<int> z(4), w(4);
  for (int i = 0; i < 4; ++i) z[static_cast<std::size_t>(i)] = g.add_free();
  for (int i = 0; i < 4; ++i) w[static_cast<std::size_t>(i)] = g.add_pinned(pins[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 4; ++i) {
    g.add_edge(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>((i + 1) % 4)]);
    g.add_edge(z[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(i)]);
  }
  return g;
}

MCEstimate one_loop(const Point& w1, const Point& w2, int L, const McParams& mc) {
  same_dim({&w1, &w2});
  if (w1 == w2) throw DomainError("one_loop needs distinct pins");
  const double sep = std::sqrt(std::pow(bracket_diff(w1, w2), 2) - 1.0);
  if (L < 2.0 * sep - 1e-9) throw DomainError("one_loop needs L >= 2 |w1 - w2|");
  const int d = static_cast<int>(w1.size());
  // The summand is symmetric under (w1, z0) <-> (w2, z2); fix a canonical order.
  const Point& a = std::min(w1, w2);
  const Point& b = std::max(w1, w2);
  Diagram g(d);
  int z0 = g.add_free(), z2 = g.add_free();
  int pa = g.add_pinned(a), pb = g.add_pinned(b);
  g.add_edge(pa, z0);
  g.add_edge(z0, z2, 8.0 - 2.0 * d);
  g.add_edge(z2, pb);
  if (exact_work(g, L) <= kExactWorkLimit) return {val_exact(g, L, mc.workers), 0.0, 0, mc.seed};
  return val_mc(g, L, mc);
}

// ---------------------------------------------------------------------------
// Far regime and fits
// ---------------------------------------------------------------------------

namespace {

double dist(const Point& a, const Point& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(static_cast<double>(a[i]) - b[i], 2);
  return std::sqrt(s);
}

}  // namespace

bool region_filter(const std::vector<Point>& points, double eps, double n, RegionKind kind) {
  if (!(eps > 0)) throw DomainError("eps must be positive");
  if (!(n >= 1)) throw DomainError("n must be >= 1");
  if (points.empty()) throw DomainError("region_filter needs points");
  const double near = eps * n, far = n / eps;
  if (kind == RegionKind::G) {
    for (const auto& p : points)
      for (int c : p)
        if (std::abs(c) > far) return false;
    for (std::size_t i = 1; i < points.size(); ++i)
      if (dist(points[i], points[i - 1]) < near) return false;
    return true;
  }
  const Point& g = points[0];
  const Point origin(g.size(), 0);
  if (dist(g, origin) < near || dist(g, origin) > far) return false;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (dist(points[i], g) < near) return false;
  return true;
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw DomainError("fit_scaling needs at least 3 points");
  ScalingFit fit;
  for (const auto& [n, v] : samples) {
    if (!(n > 0)) throw DomainError("fit_scaling: n must be positive");
    if (!(v > 0)) throw DomainError("fit_scaling: nonpositive value");
    fit.points.emplace_back(std::log(n), std::log(v));
  }
  const double m = static_cast<double>(fit.points.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : fit.points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0) throw DomainError("fit_scaling needs distinct n values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [x, y] : fit.points)
    fit.residual_max = std::max(fit.residual_max, std::fabs(y - (fit.intercept + fit.slope * x)));
  return fit;
}

}  // namespace percolab::diagrams
