#include "percolab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "percolab/battery.hpp"
#include "percolab/common.hpp"
#include "percolab/conntree.hpp"
#include "percolab/diagrams.hpp"
#include "percolab/estimation.hpp"
#include "percolab/integrals.hpp"
#include "percolab/lattice.hpp"
#include "percolab/oracle.hpp"
#include "percolab/pivotals.hpp"
#include "percolab/trees.hpp"

#ifndef PERCOLAB_BUILD_HASH
#define PERCOLAB_BUILD_HASH "unknown"
#endif

namespace percolab::cli {

using json = nlohmann::ordered_json;
using lattice::Point;

std::string build_hash() { return PERCOLAB_BUILD_HASH; }

namespace {

// Assertion failure inside a command: exit code 1.
struct AssertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json parse_json_arg(const std::string& text_or_path) {
  auto first = text_or_path.find_first_not_of(" \t\n");
  if (first != std::string::npos && (text_or_path[first] == '[' || text_or_path[first] == '{')) {
    try {
      return json::parse(text_or_path);
    } catch (const json::exception& e) {
      throw DomainError(std::string("malformed JSON argument: ") + e.what());
    }
  }
  std::ifstream in(text_or_path);
  if (!in) throw DomainError("cannot open " + text_or_path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DomainError("malformed JSON in " + text_or_path + ": " + e.what());
  }
}

std::vector<Point> parse_lattice_points(const std::string& text_or_path) {
  auto pts = parse_points(text_or_path);
  std::vector<Point> out;
  for (const auto& p : pts) {
    Point q;
    for (double v : p) {
      if (v != std::floor(v)) throw DomainError("lattice points need integer coordinates");
      q.push_back(static_cast<int>(v));
    }
    out.push_back(std::move(q));
  }
  return out;
}

int common_dim(const std::vector<std::vector<double>>& pts) {
  if (pts.empty()) throw DomainError("points list is empty");
  for (const auto& p : pts)
    if (p.size() != pts.front().size()) throw DomainError("points have differing dimensions");
  return static_cast<int>(pts.front().size());
}

json point_json(const Point& p) { return json(p); }

json estimate_json(const MCEstimate& e) {
  return json{{"mean", e.mean}, {"stderr", e.stderr_}, {"samples", e.samples}, {"seed", e.seed}};
}

json edge_json(const lattice::Graph& g, const lattice::DirectedEdge& e) {
  return json{{"tail", point_json(g.point(e.tail))}, {"head", point_json(g.point(e.head))}};
}

json conntree_json(const lattice::Graph& g, const conntree::ConnTree& t) {
  json j;
  j["marked"] = json::array();
  for (int v : t.marked) j["marked"].push_back(point_json(g.point(v)));
  j["vertices"] = json::array();
  for (int v : t.vertices) j["vertices"].push_back(point_json(g.point(v)));
  j["parent"] = json::array();
  for (auto [c, p] : t.parent) j["parent"].push_back(json{point_json(g.point(c)), point_json(g.point(p))});
  auto cls = conntree::classify_tree(t);
  j["binary"] = cls.binary;
  if (cls.tree) j["tree"] = cls.tree->canonical();
  if (cls.reason) j["degeneracy"] = conntree::to_string(*cls.reason);
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// instance,n,value,stderr
struct Row {
  std::string instance;
  double n = 0;
  double value = 0;
  double stderr_ = 0;
};

json rows_json(const std::vector<Row>& rows) {
  json a = json::array();
  for (const auto& r : rows) a.push_back(json{{"instance", r.instance}, {"n", r.n}, {"value", r.value}, {"stderr", r.stderr_}});
  return a;
}

void write_csv(std::ostream& os, const std::vector<Row>& rows) {
  os << "instance,n,value,stderr\r\n";
  for (const auto& r : rows)
    os << csv_field(r.instance) << ',' << fmt(r.n) << ',' << fmt(r.value) << ',' << fmt(r.stderr_) << "\r\n";
}

std::vector<Row> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "instance,n,value,stderr") throw DomainError("CSV header must be instance,n,value,stderr");
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    if (f.size() != 4) throw DomainError("CSV row needs 4 fields: " + line);
    try {
      rows.push_back(Row{f[0], std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
    } catch (const std::exception&) {
      throw DomainError("CSV row has a non-numeric field: " + line);
    }
  }
  return rows;
}

// Slope of log value against log n per instance.
json fit_rows(const std::vector<Row>& rows, std::optional<double> expect, double tol, bool& all_pass) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> groups;
  for (const auto& r : rows) {
    if (!groups.count(r.instance)) order.push_back(r.instance);
    groups[r.instance].emplace_back(r.n, r.value);
  }
  json fits = json::array();
  all_pass = true;
  for (const auto& name : order) {
    const auto& g = groups[name];
    json f{{"instance", name}, {"points", g.size()}};
    if (g.size() < 3) {
      f["slope"] = nullptr;
    } else {
      auto fit = diagrams::fit_scaling(g);
      f["slope"] = fit.slope;
      f["intercept"] = fit.intercept;
      f["residual_max"] = fit.residual_max;
      if (expect) {
        bool pass = std::fabs(fit.slope - *expect) <= tol;
        f["expected"] = *expect;
        f["tolerance"] = tol;
        f["pass"] = pass;
        all_pass = all_pass && pass;
      }
    }
    fits.push_back(f);
  }
  return fits;
}

// ---------------------------------------------------------------------------
// Command plumbing
// ---------------------------------------------------------------------------

struct Common {
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out_path;
  std::string csv_path;
};

struct Outcome {
  json result;
  std::vector<Row> rows;
  bool has_rows = false;
  bool pass = true;
  std::string text;  // emitted verbatim instead of JSON when set
};

struct Command {
  CLI::App* app;
  std::function<Outcome()> action;
  bool seeded = true;
};

std::map<std::string, std::string> collect_params(const CLI::App* app) {
  std::map<std::string, std::string> params;
  for (const CLI::Option* opt : app->get_options()) {
    std::string name = opt->get_name();
    if (name == "--help" || name == "-h") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
    } else {
      value = opt->get_default_str();
    }
    params[name] = value;
  }
  return params;
}

void add_common(CLI::App* sub, Common& c, bool seeded) {
  if (seeded)
    sub->add_option("--seed", c.seed, "Random seed (default from PERCOLAB_SEED)")
        ->envname("PERCOLAB_SEED")
        ->capture_default_str();
  sub->add_option("--workers", c.workers, "Worker threads; 1 gives bit-exact reproducibility")->capture_default_str();
  sub->add_option("--out", c.out_path, "Write the JSON document to this file");
  sub->add_option("--csv", c.csv_path, "Write table rows to this CSV file");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      int v = std::stoi(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw DomainError("bad integer list entry '" + item + "'");
    }
  }
  if (out.empty()) throw DomainError("empty integer list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw DomainError("bad number list entry '" + item + "'");
    }
  }
  if (out.empty()) throw DomainError("empty number list");
  return out;
}

lattice::GraphPtr load_graph(const std::string& path, int dim, int radius) {
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    return std::make_shared<const lattice::Graph>(lattice::Graph::parse_edge_list(in));
  }
  if (dim <= 0 || radius < 0) throw DomainError("give --graph or --dim and --radius");
  return std::make_shared<const lattice::Graph>(lattice::Graph::box(dim, radius));
}

// ---------------------------------------------------------------------------
// verify suites
// ---------------------------------------------------------------------------

constexpr double kResidualTol = 1e-12;

json suite_switching(const std::vector<double>& ps, unsigned workers, bool& pass) {
  json inst = json::array();
  int checked = 0, failures = 0;
  for (const auto& g : battery::switching_graphs()) {
    const int k = static_cast<int>(g.marked.size());
    for (const auto& tree : battery::switching_trees(k))
      for (const auto& e : battery::eligible_edges(g)) {
        auto series = oracle::switching_series(g.graph, g.marked, tree, e, workers);
        for (double p : ps) {
          auto r = oracle::switching_report(series, p);
          bool ok = r.residual < kResidualTol;
          ++checked;
          failures += !ok;
          inst.push_back(json{{"graph", g.name},
                              {"tree", tree.canonical()},
                              {"g", edge_json(*g.graph, e)},
                              {"p", p},
                              {"lhs", r.lhs},
                              {"rhs", r.rhs},
                              {"residual", r.residual},
                              {"vacuous", r.vacuous},
                              {"pass", ok}});
        }
      }
  }
  pass = failures == 0;
  return json{{"checked", checked}, {"failures", failures}, {"tolerance", kResidualTol}, {"instances", inst}};
}

json suite_bubble(const std::vector<double>& ps, std::uint64_t seed, unsigned workers, bool& pass) {
  auto b = battery::bubble_instance();
  std::vector<std::pair<std::string, oracle::SubsetFunction>> fs{
      {"constant", oracle::constant_function(1.0)}, {"indicator", oracle::indicator_contains(b.indicator_set)}};
  for (std::uint64_t s = 0; s < 5; ++s)
    fs.emplace_back("random-" + std::to_string(seed + s), oracle::seeded_random_function(seed + s));
  json inst = json::array();
  int checked = 0, failures = 0;
  for (const auto& f : b.f)
    for (const auto& [name, G] : fs)
      for (double p : ps) {
        auto r = oracle::verify_bubble_switch(b.graph, p, f, b.K, b.x1, b.x2, G, workers);
        bool ok = r.residual < kResidualTol;
        ++checked;
        failures += !ok;
        inst.push_back(json{{"f", edge_json(*b.graph, f)},
                            {"G", name},
                            {"p", p},
                            {"lhs", r.lhs},
                            {"rhs", r.rhs},
                            {"residual", r.residual},
                            {"pass", ok}});
      }
  pass = failures == 0;
  return json{{"checked", checked}, {"failures", failures}, {"tolerance", kResidualTol}, {"instances", inst}};
}

json suite_bk(std::uint64_t count, std::uint64_t seed, unsigned workers, bool& pass) {
  json inst = json::array();
  int violations = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    auto b = battery::random_bk_instance(seed, i);
    auto r = oracle::verify_bk(b.graph, b.p, *b.a, *b.b, workers);
    bool ok = r.lhs <= r.rhs + kResidualTol;
    violations += !ok;
    inst.push_back(json{{"index", i}, {"edges", b.graph->num_edges()}, {"p", b.p}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"pass", ok}});
  }
  auto c = battery::disjoint_bk_instance();
  auto r = oracle::verify_bk(c.graph, c.p, *c.a, *c.b, workers);
  bool equal = std::fabs(r.lhs - r.rhs) < kResidualTol;
  pass = violations == 0 && equal;
  return json{{"checked", count},
              {"violations", violations},
              {"control", json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"equal", equal}}},
              {"instances", inst}};
}

json suite_tree_bound(const std::vector<double>& ps, unsigned workers, bool& pass) {
  json inst = json::array();
  int failures = 0, checked = 0;
  for (const auto& g : battery::tree_bound_graphs())
    for (double p : ps) {
      auto r = oracle::verify_tree_bound(g.graph, p, g.marked, workers);
      bool ok = r.tau <= r.bound * (1 + kResidualTol) + kResidualTol;
      ++checked;
      failures += !ok;
      inst.push_back(json{{"graph", g.name},
                          {"k", g.marked.size()},
                          {"edges", g.graph->num_edges()},
                          {"p", p},
                          {"tau", r.tau},
                          {"bound", r.bound},
                          {"pass", ok}});
    }
  pass = failures == 0;
  return json{{"checked", checked}, {"failures", failures}, {"instances", inst}};
}

// Fast and definitional pivotals agree (as ordered, oriented lists) and
// every sampled open path crosses them in order.
bool pivotals_agree(const lattice::Configuration& c, int x, int y, std::uint64_t seed) {
  auto fast = pivotals::open_pivotals(c, x, y);
  auto slow = pivotals::open_pivotals_definitional(c, x, y);
  if (fast.edges != slow.edges) return false;
  for (const auto& path : pivotals::random_open_paths(c, x, y, 3, seed))
    if (!pivotals::order_consistent(c, fast, path)) return false;
  return true;
}

bool extremes_agree(const lattice::Configuration& c, int x, const std::vector<int>& targets) {
  auto a = pivotals::common_pivotal_extremes(c, x, targets);
  auto b = pivotals::common_pivotal_extremes_definitional(c, x, targets);
  return a.first == b.first && a.last == b.last;
}

json suite_pivotal_order(std::uint64_t random_configs, std::uint64_t seed, bool& pass) {
  json graphs = json::array();
  int failures = 0;
  for (const auto& g : battery::all_graphs()) {
    if (g.graph->num_edges() > 14) continue;
    std::uint64_t configs = 0, pairs = 0;
    int bad = 0;
    const std::uint64_t total = std::uint64_t{1} << g.graph->num_edges();
    for (std::uint64_t m = 0; m < total; ++m) {
      auto c = lattice::Configuration::from_mask(g.graph, m, 0.5);
      ++configs;
      std::vector<int> reach;
      for (std::size_t i = 1; i < g.marked.size(); ++i) {
        if (!lattice::connected(c, g.marked[0], g.marked[i])) continue;
        ++pairs;
        reach.push_back(g.marked[i]);
        if (!pivotals_agree(c, g.marked[0], g.marked[i], seed + m)) ++bad;
      }
      if (reach.size() == g.marked.size() - 1 && !extremes_agree(c, g.marked[0], reach)) ++bad;
    }
    failures += bad;
    graphs.push_back(json{{"graph", g.name}, {"edges", g.graph->num_edges()}, {"configurations", configs},
                          {"pairs", pairs}, {"mismatches", bad}});
  }

  auto box = std::make_shared<const lattice::Graph>(lattice::Graph::box(2, 3));
  CounterRng pick(seed, {0x7069766f});
  std::uint64_t accepted = 0, stream = 0;
  int bad = 0;
  const auto n = static_cast<std::uint64_t>(box->num_vertices());
  while (accepted < random_configs) {
    auto c = lattice::sample_configuration(box, 0.6, seed, stream++);
    int x = static_cast<int>(pick.below(n)), y = static_cast<int>(pick.below(n));
    if (x == y || !lattice::connected(c, x, y)) continue;
    ++accepted;
    if (!pivotals_agree(c, x, y, seed + stream) || !extremes_agree(c, x, {y})) ++bad;
  }
  failures += bad;
  pass = failures == 0;
  return json{{"graphs", graphs},
              {"random", json{{"box", "B(3) in Z^2"}, {"p", 0.6}, {"configurations", accepted}, {"mismatches", bad}}},
              {"mismatches", failures}};
}

json witness_json(const lattice::Graph& g, const oracle::WitnessReport& r) {
  json w = json::array();
  for (const auto& c : r.cycle_witnesses)
    w.push_back(json{{"child", point_json(g.point(c.child))},
                     {"a", point_json(g.point(c.a))},
                     {"b", point_json(g.point(c.b))},
                     {"c", point_json(g.point(c.c))}});
  return json{{"spanning_tree", r.spanning_tree}, {"disjoint_pairs", r.disjoint_pairs}, {"cycles", r.cycles},
              {"cycle_witnesses", w}, {"failure", r.failure}};
}

json suite_witness(std::uint64_t random_configs, std::uint64_t seed, bool& pass) {
  int failures = 0;
  auto junction = battery::three_branch_junction();
  auto full = lattice::Configuration::all(junction.graph, true, 0.5);
  auto tree = conntree::build_connectivity_tree(full, junction.marked);
  json exemplar = json::array();
  bool found_branch3 = false;
  for (int v : tree.vertices) {
    if (tree.children(v).size() < 2) continue;
    auto r = oracle::verify_witness_structure(full, tree, v);
    found_branch3 = found_branch3 || tree.children(v).size() >= 3;
    failures += !r.ok();
    auto j = witness_json(*junction.graph, r);
    j["v"] = point_json(junction.graph->point(v));
    j["children"] = tree.children(v).size();
    exemplar.push_back(j);
  }
  if (!found_branch3) ++failures;

  // Conditioned on all marked vertices connected, split between two graphs.
  std::vector<battery::MarkedGraph> graphs{junction};
  {
    battery::MarkedGraph grid;
    grid.name = "grid-3x3-corners";
    grid.graph = std::make_shared<const lattice::Graph>(lattice::Graph::box(2, 1));
    for (Point p : {Point{-1, -1}, Point{1, 1}, Point{1, -1}, Point{-1, 1}}) grid.marked.push_back(grid.graph->vertex(p));
    graphs.push_back(grid);
  }
  json sampled = json::array();
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto& g = graphs[gi];
    const std::uint64_t want = random_configs / graphs.size() + (gi < random_configs % graphs.size() ? 1 : 0);
    std::uint64_t accepted = 0, stream = 0, vertices_checked = 0, branch3 = 0;
    int bad = 0;
    json first_failure;
    while (accepted < want) {
      auto c = lattice::sample_configuration(g.graph, 0.7, stream_key(seed, {gi}), stream++);
      bool all = std::all_of(g.marked.begin(), g.marked.end(),
                             [&](int x) { return lattice::connected(c, g.marked[0], x); });
      if (!all) continue;
      ++accepted;
      auto t = conntree::build_connectivity_tree(c, g.marked);
      for (int v : t.vertices) {
        auto kids = t.children(v);
        if (kids.size() < 2) continue;
        ++vertices_checked;
        branch3 += kids.size() >= 3;
        auto r = oracle::verify_witness_structure(c, t, v);
        if (!r.ok()) {
          ++bad;
          if (first_failure.is_null())
            first_failure = json{{"configuration", c.bitstring()}, {"v", point_json(g.graph->point(v))}, {"failure", r.failure}};
        }
      }
    }
    failures += bad;
    sampled.push_back(json{{"graph", g.name},
                           {"configurations", accepted},
                           {"attempts", stream},
                           {"vertices_checked", vertices_checked},
                           {"branch3_vertices", branch3},
                           {"failures", bad},
                           {"first_failure", first_failure}});
  }
  pass = failures == 0;
  return json{{"exemplar", json{{"graph", junction.name}, {"three_children_found", found_branch3}, {"vertices", exemplar}}},
              {"sampled", sampled},
              {"failures", failures}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Public helpers
// ---------------------------------------------------------------------------

integrals::LimitInputs load_inputs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open inputs file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DomainError("inputs file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw DomainError("inputs file must hold a JSON object");
  auto number = [&](const char* field) {
    if (!j.contains(field)) throw DomainError(std::string("missing field '") + field + "'");
    if (!j[field].is_number()) throw DomainError(std::string("field '") + field + "' must be a number");
    double v = j[field].get<double>();
    if (!(v > 0) || !std::isfinite(v)) throw DomainError(std::string("field '") + field + "' must be positive");
    return v;
  };
  integrals::LimitInputs li;
  li.alpha = number("alpha");
  li.p_c = number("p_c");
  if (!(li.p_c < 1)) throw DomainError("field 'p_c' must be below 1");
  li.rho = number("rho");
  double d = number("d");
  if (d != std::floor(d)) throw DomainError("field 'd' must be an integer");
  li.d = static_cast<int>(d);
  if (li.d <= 6) throw DomainError("field 'd': the limit formula requires d > 6");
  li.validate();
  return li;
}

std::vector<std::vector<double>> parse_points(const std::string& text_or_path) {
  json j = parse_json_arg(text_or_path);
  if (!j.is_array()) throw DomainError("points must be a JSON array of coordinate arrays");
  std::vector<std::vector<double>> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.empty()) throw DomainError("each point must be a nonempty array of numbers");
    std::vector<double> q;
    for (const auto& v : p) {
      if (!v.is_number()) throw DomainError("point coordinates must be numbers");
      q.push_back(v.get<double>());
    }
    out.push_back(std::move(q));
  }
  common_dim(out);
  return out;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Percolation k-point tooling: exact oracles, diagram sums, continuum integrals, estimators"};
  app.require_subcommand(1);
  app.fallthrough(false);
  Common common;
  common.workers = default_workers();
  std::vector<Command> commands;

  // sample
  {
    auto* s = app.add_subcommand("sample", "Sample configurations; optionally emit connectivity trees");
    auto graph_path = std::make_shared<std::string>();
    auto dim = std::make_shared<int>(2);
    auto radius = std::make_shared<int>(2);
    auto p = std::make_shared<double>(0.5);
    auto count = std::make_shared<std::uint64_t>(1);
    auto marked = std::make_shared<std::string>();
    auto emit_trees = std::make_shared<bool>(false);
    s->add_option("--graph", *graph_path, "Edge-list file; otherwise a box");
    s->add_option("--dim", *dim, "Box dimension")->capture_default_str();
    s->add_option("--radius", *radius, "Box radius")->capture_default_str();
    s->add_option("--p", *p, "Edge probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    s->add_option("--count", *count, "Number of configurations")->capture_default_str();
    s->add_option("--marked", *marked, "Marked points (JSON array) for --emit-trees");
    s->add_flag("--emit-trees", *emit_trees, "Emit connectivity trees of the marked points");
    add_common(s, common, true);
    commands.push_back({s, [=, &common] {
                          auto g = load_graph(*graph_path, *dim, *radius);
                          std::vector<int> mk;
                          if (*emit_trees) {
                            if (marked->empty()) throw DomainError("--emit-trees needs --marked");
                            for (const auto& q : parse_lattice_points(*marked)) mk.push_back(g->vertex(q));
                          }
                          Outcome o;
                          o.result["graph_hash"] = g->hash();
                          o.result["p"] = *p;
                          o.result["seed"] = common.seed;
                          o.result["edges"] = g->num_edges();
                          json cs = json::array();
                          for (std::uint64_t i = 0; i < *count; ++i) {
                            auto c = lattice::sample_configuration(g, *p, common.seed, i);
                            json cj{{"stream", i}, {"bits", c.bitstring()}};
                            if (*emit_trees) {
                              bool all = std::all_of(mk.begin(), mk.end(), [&](int x) { return lattice::connected(c, mk[0], x); });
                              cj["connected"] = all;
                              if (all) cj["tree"] = conntree_json(*g, conntree::build_connectivity_tree(c, mk));
                            }
                            cs.push_back(cj);
                          }
                          o.result["configurations"] = cs;
                          return o;
                        }});
  }

  // trees
  {
    auto* s = app.add_subcommand("trees", "Enumerate labelled binary trees with k leaves");
    auto k = std::make_shared<int>(3);
    auto emit = std::make_shared<std::string>("json");
    s->add_option("--k", *k, "Number of leaves")->required();
    s->add_option("--emit", *emit, "json or newick")->capture_default_str()->check(CLI::IsMember({"json", "newick"}));
    add_common(s, common, false);
    commands.push_back({s, [=] {
                          Outcome o;
                          auto ts = trees::enumerate_trees(*k);
                          if (*emit == "newick") {
                            for (const auto& t : ts) o.text += t.canonical() + "\n";
                            return o;
                          }
                          json a = json::array();
                          for (const auto& t : ts) {
                            json parent = json::array();
                            for (int v = 0; v < t.node_count(); ++v) parent.push_back(t.parent(v));
                            a.push_back(json{{"newick", t.canonical()}, {"parent", parent}});
                          }
                          o.result = json{{"k", *k}, {"count", ts.size()}, {"expected", trees::tree_count(*k)}, {"trees", a}};
                          return o;
                        },
                        false});
  }

  // val
  {
    auto* s = app.add_subcommand("val", "Truncated diagram sums for scaled pin sets");
    auto kind = std::make_shared<std::string>("tree");
    auto newick = std::make_shared<std::string>();
    auto pins = std::make_shared<std::string>();
    auto d = std::make_shared<int>(7);
    auto ns = std::make_shared<std::string>("1");
    auto samples = std::make_shared<std::uint64_t>(0);
    auto L = std::make_shared<int>(0);
    auto expect = std::make_shared<double>(0);
    auto tol = std::make_shared<double>(0);
    s->add_option("--diagram", *kind, "tree or cycle")->capture_default_str()->check(CLI::IsMember({"tree", "cycle"}));
    s->add_option("--tree", *newick, "Tree in canonical text form (for --diagram tree)");
    s->add_option("--pins", *pins, "Unit pin positions (JSON); pin i sits at floor(n * pin_i)")->required();
    s->add_option("--d", *d, "Dimension")->capture_default_str();
    s->add_option("--n", *ns, "Comma-separated scales")->capture_default_str();
    s->add_option("--samples", *samples, "Monte Carlo samples; 0 for the exact sum")->capture_default_str();
    s->add_option("--L", *L, "Truncation radius; 0 for the default")->capture_default_str();
    auto* ex = s->add_option("--expect", *expect, "Expected slope of log value in log n");
    s->add_option("--tol", *tol, "Slope tolerance")->needs(ex);
    add_common(s, common, true);
    commands.push_back({s, [=, &common] {
                          auto unit = parse_points(*pins);
                          if (common_dim(unit) != *d) throw DomainError("pin dimension differs from --d");
                          Outcome o;
                          o.has_rows = true;
                          std::string label = *kind == "tree" ? "tree:" + *newick : "cycle";
                          for (int n : parse_int_list(*ns)) {
                            std::vector<Point> pp;
                            for (const auto& u : unit) {
                              Point q;
                              for (double v : u) q.push_back(static_cast<int>(std::floor(n * v)));
                              pp.push_back(q);
                            }
                            std::optional<diagrams::Diagram> dg;
                            if (*kind == "tree") {
                              if (newick->empty()) throw DomainError("--diagram tree needs --tree");
                              dg = diagrams::tree_diagram(trees::AbstractTree::from_newick(*newick), pp);
                            } else {
                              dg = diagrams::four_cycle_diagram(pp);
                            }
                            int Ln = *L > 0 ? *L : diagrams::default_truncation(*dg);
                            if (*samples == 0) {
                              o.rows.push_back({label, double(n), diagrams::val_exact(*dg, Ln, common.workers), 0.0});
                            } else {
                              auto e = diagrams::val_mc(*dg, Ln, {*samples, common.seed, common.workers});
                              o.rows.push_back({label, double(n), e.mean, e.stderr_});
                            }
                          }
                          bool pass = true;
                          std::optional<double> want;
                          if (s->count("--expect")) want = *expect;
                          o.result["fits"] = fit_rows(o.rows, want, *tol, pass);
                          o.pass = pass;
                          return o;
                        }});
  }

  // conv-check
  {
    auto* s = app.add_subcommand("conv-check", "Convolution ratio checks on scaled point families");
    auto variant = std::make_shared<std::string>("standard");
    auto d = std::make_shared<int>(7);
    auto a = std::make_shared<double>(2);
    auto b = std::make_shared<double>(3);
    auto ns = std::make_shared<std::string>("2,4,8");
    auto lf = std::make_shared<int>(4);
    s->add_option("--variant", *variant, "standard, log or triple")->capture_default_str()->check(CLI::IsMember({"std", "standard", "log", "triple"}));
    s->add_option("--d", *d, "Dimension")->capture_default_str();
    s->add_option("--a", *a, "Exponent a")->capture_default_str();
    s->add_option("--b", *b, "Exponent b")->capture_default_str();
    s->add_option("--n", *ns, "Separations: x = 0, y = n e_1, w = n e_2")->capture_default_str();
    s->add_option("--L-factor", *lf, "Truncation radius as a multiple of n")->capture_default_str();
    add_common(s, common, false);
    commands.push_back({s, [=, &common] {
                          auto v = diagrams::parse_conv_variant(*variant);
                          Outcome o;
                          o.has_rows = true;
                          double lo = INFINITY, hi = 0;
                          for (int n : parse_int_list(*ns)) {
                            Point x(static_cast<std::size_t>(*d), 0), y = x, w = x;
                            y[0] = n;
                            if (*d > 1) w[1] = n;
                            std::optional<Point> wp;
                            if (v == diagrams::ConvVariant::triple) wp = w;
                            auto r = diagrams::check_convolution(x, y, *a, *b, *lf * n, v, wp, common.workers);
                            o.rows.push_back({*variant, double(n), r.ratio, 0.0});
                            lo = std::min(lo, r.ratio);
                            hi = std::max(hi, r.ratio);
                          }
                          o.result = json{{"variant", *variant}, {"min_ratio", lo}, {"max_ratio", hi}, {"spread", hi / lo}};
                          return o;
                        },
                        false});
  }

  // one-loop
  {
    auto* s = app.add_subcommand("one-loop", "One-loop sums D(n) with pins 0 and n e_1");
    auto d = std::make_shared<int>(7);
    auto ns = std::make_shared<std::string>("6,9,12,18");
    auto samples = std::make_shared<std::uint64_t>(1000000);
    auto lf = std::make_shared<int>(2);
    auto expect = std::make_shared<double>(0);
    auto tol = std::make_shared<double>(0);
    s->add_option("--d", *d, "Dimension")->capture_default_str();
    s->add_option("--n", *ns, "Comma-separated separations")->capture_default_str();
    s->add_option("--samples", *samples, "Monte Carlo samples when the exact sum is too large")->capture_default_str();
    s->add_option("--L-factor", *lf, "Truncation radius as a multiple of n")->capture_default_str();
    auto* ex = s->add_option("--expect", *expect, "Expected slope");
    s->add_option("--tol", *tol, "Slope tolerance")->needs(ex);
    add_common(s, common, true);
    commands.push_back({s, [=, &common] {
                          Outcome o;
                          o.has_rows = true;
                          for (int n : parse_int_list(*ns)) {
                            Point w1(static_cast<std::size_t>(*d), 0), w2 = w1;
                            w2[0] = n;
                            auto e = diagrams::one_loop(w1, w2, *lf * n, {*samples, common.seed, common.workers});
                            o.rows.push_back({"one-loop-d" + std::to_string(*d), double(n), e.mean, e.stderr_});
                          }
                          bool pass = true;
                          std::optional<double> want;
                          if (s->count("--expect")) want = *expect;
                          o.result["fits"] = fit_rows(o.rows, want, *tol, pass);
                          o.pass = pass;
                          return o;
                        }});
  }

  // fit
  {
    auto* s = app.add_subcommand("fit", "Log-log slopes per instance from an instance,n,value,stderr CSV");
    auto input = std::make_shared<std::string>();
    auto expect = std::make_shared<double>(0);
    auto tol = std::make_shared<double>(0);
    s->add_option("input", *input, "CSV file")->required();
    auto* ex = s->add_option("--expect", *expect, "Expected slope");
    s->add_option("--tol", *tol, "Slope tolerance")->needs(ex);
    add_common(s, common, false);
    commands.push_back({s, [=] {
                          Outcome o;
                          bool pass = true;
                          std::optional<double> want;
                          if (s->count("--expect")) want = *expect;
                          o.result["fits"] = fit_rows(read_csv(*input), want, *tol, pass);
                          o.pass = pass;
                          return o;
                        },
                        false});
  }

  // integral
  {
    auto* s = app.add_subcommand("integral", "Continuum tree integral I_T(y)");
    auto newick = std::make_shared<std::string>();
    auto points = std::make_shared<std::string>();
    auto d = std::make_shared<int>(7);
    auto samples = std::make_shared<std::uint64_t>(200000);
    auto method = std::make_shared<std::string>("mc");
    auto rf = std::make_shared<double>(2.0);
    s->add_option("--tree", *newick, "Tree in canonical text form (default: the k = 3 tree)");
    s->add_option("--points", *points, "Points y_0..y_{k-1} (JSON array or file)")->required();
    s->add_option("--d", *d, "Dimension")->capture_default_str();
    s->add_option("--samples", *samples, "Monte Carlo samples")->capture_default_str();
    s->add_option("--method", *method, "mc, quad (k = 3 only) or both")->capture_default_str()->check(CLI::IsMember({"mc", "quad", "both"}));
    s->add_option("--radius-factor", *rf, "Mixture radius in units of the point-set diameter")->capture_default_str();
    add_common(s, common, true);
    commands.push_back({s, [=, &common] {
                          auto y = parse_points(*points);
                          if (common_dim(y) != *d) throw DomainError("point dimension differs from --d");
                          const int k = static_cast<int>(y.size());
                          auto tree = newick->empty() ? trees::AbstractTree::from_newick("(1,2)0;") : trees::AbstractTree::from_newick(*newick);
                          if (tree.leaves() != k) throw DomainError("tree leaf count differs from the number of points");
                          Outcome o;
                          o.result["tree"] = tree.canonical();
                          if (*method != "quad") {
                            auto e = integrals::eval_I_T(tree, y, *d, {*samples, common.seed, common.workers, *rf});
                            o.result["mean"] = e.mean;
                            o.result["stderr"] = e.stderr_;
                            o.result["samples"] = e.samples;
                          }
                          if (*method != "mc") {
                            if (k != 3) throw DomainError("quadrature is available for k = 3 only");
                            integrals::ContinuumPoint a(y[1]), b(y[2]);
                            for (int i = 0; i < *d; ++i) {
                              a[i] -= y[0][i];
                              b[i] -= y[0][i];
                            }
                            auto q = integrals::quad_I3(a, b, *d);
                            o.result["quad"] = json{{"value", q.value}, {"error", q.error}, {"tail", q.tail}};
                          }
                          return o;
                        }});
  }

  // predict
  {
    auto* s = app.add_subcommand("predict", "Predicted k-point limit constant from limit inputs");
    auto k = std::make_shared<int>(3);
    auto inputs = std::make_shared<std::string>();
    auto points = std::make_shared<std::string>();
    auto samples = std::make_shared<std::uint64_t>(200000);
    auto rf = std::make_shared<double>(2.0);
    s->add_option("--k", *k, "Number of points")->capture_default_str();
    s->add_option("--inputs", *inputs, "JSON file with alpha, p_c, rho, d")->required();
    s->add_option("--points", *points, "Points y_0..y_{k-1} (JSON array or file)")->required();
    s->add_option("--samples", *samples, "Monte Carlo samples per tree")->capture_default_str();
    s->add_option("--radius-factor", *rf, "Mixture radius in units of the point-set diameter")->capture_default_str();
    add_common(s, common, true);
    commands.push_back({s, [=, &common] {
                          auto li = load_inputs(*inputs);
                          auto y = parse_points(*points);
                          if (common_dim(y) != li.d) throw DomainError("point dimension differs from d in the inputs");
                          if (static_cast<int>(y.size()) != *k) throw DomainError("--k differs from the number of points");
                          auto pr = integrals::predicted_kpoint_constant(*k, y, li, {*samples, common.seed, common.workers, *rf});
                          Outcome o;
                          o.result = json{{"inputs", json{{"alpha", li.alpha}, {"p_c", li.p_c}, {"rho", li.rho}, {"d", li.d}, {"beta", li.beta()}}},
                                          {"value", pr.value},
                                          {"stderr", pr.stderr_}};
                          json terms = json::array();
                          auto ts = trees::enumerate_trees(*k);
                          for (std::size_t i = 0; i < pr.terms.size(); ++i) {
                            auto t = estimate_json(pr.terms[i]);
                            t["tree"] = ts[i].canonical();
                            terms.push_back(t);
                          }
                          o.result["terms"] = terms;
                          return o;
                        }});
  }

  // tau
  {
    auto* s = app.add_subcommand("tau", "Monte Carlo k-point function on a box");
    auto points = std::make_shared<std::string>();
    auto radius = std::make_shared<int>(4);
    auto p = std::make_shared<double>(0.5);
    auto trials = std::make_shared<std::uint64_t>(10000);
    s->add_option("--points", *points, "Lattice points (JSON array or file)")->required();
    s->add_option("--radius", *radius, "Box radius")->capture_default_str();
    s->add_option("--p", *p, "Edge probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    s->add_option("--trials", *trials, "Independent configurations")->capture_default_str();
    add_common(s, common, true);
    commands.push_back({s, [=, &common] {
                          auto pts = parse_lattice_points(*points);
                          auto box = estimation::make_box(static_cast<int>(pts.front().size()), *radius);
                          auto e = estimation::estimate_tau_k(box, *p, pts, *trials, common.seed, common.workers);
                          Outcome o;
                          o.result = estimate_json(e);
                          return o;
                        }});
  }

  // rho
  {
    auto* s = app.add_subcommand("rho", "Truncated vertex-factor proxy under one-arm conditioning");
    auto d = std::make_shared<int>(2);
    auto radius = std::make_shared<int>(8);
    auto p = std::make_shared<double>(0.5);
    auto R = std::make_shared<int>(4);
    auto M = std::make_shared<int>(1);
    auto trials = std::make_shared<std::uint64_t>(1000);
    auto attempts = std::make_shared<std::uint64_t>(estimation::kMaxConditionAttempts);
    s->add_option("--d", *d, "Dimension")->capture_default_str();
    s->add_option("--radius", *radius, "Box radius")->capture_default_str();
    s->add_option("--p", *p, "Edge probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    s->add_option("--R", *R, "Conditioning distance")->capture_default_str();
    s->add_option("--M", *M, "Truncation of the edge sum")->capture_default_str();
    s->add_option("--trials", *trials, "Trials")->capture_default_str();
    s->add_option("--max-attempts", *attempts, "Rejection cap per conditioned sample")->capture_default_str();
    add_common(s, common, true);
    commands.push_back({s, [=, &common] {
                          auto box = estimation::make_box(*d, *radius);
                          auto r = estimation::estimate_rho_truncated(box, *p, *R, *M, *trials, common.seed, common.workers, *attempts);
                          Outcome o;
                          o.result = estimate_json(r.value);
                          o.result["proxy"] = true;
                          o.result["M"] = r.truncation_M;
                          o.result["R"] = r.proxy_R;
                          return o;
                        }});
  }

  // bubble
  {
    auto* s = app.add_subcommand("bubble", "Doubly-connected bubble sum proxy with radial shells");
    auto d = std::make_shared<int>(2);
    auto radius = std::make_shared<int>(8);
    auto p = std::make_shared<double>(0.5);
    auto R = std::make_shared<int>(4);
    auto trials = std::make_shared<std::uint64_t>(1000);
    auto attempts = std::make_shared<std::uint64_t>(estimation::kMaxConditionAttempts);
    s->add_option("--d", *d, "Dimension")->capture_default_str();
    s->add_option("--radius", *radius, "Box radius")->capture_default_str();
    s->add_option("--p", *p, "Edge probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    s->add_option("--R", *R, "Conditioning distance")->capture_default_str();
    s->add_option("--trials", *trials, "Trials")->capture_default_str();
    s->add_option("--max-attempts", *attempts, "Rejection cap per conditioned sample")->capture_default_str();
    add_common(s, common, true);
    commands.push_back({s, [=, &common] {
                          auto box = estimation::make_box(*d, *radius);
                          auto b = estimation::estimate_bubble(box, *p, *R, *trials, common.seed, common.workers, *attempts);
                          Outcome o;
                          o.result = estimate_json(b.value);
                          o.result["proxy"] = true;
                          o.has_rows = true;
                          for (std::size_t r = 0; r < b.shells.size(); ++r)
                            o.rows.push_back({"shell", double(r), b.shells[r].mean, b.shells[r].stderr_});
                          return o;
                        }});
  }

  // probe
  {
    auto* s = app.add_subcommand("probe", "Rescaled k-point sequence at x_i = floor(n y_i)");
    auto k = std::make_shared<int>(0);
    auto ypath = std::make_shared<std::string>();
    auto ns = std::make_shared<std::string>("4,8,16");
    auto p = std::make_shared<double>(0.5);
    auto trials = std::make_shared<std::uint64_t>(1000);
    auto maxv = std::make_shared<std::uint64_t>(estimation::kMaxBoxVertices);
    s->add_option("--k", *k, "Number of points (checked against --y)");
    s->add_option("--y", *ypath, "Directions y_i (JSON array or file)")->required();
    s->add_option("--n", *ns, "Comma-separated scales")->capture_default_str();
    s->add_option("--p", *p, "Edge probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    s->add_option("--trials", *trials, "Trials per scale")->capture_default_str();
    s->add_option("--max-vertices", *maxv, "Box size guard")->capture_default_str();
    add_common(s, common, true);
    commands.push_back({s, [=, &common] {
                          auto y = parse_points(*ypath);
                          if (*k != 0 && *k != static_cast<int>(y.size())) throw DomainError("--k differs from the number of directions");
                          auto rows = estimation::scaling_probe(y, common_dim(y), *p, parse_int_list(*ns), *trials, common.seed,
                                                                common.workers, *maxv);
                          Outcome o;
                          o.has_rows = true;
                          json table = json::array();
                          for (const auto& r : rows) {
                            o.rows.push_back({"probe", double(r.n), r.rescaled, r.rescaled_stderr});
                            table.push_back(json{{"n", r.n}, {"box_radius", r.box_radius}, {"tau", estimate_json(r.tau)},
                                                 {"rescaled", r.rescaled}, {"rescaled_stderr", r.rescaled_stderr}});
                          }
                          o.result = json{{"exploration_only", true}, {"scales", table}};
                          return o;
                        }});
  }

  // verify
  {
    auto* s = app.add_subcommand("verify", "Exact oracle suites on the hand-built battery");
    auto suite = std::make_shared<std::string>();
    auto ps = std::make_shared<std::string>();
    auto count = std::make_shared<std::uint64_t>(0);
    s->add_option("suite", *suite, "switching, bubble-switch, bk, tree-bound, pivotal-order or witness")
        ->required()
        ->check(CLI::IsMember({"switching", "bubble-switch", "bk", "tree-bound", "pivotal-order", "witness"}));
    s->add_option("--p", *ps, "Comma-separated p values (suite default when omitted)");
    s->add_option("--count", *count, "Random instances or configurations (suite default when 0)")->capture_default_str();
    add_common(s, common, true);
    commands.push_back({s, [=, &common] {
                          auto plist = [&](std::vector<double> dflt) { return ps->empty() ? dflt : parse_double_list(*ps); };
                          auto n_or = [&](std::uint64_t dflt) { return *count ? *count : dflt; };
                          Outcome o;
                          bool pass = false;
                          if (*suite == "switching") o.result = suite_switching(plist({0.3, 0.5, 0.7}), common.workers, pass);
                          else if (*suite == "bubble-switch") o.result = suite_bubble(plist({0.3, 0.5, 0.7}), common.seed, common.workers, pass);
                          else if (*suite == "bk") o.result = suite_bk(n_or(200), common.seed, common.workers, pass);
                          else if (*suite == "tree-bound") o.result = suite_tree_bound(plist({0.2, 0.4, 0.6, 0.8}), common.workers, pass);
                          else if (*suite == "pivotal-order") o.result = suite_pivotal_order(n_or(1000), common.seed, pass);
                          else o.result = suite_witness(n_or(1000), common.seed, pass);
                          o.result["suite"] = *suite;
                          o.result["pass"] = pass;
                          o.pass = pass;
                          return o;
                        }});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kExitUsage;
  }

  for (const auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    RunManifest m;
    m.command = cmd.app->get_name();
    m.params = collect_params(cmd.app);
    m.seed = cmd.seeded ? common.seed : 0;
    m.build = build_hash();
    m.started = utc_now();
    Outcome o;
    try {
      o = cmd.action();
    } catch (const GuardError& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const DomainError& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitAssertion;
    }
    m.finished = utc_now();

    if (!o.text.empty()) {
      out << o.text;
      return o.pass ? kExitOk : kExitAssertion;
    }
    json manifest{{"command", m.command}, {"params", m.params}, {"seed", m.seed}, {"build", m.build},
                  {"started", m.started}, {"finished", m.finished}};
    json doc{{"schema", kSchemaVersion}, {"manifest", manifest}, {"result", o.result}};
    if (o.has_rows) doc["rows"] = rows_json(o.rows);
    if (!common.csv_path.empty()) {
      if (!o.has_rows) {
        err << "error: " << m.command << " produces no table for --csv\n";
        return kExitUsage;
      }
      std::ofstream csv(common.csv_path, std::ios::binary);
      write_csv(csv, o.rows);
      std::ofstream side(common.csv_path + ".manifest.json");
      side << json{{"schema", kSchemaVersion}, {"manifest", manifest}}.dump(2) << "\n";
    }
    if (!common.out_path.empty()) {
      std::ofstream f(common.out_path);
      f << doc.dump(2) << "\n";
    } else {
      out << doc.dump(2) << "\n";
    }
    return o.pass ? kExitOk : kExitAssertion;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace percolab::cli
