// One line per acceptance criterion: PASS/FAIL, details, wall time.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "brute_oracles.hpp"
#include "percolab/battery.hpp"
#include "percolab/cli.hpp"
#include "percolab/conntree.hpp"
#include "percolab/diagrams.hpp"
#include "percolab/estimation.hpp"
#include "percolab/integrals.hpp"
#include "percolab/oracle.hpp"
#include "percolab/trees.hpp"

using namespace percolab;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct CliResult {
  int code = 0;
  json doc;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "percolab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.err = err.str();
  if (!out.str().empty()) r.doc = json::parse(out.str());
  return r;
}

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------

Verdict switching_identity() {
  auto r = run_cli({"verify", "switching", "--p", "0.3,0.5,0.7", "--workers", "1"});
  const auto& res = r.doc["result"];
  double worst = 0;
  std::set<std::string> graphs, failing;
  int vacuous = 0;
  for (const auto& i : res["instances"]) {
    graphs.insert(i["graph"].get<std::string>());
    worst = std::max(worst, i["residual"].get<double>());
    vacuous += i["vacuous"].get<bool>();
    if (!i["pass"].get<bool>()) failing.insert(i["graph"].get<std::string>());
  }
  std::string detail = std::to_string(graphs.size()) + " graphs, " + std::to_string(res["checked"].get<int>()) +
                       " instances (" + std::to_string(vacuous) + " vacuous), " +
                       std::to_string(res["failures"].get<int>()) + " above 1e-12, max residual " + num(worst);
  for (const auto& g : failing) detail += ", failing on " + g;
  return {r.code == cli::kExitOk && graphs.size() >= 3, detail};
}

Verdict bubble_switching() {
  auto r = run_cli({"verify", "bubble-switch", "--seed", std::to_string(kSeed), "--workers", "1"});
  const auto& res = r.doc["result"];
  double worst = 0;
  std::set<std::string> fs;
  for (const auto& i : res["instances"]) {
    worst = std::max(worst, i["residual"].get<double>());
    fs.insert(i["G"].get<std::string>());
  }
  return {r.code == cli::kExitOk && fs.size() == 7,
          std::to_string(res["checked"].get<int>()) + " instances over " + std::to_string(fs.size()) +
              " functions G, max residual " + num(worst)};
}

Verdict bk_inequality() {
  auto r = run_cli({"verify", "bk", "--count", "200", "--seed", std::to_string(kSeed), "--workers", "1"});
  const auto& res = r.doc["result"];
  int max_edges = 0;
  for (const auto& i : res["instances"]) max_edges = std::max(max_edges, i["edges"].get<int>());
  const auto& c = res["control"];
  return {r.code == cli::kExitOk && max_edges <= 12,
          std::to_string(res["checked"].get<int>()) + " instances (<= " + std::to_string(max_edges) + " edges), " +
              std::to_string(res["violations"].get<int>()) + " violations; disjoint control " +
              num(c["lhs"].get<double>(), 10) + " vs " + num(c["rhs"].get<double>(), 10)};
}

Verdict tree_graph_bound() {
  auto r = run_cli({"verify", "tree-bound", "--p", "0.2,0.4,0.6,0.8", "--workers", "1"});
  const auto& res = r.doc["result"];
  std::map<std::string, int> ok3;
  int failures = 0;
  double tightest = 0;
  for (const auto& i : res["instances"]) {
    const bool pass = i["pass"].get<bool>();
    failures += !pass;
    if (i["k"].get<int>() == 3 && pass) ++ok3[i["graph"].get<std::string>()];
    tightest = std::max(tightest, i["tau"].get<double>() / i["bound"].get<double>());
  }
  int graphs3 = 0;
  for (const auto& [g, n] : ok3) graphs3 += n == 4;
  return {r.code == cli::kExitOk && failures == 0 && graphs3 >= 5,
          "tau_3 bounded on " + std::to_string(graphs3) + " graphs x 4 p; " +
              std::to_string(res["checked"].get<int>()) + " checks in all, max tau/bound " + num(tightest)};
}

Verdict tree_census() {
  const long long expected[] = {1, 3, 15, 105, 945};
  bool ok = true;
  std::string counts;
  for (int k = 3; k <= 7; ++k) {
    auto ts = trees::enumerate_trees(k);
    counts += (k > 3 ? "," : "") + std::to_string(ts.size());
    ok = ok && static_cast<long long>(ts.size()) == expected[k - 3];
    std::set<std::string> distinct;
    for (const auto& t : ts) {
      distinct.insert(t.canonical());
      int edges = 0, internal = 0;
      for (int v = 0; v < t.node_count(); ++v) {
        if (t.parent(v) >= 0) ++edges;
        if (!t.is_leaf(v)) {
          ++internal;
          ok = ok && t.children(v).size() == 2;
        } else if (v > 0) {
          ok = ok && t.children(v).empty();
        }
      }
      ok = ok && internal == k - 2 && edges == 2 * k - 3 && t.parent(0) < 0 && t.children(0).size() == 1;
    }
    ok = ok && distinct.size() == ts.size();
  }
  return {ok, "counts " + counts + " for k = 3..7; internal = k-2, edges = 2k-3 on every tree"};
}

Verdict connectivity_tree() {
  auto box2 = std::make_shared<const lattice::Graph>(lattice::Graph::box(2, 2));
  auto box3 = std::make_shared<const lattice::Graph>(lattice::Graph::box(3, 1));
  int mismatches = 0, invariant_failures = 0, binary = 0;
  std::uint64_t attempts = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const auto& g = i % 2 ? box3 : box2;
    const int k = 2 + (i / 2) % 2;  // marked points x_0..x_k
    CounterRng rng(kSeed, {0x6374, static_cast<std::uint64_t>(i)});
    std::vector<int> marked;
    while (static_cast<int>(marked.size()) < k + 1) {
      int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(g->num_vertices())));
      if (std::find(marked.begin(), marked.end(), v) == marked.end()) marked.push_back(v);
    }
    for (std::uint64_t s = 0;; ++s) {
      ++attempts;
      auto c = lattice::sample_configuration(g, 0.65, stream_key(kSeed, {0x6374, static_cast<std::uint64_t>(i)}), s);
      bool all = true;
      for (int x : marked) all = all && brute::connected(c, marked[0], x);
      if (!all) continue;
      auto t = conntree::build_connectivity_tree(c, marked);
      invariant_failures += !conntree::tree_invariants_hold(t);
      binary += conntree::classify_tree(t).binary;
      try {
        auto b = brute::connectivity_tree(c, marked);
        mismatches += !(b.vertices == t.vertices && b.parent == t.parent);
      } catch (const std::exception&) {
        ++mismatches;
      }
      break;
    }
  }
  return {mismatches == 0 && invariant_failures == 0,
          std::to_string(n) + " configurations (" + std::to_string(attempts) + " draws, " + std::to_string(binary) +
              " binary), " + std::to_string(mismatches) + " mismatches, " + std::to_string(invariant_failures) +
              " invariant failures"};
}

Verdict pivotal_machinery() {
  auto r = run_cli({"verify", "pivotal-order", "--count", "1000", "--seed", std::to_string(kSeed)});
  const auto& res = r.doc["result"];
  std::string summary;
  for (const auto& [key, v] : res.items())
    if (!v.is_array() && !v.is_object()) summary += (summary.empty() ? "" : ", ") + key + "=" + v.dump();
  return {r.code == cli::kExitOk, summary};
}

Verdict one_loop_exponents() {
  auto d7 = run_cli({"one-loop", "--d", "7", "--n", "6,9,12,18", "--expect", "-2", "--tol", "0.4", "--seed",
                     std::to_string(kSeed), "--workers", "1"});
  auto d9 = run_cli({"one-loop", "--d", "9", "--n", "6,9,12,18", "--expect", "-5", "--tol", "0.5", "--seed",
                     std::to_string(kSeed), "--workers", "1"});
  auto slope = [](const CliResult& r) { return r.doc["result"]["fits"][0]["slope"].get<double>(); };
  return {d7.code == cli::kExitOk && d9.code == cli::kExitOk,
          "slope " + num(slope(d7)) + " at d=7 (target -2 +/- 0.4), " + num(slope(d9)) +
              " at d=9 (target -5 +/- 0.5)"};
}

Verdict convolution_estimates() {
  const std::vector<int> ns{4, 8, 16};
  auto axis = [](int d, int i, int n) {
    lattice::Point p(static_cast<std::size_t>(d), 0);
    p[static_cast<std::size_t>(i)] = n;
    return p;
  };
  struct Family {
    std::string name;
    double lo = INFINITY, hi = 0;
    int members = 0;
  };
  Family standard{"std"}, log{"log"}, triple{"triple"};
  auto add = [](Family& f, const diagrams::RatioReport& r) {
    f.lo = std::min(f.lo, r.ratio);
    f.hi = std::max(f.hi, r.ratio);
    ++f.members;
  };
  for (int d : {5, 6, 7})
    for (int n : ns) {
      const auto x = axis(d, 0, 0), y = axis(d, 0, n), w = axis(d, 1, n);
      for (auto [a, b] : {std::pair{2.0, 2.0}, std::pair{2.0, 3.0}}) {
        if (a + b >= d) continue;  // (5, 2, 3) is outside the estimate's range
        add(standard, diagrams::check_convolution(x, y, a, b, 4 * n, diagrams::ConvVariant::standard));
      }
      add(log, diagrams::check_convolution(x, y, 0, 2, 4 * n, diagrams::ConvVariant::log));
      add(triple, diagrams::check_convolution(x, y, 0, 0, 4 * n, diagrams::ConvVariant::triple, w));
    }
  bool ok = true;
  std::string detail;
  for (const auto* f : {&standard, &log, &triple}) {
    const double spread = f->hi / f->lo;
    ok = ok && f->lo > 0 && std::isfinite(f->hi) && spread < 3;
    detail += (detail.empty() ? "" : "; ") + f->name + " " + std::to_string(f->members) + " members, ratio " +
              num(f->lo) + ".." + num(f->hi) + " spread " + num(spread, 3);
  }
  return {ok, detail};
}

Verdict cycle_suppression() {
  const std::string pins = "[[0,0,0,0,0,0,0],[1,0,0,0,0,0,0],[1,1,0,0,0,0,0],[0,1,0,0,0,0,0]]";
  auto cyc = run_cli({"val", "--diagram", "cycle", "--pins", pins, "--d", "7", "--n", "16,24,32,48", "--samples",
                      "4000000", "--seed", std::to_string(kSeed), "--workers", "1"});
  auto tree = run_cli({"val", "--diagram", "tree", "--tree", "((1,2),3)0;", "--pins", pins, "--d", "7", "--n",
                       "16,24,32,48", "--samples", "1000000", "--seed", std::to_string(kSeed), "--workers", "1"});
  if (cyc.code != cli::kExitOk || tree.code != cli::kExitOk) return {false, "val failed: " + cyc.err + tree.err};
  auto slope = [](const CliResult& r) { return r.doc["result"]["fits"][0]["slope"].get<double>(); };
  auto worst_rel = [](const CliResult& r) {
    double w = 0;
    for (const auto& row : r.doc["rows"]) w = std::max(w, row["stderr"].get<double>() / row["value"].get<double>());
    return w;
  };
  const double gap = slope(tree) - slope(cyc);
  return {gap >= 0.5, "4-cycle slope " + num(slope(cyc)) + ", tree slope " + num(slope(tree)) + ", gap " + num(gap, 3) +
                          " (max rel. stderr " + num(worst_rel(cyc), 2) + " / " + num(worst_rel(tree), 2) + ")"};
}

Verdict tree_integral() {
  const int d = 7;
  auto point = [&](std::initializer_list<double> head) {
    integrals::ContinuumPoint p(static_cast<std::size_t>(d), 0.0);
    std::copy(head.begin(), head.end(), p.begin());
    return p;
  };
  const auto origin = point({});
  const auto tree = trees::AbstractTree::from_newick("(1,2)0;");
  const std::vector<std::pair<integrals::ContinuumPoint, integrals::ContinuumPoint>> sets{
      {point({1}), point({0, 1})}, {point({0.6, 0.2}), point({-0.3, 0.7, 0.1})}};
  bool ok = true;
  std::string detail;
  std::vector<MCEstimate> base;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto& [y1, y2] = sets[s];
    auto mc = integrals::eval_I_T(tree, {origin, y1, y2}, d, {1000000, kSeed + s, 1, 2.0});
    auto q = integrals::quad_I3(y1, y2, d);
    const double diff = std::fabs(mc.mean - q.value);
    const double allowed = std::max(4 * std::hypot(mc.stderr_, q.error), 0.05 * q.value);
    ok = ok && diff <= allowed;
    detail += "set " + std::to_string(s + 1) + ": mc " + num(mc.mean, 6) + " +/- " + num(mc.stderr_, 2) + " quad " +
              num(q.value, 8) + "; ";
    base.push_back(mc);
  }
  // Homogeneity at lambda = 2 on the first set.
  const auto& [y1, y2] = sets[0];
  integrals::ContinuumPoint s1 = y1, s2 = y2;
  for (auto& c : s1) c *= 2;
  for (auto& c : s2) c *= 2;
  auto scaled = integrals::eval_I_T(tree, {origin, s1, s2}, d, {1000000, kSeed + 7, 1, 2.0});
  const double ratio = scaled.mean / base[0].mean;
  const double ratio_se = ratio * std::hypot(scaled.stderr_ / scaled.mean, base[0].stderr_ / base[0].mean);
  const double expected = std::pow(2.0, (4 - d) * 3 + d - 6);
  const bool homog = std::fabs(ratio - expected) <= 4 * ratio_se;
  ok = ok && homog;
  detail += "I(2y)/I(y) = " + num(ratio, 5) + " +/- " + num(ratio_se, 2) + " vs 2^-8 = " + num(expected, 5);
  return {ok, detail};
}

Verdict prediction_assembly() {
  CounterRng rng(kSeed, {0x7072});
  bool ok = true;
  std::string detail;
  double worst = 0;
  for (int trial = 0; trial < 4; ++trial) {
    integrals::LimitInputs li;
    li.alpha = 0.5 + 1.5 * rng.uniform();
    li.p_c = 0.05 + 0.45 * rng.uniform();
    li.rho = 0.1 + 2.9 * rng.uniform();
    li.d = 7 + static_cast<int>(rng.below(3));
    std::vector<integrals::ContinuumPoint> y(3, integrals::ContinuumPoint(static_cast<std::size_t>(li.d), 0.0));
    for (int i = 1; i <= 2; ++i)
      for (int c = 0; c < 3; ++c) y[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = rng.uniform() * 2 - 1;
    auto pr = integrals::predicted_kpoint_constant(3, y, li, {200000, kSeed + static_cast<std::uint64_t>(trial), 1, 2.0});
    auto q = integrals::quad_I3(y[1], y[2], li.d);
    const double coeff = 2.0 * li.d * std::pow(li.alpha, 3) * li.beta() * li.rho;
    const double want = coeff * q.value;
    const double allowed = 4 * std::hypot(pr.stderr_, coeff * q.error);
    ok = ok && std::fabs(pr.value - want) <= allowed;
    worst = std::max(worst, std::fabs(pr.value - want) / allowed);
  }
  detail = "4 random (alpha, p_c, rho, d, y) inputs; max |pred - 2d a^3 b rho quad| / (4 combined stderr) = " +
           num(worst, 3);
  return {ok, detail};
}

Verdict estimation_calibration() {
  using namespace estimation;
  bool ok = true;
  std::string detail;
  // Agreement with exact enumeration.
  auto box = make_box(2, 1);
  int within = 0, total = 0;
  for (double p : {0.4, 0.6})
    for (const auto& pts : std::vector<std::vector<lattice::Point>>{{{-1, -1}, {1, 1}}, {{-1, -1}, {1, 1}, {1, -1}}}) {
      std::vector<int> ids;
      for (const auto& q : pts) ids.push_back(box.vertex(q));
      const double exact = oracle::exact_event_probability(box.graph, p, *oracle::multi_connection(ids));
      auto est = estimate_tau_k(box, p, pts, 100000, kSeed + static_cast<std::uint64_t>(total), 1);
      within += std::fabs(est.mean - exact) <= 4 * est.stderr_;
      ++total;
    }
  ok = ok && within == total;
  detail += std::to_string(within) + "/" + std::to_string(total) + " tau_k within 4 sigma of exact; ";
  // Reproducibility.
  auto big = make_box(3, 3);
  const std::vector<lattice::Point> pts{{0, 0, 0}, {2, 0, 0}, {0, 2, 1}};
  auto a = estimate_tau_k(big, 0.3, pts, 20000, kSeed, 1);
  auto b = estimate_tau_k(big, 0.3, pts, 20000, kSeed, 1);
  auto c = estimate_tau_k(big, 0.3, pts, 20000, kSeed, 3);
  const bool repro = a.mean == b.mean && a.stderr_ == b.stderr_ && a.mean == c.mean;
  ok = ok && repro;
  detail += repro ? "bit-identical across reruns and worker counts; " : "NOT reproducible; ";
  // Standard error scaling.
  std::vector<std::pair<double, double>> se;
  for (std::uint64_t n : {1000, 4000, 16000, 64000, 256000}) {
    auto e = estimate_tau_k(box, 0.5, {{-1, -1}, {1, 1}}, n, kSeed + 99, 1);
    se.emplace_back(static_cast<double>(n), e.stderr_);
  }
  auto fit = diagrams::fit_scaling(se);
  ok = ok && std::fabs(fit.slope + 0.5) <= 0.1;
  detail += "stderr slope " + num(fit.slope, 4);
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"switching identity", switching_identity},
      {"bubble switching", bubble_switching},
      {"BK inequality", bk_inequality},
      {"tree-graph bound", tree_graph_bound},
      {"tree census", tree_census},
      {"connectivity tree", connectivity_tree},
      {"pivotal machinery", pivotal_machinery},
      {"one-loop exponents", one_loop_exponents},
      {"convolution estimates", convolution_estimates},
      {"cycle suppression", cycle_suppression},
      {"I_T integration", tree_integral},
      {"prediction assembly", prediction_assembly},
      {"estimation determinism and calibration", estimation_calibration},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !v.pass;
    std::printf("%s %2zu %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
