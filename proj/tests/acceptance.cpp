#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "fsr/catalog.hpp"
#include "fsr/dynamics_digraph.hpp"
#include "fsr/energy.hpp"
#include "fsr/error.hpp"
#include "fsr/multicurve.hpp"
#include "fsr/quotient.hpp"
#include "fsr/spine.hpp"

using namespace fsr;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failure notes for one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 8) failures.push_back(what);
  }
  bool ok() const { return failures.empty(); }
};

int report(int id, const std::string& title, const Check& c, const std::string& detail) {
  std::printf("criterion %d: %s  %s (%s)\n", id, c.ok() ? "PASS" : "FAIL", title.c_str(), detail.c_str());
  for (const auto& f : c.failures) std::printf("    %s\n", f.c_str());
  return c.ok() ? 0 : 1;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

bool is_polynomial(const SubdivisionRule& r) {
  auto E = edge_digraph(r);
  for (int v = 0; v < E.size(); ++v)
    if (growth_class(E, v).exponential) return false;
  return true;
}

// ---------------------------------------------------------------- criterion 1

// log c_n(v) for the number of length-n paths from v, or -inf; renormalised over the vertices v reaches.
double log_path_count(const DynDigraph& g, int v, int n) {
  const int V = g.size();
  std::vector<char> reach(V, 0);
  std::vector<int> stack = {v};
  reach[v] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (const auto& a : g.arcs)
      if (a.source == u && !reach[a.target]) reach[a.target] = 1, stack.push_back(a.target);
  }
  std::vector<long double> x(V), y(V);
  for (int u = 0; u < V; ++u) x[u] = reach[u] ? 1.0L : 0.0L;
  long double log_scale = 0.0L;
  for (int step = 0; step < n; ++step) {
    std::fill(y.begin(), y.end(), 0.0L);
    for (const auto& a : g.arcs)
      if (reach[a.source]) y[a.source] += x[a.target];
    long double m = *std::max_element(y.begin(), y.end());
    if (m == 0.0L) return -INFINITY;
    for (auto& w : y) w /= m;
    log_scale += std::log(m);
    x.swap(y);
  }
  return x[v] > 0 ? static_cast<double>(std::log(x[v]) + log_scale) : -INFINITY;
}

int criterion1() {
  auto t0 = Clock::now();
  Check c;
  std::mt19937_64 rng(1);
  // Both lengths are multiples of lcm(1..8), so every cycle period divides them.
  const int n1 = 3360, n2 = 6720;
  int checked = 0;
  std::map<std::string, int> tally;
  for (int trial = 0; trial < 200; ++trial) {
    DynDigraph g;
    const int V = 1 + static_cast<int>(rng() % 8);
    const int A = static_cast<int>(rng() % 17);
    for (int v = 0; v < V; ++v) g.add_vertex("v" + std::to_string(v));
    for (int a = 0; a < A; ++a) {
      const int s = static_cast<int>(rng() % V);
      const int t = static_cast<int>(rng() % V);
      g.add_arc(s, t);
    }

    // Exact counts for n <= 12.
    std::vector<std::vector<PathCount>> exact(13, std::vector<PathCount>(V, 0));
    std::fill(exact[0].begin(), exact[0].end(), 1);
    for (int n = 1; n <= 12; ++n)
      for (const auto& a : g.arcs) exact[n][a.source] += exact[n - 1][a.target];

    for (int v = 0; v < V; ++v) {
      ++checked;
      std::string where = "trial " + std::to_string(trial) + " vertex " + std::to_string(v);
      for (int n = 0; n <= 12; ++n)
        c.expect(path_count(g, v, n) == exact[n][v], where + " path_count(" + std::to_string(n) + ") differs");
      GrowthClass want;
      if (exact[12][v] == 0) {
        want.degree = -1;
      } else {
        const double r = log_path_count(g, v, n2) - log_path_count(g, v, n1);
        want.exponential = r > 20.0;
        if (!want.exponential) want.degree = static_cast<int>(std::lround(r / std::log(2.0)));
      }
      auto got = growth_class(g, v);
      ++tally[to_string(want)];
      c.expect(got == want, where + ": got " + to_string(got) + ", counts say " + to_string(want));
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 10.0, "runtime " + fmt(secs) + " s exceeds 10 s");
  std::string classes;
  for (const auto& [name, count] : tally) classes += ", " + name + " x" + std::to_string(count);
  return report(1, "growth classifier against path counts", c,
                "200 digraphs, " + std::to_string(checked) + " vertices" + classes + ", " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 2

MulticurveSpec spec(std::vector<std::string> curves, std::vector<CurveLift> lifts, int degree = 0) {
  MulticurveSpec mc;
  mc.curves = std::move(curves);
  mc.lifts = std::move(lifts);
  mc.map_degree = degree;
  return mc;
}

bool brackets(const SpectralEstimate& s, double exact, double tol) {
  return std::fabs(s.value - exact) <= tol && s.lower <= exact + tol && s.upper >= exact - tol;
}

int criterion2() {
  Check c;
  auto single = spec({"g"}, {{"g", "g", 2}, {"g", "g", 2}}, 4);
  auto l1 = lambda_p(single, 1.0);
  c.expect(brackets(l1, 2.0, 1e-8), "lambda_1 of [2] = " + fmt(l1.value));

  auto fib = spec({"a", "b"}, {{"a", "a", 2}, {"a", "b", 2}, {"b", "a", 2}});
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  auto lf = lambda_p(fib, 1.0);
  c.expect(brackets(lf, golden, 1e-8), "lambda_1 of Fibonacci = " + fmt(lf.value));
  c.expect(std::fabs(golden - 1.6180339887) <= 1e-10, "golden ratio reference");

  auto three = spec({"g"}, {{"g", "g", 3}, {"g", "g", 3}}, 6);
  const double q_exact = 1.0 + std::log(2.0) / std::log(3.0);
  auto q = critical_exponent(three);
  c.expect(std::fabs(q.value - q_exact) <= 1e-7 && q.lower <= q_exact + 1e-7 && q.upper >= q_exact - 1e-7,
           "Q of two degree-3 lifts = " + fmt(q.value));
  c.expect(std::fabs(q_exact - 1.63092975) <= 1e-8, "Q reference");

  // Levy-free irreducible specs: fixed ones plus seeded random ones.
  std::vector<MulticurveSpec> family = {single, fib, three,
                                        spec({"a", "b"}, {{"a", "a", 1}, {"a", "b", 2}, {"b", "a", 3}})};
  std::mt19937 rng(2);
  while (family.size() < 44) {
    const int n = 1 + static_cast<int>(rng() % 4);
    std::vector<std::string> curves;
    for (int i = 0; i < n; ++i) curves.push_back("c" + std::to_string(i));
    std::vector<CurveLift> lifts;
    for (int i = 0; i < n; ++i) {
      const int k = 1 + static_cast<int>(rng() % 3);
      for (int j = 0; j < k; ++j)
        lifts.push_back({curves[i], curves[rng() % n], 1 + static_cast<int>(rng() % 3)});
    }
    auto mc = spec(curves, lifts);
    auto blocks = irreducible_blocks(mc);
    if (blocks.size() != 1 || static_cast<int>(blocks[0].size()) != n) continue;
    auto prof = classify_multicurve(mc);
    if (prof.levy || prof.nilpotent) continue;
    family.push_back(mc);
  }
  const std::vector<double> ps = {1.0, 1.5, 2.0, 4.0, 8.0};
  int idx = 0;
  for (const auto& mc : family) {
    std::vector<SpectralEstimate> ls;
    for (double p : ps) ls.push_back(lambda_p(mc, p));
    for (std::size_t i = 1; i < ls.size(); ++i)
      c.expect(ls[i].value < ls[i - 1].value,
               "spec " + std::to_string(idx) + ": lambda_" + fmt(ps[i]) + " = " + fmt(ls[i].value) +
                   " not below lambda_" + fmt(ps[i - 1]) + " = " + fmt(ls[i - 1].value));
    ++idx;
  }
  return report(2, "spectral exactness", c,
                "lambda_1 " + fmt(l1.value) + ", " + fmt(lf.value) + "; Q " + fmt(q.value) + "; " +
                    std::to_string(family.size()) + " specs strictly decreasing");
}

// ---------------------------------------------------------------- criterion 3

int criterion3() {
  auto t0 = Clock::now();
  Check c;
  auto r = power_spider_2();
  auto rep = validate_rule(r);
  c.expect(rep.ok && rep.degree == 2, "validation or degree");
  Tower t(r);
  for (int n = 1; n <= 8; ++n) {
    c.expect(e1_exact(r, n) == 1, "|R^" + std::to_string(n) + "(e)| from e1_exact is not 1");
    for (int e = 0; e < static_cast<int>(r.level0.edges.size()); ++e)
      c.expect(edge_path(t, 0, e, n).size() == 1, "edge " + std::to_string(e) + " splits at level " + std::to_string(n));
  }
  auto b1 = asymptotic_bounds(r, 1.0, 6);
  c.expect(b1.lower && b1.upper && *b1.lower == 1.0 && *b1.upper == 1.0, "p=1 bound is not [1,1]");
  for (int n = 1; n <= 4; ++n)
    c.expect(non_expanding_spine(t, n).empty(), "spine at level " + std::to_string(n) + " is not empty");
  c.expect(is_levy_free(r).levy_free, "not Levy-free");
  auto cert = crochet_certificate(r, 2.0);
  c.expect(cert.certified && cert.bound < 1.0 - 1e-9, "crochet at p=2 not certified: " + cert.reason);
  const double secs = seconds_since(t0);
  c.expect(secs < 5.0, "runtime " + fmt(secs) + " s exceeds 5 s");
  return report(3, "power_spider_2 pipeline", c, "crochet bound " + fmt(cert.bound) + ", " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 4

int criterion4() {
  Check c;
  auto r = levy_bigon();
  auto lv = is_levy_free(r);
  c.expect(!lv.levy_free, "reported Levy-free");
  c.expect(!lv.witness.steps.empty(), "no witness");
  if (!lv.witness.steps.empty()) {
    Tower t(r);
    c.expect(classify_cycle(t, lv.level, lv.witness, r.level0.marked) == CycleClass::Essential,
             "witness is not essential");
  }
  auto mc = catalog_multicurve("levy_bigon");
  c.expect(mc.has_value(), "no multicurve");
  double linf = 0.0;
  if (mc) {
    auto prof = classify_multicurve(*mc);
    c.expect(prof.levy, "multicurve Levy flag unset");
    linf = lambda_p(*mc, kInfiniteP).value;
    c.expect(linf >= 1.0 - 1e-12, "lambda_inf = " + fmt(linf));
  }
  return report(4, "levy_bigon", c, "witness length " + std::to_string(lv.witness.steps.size()) + ", lambda_inf " + fmt(linf));
}

// ---------------------------------------------------------------- criterion 5

using ArcKey = std::tuple<std::string, std::string, std::string>;

std::multiset<ArcKey> labelled_arcs(const DynDigraph& g, const std::vector<int>& drop) {
  std::multiset<ArcKey> out;
  for (const auto& a : g.arcs) {
    if (std::count(drop.begin(), drop.end(), a.source) || std::count(drop.begin(), drop.end(), a.target)) continue;
    out.insert({g.vertices[a.source], g.vertices[a.target], a.tag});
  }
  return out;
}

std::set<std::string> vertex_labels(const DynDigraph& g, const std::vector<int>& drop) {
  std::set<std::string> out;
  for (int v = 0; v < g.size(); ++v)
    if (!std::count(drop.begin(), drop.end(), v)) out.insert(g.vertices[v]);
  return out;
}

void check_quotient(Check& c, const SubdivisionRule& r, const CollapsibleSubcomplex& x, const std::string& label) {
  try {
    auto q = quotient_rule(r, x).rule;
    auto rep = validate_rule(q);
    c.expect(rep.ok, label + ": quotient invalid (" + rep.failure + ")");
    if (!rep.ok) return;
    c.expect(euler_characteristic(q.level0) == 2 && euler_characteristic(q.level1) == 2, label + ": Euler characteristic");
    c.expect(rep.degree == validate_rule(r).degree, label + ": degree changed");
    auto e0 = edge_digraph(r), e1 = edge_digraph(q);
    auto t0 = tile_digraph(r), t1 = tile_digraph(q);
    c.expect(vertex_labels(e1, {}) == vertex_labels(e0, x.edges) && labelled_arcs(e1, {}) == labelled_arcs(e0, x.edges),
             label + ": edge digraph is not the induced subgraph");
    c.expect(vertex_labels(t1, {}) == vertex_labels(t0, x.tiles) && labelled_arcs(t1, {}) == labelled_arcs(t0, x.tiles),
             label + ": tile digraph is not the induced subgraph");
  } catch (const FsrError& e) {
    c.expect(false, label + ": " + e.what());
  }
}

int criterion5() {
  Check c;
  int catalog_count = 0, nonempty = 0;
  std::string refused;
  for (const auto& r : catalog()) {
    CollapsibleSubcomplex x;
    try {
      if (is_polynomial(r)) x = collapsible_from_julia_edges(r);
    } catch (const FsrError& e) {
      if (e.kind() != ErrorKind::UnsupportedRegime && e.kind() != ErrorKind::Inconsistency) throw;
      refused += (refused.empty() ? "" : ", ") + r.name;
    }
    nonempty += !x.empty();
    check_quotient(c, r, x, r.name);
    ++catalog_count;
  }
  std::mt19937 rng(5);
  int random_count = 0;
  while (random_count < 50) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const int m = 1 + static_cast<int>(rng() % 8);
    auto r = radial_spider(d, m, true);
    // Forward-invariant sets of legs: whole components of j -> dj mod m go to the in-legs, the out-legs or neither.
    std::vector<int> comp(m);
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int j) { return comp[j] == j ? j : comp[j] = find(comp[j]); };
    for (int j = 0; j < m; ++j) comp[find(j)] = find((d * j) % m);
    std::map<int, int> choice;
    std::vector<int> edges;
    for (int j = 0; j < m; ++j) {
      int cc = find(j);
      if (!choice.count(cc)) choice[cc] = static_cast<int>(rng() % 3);
      if (choice[cc] == 1) edges.push_back(r.level0.edge_at("in" + std::to_string(j)));
      if (choice[cc] == 2) edges.push_back(r.level0.edge_at("out" + std::to_string(j)));
    }
    if (edges.empty()) continue;
    std::sort(edges.begin(), edges.end());
    CollapsibleSubcomplex x{edges, {}};
    auto chk = check_collapsible(r, x);
    if (!chk.ok) continue;
    check_quotient(c, r, x, r.name + " #" + std::to_string(random_count));
    ++random_count;
  }
  return report(5, "quotients", c,
                std::to_string(catalog_count) + " catalog rules (" + std::to_string(nonempty) + " nonempty" +
                    (refused.empty() ? std::string() : "; empty for " + refused) + "), " +
                    std::to_string(random_count) + " random subcomplexes");
}

// ---------------------------------------------------------------- criterion 6

int criterion6() {
  Check c;
  int rules = 0;
  for (const auto& r : catalog()) {
    if (!is_polynomial(r)) continue;
    ++rules;
    auto per = recurrence_periods(r);
    Tower t(r);
    const int K = std::max(per.threshold, 1);
    for (int n : {K, 2 * K}) {
      auto a = non_expanding_spine(t, n);
      auto b = non_expanding_spine(t, n + per.period);
      const std::string where = r.name + " n=" + std::to_string(n) + " p=" + std::to_string(per.period);
      c.expect(spines_isomorphic(t.level(n), a, t.level(n + per.period), b), where + ": spines differ");
      c.expect(band_transitivity_violations(t.level(n), a.recurrent_bands) == 0, where + ": violations at n");
      c.expect(band_transitivity_violations(t.level(n + per.period), b.recurrent_bands) == 0,
               where + ": violations at n+p");
    }
  }
  return report(6, "spine stability", c, std::to_string(rules) + " polynomial rules");
}

// ---------------------------------------------------------------- criterion 7

PLGraphMap fan(const std::vector<double>& lengths, double target, double p) {
  PLGraphMap m;
  m.codomain.num_vertices = 2;
  m.codomain.edges = {{0, 1}};
  m.codomain.edge_ids = {"e"};
  m.codomain.lengths = {target};
  m.codomain.p = p;
  m.domain.num_vertices = 2;
  m.domain.p = p;
  m.vertex_image = {0, 1};
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    m.domain.edges.push_back({0, 1});
    m.domain.edge_ids.push_back("d" + std::to_string(i));
    m.domain.lengths.push_back(lengths[i]);
    m.action.push_back({true, 0, true, target / lengths[i]});
  }
  return m;
}

int criterion7() {
  Check c;
  int comparisons = 0;
  for (const auto& r : catalog()) {
    Tower t(r);
    for (double p : {1.0, 2.0, 4.0}) {
      std::vector<double> a(9, 1.0);
      for (int n = 1; n <= 8; ++n) a[n] = energy_pp(natural_representative(t, n, 0, p), p);
      for (int n = 1; n <= 4; ++n)
        for (int k = 1; k <= 4; ++k) {
          ++comparisons;
          c.expect(a[n + k] <= a[n] * a[k] * (1.0 + 1e-12),
                   r.name + " p=" + fmt(p) + ": a_" + std::to_string(n + k) + " > a_" + std::to_string(n) + " a_" +
                       std::to_string(k));
        }
      for (int k = 1; k <= 3; ++k) {
        const double got = energy_pp(natural_representative(power(r, k), 1, 0, p), p);
        c.expect(got == a[k], r.name + " p=" + fmt(p) + ": a_1 of power " + std::to_string(k) + " = " + fmt(got) +
                                  " but a_" + std::to_string(k) + " = " + fmt(a[k]));
      }
    }
  }
  double worst = 0.0;
  for (double p : {1.5, 2.0, 4.0})
    for (double K : {2.0, 4.0, 8.0}) {
      const double want = std::pow(1.0 + std::pow(K, 1.0 - p), 1.0 / p);
      const double got = std::pow(fill_pp(fan({1.0, K}, 1.0, p), p)[0], 1.0 / p);
      worst = std::max(worst, std::fabs(got - want));
      c.expect(std::fabs(got - want) <= 1e-12, "fan p=" + fmt(p) + " K=" + fmt(K) + ": " + fmt(got) + " vs " + fmt(want));
    }
  return report(7, "energy", c,
                std::to_string(comparisons) + " sub-multiplicativity checks, fan error " + fmt(worst));
}

// ---------------------------------------------------------------- criterion 8

int criterion8() {
  Check c;
  auto br = bracket_dimension(power_spider_2(), 6);
  std::optional<double> last, smallest_certified;
  for (const auto& b : br.bounds) {
    if (b.upper) {
      if (last) c.expect(*b.upper <= *last, "upper bound rises at p=" + fmt(b.p));
      last = b.upper;
    }
    if (!smallest_certified && b.certificate && b.certificate->certified && b.upper && *b.upper < 1.0 - 1e-9)
      smallest_certified = b.p;
  }
  c.expect(smallest_certified.has_value(), "no certified p");
  c.expect(br.upper.has_value() && smallest_certified && *br.upper <= *smallest_certified,
           "p* upper bracket exceeds the smallest certified p");
  c.expect(br.lower == 1.0, "lower bound is " + fmt(br.lower));
  return report(8, "dimension bracket for power_spider_2", c,
                "[" + fmt(br.lower) + ", " + (br.upper ? fmt(*br.upper) : std::string("none")) + "]");
}

}  // namespace

int main() {
  int failed = 0;
  const std::vector<std::function<int()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                      criterion5, criterion6, criterion7, criterion8};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      failed += criteria[i]();
    } catch (const std::exception& e) {
      std::printf("criterion %zu: FAIL  uncaught exception: %s\n", i + 1, e.what());
      ++failed;
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
