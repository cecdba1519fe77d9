#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "fsr/catalog.hpp"
#include "fsr/dynamics_digraph.hpp"

using namespace fsr;

namespace {

DynDigraph graph(int n, std::vector<std::pair<int, int>> arcs) {
  DynDigraph g;
  for (int i = 0; i < n; ++i) g.add_vertex("v" + std::to_string(i));
  for (auto [s, t] : arcs) g.add_arc(s, t);
  return g;
}

// Paths by explicit enumeration, independent of the library's dynamic programming.
long long enumerate_paths(const DynDigraph& g, int v, int n) {
  if (n == 0) return 1;
  long long total = 0;
  for (const auto& a : g.arcs)
    if (a.source == v) total += enumerate_paths(g, a.target, n - 1);
  return total;
}

}  // namespace

TEST_CASE("catalog digraphs") {
  auto r = power_spider_2();
  auto E = edge_digraph(r);
  CHECK(E.size() == 1);
  CHECK(E.arcs.size() == 1);
  CHECK(E.arcs[0].tag == "a0");
  auto T = tile_digraph(r);
  CHECK(T.size() == 1);
  CHECK(T.arcs.size() == 2);
  auto B = band_digraph(r);
  CHECK(B.size() == 1);
  CHECK(B.arcs.empty());

  auto D = edge_digraph(doubling_edge());
  int c = doubling_edge().level0.edge_at("c");
  int loops = 0;
  for (const auto& a : D.arcs) loops += a.source == c && a.target == c;
  CHECK(loops == 2);
}

TEST_CASE("scc and preorder") {
  auto bicycle = graph(1, {{0, 0}, {0, 0}});
  auto d = strongly_connected(bicycle);
  CHECK(d.count() == 1);
  CHECK(d.cyclic[0]);

  auto two = graph(2, {{0, 0}, {0, 1}, {1, 1}});
  auto d2 = strongly_connected(two);
  CHECK(d2.count() == 2);
  CHECK(d2.component[0] < d2.component[1]);
  auto reach = reachability(two);
  CHECK(reach[0][1]);
  CHECK_FALSE(reach[1][0]);

  auto chain = graph(3, {{0, 1}, {1, 2}});
  auto d3 = strongly_connected(chain);
  CHECK(d3.count() == 3);
  for (int c = 0; c < 3; ++c) CHECK_FALSE(d3.cyclic[c]);
}

TEST_CASE("growth classes and path counts") {
  auto loop = graph(1, {{0, 0}});
  CHECK(growth_class(loop, 0) == GrowthClass{false, 0});
  CHECK(path_count(loop, 0, 7) == 1);

  auto bicycle = graph(1, {{0, 0}, {0, 0}});
  CHECK(growth_class(bicycle, 0).exponential);
  CHECK(path_count(bicycle, 0, 5) == 32);

  auto lpl = graph(2, {{0, 0}, {0, 1}, {1, 1}});
  CHECK(growth_class(lpl, 0) == GrowthClass{false, 1});
  for (int n = 0; n <= 12; ++n) CHECK(path_count(lpl, 0, n) == static_cast<PathCount>(n + 1));
  CHECK(path_count(lpl, 0, 5) == 6);

  auto sink = graph(2, {{0, 1}});
  CHECK(path_count(sink, 1, 3) == 0);
  CHECK(growth_class(sink, 0) == GrowthClass{false, -1});
}

TEST_CASE("path_count matches enumeration on seeded random graphs") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 1 + static_cast<int>(rng() % 6);
    int m = static_cast<int>(rng() % 10);
    DynDigraph g;
    for (int i = 0; i < n; ++i) g.add_vertex({});
    for (int k = 0; k < m; ++k) g.add_arc(rng() % n, rng() % n);
    for (int v = 0; v < n; ++v)
      for (int len = 0; len <= 6; ++len)
        CHECK(path_count(g, v, len) == static_cast<PathCount>(enumerate_paths(g, v, len)));
  }
}

TEST_CASE("128-bit path counts print exactly") {
  auto g = graph(1, {});
  for (int k = 0; k < 16; ++k) g.add_arc(0, 0);
  CHECK(to_string(path_count(g, 0, 20)) == "1208925819614629174706176");
}

TEST_CASE("radical closure") {
  auto g = graph(3, {{0, 0}, {0, 1}, {1, 2}, {2, 2}});
  CHECK(radical_closure(g, {0, 1, 2}) == std::vector<int>{0, 1, 2});

  auto funnel = graph(2, {{0, 1}, {0, 1}, {1, 1}});
  CHECK(radical_closure(funnel, {1}) == std::vector<int>{0, 1});

  auto escape = graph(3, {{0, 1}, {0, 2}, {2, 2}, {1, 1}});
  CHECK(radical_closure(escape, {1}) == std::vector<int>{1});
}

TEST_CASE("tail is idempotent on seeded random graphs") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 1 + static_cast<int>(rng() % 7);
    DynDigraph g;
    for (int i = 0; i < n; ++i) g.add_vertex({});
    int m = static_cast<int>(rng() % 12);
    for (int k = 0; k < m; ++k) g.add_arc(rng() % n, rng() % n);
    std::vector<int> X;
    for (int v = 0; v < n; ++v)
      if (rng() % 3 == 0) X.push_back(v);
    auto once = radical_closure(g, X);
    CHECK(radical_closure(g, once) == once);
    CHECK(ideal_closure(g, once) == once);
  }
}

TEST_CASE("spectral radius") {
  auto two = spectral_radius({{2.0}});
  CHECK(two.value == doctest::Approx(2.0).epsilon(1e-12));
  const double phi = (1 + std::sqrt(5.0)) / 2;
  auto fib = graph(3, {{0, 1}, {1, 1}, {1, 2}, {2, 1}});
  auto est = spectral_radius_from(fib, 0);
  CHECK(std::abs(est.value - phi) < 1e-8);
  CHECK(est.lower <= phi + 1e-12);
  CHECK(est.upper >= phi - 1e-12);
  auto perm = spectral_radius({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  CHECK(perm.value == doctest::Approx(1.0));
  auto nil = spectral_radius({{0, 1}, {0, 0}});
  CHECK(nil.value == 0.0);
}

TEST_CASE("edge growth rates of catalog rules") {
  auto r = power_spider_2();
  CHECK(edge_growth_rate(r, 0) == 1.0);
  auto d = doubling_edge();
  CHECK(std::abs(edge_growth_rate(d, d.level0.edge_at("c")) - 2.0) < 1e-9);
  CHECK(edge_growth_rate(d, d.level0.edge_at("r0")) == 1.0);
}

TEST_CASE("recurrent paths are unique when cycles are disjoint") {
  std::mt19937 rng(3);
  int checked = 0;
  for (int trial = 0; trial < 300 && checked < 40; ++trial) {
    int n = 2 + static_cast<int>(rng() % 5);
    DynDigraph g;
    for (int i = 0; i < n; ++i) g.add_vertex({});
    int m = static_cast<int>(rng() % 9);
    for (int k = 0; k < m; ++k) g.add_arc(rng() % n, rng() % n);
    bool poly = true;
    for (int v = 0; v < n; ++v) poly = poly && !growth_class(g, v).exponential;
    if (!poly) continue;
    ++checked;
    auto reach = reachability(g);
    auto rec = recurrent_vertices(g);
    for (int v = 0; v < n; ++v) {
      if (!rec[v]) continue;
      for (int len = 1; len <= 6; ++len) {
        // Count paths of length len from v that end at a vertex reaching back to v.
        std::function<int(int, int)> walk = [&](int u, int k) -> int {
          if (k == 0) return reach[u][v] ? 1 : 0;
          int s = 0;
          for (const auto& a : g.arcs)
            if (a.source == u) s += walk(a.target, k - 1);
          return s;
        };
        CHECK(walk(v, len) == 1);
      }
    }
  }
  CHECK(checked >= 10);
}
