#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <tuple>
#include <functional>
#include <map>
#include <numeric>

#include "fsr/catalog.hpp"
#include "fsr/dynamics_digraph.hpp"
#include "fsr/error.hpp"
#include "fsr/quotient.hpp"
#include "fsr/spine.hpp"

using namespace fsr;

namespace {

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

// Quotient digraphs must be the induced subgraphs on the surviving edges and tiles.
void check_induced(const SubdivisionRule& rule, const CollapsibleSubcomplex& x, const SubdivisionRule& q) {
  const auto& de = x.edges;
  const auto& dt = x.tiles;
  auto e0 = edge_digraph(rule), e1 = edge_digraph(q);
  auto t0 = tile_digraph(rule), t1 = tile_digraph(q);
  CHECK(vertex_labels(e1, {}) == vertex_labels(e0, de));
  CHECK(labelled_arcs(e1, {}) == labelled_arcs(e0, de));
  CHECK(vertex_labels(t1, {}) == vertex_labels(t0, dt));
  CHECK(labelled_arcs(t1, {}) == labelled_arcs(t0, dt));
}

std::vector<int> edges_named(const SphereComplex& cx, const std::vector<std::string>& ids) {
  std::vector<int> out;
  for (const auto& id : ids) out.push_back(cx.edge_at(id));
  std::sort(out.begin(), out.end());
  return out;
}

bool has_adjacent_julia(const SubdivisionRule& r) {
  auto vc = classify_vertices(r);
  for (const auto& e : r.level0.edges)
    if (!vc.fatou[e.tail] && !vc.fatou[e.head]) return true;
  return false;
}

}  // namespace

TEST_CASE("empty subcomplex leaves every catalog rule unchanged") {
  for (const auto& r : catalog()) {
    auto q = quotient_rule(r, {});
    CHECK(q.rule.level0.vertices == r.level0.vertices);
    CHECK(q.rule.level1.edges.size() == r.level1.edges.size());
    CHECK(q.level0_vertices.size() == r.level0.vertices.size());
  }
}

TEST_CASE("julia slit collapses to a point") {
  auto r = julia_slit();
  auto x = collapsible_from_julia_edges(r);
  CHECK(x.edges == edges_named(r.level0, {"c"}));
  CHECK(x.tiles.empty());
  auto q = quotient_rule(r, x);
  CHECK(q.rule.level0.vertices.size() == r.level0.vertices.size() - 1);
  CHECK(q.rule.level0.edges.size() == r.level0.edges.size() - 1);
  auto rep = validate_rule(q.rule);
  REQUIRE(rep.ok);
  CHECK(euler_characteristic(q.rule.level0) == 2);
  CHECK(euler_characteristic(q.rule.level1) == 2);
  CHECK(rep.degree == 2);
  CHECK(q.level0_vertices.at("q") == "p");
  check_induced(r, x, q.rule);
  CHECK(julia_edges(q.rule).empty());
}

TEST_CASE("rules without Julia edges give an empty subcomplex") {
  CHECK(collapsible_from_julia_edges(power_spider_2()).empty());
  CHECK(collapsible_from_julia_edges(basilica_real()).empty());
}

TEST_CASE("check_collapsible rejects non-ideals and marked collisions") {
  auto r = radial_spider(2, 3, true);
  // j -> 2j mod 3 has orbits {0} and {1, 2}.
  auto bad = check_collapsible(r, {edges_named(r.level0, {"in1"}), {}});
  CHECK_FALSE(bad.ok);
  CHECK(bad.failure == "ideal");
  CHECK(check_collapsible(r, {edges_named(r.level0, {"in1", "in2"}), {}}).ok);
  auto both = check_collapsible(r, {edges_named(r.level0, {"in0", "out0"}), {}});
  CHECK_FALSE(both.ok);
  CHECK(both.failure == "marked collision");
  CHECK_THROWS_AS(quotient_rule(r, {edges_named(r.level0, {"in0", "out0"}), {}}), FsrError);
}

TEST_CASE("a cycle of collapsed edges is not simply connected") {
  auto r = radial_spider(2, 1, true);
  // in0 and out0 together join o to inf; the tile bounded by them is not collapsed.
  auto c = check_collapsible(r, {edges_named(r.level0, {"in0", "out0"}), {}});
  CHECK_FALSE(c.ok);
}

TEST_CASE("random collapsible subcomplexes of radial spiders") {
  std::mt19937 rng(20240611);
  int done = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const int m = 1 + static_cast<int>(rng() % 6);
    auto r = radial_spider(d, m, true);
    // Components of j -> dj mod m, each sent to the in-legs, the out-legs or neither.
    std::vector<int> comp(m);
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int j) { return comp[j] == j ? j : comp[j] = find(comp[j]); };
    for (int j = 0; j < m; ++j) comp[find(j)] = find((d * j) % m);
    std::map<int, int> choice;
    std::vector<std::string> ids;
    for (int j = 0; j < m; ++j) {
      int c = find(j);
      if (!choice.count(c)) choice[c] = static_cast<int>(rng() % 3);
      if (choice[c] == 1) ids.push_back("in" + std::to_string(j));
      if (choice[c] == 2) ids.push_back("out" + std::to_string(j));
    }
    CollapsibleSubcomplex x{edges_named(r.level0, ids), {}};
    auto c = check_collapsible(r, x);
    INFO(r.name, " collapsing ", ids.size(), " legs");
    REQUIRE(c.ok);
    auto q = quotient_rule(r, x);
    auto rep = validate_rule(q.rule);
    REQUIRE(rep.ok);
    CHECK(rep.degree == d);
    CHECK(euler_characteristic(q.rule.level0) == 2);
    CHECK(q.rule.level0.edges.size() == r.level0.edges.size() - ids.size());
    check_induced(r, x, q.rule);
    ++done;
  }
  CHECK(done == 40);
}

TEST_CASE("isolating Julia vertices on the real basilica") {
  auto r = basilica_real();
  REQUIRE(julia_edges(r).empty());
  REQUIRE(has_adjacent_julia(r));
  auto iso = isolate_julia_vertices(r);
  auto rep = validate_rule(iso);
  REQUIRE(rep.ok);
  CHECK(rep.degree == 2);
  // The new point 0 -> -1 -> 0 orbit starts at the level-1 preimage of 0 on [-alpha, beta].
  CHECK(iso.level0.vertices.size() == r.level0.vertices.size() + 1);
  CHECK(iso.level0.vertex_index("one") >= 0);
  CHECK(iso.level0.edge_index("E5") < 0);
  CHECK(iso.level0.edge_index("E5:0") >= 0);
  CHECK(iso.level0.edge_index("E5:1") >= 0);
  CHECK_FALSE(has_adjacent_julia(iso));
  auto eg = edge_digraph(iso);
  for (int e = 0; e < eg.size(); ++e) CHECK_FALSE(growth_class(eg, e).exponential);
  auto again = isolate_julia_vertices(iso);
  CHECK(again.level0.vertices == iso.level0.vertices);
  CHECK(again.level1.edges.size() == iso.level1.edges.size());
}

TEST_CASE("isolation preconditions and trivial cases") {
  CHECK_THROWS_AS(isolate_julia_vertices(julia_slit()), FsrError);
  try {
    isolate_julia_vertices(julia_slit());
  } catch (const FsrError& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedRegime);
  }
  auto p = isolate_julia_vertices(power_spider_2());
  CHECK(p.level0.vertices == power_spider_2().level0.vertices);
}

TEST_CASE("normalize_for_energy") {
  auto p = normalize_for_energy(power_spider_2());
  CHECK(p.level0.vertices == power_spider_2().level0.vertices);
  CHECK(p.name == "power_spider_2");

  auto s = normalize_for_energy(julia_slit());
  REQUIRE(validate_rule(s).ok);
  CHECK(julia_edges(s).empty());
  CHECK_FALSE(has_adjacent_julia(s));
  CHECK(s.metadata.count("normalization") == 1);
  auto eg = edge_digraph(s);
  for (int e = 0; e < eg.size(); ++e) CHECK_FALSE(growth_class(eg, e).exponential);

  CHECK_THROWS_AS(normalize_for_energy(levy_bigon()), FsrError);
  CHECK_THROWS_AS(normalize_for_energy(doubling_edge()), FsrError);
}
