#include <set>

#include "doctest.h"
#include "fsr/catalog.hpp"
#include "fsr/error.hpp"
#include "fsr/spine.hpp"

using namespace fsr;

namespace {

std::set<std::string> edge_ids(const SphereComplex& cx, const std::vector<int>& es) {
  std::set<std::string> out;
  for (int e : es) out.insert(cx.edges[e].id);
  return out;
}

bool is_polynomial(const SubdivisionRule& r) {
  auto E = edge_digraph(r);
  for (int v = 0; v < E.size(); ++v)
    if (growth_class(E, v).exponential) return false;
  return true;
}

}  // namespace

TEST_CASE("recurrent cells of power_spider_2") {
  Tower t(power_spider_2());
  auto r1 = recurrent_cells(t, 1);
  CHECK(edge_ids(t.level(1).cx, r1.edges) == std::set<std::string>{"a0"});
  CHECK(r1.bands.empty());
  auto r0 = recurrent_cells(t, 0);
  CHECK(r0.edges.size() == 1);
  CHECK(r0.bands.empty());
}

TEST_CASE("doubling edge has two recurrent subedges of c at level 2") {
  auto r = doubling_edge();
  Tower t(r);
  auto rc = recurrent_cells(t, 2);
  int c = r.level0.edge_at("c");
  int count = 0;
  for (int e : rc.edges) count += t.level(2).ecarrier0[e].index == c;
  CHECK(count == 4);
}

TEST_CASE("each recurrent level-0 edge has one recurrent subedge in the polynomial regime") {
  for (const auto& r : catalog()) {
    if (!is_polynomial(r)) continue;
    CAPTURE(r.name);
    Tower t(r);
    auto r0 = recurrent_cells(t, 0);
    for (int n = 1; n <= 4; ++n) {
      auto rn = recurrent_cells(t, n);
      std::map<int, int> per;
      for (int e : rn.edges) ++per[t.level(n).ecarrier0[e].index];
      CHECK(per.size() == r0.edges.size());
      for (auto [e, k] : per) CHECK(k == 1);
    }
  }
}

TEST_CASE("power_spider_2 spine") {
  Tower t(power_spider_2());
  auto sk = dual_recurrent_skeleton(t, 1);
  CHECK(sk.size() == 1);
  auto s = non_expanding_spine(t, 1);
  CHECK(s.threshold == 1);
  CHECK(s.empty());
  REQUIRE(s.skeleton_components.size() == 1);
  CHECK(s.skeleton_components[0].shape == "edge-component");
  CHECK(peripheral_cycles(t, 2).empty());
  bool raised = false;
  try {
    non_expanding_spine(t, 0);
  } catch (const FsrError& e) {
    raised = e.kind() == ErrorKind::UnsupportedRegime;
  }
  CHECK(raised);
}

TEST_CASE("level-1 dual cycle of power_spider_2 is peripheral to a Fatou point") {
  Tower t(power_spider_2());
  const auto& cx = t.level(1).cx;
  int a0 = cx.edge_at("a0"), a1 = cx.edge_at("a1");
  int tr = cx.tile_at("t_R");
  CombinatorialCurve c;
  c.steps.push_back({a0, cx.slot(a0, true).tile == tr});
  int tl = cx.tile_at("t_L");
  c.steps.push_back({a1, cx.slot(a1, true).tile == tl});
  CHECK(classify_cycle(t, 1, c, power_spider_2().level0.marked) == CycleClass::PeripheralFatou);
}

TEST_CASE("levy decisions") {
  auto ps = is_levy_free(power_spider_2());
  CHECK(ps.levy_free);
  auto lb = is_levy_free(levy_bigon());
  CHECK_FALSE(lb.levy_free);
  CHECK(lb.witness.steps.size() == 2);
  auto js = is_levy_free(julia_slit());
  CHECK(js.levy_free);
  bool raised = false;
  try {
    is_levy_free(doubling_edge());
  } catch (const FsrError& e) {
    raised = e.kind() == ErrorKind::UnsupportedRegime;
  }
  CHECK(raised);
}

TEST_CASE("truncation equals skeleton minus leaves") {
  for (const auto& r : catalog()) {
    if (!is_polynomial(r)) continue;
    CAPTURE(r.name);
    Tower t(r);
    auto per = recurrence_periods(r);
    int n = 2 * per.threshold;
    auto s = non_expanding_spine(t, n);
    const auto& cx = t.level(n).cx;
    std::map<int, int> degree;
    for (int e : s.recurrent_edges) {
      ++degree[cx.slot(e, true).tile];
      ++degree[cx.slot(e, false).tile];
    }
    std::vector<HalfEdge> expect;
    for (int T = 0; T < static_cast<int>(cx.tiles.size()); ++T) {
      if (degree[T] < 2) continue;
      const auto& w = cx.tiles[T].walk;
      for (int i = 0; i < static_cast<int>(w.size()); ++i)
        if (std::binary_search(s.recurrent_edges.begin(), s.recurrent_edges.end(), w[i].edge))
          expect.push_back({T, i, w[i].edge});
    }
    CHECK(s.halves == expect);
    CHECK(band_transitivity_violations(t.level(n), s.recurrent_bands) == 0);
  }
}

TEST_CASE("spines are stable under the recurrence period") {
  for (const auto& r : catalog()) {
    if (!is_polynomial(r)) continue;
    CAPTURE(r.name);
    Tower t(r);
    auto per = recurrence_periods(r);
    int n = 2 * per.threshold;
    auto a = non_expanding_spine(t, n);
    auto b = non_expanding_spine(t, n + per.period);
    CHECK(spines_isomorphic(t.level(n), a, t.level(n + per.period), b));
  }
}
