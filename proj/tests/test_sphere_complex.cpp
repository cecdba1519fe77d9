#include "doctest.h"
#include "fsr/sphere_complex.hpp"

using namespace fsr;

namespace {

SphereComplex bigon() {
  SphereComplex cx;
  cx.add_vertex("a");
  cx.add_vertex("b");
  cx.add_edge("e", "a", "b");
  cx.add_edge("f", "a", "b");
  cx.add_tile("L", {{"e", true}, {"f", false}});
  cx.add_tile("R", {{"f", true}, {"e", false}});
  return cx;
}

SphereComplex tetrahedron() {
  SphereComplex cx;
  for (auto v : {"0", "1", "2", "3"}) cx.add_vertex(v);
  cx.add_edge("01", "0", "1");
  cx.add_edge("02", "0", "2");
  cx.add_edge("03", "0", "3");
  cx.add_edge("12", "1", "2");
  cx.add_edge("13", "1", "3");
  cx.add_edge("23", "2", "3");
  cx.add_tile("A", {{"01", true}, {"12", true}, {"02", false}});
  cx.add_tile("B", {{"02", true}, {"23", true}, {"03", false}});
  cx.add_tile("C", {{"03", true}, {"13", false}, {"01", false}});
  cx.add_tile("D", {{"12", false}, {"13", true}, {"23", false}});
  return cx;
}

}  // namespace

TEST_CASE("bigon and tetrahedron are spheres") {
  for (auto cx : {bigon(), tetrahedron()}) {
    auto rep = validate_complex(cx);
    CHECK(rep.ok);
    CHECK(rep.euler == 2);
    CHECK(euler_characteristic(cx) == 2);
    auto d = dual_skeleton(cx);
    CHECK(d.euler() == 2);
    CHECK(d.faces.size() == cx.vertices.size());
  }
}

TEST_CASE("tetrahedron dual faces match vertex degrees") {
  auto cx = tetrahedron();
  auto d = dual_skeleton(cx);
  for (std::size_t f = 0; f < d.faces.size(); ++f) CHECK(d.faces[f].size() == 3);
  auto cc = cx.corner_counts();
  for (int c : cc) CHECK(c == 3);
}

TEST_CASE("torus is rejected by the euler check") {
  SphereComplex cx;
  cx.add_vertex("v");
  cx.add_edge("a", "v", "v");
  cx.add_edge("b", "v", "v");
  cx.add_tile("T", {{"a", true}, {"b", true}, {"a", false}, {"b", false}});
  auto rep = validate_complex(cx);
  CHECK_FALSE(rep.ok);
  CHECK(rep.failure == "euler characteristic");
}

TEST_CASE("unpaired side is rejected") {
  SphereComplex cx;
  cx.add_vertex("a");
  cx.add_vertex("b");
  cx.add_edge("e", "a", "b");
  cx.add_edge("f", "a", "b");
  cx.add_tile("L", {{"e", true}, {"f", false}});
  auto rep = validate_complex(cx);
  CHECK_FALSE(rep.ok);
  CHECK(rep.failure == "orientation pairing");
}

TEST_CASE("broken walk chaining is rejected") {
  SphereComplex cx;
  cx.add_vertex("a");
  cx.add_vertex("b");
  cx.add_edge("e", "a", "b");
  cx.add_edge("f", "a", "b");
  cx.add_tile("L", {{"e", true}, {"f", true}});
  cx.add_tile("R", {{"f", false}, {"e", false}});
  auto rep = validate_complex(cx);
  CHECK_FALSE(rep.ok);
  CHECK(rep.failure == "walk chaining");
}

TEST_CASE("curve around one tetrahedron vertex separates it") {
  auto cx = tetrahedron();
  for (int v = 0; v < 4; ++v) cx.mark(v);
  auto d = dual_skeleton(cx);
  // Loop around vertex 0: cross its three edges in dual-face order.
  int f0 = -1;
  for (std::size_t f = 0; f < d.faces.size(); ++f)
    if (d.face_vertex[f] == 0) f0 = static_cast<int>(f);
  REQUIRE(f0 >= 0);
  CombinatorialCurve c;
  for (auto s : d.faces[f0]) {
    Side side = cx.tiles[s.tile].walk[s.pos];
    const Slot& plus = cx.slot(side.edge, true);
    c.steps.push_back({side.edge, plus.tile == s.tile});
  }
  CHECK(curve_is_closed(cx, c));
  CHECK(curve_is_simple(cx, c));
  auto sides = enclosed_markings(cx, c);
  bool one_side = (sides.left == std::vector<int>{0} && sides.right.size() == 3) ||
                  (sides.right == std::vector<int>{0} && sides.left.size() == 3);
  CHECK(one_side);
  auto rs = enclosed_markings(cx, reversed(c));
  CHECK(rs.left == sides.right);
}
