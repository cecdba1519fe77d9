#include "fsr/catalog.hpp"

#include <sstream>

#include "fsr/error.hpp"

namespace fsr {

std::vector<Side> parse_walk(const SphereComplex& cx, const std::string& walk) {
  std::istringstream in(walk);
  std::string tok;
  std::vector<Side> out;
  while (in >> tok) {
    char sign = tok.back();
    if (sign != '+' && sign != '-') fail(ErrorKind::Validation, "bad walk token '" + tok + "'");
    out.push_back({cx.edge_at(tok.substr(0, tok.size() - 1)), sign == '+'});
  }
  return out;
}

RuleBuilder::RuleBuilder(std::string name) { r_.name = std::move(name); }

RuleBuilder& RuleBuilder::vertex0(const std::string& id, bool marked) {
  int v = r_.level0.add_vertex(id);
  if (marked) r_.level0.mark(v);
  return *this;
}

RuleBuilder& RuleBuilder::edge0(const std::string& id, const std::string& tail, const std::string& head) {
  r_.level0.add_edge(id, tail, head);
  return *this;
}

RuleBuilder& RuleBuilder::tile0(const std::string& id, const std::string& walk) {
  r_.level0.add_tile(id, parse_walk(r_.level0, walk));
  return *this;
}

RuleBuilder& RuleBuilder::vertex1(const std::string& id, const std::string& carrier, const std::string& image) {
  r_.level1.add_vertex(id);
  vcar_.push_back(carrier);
  vimg_.push_back(image);
  return *this;
}

RuleBuilder& RuleBuilder::edge1(const std::string& id, const std::string& tail, const std::string& head,
                                const std::string& carrier, const std::string& image) {
  r_.level1.add_edge(id, tail, head);
  ecar_.push_back(carrier);
  eimg_.push_back(image);
  return *this;
}

RuleBuilder& RuleBuilder::tile1(const std::string& id, const std::string& walk, const std::string& carrier,
                                const std::string& image, int alignment) {
  r_.level1.add_tile(id, parse_walk(r_.level1, walk));
  tcar_.push_back(carrier);
  timg_.push_back(image);
  talign_.push_back(alignment);
  return *this;
}

RuleBuilder& RuleBuilder::meta(const std::string& key, const std::string& value) {
  r_.metadata[key] = value;
  return *this;
}

SubdivisionRule RuleBuilder::build() const {
  SubdivisionRule r = r_;
  const SphereComplex& L0 = r.level0;
  auto cell = [&](const std::string& spec) {
    if (spec.size() < 3 || spec[1] != ':') fail(ErrorKind::Validation, "bad carrier '" + spec + "'");
    std::string id = spec.substr(2);
    switch (spec[0]) {
      case 'v': return CellRef{CellKind::Vertex, L0.vertex_at(id)};
      case 'e': return CellRef{CellKind::Edge, L0.edge_at(id)};
      case 't': return CellRef{CellKind::Tile, L0.tile_at(id)};
    }
    fail(ErrorKind::Validation, "bad carrier '" + spec + "'");
  };
  for (std::size_t i = 0; i < vcar_.size(); ++i) {
    r.carrier_vertex.push_back(cell(vcar_[i]));
    r.map_vertex.push_back(L0.vertex_at(vimg_[i]));
  }
  for (std::size_t i = 0; i < ecar_.size(); ++i) {
    r.carrier_edge.push_back(cell(ecar_[i]));
    auto s = parse_walk(L0, eimg_[i]);
    if (s.size() != 1) fail(ErrorKind::Validation, "bad edge image '" + eimg_[i] + "'");
    r.map_edge.push_back(s[0]);
  }
  for (std::size_t i = 0; i < tcar_.size(); ++i) {
    CellRef c = cell(tcar_[i]);
    if (c.kind != CellKind::Tile) fail(ErrorKind::Validation, "tile carried by a non-tile");
    r.carrier_tile.push_back(c.index);
    r.map_tile.push_back({L0.tile_at(timg_[i]), talign_[i]});
  }
  return r;
}

SubdivisionRule power_spider_2() {
  return RuleBuilder("power_spider_2")
      .meta("model", "z -> z^2")
      .meta("description", "bigon sphere with one edge from 0 to infinity")
      .vertex0("v0", true)
      .vertex0("vinf", true)
      .edge0("e", "v0", "vinf")
      .tile0("t", "e+ e-")
      .vertex1("v0", "v:v0", "v0")
      .vertex1("vinf", "v:vinf", "vinf")
      .edge1("a0", "v0", "vinf", "e:e", "e+")
      .edge1("a1", "v0", "vinf", "t:t", "e+")
      .tile1("t_R", "a0+ a1-", "t:t", "t")
      .tile1("t_L", "a1+ a0-", "t:t", "t")
      .build();
}

SubdivisionRule doubling_edge() {
  return RuleBuilder("doubling_edge")
      .meta("model", "z -> z^2 with marked points 0, 1, infinity")
      .meta("description", "the unit circle is a loop edge that doubles")
      .vertex0("p0", true)
      .vertex0("p1", true)
      .vertex0("pinf", true)
      .edge0("c", "p1", "p1")
      .edge0("r0", "p0", "p1")
      .edge0("rinf", "p1", "pinf")
      .tile0("D0", "c+ r0- r0+")
      .tile0("Dinf", "c- rinf+ rinf-")
      .vertex1("p0", "v:p0", "p0")
      .vertex1("p1", "v:p1", "p1")
      .vertex1("pinf", "v:pinf", "pinf")
      .vertex1("m1", "e:c", "p1")
      .edge1("cu", "p1", "m1", "e:c", "c+")
      .edge1("cl", "m1", "p1", "e:c", "c+")
      .edge1("r0", "p0", "p1", "e:r0", "r0+")
      .edge1("r0b", "p0", "m1", "t:D0", "r0+")
      .edge1("rinf", "p1", "pinf", "e:rinf", "rinf+")
      .edge1("rinfb", "m1", "pinf", "t:Dinf", "rinf+")
      .tile1("U0", "cu+ r0b- r0+", "t:D0", "D0")
      .tile1("L0", "cl+ r0- r0b+", "t:D0", "D0")
      .tile1("Uinf", "cu- rinf+ rinfb-", "t:Dinf", "Dinf")
      .tile1("Linf", "cl- rinfb+ rinf-", "t:Dinf", "Dinf")
      .build();
}

SubdivisionRule levy_bigon() {
  return RuleBuilder("levy_bigon")
      .meta("model", "degree-2 map with a bigon mapped homeomorphically onto itself")
      .meta("description", "the curve around the bigon {p,q} lifts to itself with degree 1")
      .vertex0("p", true)
      .vertex0("q", true)
      .vertex0("r", true)
      .vertex0("s", true)
      .edge0("c1", "p", "q")
      .edge0("c2", "q", "p")
      .edge0("g1", "p", "r")
      .edge0("g2", "r", "s")
      .edge0("g3", "s", "q")
      .tile0("T2", "c1- c2-")
      .tile0("Ta", "c1+ g3- g2- g1-")
      .tile0("Tb", "c2+ g1+ g2+ g3+")
      .vertex1("p", "v:p", "p")
      .vertex1("q", "v:q", "q")
      .vertex1("r", "v:r", "r")
      .vertex1("s", "v:s", "s")
      .vertex1("pp", "t:Tb", "p")
      .vertex1("qq", "t:Tb", "q")
      .edge1("c1", "p", "q", "e:c1", "c1+")
      .edge1("c2", "q", "p", "e:c2", "c2+")
      .edge1("c1b", "pp", "qq", "t:Tb", "c1+")
      .edge1("c2b", "qq", "pp", "t:Tb", "c2+")
      .edge1("g1a", "p", "r", "e:g1", "g1+")
      .edge1("g1b", "pp", "r", "t:Tb", "g1+")
      .edge1("g2a", "r", "s", "e:g2", "g2+")
      .edge1("g2b", "r", "s", "t:Tb", "g2+")
      .edge1("g3a", "s", "q", "e:g3", "g3+")
      .edge1("g3b", "s", "qq", "t:Tb", "g3+")
      .tile1("T2", "c1- c2-", "t:T2", "T2")
      .tile1("D2b", "c1b- c2b-", "t:Tb", "T2")
      .tile1("Ta1", "c1+ g3a- g2a- g1a-", "t:Ta", "Ta")
      .tile1("Tb1", "c2+ g1a+ g2b+ g3a+", "t:Tb", "Tb")
      .tile1("Ta2", "c1b+ g3b- g2b- g1b-", "t:Tb", "Ta")
      .tile1("Tb2", "c2b+ g1b+ g2a+ g3b+", "t:Tb", "Tb")
      .build();
}

SubdivisionRule tri_example_fig4() {
  return RuleBuilder("tri_example_fig4")
      .meta("model", "degree-4 map on a triangle pillow; level 1 is an octahedron")
      .meta("provenance", "reconstruction: two tiles, degree 4, spine is a tripod")
      .vertex0("a", true)
      .vertex0("b", true)
      .vertex0("c", true)
      .edge0("x", "a", "b")
      .edge0("y", "b", "c")
      .edge0("z", "c", "a")
      .tile0("W", "x+ y+ z+")
      .tile0("B", "z- y- x-")
      .vertex1("a", "v:a", "a")
      .vertex1("b", "v:b", "b")
      .vertex1("c", "v:c", "c")
      .vertex1("ua", "t:B", "a")
      .vertex1("ub", "t:B", "b")
      .vertex1("uc", "t:B", "c")
      .edge1("x", "a", "b", "e:x", "x+")
      .edge1("y", "b", "c", "e:y", "y+")
      .edge1("z", "c", "a", "e:z", "z+")
      .edge1("e1", "uc", "a", "t:B", "z+")
      .edge1("e2", "b", "uc", "t:B", "y+")
      .edge1("e3", "ua", "b", "t:B", "x+")
      .edge1("e4", "c", "ua", "t:B", "z+")
      .edge1("e5", "ub", "c", "t:B", "y+")
      .edge1("e6", "a", "ub", "t:B", "x+")
      .edge1("e7", "ub", "uc", "t:B", "y+")
      .edge1("e8", "ua", "ub", "t:B", "x+")
      .edge1("e9", "uc", "ua", "t:B", "z+")
      .tile1("W1", "x+ y+ z+", "t:W", "W")
      .tile1("Tx", "x- e1- e2-", "t:B", "B", 2)
      .tile1("Ty", "y- e3- e4-", "t:B", "B", 1)
      .tile1("Tz", "z- e5- e6-", "t:B", "B", 0)
      .tile1("Wa", "e6+ e7+ e1+", "t:B", "W", 0)
      .tile1("Wb", "e2+ e9+ e3+", "t:B", "W", 1)
      .tile1("Wc", "e4+ e8+ e5+", "t:B", "W", 2)
      .tile1("Bc", "e7- e8- e9-", "t:B", "B", 1)
      .build();
}

SubdivisionRule julia_slit() {
  return RuleBuilder("julia_slit")
      .meta("model", "degree-2 pillowcase map fixing a Julia slit pq; only r and s are marked")
      .vertex0("p")
      .vertex0("q")
      .vertex0("r", true)
      .vertex0("s", true)
      .edge0("c", "p", "q")
      .edge0("g1", "p", "r")
      .edge0("g2", "r", "s")
      .edge0("g3", "s", "q")
      .tile0("Ta", "c+ g3- g2- g1-")
      .tile0("Tb", "c- g1+ g2+ g3+")
      .vertex1("p", "v:p", "p")
      .vertex1("q", "v:q", "q")
      .vertex1("r", "v:r", "r")
      .vertex1("s", "v:s", "s")
      .vertex1("pp", "t:Tb", "p")
      .vertex1("qq", "t:Tb", "q")
      .edge1("c", "p", "q", "e:c", "c+")
      .edge1("cb", "pp", "qq", "t:Tb", "c+")
      .edge1("g1a", "p", "r", "e:g1", "g1+")
      .edge1("g1b", "pp", "r", "t:Tb", "g1+")
      .edge1("g2a", "r", "s", "e:g2", "g2+")
      .edge1("g2b", "r", "s", "t:Tb", "g2+")
      .edge1("g3a", "s", "q", "e:g3", "g3+")
      .edge1("g3b", "s", "qq", "t:Tb", "g3+")
      .tile1("Ta1", "c+ g3a- g2a- g1a-", "t:Ta", "Ta")
      .tile1("Tb1", "c- g1a+ g2b+ g3a+", "t:Tb", "Tb")
      .tile1("Ta2", "cb+ g3b- g2b- g1b-", "t:Tb", "Ta")
      .tile1("Tb2", "cb- g1b+ g2a+ g3b+", "t:Tb", "Tb")
      .build();
}

SubdivisionRule basilica_real() {
  return RuleBuilder("basilica_real")
      .meta("model", "z -> z^2 - 1 on the real line; vertices -1, alpha, 0, -alpha, beta, infinity")
      .vertex0("m1", true)
      .vertex0("al")
      .vertex0("z0", true)
      .vertex0("nal")
      .vertex0("be")
      .vertex0("inf", true)
      .edge0("E1", "inf", "m1")
      .edge0("E2", "m1", "al")
      .edge0("E3", "al", "z0")
      .edge0("E4", "z0", "nal")
      .edge0("E5", "nal", "be")
      .edge0("E6", "be", "inf")
      .tile0("U", "E1+ E2+ E3+ E4+ E5+ E6+")
      .tile0("L", "E6- E5- E4- E3- E2- E1-")
      .vertex1("m1", "v:m1", "z0")
      .vertex1("al", "v:al", "al")
      .vertex1("z0", "v:z0", "m1")
      .vertex1("nal", "v:nal", "al")
      .vertex1("be", "v:be", "be")
      .vertex1("inf", "v:inf", "inf")
      .vertex1("nbe", "e:E1", "be")
      .vertex1("ngam", "e:E1", "nal")
      .vertex1("one", "e:E5", "z0")
      .vertex1("gam", "e:E5", "nal")
      .edge1("s11", "inf", "nbe", "e:E1", "E6-")
      .edge1("s12", "nbe", "ngam", "e:E1", "E5-")
      .edge1("s13", "ngam", "m1", "e:E1", "E4-")
      .edge1("E2s", "m1", "al", "e:E2", "E3-")
      .edge1("E3s", "al", "z0", "e:E3", "E2-")
      .edge1("E4s", "z0", "nal", "e:E4", "E2+")
      .edge1("s51", "nal", "one", "e:E5", "E3+")
      .edge1("s52", "one", "gam", "e:E5", "E4+")
      .edge1("s53", "gam", "be", "e:E5", "E5+")
      .edge1("E6s", "be", "inf", "e:E6", "E6+")
      .edge1("iu", "z0", "inf", "t:U", "E1-")
      .edge1("id", "z0", "inf", "t:L", "E1-")
      .tile1("Q1", "E4s+ s51+ s52+ s53+ E6s+ iu-", "t:U", "U", 1)
      .tile1("Q2", "s11+ s12+ s13+ E2s+ E3s+ iu+", "t:U", "L", 0)
      .tile1("Q3", "E3s- E2s- s13- s12- s11- id-", "t:L", "U", 1)
      .tile1("Q4", "id+ E6s- s53- s52- s51- E4s-", "t:L", "L", 5)
      .build();
}

SubdivisionRule radial_spider(int d, int m, bool unit_points) {
  if (d < 2 || m < 1) fail(ErrorKind::UnsupportedInput, "radial_spider needs d >= 2, m >= 1");
  const std::string name = "radial_spider_d" + std::to_string(d) + "_m" + std::to_string(m) + (unit_points ? "_unit" : "");
  RuleBuilder b(name);
  b.meta("model", "z -> z^" + std::to_string(d) + " with " + std::to_string(m) + " radial legs");
  auto S = [](int j) { return std::to_string(j); };
  const int n = d * m;
  b.vertex0("o", true).vertex0("inf", true);
  if (unit_points) {
    for (int j = 0; j < m; ++j) b.vertex0("u" + S(j));
    for (int j = 0; j < m; ++j) b.edge0("in" + S(j), "o", "u" + S(j)).edge0("out" + S(j), "u" + S(j), "inf");
    for (int j = 0; j < m; ++j) {
      int k = (j + 1) % m;
      b.tile0("S" + S(j), "in" + S(j) + "+ out" + S(j) + "+ out" + S(k) + "- in" + S(k) + "-");
    }
  } else {
    for (int j = 0; j < m; ++j) b.edge0("l" + S(j), "o", "inf");
    for (int j = 0; j < m; ++j) b.tile0("S" + S(j), "l" + S(j) + "+ l" + S((j + 1) % m) + "-");
  }
  b.vertex1("o", "v:o", "o").vertex1("inf", "v:inf", "inf");
  auto leg_carrier = [&](int i, const std::string& leg) {
    return i % d == 0 ? "e:" + leg + S(i / d) : "t:S" + S(i / d);
  };
  if (unit_points) {
    for (int i = 0; i < n; ++i)
      b.vertex1("w" + S(i), i % d == 0 ? "v:u" + S(i / d) : "t:S" + S(i / d), "u" + S(i % m));
    for (int i = 0; i < n; ++i) {
      b.edge1("a" + S(i), "o", "w" + S(i), leg_carrier(i, "in"), "in" + S(i % m) + "+");
      b.edge1("b" + S(i), "w" + S(i), "inf", leg_carrier(i, "out"), "out" + S(i % m) + "+");
    }
    for (int i = 0; i < n; ++i) {
      int k = (i + 1) % n;
      b.tile1("Q" + S(i), "a" + S(i) + "+ b" + S(i) + "+ b" + S(k) + "- a" + S(k) + "-", "t:S" + S(i / d),
              "S" + S(i % m));
    }
  } else {
    for (int i = 0; i < n; ++i) b.edge1("a" + S(i), "o", "inf", leg_carrier(i, "l"), "l" + S(i % m) + "+");
    for (int i = 0; i < n; ++i)
      b.tile1("Q" + S(i), "a" + S(i) + "+ a" + S((i + 1) % n) + "-", "t:S" + S(i / d), "S" + S(i % m));
  }
  return b.build();
}

std::vector<SubdivisionRule> catalog() {
  return {power_spider_2(), tri_example_fig4(), doubling_edge(), levy_bigon(), julia_slit(),
          basilica_real(), radial_spider(2, 3, true)};
}

SubdivisionRule catalog_rule(const std::string& name) {
  for (auto& r : catalog())
    if (r.name == name) return r;
  fail(ErrorKind::UnsupportedInput, "no catalog rule named '" + name + "'");
}

}  // namespace fsr
