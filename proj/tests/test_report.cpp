#include <doctest.h>

#include <regex>

#include "fsr/catalog.hpp"
#include "fsr/error.hpp"
#include "fsr/report.hpp"
#include "fsr/serialize.hpp"

using namespace fsr;

namespace {

int count_matches(const std::string& s, const std::string& pat) {
  std::regex re(pat);
  return static_cast<int>(std::distance(std::sregex_iterator(s.begin(), s.end(), re), std::sregex_iterator()));
}

}  // namespace

TEST_CASE("rule files round-trip byte for byte") {
  for (const auto& r : catalog()) {
    INFO(r.name);
    const std::string text = canonical_dump(rule_to_json(r));
    auto back = rule_from_json(parse_json_text(text));
    CHECK(canonical_dump(rule_to_json(back)) == text);
    auto rep = validate_rule(back);
    CHECK(rep.ok);
    CHECK(rep.degree == validate_rule(r).degree);
    CHECK(back.level0.marked == r.level0.marked);
    CHECK(back.metadata == r.metadata);
  }
}

TEST_CASE("canonical dump sorts keys and fixes float format") {
  Json j = {{"b", 0.1 + 0.2}, {"a", {1, 2, 3}}, {"c", 1.0 / 3.0}};
  CHECK(canonical_dump(j) == "{\n  \"a\": [1, 2, 3],\n  \"b\": 0.3,\n  \"c\": 0.333333333333\n}\n");
}

TEST_CASE("schema errors are validation errors") {
  auto base = rule_to_json(power_spider_2());
  auto expect = [](const Json& j, ErrorKind k) {
    try {
      rule_from_json(j);
      CHECK(false);
    } catch (const FsrError& e) {
      CHECK(e.kind() == k);
    }
  };
  auto j = base;
  j.erase("carrier");
  expect(j, ErrorKind::Validation);
  j = base;
  j["level0"]["edges"][0][1] = "nowhere";
  expect(j, ErrorKind::Validation);
  j = base;
  j["map"]["edges"]["a0"][1] = "x";
  expect(j, ErrorKind::Validation);
  j = base;
  j["version"] = 7;
  expect(j, ErrorKind::UnsupportedInput);
  CHECK_THROWS_AS(parse_json_text("{"), FsrError);
  CHECK_THROWS_AS(load_rule("catalog:no_such_rule"), FsrError);
}

TEST_CASE("multicurve specs round-trip") {
  auto mc = *catalog_multicurve("levy_bigon");
  auto back = multicurve_from_json(multicurve_to_json(mc));
  CHECK(back.curves == mc.curves);
  CHECK(back.lifts.size() == mc.lifts.size());
  CHECK(back.map_degree == mc.map_degree);
  CHECK_THROWS_AS(multicurve_from_json(Json{{"curves", {"g"}}, {"lifts", {{"g", "h", 1}}}}), FsrError);
}

TEST_CASE("analysis of the quadratic spider") {
  auto a = analyze(power_spider_2());
  CHECK(a["errors"].empty());
  CHECK(a["validation"]["degree"] == 2);
  CHECK(a["growth"]["polynomial"] == true);
  CHECK(a["levy"]["levy_free"] == true);
  CHECK(a["spine"]["empty"] == true);
  CHECK(a["arc"]["crochet_certified"] == true);
  CHECK(a["arc"]["lower"] == 1.0);
  CHECK(a["energy"][0]["upper"] == 1.0);
  const auto& cert = a["arc"]["certificate"];
  for (const char* key : {"K", "eps", "eps1", "shift", "power", "N", "M", "L", "case_bounds", "bound"})
    CHECK(cert.contains(key));
  CHECK(canonical_dump(analyze(power_spider_2())) == canonical_dump(a));
}

TEST_CASE("analysis of exponential and Levy rules") {
  auto d = analyze(doubling_edge());
  CHECK(d["growth"]["polynomial"] == false);
  CHECK_FALSE(d.contains("spine"));
  CHECK_FALSE(d.contains("energy"));
  CHECK(d["notes"].size() == 1);

  AnalysisOptions opt;
  opt.multicurves = {*catalog_multicurve("levy_bigon")};
  opt.energy_levels = 4;
  auto l = analyze(levy_bigon(), opt);
  CHECK(l["levy"]["levy_free"] == false);
  CHECK(l["levy"]["witness"].size() >= 1);
  CHECK(l["multicurves"][0]["levy"] == true);
  CHECK(l["arc"]["crochet_certified"] == false);
  CHECK(l["arc"]["lower"].get<double>() >= 1.0);
}

TEST_CASE("SVG rendering") {
  Tower t(power_spider_2());
  auto svg = render_svg(t.level(3).cx);
  CHECK(count_matches(svg, "class=\"tile\"") == 8);
  CHECK(count_matches(svg, "class=\"dual\"") == 8);
  CHECK(svg == render_svg(t.level(3).cx));

  // One edge on the sphere: a single tile whose dual edge is a loop.
  auto bigon = power_spider_2().level0;
  auto one = render_svg(bigon, {0}, {1, 1});
  CHECK(count_matches(one, "class=\"tile\"") == 1);
  CHECK(count_matches(one, "class=\"spine\"") == 1);
  CHECK(count_matches(one, "\\(Fatou\\)") == 2);

  Tower big(doubling_edge());
  CHECK_THROWS_AS(render_svg(big.level(12).cx), FsrError);
}

TEST_CASE("DOT dumps") {
  auto dot = digraph_dot(edge_digraph(doubling_edge()), "edges");
  CHECK(dot.rfind("digraph \"edges\" {", 0) == 0);
  CHECK(count_matches(dot, "->") == static_cast<int>(edge_digraph(doubling_edge()).arcs.size()));
  auto cdot = complex_dot(power_spider_2().level0, "s");
  CHECK(count_matches(cdot, "--") == 1);
}
