#include <CLI11.hpp>

#include <iostream>
#include <set>
#include <sstream>

#include "fsr/catalog.hpp"
#include "fsr/energy.hpp"
#include "fsr/error.hpp"
#include "fsr/multicurve.hpp"
#include "fsr/quotient.hpp"
#include "fsr/report.hpp"
#include "fsr/serialize.hpp"
#include "fsr/spine.hpp"

using namespace fsr;

namespace {

struct Globals {
  bool json = false;
  std::size_t budget = kDefaultBudget;
  unsigned seed = 0;  // accepted for interface stability; no stage draws random numbers
  std::string out;
};

// Human-readable form: one line per top-level key.
void print_text(const Json& j, std::ostream& os) {
  if (!j.is_object()) {
    os << j.dump() << "\n";
    return;
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    os << it.key() << ": ";
    if (it.value().is_string())
      os << it.value().get<std::string>();
    else
      os << it.value().dump();
    os << "\n";
  }
}

void emit(const Globals& g, const Json& j) {
  std::string text;
  if (g.json) {
    text = canonical_dump(j);
  } else {
    std::ostringstream os;
    print_text(j, os);
    text = os.str();
  }
  if (g.out.empty())
    std::cout << text;
  else
    write_text(g.out, text);
}

void emit_raw(const Globals& g, const std::string& text) {
  if (g.out.empty())
    std::cout << text;
  else
    write_text(g.out, text);
}

std::vector<MulticurveSpec> load_multicurves(const std::vector<std::string>& files) {
  std::vector<MulticurveSpec> out;
  for (const auto& f : files) {
    const std::string prefix = "catalog:";
    if (f.rfind(prefix, 0) == 0) {
      auto mc = catalog_multicurve(f.substr(prefix.size()));
      if (!mc) fail(ErrorKind::UnsupportedInput, "no catalog multicurve for '" + f.substr(prefix.size()) + "'");
      out.push_back(*mc);
    } else {
      out.push_back(multicurve_from_json(parse_json_text(read_text(f))));
    }
  }
  return out;
}

std::vector<int> ids_to_indices(const std::vector<std::string>& ids, const std::function<int(const std::string&)>& find,
                                const std::string& what) {
  std::vector<int> out;
  for (const auto& id : ids) {
    int i = find(id);
    if (i < 0) fail(ErrorKind::UnsupportedInput, "unknown " + what + " '" + id + "'");
    out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fsr: finite subdivision rule analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_flag("--json", g.json, "Canonical JSON output");
  app.add_option("--budget", g.budget, "Cell budget for subdivision towers");
  app.add_option("--seed", g.seed, "Seed for randomized search orders (results do not depend on it)");
  app.add_option("-o,--out", g.out, "Write output to a file");

  std::string rule_src;
  int level = 1;
  bool dot = false;
  std::vector<std::string> mc_files;
  double p = 2.0;
  int levels = 6;
  std::vector<std::string> q_edges, q_tiles;
  bool spine_overlay = false;
  std::string cat_name;

  auto* validate = app.add_subcommand("validate", "Check a rule file");
  validate->add_option("rule", rule_src, "Rule file or catalog:<name>")->required();

  auto* subdivide = app.add_subcommand("subdivide", "Write the level-n complex");
  subdivide->add_option("rule", rule_src)->required();
  subdivide->add_option("--level", level, "Level")->check(CLI::NonNegativeNumber);
  subdivide->add_flag("--dot", dot, "DOT graph instead of JSON");

  auto* growth = app.add_subcommand("growth", "Edge growth classes");
  growth->add_option("rule", rule_src)->required();
  growth->add_flag("--dot", dot, "Dump the edge digraph as DOT");

  auto* spine = app.add_subcommand("spine", "Non-expanding spine at a level");
  spine->add_option("rule", rule_src)->required();
  spine->add_option("--level", level, "Level (default: the threshold)");

  auto* levy = app.add_subcommand("levy", "Decide Levy freeness");
  levy->add_option("rule", rule_src)->required();

  auto* quotient = app.add_subcommand("quotient", "Collapse a subcomplex (default: from Julia edges)");
  quotient->add_option("rule", rule_src)->required();
  quotient->add_option("--edges", q_edges, "Level-0 edge ids to collapse")->delimiter(',');
  quotient->add_option("--tiles", q_tiles, "Level-0 tile ids to collapse")->delimiter(',');

  auto* normalize = app.add_subcommand("normalize", "Normalize a rule for energy estimates");
  normalize->add_option("rule", rule_src)->required();

  auto* multicurve = app.add_subcommand("multicurve", "Spectral profile of multicurve specs");
  multicurve->add_option("spec", mc_files, "Multicurve files or catalog:<rule>")->required();

  auto* energy = app.add_subcommand("energy", "Asymptotic energy bounds at one p");
  energy->add_option("rule", rule_src)->required();
  energy->add_option("--p", p, "Exponent")->check(CLI::Range(1.0, 1e9));
  energy->add_option("--levels", levels, "Levels of natural representatives")->check(CLI::PositiveNumber);
  energy->add_option("--multicurve", mc_files, "Multicurve files or catalog:<rule>");

  auto* report = app.add_subcommand("report", "Full analysis report");
  report->add_option("rule", rule_src)->required();
  report->add_option("--levels", levels, "Levels of natural representatives")->check(CLI::PositiveNumber);
  report->add_option("--multicurve", mc_files, "Multicurve files or catalog:<rule>");

  auto* render = app.add_subcommand("render", "SVG of a level complex");
  render->add_option("rule", rule_src)->required();
  render->add_option("--level", level, "Level")->check(CLI::NonNegativeNumber);
  render->add_flag("--spine", spine_overlay, "Stroke the non-expanding spine");

  auto* catalog_cmd = app.add_subcommand("catalog", "List built-in rules or dump one");
  catalog_cmd->add_option("name", cat_name, "Rule to dump as JSON");

  CLI11_PARSE(app, argc, argv);

  std::string stage = "input";
  try {
    if (catalog_cmd->parsed()) {
      stage = "catalog";
      if (cat_name.empty()) {
        Json list = Json::array();
        for (const auto& r : catalog()) list.push_back(r.name);
        if (g.json)
          emit(g, Json{{"rules", list}});
        else
          for (const auto& n : list) std::cout << n.get<std::string>() << "\n";
      } else {
        emit_raw(g, canonical_dump(rule_to_json(catalog_rule(cat_name))));
      }
      return 0;
    }
    if (multicurve->parsed()) {
      stage = "multicurve";
      Json arr = Json::array();
      for (const auto& mc : load_multicurves(mc_files)) arr.push_back(profile_json(mc, classify_multicurve(mc)));
      emit(g, Json{{"profiles", arr}});
      return 0;
    }

    SubdivisionRule rule = load_rule(rule_src);
    stage = "validate";
    auto rep = validate_rule(rule);
    if (validate->parsed()) {
      Json j{{"ok", rep.ok}, {"name", rule.name}, {"degree", rep.degree}, {"euler", rep.euler}, {"critical", rep.critical}};
      if (!rep.ok) j["failure"] = rep.failure, j["detail"] = rep.detail;
      emit(g, j);
      return rep.ok ? 0 : 2;
    }
    if (!rep.ok) fail(ErrorKind::Validation, rep.failure + ": " + rep.detail);

    if (subdivide->parsed()) {
      stage = "subdivide";
      Tower t(rule, g.budget);
      const auto& L = t.level(level);
      if (dot)
        emit_raw(g, complex_dot(L.cx, rule.name + " level " + std::to_string(level)));
      else
        emit_raw(g, canonical_dump(Json{{"name", rule.name}, {"level", level}, {"complex", complex_to_json(L.cx)}}));
    } else if (growth->parsed()) {
      stage = "growth";
      if (dot)
        emit_raw(g, digraph_dot(edge_digraph(rule), rule.name + " edges"));
      else
        emit(g, growth_json(rule));
    } else if (spine->parsed()) {
      stage = "spine";
      Tower t(rule, g.budget);
      int n = spine->count("--level") ? level : std::max(recurrence_periods(rule).threshold, 1);
      emit(g, spine_json(t.level(n).cx, non_expanding_spine(t, n)));
    } else if (levy->parsed()) {
      stage = "levy";
      auto lv = is_levy_free(rule);
      emit(g, levy_json(rule, lv));
    } else if (quotient->parsed()) {
      stage = "quotient";
      CollapsibleSubcomplex x;
      if (q_edges.empty() && q_tiles.empty()) {
        x = collapsible_from_julia_edges(rule);
      } else {
        x.edges = ids_to_indices(q_edges, [&](const std::string& id) { return rule.level0.edge_index(id); }, "edge");
        x.tiles = ids_to_indices(q_tiles, [&](const std::string& id) { return rule.level0.tile_index(id); }, "tile");
      }
      emit_raw(g, canonical_dump(rule_to_json(quotient_rule(rule, x).rule)));
    } else if (normalize->parsed()) {
      stage = "normalize";
      emit_raw(g, canonical_dump(rule_to_json(normalize_for_energy(rule))));
    } else if (energy->parsed()) {
      stage = "energy";
      auto b = asymptotic_bounds(rule, p, levels, load_multicurves(mc_files));
      Json j{{"p", b.p}, {"upper", b.upper ? Json(*b.upper) : Json(nullptr)}, {"upper_source", b.upper_source},
             {"lower", b.lower ? Json(*b.lower) : Json(nullptr)}, {"lower_source", b.lower_source},
             {"level_values", b.level_values}};
      if (b.certificate) {
        const auto& c = *b.certificate;
        j["certificate"] = {{"certified", c.certified}, {"bound", c.bound}, {"K", c.params.K}, {"eps", c.params.eps},
                            {"eps1", c.params.eps1}, {"shift", c.shift}, {"power", c.power}, {"reason", c.reason}};
      }
      emit(g, j);
    } else if (report->parsed()) {
      stage = "report";
      AnalysisOptions opt;
      opt.energy_levels = levels;
      opt.multicurves = load_multicurves(mc_files);
      opt.budget = g.budget;
      Json j = analyze(rule, opt);
      emit(g, j);
      if (!j["errors"].empty()) {
        // Surface the first stage failure through the exit code, after the report is written.
        const std::string kind = j["errors"][0]["kind"].get<std::string>();
        for (auto k : {ErrorKind::Validation, ErrorKind::UnsupportedRegime, ErrorKind::Resource, ErrorKind::Inconsistency,
                       ErrorKind::UnsupportedInput})
          if (kind == kind_name(k)) return exit_code(k);
      }
    } else if (render->parsed()) {
      stage = "render";
      Tower t(rule, g.budget);
      const auto& L = t.level(level);
      std::vector<int> hl;
      if (spine_overlay) {
        auto s = non_expanding_spine(t, level);
        std::set<int> edges(s.full_edges.begin(), s.full_edges.end());
        for (const auto& h : s.halves) edges.insert(h.edge);
        hl.assign(edges.begin(), edges.end());
      }
      auto vc = classify_vertices(rule);
      std::vector<char> fatou(L.cx.vertices.size());
      for (std::size_t v = 0; v < fatou.size(); ++v) fatou[v] = vc.fatou[L.vtype[v]];
      emit_raw(g, render_svg(L.cx, hl, fatou));
    }
    return 0;
  } catch (const FsrError& e) {
    std::cerr << "error [" << stage << "] " << kind_name(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "] internal: " << e.what() << "\n";
    return 5;
  }
}
