#include "fsr/report.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "fsr/energy.hpp"
#include "fsr/error.hpp"
#include "fsr/quotient.hpp"

namespace fsr {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json certificate_json(const CrochetCertificate& c) {
  return {{"certified", c.certified},
          {"p", c.p},
          {"bound", c.bound},
          {"psi_bound", c.psi_bound},
          {"rho_bound", c.rho_bound},
          {"K", c.params.K},
          {"eps", c.params.eps},
          {"eps1", c.params.eps1},
          {"shift", c.shift},
          {"power", c.power},
          {"N", c.N},
          {"M", c.M},
          {"L", c.L},
          {"eps2", c.eps2},
          {"case_bounds", {c.case1, c.case2, c.case3, c.case4}},
          {"forest_components", c.forest_components},
          {"reason", c.reason}};
}

Json bound_json(const EnergyBound& b) {
  Json j{{"p", b.p},
         {"upper", opt(b.upper)},
         {"upper_source", b.upper_source},
         {"lower", opt(b.lower)},
         {"lower_source", b.lower_source},
         {"level_values", b.level_values}};
  if (b.certificate) j["certificate"] = certificate_json(*b.certificate);
  return j;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

}  // namespace

Json growth_json(const SubdivisionRule& rule) {
  auto g = edge_digraph(rule);
  Json edges = Json::array();
  bool polynomial = true;
  int degree = -1;
  for (int e = 0; e < g.size(); ++e) {
    auto gc = growth_class(g, e);
    polynomial = polynomial && !gc.exponential;
    degree = std::max(degree, gc.degree);
    edges.push_back({{"id", rule.level0.edges[e].id}, {"class", to_string(gc)}, {"rate", edge_growth_rate(rule, e)}});
  }
  Json j{{"edges", edges}, {"polynomial", polynomial}};
  if (polynomial) j["max_degree"] = degree;
  return j;
}

Json spine_json(const SphereComplex& cx, const Spine& s) {
  Json comps = Json::array();
  for (const auto& c : s.components) {
    Json edges = Json::array();
    for (int e : c.edges) edges.push_back(cx.edges[e].id);
    Json tiles = Json::array();
    for (int t : c.tiles) tiles.push_back(cx.tiles[t].id);
    Json jc{{"shape", c.shape}, {"edges", edges}, {"tiles", tiles}};
    if (c.vertex >= 0) jc["vertex"] = cx.vertices[c.vertex];
    comps.push_back(jc);
  }
  Json rec = Json::array();
  for (int e : s.recurrent_edges) rec.push_back(cx.edges[e].id);
  return {{"level", s.level},
          {"threshold", s.threshold},
          {"empty", s.empty()},
          {"recurrent_edges", rec},
          {"recurrent_bands", s.recurrent_bands.size()},
          {"components", comps}};
}

Json levy_json(const SubdivisionRule&, const LevyResult& r) {
  Json j{{"levy_free", r.levy_free}, {"level", r.level}, {"cycles_checked", r.cycles_checked}};
  if (!r.levy_free) j["witness"] = r.witness_edges;
  return j;
}

Json profile_json(const MulticurveSpec& mc, const SpectralProfile& prof) {
  Json samples = Json::array();
  for (const auto& s : prof.samples)
    samples.push_back({{"p", std::isinf(s.p) ? Json("inf") : Json(s.p)},
                       {"lambda", s.lambda.value},
                       {"interval", {s.lambda.lower, s.lambda.upper}}});
  Json j{{"name", mc.name},
         {"samples", samples},
         {"blocks", prof.blocks},
         {"nilpotent", prof.nilpotent},
         {"levy", prof.levy},
         {"cantor", prof.cantor},
         {"thurston_obstruction", prof.thurston_obstruction}};
  if (prof.exponent)
    j["critical_exponent"] = {{"value", prof.exponent->value},
                              {"interval", {prof.exponent->lower, prof.exponent->upper}},
                              {"exact", prof.exponent->exact}};
  if (prof.levy) j["note"] = "degree-one lift cycle: infinite-p energy is at least 1";
  return j;
}

Json analyze(const SubdivisionRule& rule, const AnalysisOptions& options) {
  Json out;
  Json errors = Json::array();
  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
      return true;
    } catch (const FsrError& e) {
      errors.push_back({{"stage", name}, {"kind", kind_name(e.kind())}, {"message", e.what()}});
    }
    return false;
  };

  Json meta = Json::object();
  for (const auto& [k, v] : rule.metadata) meta[k] = v;
  out["rule"] = {{"name", rule.name},
                 {"cells", {rule.level0.vertices.size(), rule.level0.edges.size(), rule.level0.tiles.size()}},
                 {"metadata", meta}};

  auto rep = validate_rule(rule);
  out["validation"] = {{"ok", rep.ok}, {"degree", rep.degree}, {"euler", rep.euler}, {"critical", rep.critical}};
  if (!rep.ok) {
    out["validation"]["failure"] = rep.failure;
    out["validation"]["detail"] = rep.detail;
    errors.push_back({{"stage", "validate"}, {"kind", "validation"}, {"message", rep.failure + ": " + rep.detail}});
    out["errors"] = errors;
    return out;
  }

  bool polynomial = false;
  stage("growth", [&] {
    out["growth"] = growth_json(rule);
    polynomial = out["growth"]["polynomial"].get<bool>();
    auto vc = classify_vertices(rule);
    Json verts = Json::array();
    for (std::size_t v = 0; v < rule.level0.vertices.size(); ++v)
      verts.push_back({{"id", rule.level0.vertices[v]},
                       {"class", vc.fatou[v] ? "fatou" : "julia"},
                       {"marked", rule.level0.is_marked(static_cast<int>(v))},
                       {"periodic", static_cast<bool>(vc.periodic[v])}});
    out["vertices"] = verts;
  });

  Json profiles = Json::array();
  for (const auto& mc : options.multicurves)
    stage("multicurve", [&] { profiles.push_back(profile_json(mc, classify_multicurve(mc))); });
  out["multicurves"] = profiles;

  if (!polynomial) {
    out["notes"] = Json::array({"exponential edge growth: spine, Levy and energy stages are outside the supported regime"});
    out["errors"] = errors;
    return out;
  }

  bool levy_free = false;
  stage("levy", [&] {
    auto lv = is_levy_free(rule);
    levy_free = lv.levy_free;
    out["levy"] = levy_json(rule, lv);
  });

  SubdivisionRule normalized = rule;
  bool normalized_ok = levy_free && stage("normalize", [&] {
    normalized = normalize_for_energy(rule);
    Json n{{"name", normalized.name}, {"changed", normalized.name != rule.name}};
    for (const char* key : {"normalization", "combinatorial_class"})
      if (normalized.metadata.count(key)) n[key] = normalized.metadata.at(key);
    out["normalization"] = n;
  });

  stage("spine", [&] {
    const SubdivisionRule& base = normalized_ok ? normalized : rule;
    auto rp = recurrence_periods(base);
    Tower t(base, options.budget);
    int n = std::max(rp.threshold, 1);
    auto s = non_expanding_spine(t, n);
    out["spine"] = spine_json(t.level(n).cx, s);
  });

  bool certified = false;
  stage("energy", [&] {
    auto br = bracket_dimension(rule, options.energy_levels, options.multicurves, options.ps);
    Json samples = Json::array();
    Json cert = nullptr;
    for (const auto& b : br.bounds) {
      samples.push_back(bound_json(b));
      if (b.certificate && b.certificate->certified && cert.is_null()) cert = certificate_json(*b.certificate);
    }
    certified = !cert.is_null();
    out["energy"] = samples;
    out["arc"] = {{"lower", br.lower},
                  {"upper", opt(br.upper)},
                  {"crochet_certified", certified},
                  {"certificate", cert}};
  });

  out["errors"] = errors;
  return out;
}

std::string digraph_dot(const DynDigraph& g, const std::string& name) {
  std::ostringstream os;
  os << "digraph \"" << name << "\" {\n";
  for (int v = 0; v < g.size(); ++v) os << "  n" << v << " [label=" << Json(g.vertices[v]).dump() << "];\n";
  for (const auto& a : g.arcs)
    os << "  n" << a.source << " -> n" << a.target << " [label=" << Json(a.tag).dump() << "];\n";
  os << "}\n";
  return os.str();
}

std::string complex_dot(const SphereComplex& cx, const std::string& name) {
  std::ostringstream os;
  os << "graph \"" << name << "\" {\n";
  for (std::size_t v = 0; v < cx.vertices.size(); ++v) {
    os << "  v" << v << " [label=" << Json(cx.vertices[v]).dump();
    if (cx.is_marked(static_cast<int>(v))) os << ", shape=doublecircle";
    os << "];\n";
  }
  for (const auto& e : cx.edges) os << "  v" << e.tail << " -- v" << e.head << " [label=" << Json(e.id).dump() << "];\n";
  os << "}\n";
  return os.str();
}

std::string render_svg(const SphereComplex& cx, const std::vector<int>& highlight_edges, const std::vector<char>& fatou) {
  if (cx.cell_count() > kRenderBudget) fail(ErrorKind::Resource, "complex too large to render");
  auto ds = dual_skeleton(cx);
  const int T = ds.num_vertices;
  const double cxm = 260, cym = 260, R = 220;

  // Outer face: the primal vertex whose dual face meets the most distinct tiles.
  int outer = 0;
  std::vector<std::vector<int>> face_tiles(ds.faces.size());
  for (std::size_t f = 0; f < ds.faces.size(); ++f) {
    std::vector<char> seen(T, 0);
    for (const Slot& s : ds.faces[f])
      if (!seen[s.tile]) seen[s.tile] = 1, face_tiles[f].push_back(s.tile);
    if (face_tiles[f].size() > face_tiles[outer].size()) outer = static_cast<int>(f);
  }
  std::vector<double> x(T, cxm), y(T, cym);
  std::vector<char> fixed(T, 0);
  const auto& ring = face_tiles.empty() ? std::vector<int>{} : face_tiles[outer];
  for (std::size_t i = 0; i < ring.size(); ++i) {
    double a = 2 * M_PI * static_cast<double>(i) / static_cast<double>(ring.size()) - M_PI / 2;
    x[ring[i]] = cxm + R * std::cos(a);
    y[ring[i]] = cym + R * std::sin(a);
    fixed[ring[i]] = 1;
  }
  std::vector<std::vector<int>> nbr(T);
  for (const auto& e : ds.edges)
    if (e.from.tile != e.to.tile) nbr[e.from.tile].push_back(e.to.tile), nbr[e.to.tile].push_back(e.from.tile);
  for (int it = 0; it < 20000; ++it) {
    double moved = 0;
    for (int t = 0; t < T; ++t) {
      if (fixed[t] || nbr[t].empty()) continue;
      double sx = 0, sy = 0;
      for (int u : nbr[t]) sx += x[u], sy += y[u];
      double nx = sx / nbr[t].size(), ny = sy / nbr[t].size();
      moved = std::max(moved, std::fabs(nx - x[t]) + std::fabs(ny - y[t]));
      x[t] = nx, y[t] = ny;
    }
    if (moved < 1e-9) break;
  }

  std::vector<char> bold(cx.edges.size(), 0);
  for (int e : highlight_edges) bold.at(e) = 1;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"520\" height=\"520\" viewBox=\"0 0 520 520\">\n"
     << "<rect width=\"520\" height=\"520\" fill=\"white\"/>\n<g id=\"dual-edges\" fill=\"none\">\n";
  std::map<std::pair<int, int>, int> parallel, seen_pair;
  for (const auto& e : ds.edges) ++parallel[std::minmax(e.from.tile, e.to.tile)];
  for (const auto& e : ds.edges) {
    int a = e.from.tile, b = e.to.tile;
    const char* stroke = bold[e.edge] ? "stroke=\"#c0392b\" stroke-width=\"3\"" : "stroke=\"#555\" stroke-width=\"1\"";
    os << "<path class=\"" << (bold[e.edge] ? "spine" : "dual") << "\" " << stroke << " d=\"";
    if (a == b) {
      double r = 14;
      os << "M " << fmt(x[a]) << " " << fmt(y[a]) << " c " << fmt(-r) << " " << fmt(-2 * r) << " " << fmt(r) << " "
         << fmt(-2 * r) << " 0 0";
    } else {
      auto key = std::minmax(a, b);
      int k = seen_pair[key]++, m = parallel[key];
      double off = (k - (m - 1) / 2.0) * 24.0;
      double dx = x[b] - x[a], dy = y[b] - y[a], len = std::hypot(dx, dy);
      if (len == 0) len = 1;
      double sgn = a < b ? 1 : -1;
      double qx = (x[a] + x[b]) / 2 - sgn * off * dy / len, qy = (y[a] + y[b]) / 2 + sgn * off * dx / len;
      os << "M " << fmt(x[a]) << " " << fmt(y[a]) << " Q " << fmt(qx) << " " << fmt(qy) << " " << fmt(x[b]) << " "
         << fmt(y[b]);
    }
    os << "\"><title>" << escape(cx.edges[e.edge].id) << "</title></path>\n";
  }
  os << "</g>\n<g id=\"tiles\">\n";
  for (int t = 0; t < T; ++t)
    os << "<circle class=\"tile\" cx=\"" << fmt(x[t]) << "\" cy=\"" << fmt(y[t]) << "\" r=\"4\" fill=\"#2c3e50\"><title>"
       << escape(cx.tiles[t].id) << "</title></circle>\n";
  os << "</g>\n<g id=\"marked\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t f = 0; f < ds.faces.size(); ++f) {
    int v = ds.face_vertex[f];
    if (!cx.is_marked(v)) continue;
    double lx = 8, ly = 16;
    if (static_cast<int>(f) != outer) {
      lx = ly = 0;
      for (const Slot& s : ds.faces[f]) lx += x[s.tile], ly += y[s.tile];
      lx /= ds.faces[f].size(), ly /= ds.faces[f].size();
    }
    std::string cls = fatou.empty() ? "" : (fatou.at(v) ? " (Fatou)" : " (Julia)");
    os << "<text class=\"vertex\" x=\"" << fmt(lx) << "\" y=\"" << fmt(ly) << "\">" << escape(cx.vertices[v] + cls)
       << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace fsr
