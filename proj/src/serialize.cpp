#include "fsr/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fsr/catalog.hpp"
#include "fsr/error.hpp"

namespace fsr {

namespace {

[[noreturn]] void schema(const std::string& msg) { fail(ErrorKind::Validation, "rule file: " + msg); }

void dump_string(std::ostringstream& os, const std::string& s) { os << Json(s).dump(); }

int depth(const Json& j) {
  if (!j.is_structured()) return 0;
  int d = 0;
  for (const auto& v : j) d = std::max(d, depth(v));
  return d + 1;
}

void dump(std::ostringstream& os, const Json& j, int indent, bool in_array = false) {
  const std::string pad(indent + 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad;
        dump_string(os, it.key());
        os << ": ";
        dump(os, it.value(), indent + 2);
      }
      os << "\n" << std::string(indent, ' ') << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Scalar arrays, and shallow arrays nested in arrays, stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat || (in_array && !j.is_object() && depth(j) <= 3)) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          dump(os, j[i], indent, true);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        dump(os, j[i], indent + 2, true);
      }
      os << "\n" << std::string(indent, ' ') << "]";
      return;
    }
    case Json::value_t::number_float: {
      double x = j.get<double>();
      if (std::isnan(x) || std::isinf(x)) {
        os << "null";
        return;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", x);
      os << buf;
      return;
    }
    default:
      os << j.dump();
  }
}

const Json& need(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema(std::string("missing key '") + key + "'");
  return j.at(key);
}

std::string str(const Json& j, const std::string& what) {
  if (!j.is_string()) schema(what + " must be a string");
  return j.get<std::string>();
}

bool sign(const Json& j) {
  std::string s = str(j, "orientation");
  if (s == "+") return true;
  if (s == "-") return false;
  schema("orientation must be \"+\" or \"-\"");
}

std::string kind_name(CellKind k) {
  switch (k) {
    case CellKind::Vertex: return "vertex";
    case CellKind::Edge: return "edge";
    case CellKind::Tile: return "tile";
  }
  return "vertex";
}

Json cell_json(const SphereComplex& cx, CellRef c) {
  const std::string& id = c.kind == CellKind::Vertex ? cx.vertices[c.index]
                          : c.kind == CellKind::Edge ? cx.edges[c.index].id
                                                     : cx.tiles[c.index].id;
  return Json::array({kind_name(c.kind), id});
}

CellRef cell_from(const SphereComplex& cx, const Json& j) {
  if (!j.is_array() || j.size() != 2) schema("carrier must be [kind, id]");
  std::string kind = str(j[0], "carrier kind"), id = str(j[1], "carrier id");
  int idx = -1;
  CellKind k;
  if (kind == "vertex")
    k = CellKind::Vertex, idx = cx.vertex_index(id);
  else if (kind == "edge")
    k = CellKind::Edge, idx = cx.edge_index(id);
  else if (kind == "tile")
    k = CellKind::Tile, idx = cx.tile_index(id);
  else
    schema("unknown carrier kind '" + kind + "'");
  if (idx < 0) schema("unknown level-0 " + kind + " '" + id + "'");
  return {k, idx};
}

template <class F>
void each_entry(const Json& obj, const std::vector<std::string>& ids, const std::string& what, F&& f) {
  if (!obj.is_object()) schema(what + " must be an object");
  if (obj.size() != ids.size()) schema(what + " must have one entry per level-1 cell");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!obj.contains(ids[i])) schema(what + " misses '" + ids[i] + "'");
    f(static_cast<int>(i), obj.at(ids[i]));
  }
}

}  // namespace

std::string canonical_dump(const Json& j) {
  std::ostringstream os;
  dump(os, j, 0);
  os << "\n";
  return os.str();
}

Json complex_to_json(const SphereComplex& cx) {
  Json j;
  j["vertices"] = cx.vertices;
  Json edges = Json::array();
  for (const auto& e : cx.edges) edges.push_back({e.id, cx.vertices[e.tail], cx.vertices[e.head]});
  j["edges"] = edges;
  Json tiles = Json::array();
  for (const auto& t : cx.tiles) {
    Json walk = Json::array();
    for (const Side& s : t.walk) walk.push_back({cx.edges[s.edge].id, s.forward ? "+" : "-"});
    tiles.push_back({t.id, walk});
  }
  j["tiles"] = tiles;
  return j;
}

SphereComplex complex_from_json(const Json& j) {
  SphereComplex cx;
  for (const auto& v : need(j, "vertices")) {
    std::string id = str(v, "vertex id");
    if (cx.vertex_index(id) >= 0) schema("duplicate vertex '" + id + "'");
    cx.add_vertex(id);
  }
  for (const auto& e : need(j, "edges")) {
    if (!e.is_array() || e.size() != 3) schema("edges must be [id, tail, head]");
    std::string id = str(e[0], "edge id");
    if (cx.edge_index(id) >= 0) schema("duplicate edge '" + id + "'");
    int t = cx.vertex_index(str(e[1], "edge tail")), h = cx.vertex_index(str(e[2], "edge head"));
    if (t < 0 || h < 0) schema("edge '" + id + "' has an unknown endpoint");
    cx.add_edge(id, t, h);
  }
  for (const auto& t : need(j, "tiles")) {
    if (!t.is_array() || t.size() != 2 || !t[1].is_array()) schema("tiles must be [id, walk]");
    std::string id = str(t[0], "tile id");
    if (cx.tile_index(id) >= 0) schema("duplicate tile '" + id + "'");
    std::vector<Side> walk;
    for (const auto& s : t[1]) {
      if (!s.is_array() || s.size() != 2) schema("walk entries must be [edge, \"+\"|\"-\"]");
      int e = cx.edge_index(str(s[0], "walk edge"));
      if (e < 0) schema("tile '" + id + "' uses an unknown edge");
      walk.push_back({e, sign(s[1])});
    }
    cx.add_tile(id, walk);
  }
  return cx;
}

Json rule_to_json(const SubdivisionRule& r) {
  const auto& L0 = r.level0;
  const auto& L1 = r.level1;
  Json j;
  j["version"] = kFormatVersion;
  j["name"] = r.name;
  j["level0"] = complex_to_json(L0);
  j["level1"] = complex_to_json(L1);
  Json marked = Json::array();
  for (int v : L0.marked) marked.push_back(L0.vertices[v]);
  j["marked"] = marked;

  Json cv = Json::object(), ce = Json::object(), ct = Json::object();
  Json mv = Json::object(), me = Json::object(), mt = Json::object();
  for (std::size_t v = 0; v < L1.vertices.size(); ++v) {
    cv[L1.vertices[v]] = cell_json(L0, r.carrier_vertex[v]);
    mv[L1.vertices[v]] = L0.vertices[r.map_vertex[v]];
  }
  for (std::size_t e = 0; e < L1.edges.size(); ++e) {
    ce[L1.edges[e].id] = cell_json(L0, r.carrier_edge[e]);
    me[L1.edges[e].id] = {L0.edges[r.map_edge[e].edge].id, r.map_edge[e].forward ? "+" : "-"};
  }
  for (std::size_t t = 0; t < L1.tiles.size(); ++t) {
    ct[L1.tiles[t].id] = L0.tiles[r.carrier_tile[t]].id;
    mt[L1.tiles[t].id] = {L0.tiles[r.map_tile[t].tile].id, r.map_tile[t].alignment};
  }
  j["carrier"] = {{"vertices", cv}, {"edges", ce}, {"tiles", ct}};
  j["map"] = {{"vertices", mv}, {"edges", me}, {"tiles", mt}};
  Json meta = Json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  j["metadata"] = meta;
  return j;
}

SubdivisionRule rule_from_json(const Json& j) {
  if (!j.is_object()) schema("top level must be an object");
  const Json& ver = need(j, "version");
  if (!ver.is_number_integer() || ver.get<int>() != kFormatVersion)
    fail(ErrorKind::UnsupportedInput, "rule file: unsupported format version");
  SubdivisionRule r;
  r.name = str(need(j, "name"), "name");
  r.level0 = complex_from_json(need(j, "level0"));
  r.level1 = complex_from_json(need(j, "level1"));
  for (const auto& m : need(j, "marked")) {
    int v = r.level0.vertex_index(str(m, "marked vertex"));
    if (v < 0) schema("unknown marked vertex");
    r.level0.mark(v);
  }
  resize_maps(r);
  const auto& L0 = r.level0;
  const auto& L1 = r.level1;
  std::vector<std::string> vids = L1.vertices, eids, tids;
  for (const auto& e : L1.edges) eids.push_back(e.id);
  for (const auto& t : L1.tiles) tids.push_back(t.id);

  const Json& car = need(j, "carrier");
  each_entry(need(car, "vertices"), vids, "carrier.vertices", [&](int i, const Json& c) { r.carrier_vertex[i] = cell_from(L0, c); });
  each_entry(need(car, "edges"), eids, "carrier.edges", [&](int i, const Json& c) {
    r.carrier_edge[i] = cell_from(L0, c);
    if (r.carrier_edge[i].kind == CellKind::Vertex) schema("an edge cannot be carried by a vertex");
  });
  each_entry(need(car, "tiles"), tids, "carrier.tiles", [&](int i, const Json& c) {
    int t = L0.tile_index(str(c, "tile carrier"));
    if (t < 0) schema("unknown carrier tile");
    r.carrier_tile[i] = t;
  });

  const Json& map = need(j, "map");
  each_entry(need(map, "vertices"), vids, "map.vertices", [&](int i, const Json& c) {
    int v = L0.vertex_index(str(c, "vertex image"));
    if (v < 0) schema("unknown vertex image");
    r.map_vertex[i] = v;
  });
  each_entry(need(map, "edges"), eids, "map.edges", [&](int i, const Json& c) {
    if (!c.is_array() || c.size() != 2) schema("edge images must be [edge, \"+\"|\"-\"]");
    int e = L0.edge_index(str(c[0], "edge image"));
    if (e < 0) schema("unknown edge image");
    r.map_edge[i] = {e, sign(c[1])};
  });
  each_entry(need(map, "tiles"), tids, "map.tiles", [&](int i, const Json& c) {
    if (!c.is_array() || c.size() != 2 || !c[1].is_number_integer()) schema("tile images must be [tile, alignment]");
    int t = L0.tile_index(str(c[0], "tile image"));
    if (t < 0) schema("unknown tile image");
    r.map_tile[i] = {t, c[1].get<int>()};
  });
  if (j.contains("metadata")) {
    if (!j["metadata"].is_object()) schema("metadata must be an object");
    for (auto it = j["metadata"].begin(); it != j["metadata"].end(); ++it) r.metadata[it.key()] = str(it.value(), "metadata value");
  }
  return r;
}

Json multicurve_to_json(const MulticurveSpec& mc) {
  Json j;
  j["name"] = mc.name;
  j["curves"] = mc.curves;
  Json lifts = Json::array();
  for (const auto& l : mc.lifts) lifts.push_back({l.image, l.preimage, l.degree});
  j["lifts"] = lifts;
  if (mc.map_degree > 0) j["map_degree"] = mc.map_degree;
  return j;
}

MulticurveSpec multicurve_from_json(const Json& j) {
  MulticurveSpec mc;
  if (!j.is_object()) fail(ErrorKind::Validation, "multicurve file: top level must be an object");
  mc.name = j.value("name", std::string("multicurve"));
  try {
    mc.curves = need(j, "curves").get<std::vector<std::string>>();
    for (const auto& l : need(j, "lifts")) {
      if (!l.is_array() || l.size() != 3) fail(ErrorKind::Validation, "multicurve lifts must be [image, preimage, degree]");
      mc.lifts.push_back({l[0].get<std::string>(), l[1].get<std::string>(), l[2].get<int>()});
    }
    mc.map_degree = j.value("map_degree", 0);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Validation, std::string("multicurve file: ") + e.what());
  }
  validate_multicurve(mc);
  return mc;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::UnsupportedInput, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::UnsupportedInput, "cannot write '" + path + "'");
  out << text;
}

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::Validation, std::string("malformed JSON: ") + e.what());
  }
}

SubdivisionRule load_rule(const std::string& source) {
  const std::string prefix = "catalog:";
  if (source.rfind(prefix, 0) == 0) return catalog_rule(source.substr(prefix.size()));
  return rule_from_json(parse_json_text(read_text(source)));
}

}  // namespace fsr
