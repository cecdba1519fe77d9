#include "fsr/spine.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "fsr/error.hpp"

namespace fsr {

namespace {

struct RuleGraphs {
  DynDigraph E, B;
  std::vector<std::vector<char>> reachE, reachB;
  std::vector<char> recE, recB;
  std::vector<Band> bands0;
};

RuleGraphs rule_graphs(const SubdivisionRule& r) {
  RuleGraphs g;
  g.E = edge_digraph(r);
  g.B = band_digraph(r);
  g.reachE = reachability(g.E);
  g.reachB = reachability(g.B);
  g.recE = recurrent_vertices(g.E);
  g.recB = recurrent_vertices(g.B);
  g.bands0 = all_bands(r.level0);
  return g;
}

int band_index(const std::vector<Band>& bands, const Band& b) {
  auto it = std::lower_bound(bands.begin(), bands.end(), b);
  if (it == bands.end() || !(*it == b)) return -1;
  return static_cast<int>(it - bands.begin());
}

RecurrentCells recurrent_cells_with(const RuleGraphs& g, const SubdivisionRule& r, const LeveledComplex& L) {
  RecurrentCells out;
  const int n = L.level;
  for (int E = 0; E < static_cast<int>(L.cx.edges.size()); ++E) {
    if (L.ecarrier0[E].kind != CellKind::Edge) continue;
    const int c = L.ecarrier0[E].index;
    if (n == 0 ? g.recE[c] : g.reachE[L.etype[E]][c]) out.edges.push_back(E);
  }
  for (const auto& b : level_bands(L)) {
    Band c = band_carrier(L, b);
    if (c.tile < 0) continue;
    int ci = band_index(g.bands0, c);
    int ti = band_index(g.bands0, band_type(L, r.level0, b));
    if (n == 0 ? g.recB[ci] : g.reachB[ti][ci]) out.bands.push_back(b);
  }
  std::sort(out.bands.begin(), out.bands.end());
  return out;
}

bool polynomial_edges(const DynDigraph& E) {
  for (int v = 0; v < E.size(); ++v)
    if (growth_class(E, v).exponential) return false;
  return true;
}

// Undirected multigraph on tiles given by dual edges.
struct TileGraph {
  std::vector<int> nodes;                              // tiles in use
  std::map<int, std::vector<std::pair<int, int>>> adj;  // tile -> (edge, other tile)
};

TileGraph tile_graph(const SphereComplex& cx, const std::vector<int>& edges) {
  TileGraph g;
  std::set<int> nodes;
  for (int e : edges) {
    int a = cx.slot(e, true).tile, b = cx.slot(e, false).tile;
    nodes.insert(a);
    nodes.insert(b);
    g.adj[a].push_back({e, b});
    if (a != b) g.adj[b].push_back({e, a});
  }
  g.nodes.assign(nodes.begin(), nodes.end());
  return g;
}

std::vector<SpineComponent> components_of(const SphereComplex& cx, const std::vector<int>& tiles,
                                          const std::vector<int>& edges) {
  std::map<int, int> parent;
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (int t : tiles) parent[t] = t;
  for (int e : edges) {
    int a = cx.slot(e, true).tile, b = cx.slot(e, false).tile;
    parent[find(a)] = find(b);
  }
  std::map<int, SpineComponent> by_root;
  for (int t : tiles) by_root[find(t)].tiles.push_back(t);
  for (int e : edges) by_root[find(cx.slot(e, true).tile)].edges.push_back(e);
  std::vector<SpineComponent> out;
  for (auto& [root, c] : by_root) {
    c.shape = c.edges.size() + 1 == c.tiles.size() ? "star-tree" : "cycle";
    out.push_back(std::move(c));
  }
  return out;
}

CombinatorialCurve curve_from_cycle(const SphereComplex& cx, const std::vector<int>& tiles,
                                    const std::vector<int>& edges) {
  CombinatorialCurve c;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const int e = edges[k];
    const int from = tiles[k];
    c.steps.push_back({e, cx.slot(e, true).tile == from});
  }
  return c;
}

std::vector<int> level0_of_level(Tower& tower, int n) {
  const auto& L = tower.level(n);
  std::vector<int> back(L.cx.vertices.size(), -1);
  auto fwd = level_vertex_of0(tower, n);
  for (int v = 0; v < static_cast<int>(fwd.size()); ++v) back[fwd[v]] = v;
  return back;
}

}  // namespace

RecurrentCells recurrent_cells(Tower& tower, int n) {
  auto g = rule_graphs(tower.rule());
  return recurrent_cells_with(g, tower.rule(), tower.level(n));
}

RecurrentCells recurrent_cells(const SubdivisionRule& rule, int n) {
  Tower t(rule);
  return recurrent_cells(t, n);
}

RecurrencePeriods recurrence_periods(const SubdivisionRule& rule) {
  RecurrencePeriods p;
  auto E = edge_digraph(rule);
  auto B = band_digraph(rule);
  p.edge = vertex_periods(E);
  p.band = vertex_periods(B);
  std::set<int> periods;
  for (int x : p.edge)
    if (x > 0) periods.insert(x);
  p.threshold = 1;
  for (int a : periods)
    for (int b : periods) p.threshold = std::max(p.threshold, std::lcm(a, b));
  p.period = 1;
  for (int x : p.edge)
    if (x > 0) p.period = std::lcm(p.period, x);
  for (int x : p.band)
    if (x > 0) p.period = std::lcm(p.period, x);
  return p;
}

std::vector<int> level_vertex_of0(Tower& tower, int n) {
  const int V = static_cast<int>(tower.rule().level0.vertices.size());
  std::vector<int> out(V);
  for (int v = 0; v < V; ++v) {
    int x = v;
    for (int k = 0; k < n; ++k) x = tower.level(k).persist[x];
    out[v] = x;
  }
  return out;
}

std::vector<int> dual_recurrent_skeleton(Tower& tower, int n) { return recurrent_cells(tower, n).edges; }

Spine non_expanding_spine(Tower& tower, int n) {
  const SubdivisionRule& r = tower.rule();
  auto periods = recurrence_periods(r);
  if (n < periods.threshold)
    fail(ErrorKind::UnsupportedRegime,
         "level " + std::to_string(n) + " is below the spine threshold K=" + std::to_string(periods.threshold));
  auto g = rule_graphs(r);
  const LeveledComplex& L = tower.level(n);
  const SphereComplex& cx = L.cx;
  Spine s;
  s.level = n;
  s.threshold = periods.threshold;
  s.polynomial = polynomial_edges(g.E);
  auto rec = recurrent_cells_with(g, r, L);
  s.recurrent_edges = rec.edges;
  s.recurrent_bands = rec.bands;

  std::vector<char> edge_rec(cx.edges.size(), 0);
  for (int e : rec.edges) edge_rec[e] = 1;
  std::set<std::pair<int, int>> present;
  for (const auto& b : rec.bands) {
    const auto& w = cx.tiles[b.tile].walk;
    if (!edge_rec[w[b.i].edge] || !edge_rec[w[b.j].edge]) continue;
    present.insert({b.tile, b.i});
    present.insert({b.tile, b.j});
  }
  for (auto [t, pos] : present) s.halves.push_back({t, pos, cx.tiles[t].walk[pos].edge});
  for (int e : rec.edges) {
    Slot a = cx.slot(e, true), b = cx.slot(e, false);
    if (present.count({a.tile, a.pos}) && present.count({b.tile, b.pos})) s.full_edges.push_back(e);
  }
  std::vector<int> tiles;
  for (auto [t, pos] : present)
    if (tiles.empty() || tiles.back() != t) tiles.push_back(t);
  s.components = components_of(cx, tiles, s.full_edges);

  std::set<int> sk_tiles;
  for (int e : rec.edges) {
    sk_tiles.insert(cx.slot(e, true).tile);
    sk_tiles.insert(cx.slot(e, false).tile);
  }
  s.skeleton_components = components_of(cx, std::vector<int>(sk_tiles.begin(), sk_tiles.end()), rec.edges);
  for (auto& c : s.skeleton_components)
    if (c.tiles.size() == 2 && c.edges.size() == 1) c.shape = "edge-component";

  // Tag unicyclic components around a single vertex as peripheral.
  auto back = level0_of_level(tower, n);
  for (auto& c : s.components) {
    if (c.edges.size() != c.tiles.size()) continue;
    Spine one;
    one.full_edges = c.edges;
    auto cycles = spine_cycles(cx, one, 4);
    if (cycles.size() != 1) continue;
    try {
      auto sides = enclosed_vertices(cx, cycles[0]);
      int v = sides.left.size() == 1 ? sides.left[0] : sides.right.size() == 1 ? sides.right[0] : -1;
      if (v >= 0) {
        c.shape = "peripheral-cycle";
        c.vertex = back[v];
      }
    } catch (const FsrError&) {
    }
  }
  return s;
}

Spine non_expanding_spine(const SubdivisionRule& rule, int n) {
  Tower t(rule);
  return non_expanding_spine(t, n);
}

std::map<int, std::vector<Band>> peripheral_cycles(Tower& tower, int n) {
  const SubdivisionRule& r = tower.rule();
  auto vc = classify_vertices(r);
  auto rec = recurrent_cells(tower, n);
  const LeveledComplex& L = tower.level(n);
  auto d = dual_skeleton(L.cx);
  auto at = level_vertex_of0(tower, n);
  std::map<int, std::vector<Band>> out;
  for (int v = 0; v < static_cast<int>(r.level0.vertices.size()); ++v) {
    if (!vc.periodic[v] || vc.fatou[v]) continue;
    for (std::size_t f = 0; f < d.faces.size(); ++f) {
      if (d.face_vertex[f] != at[v]) continue;
      std::vector<Band> cycle;
      bool all = true;
      for (const Slot& c : d.faces[f]) {
        const int m = static_cast<int>(L.cx.tiles[c.tile].walk.size());
        Band b = make_band(c.tile, (c.pos + m - 1) % m, c.pos);
        if (b.i == b.j || !std::binary_search(rec.bands.begin(), rec.bands.end(), b)) {
          all = false;
          break;
        }
        cycle.push_back(b);
      }
      if (all && !cycle.empty()) out[v] = std::move(cycle);
    }
  }
  return out;
}

std::string to_string(CycleClass c) {
  switch (c) {
    case CycleClass::Trivial: return "trivial";
    case CycleClass::PeripheralJulia: return "peripheral_julia";
    case CycleClass::PeripheralFatou: return "peripheral_fatou";
    case CycleClass::Essential: return "essential";
  }
  return "?";
}

CycleClass classify_cycle(Tower& tower, int n, const CombinatorialCurve& c, const std::vector<int>& marked0) {
  const LeveledComplex& L = tower.level(n);
  if (!curve_is_simple(L.cx, c)) fail(ErrorKind::UnsupportedInput, "cycle is not a simple closed dual curve");
  auto at = level_vertex_of0(tower, n);
  SphereComplex cx = L.cx;
  cx.marked.clear();
  for (int v : marked0) cx.mark(at[v]);
  auto sides = enclosed_markings(cx, c);
  if (sides.left.empty() || sides.right.empty()) return CycleClass::Trivial;
  auto vc = classify_vertices(tower.rule());
  auto back = level0_of_level(tower, n);
  auto single_julia = [&](const std::vector<int>& s) { return s.size() == 1 && !vc.fatou[back[s[0]]]; };
  if (single_julia(sides.left) || single_julia(sides.right)) return CycleClass::PeripheralJulia;
  if (sides.left.size() == 1 || sides.right.size() == 1) return CycleClass::PeripheralFatou;
  return CycleClass::Essential;
}

std::vector<CombinatorialCurve> spine_cycles(const SphereComplex& cx, const Spine& s, std::size_t cap) {
  TileGraph g = tile_graph(cx, s.full_edges);
  std::set<std::vector<int>> seen;
  std::vector<CombinatorialCurve> out;
  std::vector<int> path_tiles, path_edges;
  std::set<int> on_path;
  bool capped = false;
  std::function<void(int, int)> dfs = [&](int start, int t) {
    if (capped) return;
    for (auto [e, w] : g.adj[t]) {
      if (std::find(path_edges.begin(), path_edges.end(), e) != path_edges.end()) continue;
      if (w == start) {
        path_tiles.push_back(t);
        path_edges.push_back(e);
        std::vector<int> key = path_edges;
        std::sort(key.begin(), key.end());
        if (seen.insert(key).second) {
          out.push_back(curve_from_cycle(cx, path_tiles, path_edges));
          if (out.size() >= cap) capped = true;
        }
        path_tiles.pop_back();
        path_edges.pop_back();
        if (capped) return;
        continue;
      }
      if (w < start || on_path.count(w)) continue;
      path_tiles.push_back(t);
      path_edges.push_back(e);
      on_path.insert(w);
      dfs(start, w);
      on_path.erase(w);
      path_tiles.pop_back();
      path_edges.pop_back();
      if (capped) return;
    }
  };
  for (int start : g.nodes) {
    on_path = {start};
    dfs(start, start);
    if (capped) break;
  }
  return out;
}

LevyResult is_levy_free(const SubdivisionRule& rule, std::vector<int> marked0) {
  if (!polynomial_edges(edge_digraph(rule)))
    fail(ErrorKind::UnsupportedRegime, "Levy decision needs polynomial edge growth");
  if (marked0.empty()) marked0 = rule.level0.marked;
  auto periods = recurrence_periods(rule);
  LevyResult res;
  res.level = std::max(2 * periods.threshold, 1);
  Tower tower(rule);
  Spine s = non_expanding_spine(tower, res.level);
  const auto& cx = tower.level(res.level).cx;
  auto cycles = spine_cycles(cx, s);
  for (const auto& c : cycles) {
    ++res.cycles_checked;
    CycleClass k = classify_cycle(tower, res.level, c, marked0);
    if (k == CycleClass::Trivial || k == CycleClass::PeripheralJulia) continue;
    res.levy_free = false;
    res.witness = c;
    for (const auto& st : c.steps) res.witness_edges.push_back(cx.edges[st.edge].id);
    break;
  }
  return res;
}

int band_transitivity_violations(const LeveledComplex& L, const std::vector<Band>& recurrent) {
  std::set<Band> rec(recurrent.begin(), recurrent.end());
  std::map<int, std::vector<Band>> by_tile;
  for (const auto& b : recurrent) by_tile[b.tile].push_back(b);
  int violations = 0;
  (void)L;
  for (const auto& [t, bs] : by_tile) {
    for (std::size_t x = 0; x < bs.size(); ++x)
      for (std::size_t y = x + 1; y < bs.size(); ++y) {
        const Band& a = bs[x];
        const Band& b = bs[y];
        int shared = -1, p = -1, q = -1;
        if (a.i == b.i) shared = a.i, p = a.j, q = b.j;
        else if (a.i == b.j) shared = a.i, p = a.j, q = b.i;
        else if (a.j == b.i) shared = a.j, p = a.i, q = b.j;
        else if (a.j == b.j) shared = a.j, p = a.i, q = b.i;
        if (shared < 0 || p == q) continue;
        if (!rec.count(make_band(t, p, q))) ++violations;
      }
  }
  return violations;
}

bool spines_isomorphic(const LeveledComplex& La, const Spine& a, const LeveledComplex& Lb, const Spine& b) {
  if (a.halves.size() != b.halves.size()) return false;
  // Level-0 carrier and type orientation identify a half across levels.
  auto key = [](const LeveledComplex& L, const HalfEdge& h) {
    Side s = L.cx.tiles[h.tile].walk[h.pos];
    return std::tuple<int, int, bool>(L.ecarrier0[h.edge].index, L.etype[h.edge], s.forward == (L.esign[h.edge] != 0));
  };
  std::map<std::tuple<int, int, bool>, HalfEdge> bh;
  for (const auto& h : b.halves)
    if (!bh.emplace(key(Lb, h), h).second) return false;
  std::map<int, int> tile_map, tile_inv;
  for (const auto& h : a.halves) {
    auto it = bh.find(key(La, h));
    if (it == bh.end()) return false;
    const HalfEdge& g = it->second;
    if (La.ttype[h.tile] != Lb.ttype[g.tile]) return false;
    auto [m, fresh] = tile_map.emplace(h.tile, g.tile);
    if (m->second != g.tile) return false;
    auto [mi, fresh_inv] = tile_inv.emplace(g.tile, h.tile);
    if (mi->second != h.tile) return false;
  }
  return true;
}

}  // namespace fsr
