#include "fsr/quotient.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "fsr/dynamics_digraph.hpp"
#include "fsr/error.hpp"
#include "fsr/spine.hpp"

namespace fsr {

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

std::vector<char> as_mask(int n, const std::vector<int>& xs) {
  std::vector<char> m(n, 0);
  for (int x : xs) m[x] = 1;
  return m;
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Vertices of the subcomplex and a component label per vertex (-1 outside).
std::vector<int> component_labels(const SphereComplex& cx, const std::vector<char>& ein,
                                  const std::vector<char>& tin, int& count) {
  const int V = static_cast<int>(cx.vertices.size());
  UnionFind uf(V);
  std::vector<char> vin(V, 0);
  for (int e = 0; e < static_cast<int>(cx.edges.size()); ++e)
    if (ein[e]) {
      vin[cx.edges[e].tail] = vin[cx.edges[e].head] = 1;
      uf.unite(cx.edges[e].tail, cx.edges[e].head);
    }
  for (int t = 0; t < static_cast<int>(cx.tiles.size()); ++t) {
    if (!tin[t]) continue;
    const auto& w = cx.tiles[t].walk;
    for (const auto& s : w) {
      vin[cx.start(s)] = 1;
      uf.unite(cx.start(s), cx.start(w[0]));
    }
  }
  std::vector<int> label(V, -1);
  std::map<int, int> ids;
  count = 0;
  for (int v = 0; v < V; ++v) {
    if (!vin[v]) continue;
    auto [it, fresh] = ids.emplace(uf.find(v), count);
    if (fresh) ++count;
    label[v] = it->second;
  }
  return label;
}

std::string smallest_id(const SphereComplex& cx, const std::vector<int>& vs) {
  std::string best = cx.vertices[vs.front()];
  for (int v : vs) best = std::min(best, cx.vertices[v]);
  return best;
}

}  // namespace

std::vector<std::vector<int>> subcomplex_components(const SphereComplex& cx, const std::vector<int>& edges,
                                                    const std::vector<int>& tiles) {
  int count = 0;
  auto label = component_labels(cx, as_mask(static_cast<int>(cx.edges.size()), edges),
                                as_mask(static_cast<int>(cx.tiles.size()), tiles), count);
  std::vector<std::vector<int>> out(count);
  for (int v = 0; v < static_cast<int>(label.size()); ++v)
    if (label[v] >= 0) out[label[v]].push_back(v);
  return out;
}

ValidationReport check_collapsible(const SubdivisionRule& rule, const CollapsibleSubcomplex& x) {
  const auto& cx = rule.level0;
  const int E = static_cast<int>(cx.edges.size());
  const int T = static_cast<int>(cx.tiles.size());
  for (int e : x.edges)
    if (e < 0 || e >= E) return ValidationReport::fail("unknown reference", "edge index out of range");
  for (int t : x.tiles)
    if (t < 0 || t >= T) return ValidationReport::fail("unknown reference", "tile index out of range");
  auto xe = sorted_unique(x.edges);
  auto xt = sorted_unique(x.tiles);

  auto eg = edge_digraph(rule);
  auto tg = tile_digraph(rule);
  if (ideal_closure(eg, xe) != xe) return ValidationReport::fail("ideal", "edge set is not closed under subdivision");
  if (radical_closure(eg, xe) != xe) return ValidationReport::fail("radical", "edge set is not a radical ideal");
  if (ideal_closure(tg, xt) != xt) return ValidationReport::fail("ideal", "tile set is not closed under subdivision");
  if (radical_closure(tg, xt) != xt) return ValidationReport::fail("radical", "tile set is not a radical ideal");

  auto ein = as_mask(E, xe);
  auto tin = as_mask(T, xt);
  for (int t : xt)
    for (const auto& s : cx.tiles[t].walk)
      if (!ein[s.edge])
        return ValidationReport::fail("subcomplex", "boundary edge " + cx.edges[s.edge].id + " of tile " +
                                                        cx.tiles[t].id + " is missing");

  int count = 0;
  auto label = component_labels(cx, ein, tin, count);
  for (int c = 0; c < count; ++c) {
    // Complement of the component: its tiles must stay connected through edges outside it.
    std::vector<char> ec(E, 0), tc(T, 0);
    for (int e = 0; e < E; ++e) ec[e] = ein[e] && label[cx.edges[e].tail] == c;
    for (int t = 0; t < T; ++t) tc[t] = tin[t] && label[cx.start(cx.tiles[t].walk[0])] == c;
    UnionFind uf(T);
    int outside = 0;
    for (int t = 0; t < T; ++t) outside += !tc[t];
    if (outside == 0) return ValidationReport::fail("simply connected", "a component covers the sphere");
    for (int e = 0; e < E; ++e) {
      if (ec[e]) continue;
      int a = cx.slot(e, true).tile, b = cx.slot(e, false).tile;
      if (tc[a] && tc[b])
        return ValidationReport::fail("simply connected", "edge " + cx.edges[e].id + " is enclosed by a component");
      if (!tc[a] && !tc[b]) uf.unite(a, b);
    }
    std::set<int> roots;
    for (int t = 0; t < T; ++t)
      if (!tc[t]) roots.insert(uf.find(t));
    if (roots.size() != 1)
      return ValidationReport::fail("simply connected", "a component separates the sphere");
    int marked = 0;
    for (int v : cx.marked) marked += label[v] == c;
    if (marked > 1) return ValidationReport::fail("marked collision", "a component holds two marked points");
  }
  ValidationReport ok;
  ok.euler = 2;
  return ok;
}

CollapsedComplex collapse_complex(const SphereComplex& cx, const std::vector<int>& edges,
                                  const std::vector<int>& tiles) {
  const int V = static_cast<int>(cx.vertices.size());
  const int E = static_cast<int>(cx.edges.size());
  const int T = static_cast<int>(cx.tiles.size());
  auto ein = as_mask(E, edges);
  auto tin = as_mask(T, tiles);
  int count = 0;
  auto label = component_labels(cx, ein, tin, count);
  std::vector<std::vector<int>> members(count);
  for (int v = 0; v < V; ++v)
    if (label[v] >= 0) members[label[v]].push_back(v);
  std::vector<std::string> rep(count);
  for (int c = 0; c < count; ++c) rep[c] = smallest_id(cx, members[c]);

  CollapsedComplex out;
  out.vmap.assign(V, -1);
  for (int v = 0; v < V; ++v) {
    if (label[v] >= 0 && cx.vertices[v] != rep[label[v]]) continue;
    out.vmap[v] = out.cx.add_vertex(cx.vertices[v]);
  }
  for (int v = 0; v < V; ++v)
    if (label[v] >= 0) out.vmap[v] = out.cx.vertex_at(rep[label[v]]);
  out.emap.assign(E, -1);
  for (int e = 0; e < E; ++e)
    if (!ein[e]) out.emap[e] = out.cx.add_edge(cx.edges[e].id, out.vmap[cx.edges[e].tail], out.vmap[cx.edges[e].head]);
  out.tmap.assign(T, -1);
  out.kept.resize(T);
  for (int t = 0; t < T; ++t) {
    if (tin[t]) continue;
    std::vector<Side> w;
    const auto& walk = cx.tiles[t].walk;
    for (int i = 0; i < static_cast<int>(walk.size()); ++i) {
      if (ein[walk[i].edge]) continue;
      out.kept[t].push_back(i);
      w.push_back({out.emap[walk[i].edge], walk[i].forward});
    }
    if (w.empty()) fail(ErrorKind::Inconsistency, "tile " + cx.tiles[t].id + " collapses to a point");
    out.tmap[t] = out.cx.add_tile(cx.tiles[t].id, std::move(w));
  }
  for (int v : cx.marked) {
    if (out.cx.is_marked(out.vmap[v]))
      fail(ErrorKind::Inconsistency, "marked collision at " + out.cx.vertices[out.vmap[v]]);
    out.cx.mark(out.vmap[v]);
  }
  return out;
}

QuotientResult quotient_rule(const SubdivisionRule& rule, const CollapsibleSubcomplex& x) {
  auto report = check_collapsible(rule, x);
  if (!report.ok) {
    ErrorKind k = report.failure == "marked collision" ? ErrorKind::Inconsistency : ErrorKind::Validation;
    fail(k, "not collapsible: " + report.failure + ": " + report.detail);
  }
  QuotientResult res;
  if (x.empty()) {
    res.rule = rule;
    for (const auto& v : rule.level0.vertices) res.level0_vertices[v] = v;
    for (const auto& v : rule.level1.vertices) res.level1_vertices[v] = v;
    return res;
  }
  const auto& L0 = rule.level0;
  const auto& L1 = rule.level1;
  CollapsedComplex q0 = collapse_complex(L0, x.edges, x.tiles);
  auto ein = as_mask(static_cast<int>(L0.edges.size()), x.edges);
  auto tin = as_mask(static_cast<int>(L0.tiles.size()), x.tiles);

  std::vector<int> pe, pt;
  for (int a = 0; a < static_cast<int>(L1.edges.size()); ++a)
    if (ein[rule.map_edge[a].edge]) pe.push_back(a);
  for (int P = 0; P < static_cast<int>(L1.tiles.size()); ++P)
    if (tin[rule.map_tile[P].tile]) pt.push_back(P);
  CollapsedComplex q1 = collapse_complex(L1, pe, pt);
  q1.cx.marked.clear();

  // Level-0 cell of the quotient holding the image of a level-0 cell.
  auto carry = [&](CellRef c) -> CellRef {
    switch (c.kind) {
      case CellKind::Vertex: return {CellKind::Vertex, q0.vmap[c.index]};
      case CellKind::Edge:
        if (ein[c.index]) return {CellKind::Vertex, q0.vmap[L0.edges[c.index].tail]};
        return {CellKind::Edge, q0.emap[c.index]};
      case CellKind::Tile:
        if (tin[c.index]) return {CellKind::Vertex, q0.vmap[L0.start(L0.tiles[c.index].walk[0])]};
        return {CellKind::Tile, q0.tmap[c.index]};
    }
    return {};
  };
  auto dim = [](CellRef c) { return static_cast<int>(c.kind); };

  SubdivisionRule& r = res.rule;
  r.name = rule.name + "~quotient";
  r.metadata = rule.metadata;
  r.metadata["derived"] = "quotient of " + rule.name;
  r.level0 = q0.cx;
  r.level1 = q1.cx;
  const int V1 = static_cast<int>(q1.cx.vertices.size());
  r.carrier_vertex.assign(V1, CellRef{CellKind::Tile, 1 << 30});
  r.map_vertex.assign(V1, -1);
  // A collapsed component sits in the lowest-dimensional cell met by any of its pieces.
  auto merge_carrier = [&](int nv, CellRef c) {
    CellRef& cur = r.carrier_vertex[nv];
    if (dim(c) == 0 && dim(cur) == 0 && cur.index != c.index)
      fail(ErrorKind::Inconsistency, "collapsed level-1 component meets two level-0 vertices");
    if (dim(c) < dim(cur) || (dim(c) == dim(cur) && c.index < cur.index)) cur = c;
  };
  for (int u = 0; u < static_cast<int>(L1.vertices.size()); ++u) {
    const int nv = q1.vmap[u];
    merge_carrier(nv, carry(rule.carrier_vertex[u]));
    const int image = q0.vmap[rule.map_vertex[u]];
    if (r.map_vertex[nv] >= 0 && r.map_vertex[nv] != image)
      fail(ErrorKind::Inconsistency, "collapsed level-1 component has two images");
    r.map_vertex[nv] = image;
  }
  for (int a : pe) merge_carrier(q1.vmap[L1.edges[a].tail], carry(rule.carrier_edge[a]));
  for (int P : pt)
    merge_carrier(q1.vmap[L1.start(L1.tiles[P].walk[0])], carry({CellKind::Tile, rule.carrier_tile[P]}));

  const int E1 = static_cast<int>(q1.cx.edges.size());
  r.carrier_edge.resize(E1);
  r.map_edge.resize(E1);
  for (int a = 0; a < static_cast<int>(L1.edges.size()); ++a) {
    int na = q1.emap[a];
    if (na < 0) continue;
    CellRef c = carry(rule.carrier_edge[a]);
    if (c.kind == CellKind::Vertex) fail(ErrorKind::Inconsistency, "surviving edge " + L1.edges[a].id + " inside a collapsed cell");
    r.carrier_edge[na] = c;
    r.map_edge[na] = {q0.emap[rule.map_edge[a].edge], rule.map_edge[a].forward};
  }
  const int T1 = static_cast<int>(q1.cx.tiles.size());
  r.carrier_tile.resize(T1);
  r.map_tile.resize(T1);
  for (int P = 0; P < static_cast<int>(L1.tiles.size()); ++P) {
    int nP = q1.tmap[P];
    if (nP < 0) continue;
    CellRef c = carry({CellKind::Tile, rule.carrier_tile[P]});
    if (c.kind != CellKind::Tile) fail(ErrorKind::Inconsistency, "surviving tile " + L1.tiles[P].id + " inside a collapsed cell");
    r.carrier_tile[nP] = c.index;
    const int t = rule.map_tile[P].tile;
    const int m = static_cast<int>(L1.tiles[P].walk.size());
    const int al = ((rule.map_tile[P].alignment % m) + m) % m;
    const auto& kp = q1.kept[P];
    const auto& kt = q0.kept[t];
    int i0 = kp.front();
    int j0 = (i0 + al) % m;
    int ki = 0;
    int kj = static_cast<int>(std::find(kt.begin(), kt.end(), j0) - kt.begin());
    if (kj == static_cast<int>(kt.size())) fail(ErrorKind::Inconsistency, "tile alignment lost in quotient");
    const int mm = static_cast<int>(kt.size());
    r.map_tile[nP] = {q0.tmap[t], ((kj - ki) % mm + mm) % mm};
  }

  auto rep = validate_rule(r);
  if (!rep.ok) fail(ErrorKind::Inconsistency, "quotient rule is invalid: " + rep.failure + " " + rep.detail);
  for (int v = 0; v < static_cast<int>(L0.vertices.size()); ++v)
    res.level0_vertices[L0.vertices[v]] = q0.cx.vertices[q0.vmap[v]];
  for (int v = 0; v < static_cast<int>(L1.vertices.size()); ++v)
    res.level1_vertices[L1.vertices[v]] = q1.cx.vertices[q1.vmap[v]];
  return res;
}

namespace {

// Tiles reached from `start` without crossing the given edges.
std::vector<int> flood_side(const SphereComplex& cx, int start, const std::vector<char>& wall) {
  std::vector<char> seen(cx.tiles.size(), 0);
  std::vector<int> stack{start}, out;
  seen[start] = 1;
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    out.push_back(t);
    for (const auto& s : cx.tiles[t].walk) {
      if (wall[s.edge]) continue;
      int o = cx.slot(s.edge, !s.forward).tile;
      if (!seen[o]) {
        seen[o] = 1;
        stack.push_back(o);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Simple cycles of an undirected multigraph given by edge indices, as edge lists.
std::vector<std::vector<int>> simple_cycles(const SphereComplex& cx, const std::vector<int>& edges, std::size_t cap) {
  const int V = static_cast<int>(cx.vertices.size());
  std::vector<std::vector<std::pair<int, int>>> adj(V);  // (edge, other end)
  for (int e : edges) {
    adj[cx.edges[e].tail].push_back({e, cx.edges[e].head});
    if (cx.edges[e].tail != cx.edges[e].head) adj[cx.edges[e].head].push_back({e, cx.edges[e].tail});
  }
  std::set<std::vector<int>> found;
  std::vector<int> path_e;
  std::vector<char> on(V, 0);
  // Cycles are rooted at their smallest vertex.
  std::function<void(int, int)> dfs = [&](int root, int v) {
    for (auto [e, w] : adj[v]) {
      if (!path_e.empty() && path_e.back() == e) continue;
      if (std::find(path_e.begin(), path_e.end(), e) != path_e.end()) continue;
      if (w == root) {
        auto cyc = path_e;
        cyc.push_back(e);
        std::sort(cyc.begin(), cyc.end());
        found.insert(cyc);
        if (found.size() > cap) fail(ErrorKind::Resource, "Jordan curve enumeration exceeded its cap");
        continue;
      }
      if (w < root || on[w]) continue;
      on[w] = 1;
      path_e.push_back(e);
      dfs(root, w);
      path_e.pop_back();
      on[w] = 0;
    }
  };
  for (int root = 0; root < V; ++root) {
    on[root] = 1;
    dfs(root, root);
    on[root] = 0;
  }
  return {found.begin(), found.end()};
}

}  // namespace

CollapsibleSubcomplex collapsible_from_julia_edges(const SubdivisionRule& rule) {
  auto rep = validate_rule(rule);
  if (!rep.ok) fail(ErrorKind::Validation, "rule is invalid: " + rep.failure);
  const auto& cx = rule.level0;
  const int E = static_cast<int>(cx.edges.size());
  const int T = static_cast<int>(cx.tiles.size());
  auto eg = edge_digraph(rule);
  auto tg = tile_digraph(rule);

  std::vector<int> seed;
  for (int e : julia_edges(rule))
    if (edge_growth_rate(rule, e) == 1.0) seed.push_back(e);
  CollapsibleSubcomplex x;
  if (seed.empty()) return x;

  bool polynomial = true;
  for (int e = 0; e < E && polynomial; ++e) polynomial = !growth_class(eg, e).exponential;
  if (polynomial && !is_levy_free(rule).levy_free)
    fail(ErrorKind::Inconsistency, "rule has a Levy cycle; Julia edges cannot be collapsed");

  VertexClass vc = classify_vertices(rule);
  auto jt = as_mask(T, julia_tiles(rule));
  x.edges = radical_closure(eg, seed);
  for (int round = 0; round <= E + T; ++round) {
    auto ein = as_mask(E, x.edges);
    auto tin = as_mask(T, x.tiles);
    std::vector<int> add_e = x.edges, add_t = x.tiles;
    for (const auto& cyc : simple_cycles(cx, x.edges, 10000)) {
      auto wall = as_mask(E, cyc);
      int e0 = cyc.front();
      std::vector<int> sides[2] = {flood_side(cx, cx.slot(e0, true).tile, wall),
                                   flood_side(cx, cx.slot(e0, false).tile, wall)};
      if (sides[0] == sides[1]) continue;  // not separating
      bool qualifies[2];
      for (int k = 0; k < 2; ++k) {
        bool ok = true;
        std::set<int> verts;
        for (int t : sides[k]) {
          ok = ok && jt[t];
          for (const auto& s : cx.tiles[t].walk) verts.insert(cx.start(s));
        }
        int marked = 0;
        for (int v : verts) {
          ok = ok && !vc.fatou[v];
          marked += cx.is_marked(v);
        }
        qualifies[k] = ok && marked <= 1;
      }
      if (qualifies[0] == qualifies[1])
        fail(ErrorKind::Inconsistency, std::string(qualifies[0] ? "both sides" : "neither side") +
                                           " of a Jordan curve through " + cx.edges[e0].id + " can be collapsed");
      const auto& disk = sides[qualifies[0] ? 0 : 1];
      auto din = as_mask(T, disk);
      for (int t : disk)
        if (!tin[t]) add_t.push_back(t);
      for (int e = 0; e < E; ++e)
        if (!ein[e] && din[cx.slot(e, true).tile] && din[cx.slot(e, false).tile]) add_e.push_back(e);
    }
    auto nt = radical_closure(tg, sorted_unique(add_t));
    for (int t : nt)
      for (const auto& s : cx.tiles[t].walk) add_e.push_back(s.edge);
    auto ne = radical_closure(eg, sorted_unique(add_e));
    if (ne == x.edges && nt == x.tiles) break;
    x.edges = std::move(ne);
    x.tiles = std::move(nt);
  }
  auto check = check_collapsible(rule, x);
  if (!check.ok) fail(ErrorKind::Inconsistency, "Julia-edge subcomplex is not collapsible: " + check.failure + " " + check.detail);
  return x;
}

SubdivisionRule isolate_julia_vertices(const SubdivisionRule& rule, std::size_t budget) {
  if (!julia_edges(rule).empty())
    fail(ErrorKind::UnsupportedRegime,
         "rule has Julia edges; collapse them first (collapsible_from_julia_edges, quotient_rule)");
  VertexClass vc = classify_vertices(rule);
  const auto& L0 = rule.level0;
  const int E0 = static_cast<int>(L0.edges.size());
  Tower tower(rule, budget);
  const int max_level = E0 + 2;

  // Fatou points to add, as (level, vertex at that level).
  std::vector<std::pair<int, int>> seeds;
  for (int e = 0; e < E0; ++e) {
    if (vc.fatou[L0.edges[e].tail] || vc.fatou[L0.edges[e].head]) continue;
    bool found = false;
    for (int k = 1; k <= max_level && !found; ++k) {
      const auto& L = tower.level(k);
      auto path = edge_path(tower, 0, e, k);
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        int w = L.cx.end(path[i]);
        if (vc.fatou[L.vtype[w]]) {
          seeds.push_back({k, w});
          found = true;
          break;
        }
      }
    }
    if (!found) fail(ErrorKind::Inconsistency, "edge " + L0.edges[e].id + " never meets a Fatou vertex");
  }
  if (seeds.empty()) return rule;

  int N = 0;
  for (auto [k, w] : seeds) N = std::max(N, k);
  tower.level(N + 1);
  auto lift = [&](int from, int v, int to) {
    for (int k = from; k < to; ++k) v = tower.level(k).persist[v];
    return v;
  };
  // New level-0 vertex set at level N: old vertices plus the forward orbits.
  std::set<int> s0;
  for (int v = 0; v < static_cast<int>(L0.vertices.size()); ++v) s0.insert(lift(0, v, N));
  std::vector<int> extra;  // level-N indices of added points, in discovery order
  for (auto [k, w] : seeds) {
    int v = w;
    for (int j = k; j >= 1; --j) {
      int at = lift(j, v, N);
      if (s0.insert(at).second) extra.push_back(at);
      v = tower.level(j).vdown[v];
    }
  }
  const auto& LN = tower.level(N);
  const auto& LN1 = tower.level(N + 1);

  SubdivisionRule out;
  out.name = rule.name;
  out.metadata = rule.metadata;
  out.metadata["normalized"] = "isolated Julia vertices";
  std::set<std::string> used0(L0.vertices.begin(), L0.vertices.end());
  std::set<std::string> used1(rule.level1.vertices.begin(), rule.level1.vertices.end());
  auto fresh = [](std::set<std::string>& used, std::string id) {
    while (used.count(id)) id += "'";
    used.insert(id);
    return id;
  };

  // Level 0.
  SphereComplex& C0 = out.level0;
  std::map<int, int> v0_of;  // level-N vertex -> new level-0 vertex
  for (int v = 0; v < static_cast<int>(L0.vertices.size()); ++v) v0_of[lift(0, v, N)] = C0.add_vertex(L0.vertices[v]);
  for (int at : extra) v0_of[at] = C0.add_vertex(fresh(used0, LN.cx.vertices[at]));
  for (int v : L0.marked) C0.mark(v);

  // Splits a level-l edge path at the given points; returns the pieces as side lists.
  auto split = [](const SphereComplex& cx, const std::vector<Side>& path, const std::function<bool(int)>& cut) {
    std::vector<std::vector<Side>> pieces(1);
    for (std::size_t i = 0; i < path.size(); ++i) {
      pieces.back().push_back(path[i]);
      if (i + 1 < path.size() && cut(cx.end(path[i]))) pieces.emplace_back();
    }
    return pieces;
  };
  auto seg_id = [](const std::string& id, std::size_t i, std::size_t n) {
    return n == 1 ? id : id + ":" + std::to_string(i);
  };

  std::vector<std::vector<int>> segs0(E0);
  std::map<int, std::pair<int, bool>> seg_of_N;  // level-N edge -> (segment, same direction)
  for (int e = 0; e < E0; ++e) {
    auto pieces = split(LN.cx, edge_path(tower, 0, e, N), [&](int v) { return s0.count(v) > 0; });
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      int tail = v0_of.at(LN.cx.start(pieces[i].front()));
      int head = v0_of.at(LN.cx.end(pieces[i].back()));
      int s = C0.add_edge(seg_id(L0.edges[e].id, i, pieces.size()), tail, head);
      segs0[e].push_back(s);
      for (auto side : pieces[i]) seg_of_N[side.edge] = {s, side.forward};
    }
  }
  auto refine_walk = [](const std::vector<Side>& walk, const std::vector<std::vector<int>>& segs,
                        std::vector<int>* offsets) {
    std::vector<Side> w;
    for (const auto& s : walk) {
      if (offsets) offsets->push_back(static_cast<int>(w.size()));
      const auto& sg = segs[s.edge];
      if (s.forward)
        for (int x : sg) w.push_back({x, true});
      else
        for (auto it = sg.rbegin(); it != sg.rend(); ++it) w.push_back({*it, false});
    }
    return w;
  };
  std::vector<std::vector<int>> offset0;
  for (const auto& t : L0.tiles) {
    offset0.emplace_back();
    C0.add_tile(t.id, refine_walk(t.walk, segs0, &offset0.back()));
  }

  // Location of level-(N+1) cells on the new level-0 complex.
  std::map<int, CellRef> where_v;  // level-(N+1) vertex on the level-0 1-skeleton
  std::map<int, int> where_e;      // level-(N+1) edge -> new level-0 segment
  {
    std::set<int> s0up;
    for (int v : s0) s0up.insert(LN.persist[v]);
    for (int e = 0; e < E0; ++e) {
      auto path = edge_path(tower, 0, e, N + 1);
      std::size_t seg = 0;
      where_v[LN1.cx.start(path.front())] = {CellKind::Vertex, v0_of.at(lift(0, L0.edges[e].tail, N))};
      for (std::size_t i = 0; i < path.size(); ++i) {
        where_e[path[i].edge] = segs0[e][seg];
        int p = LN1.cx.end(path[i]);
        if (s0up.count(p)) {
          int at = -1;
          for (int v : s0)
            if (LN.persist[v] == p) at = v;
          where_v[p] = {CellKind::Vertex, v0_of.at(at)};
          if (i + 1 < path.size()) ++seg;
        } else {
          where_v[p] = {CellKind::Edge, segs0[e][seg]};
        }
      }
    }
  }

  // Level 1.
  const auto& R1 = rule.level1;
  SphereComplex& C1 = out.level1;
  std::map<int, int> v1_of;  // level-(N+1) vertex -> new level-1 vertex
  for (int u = 0; u < static_cast<int>(R1.vertices.size()); ++u) {
    int at = lift(1, u, N + 1);
    v1_of[at] = C1.add_vertex(R1.vertices[u]);
    out.carrier_vertex.push_back(rule.carrier_vertex[u].kind == CellKind::Tile ? rule.carrier_vertex[u]
                                                                               : where_v.at(at));
    out.map_vertex.push_back(v0_of.at(LN1.vdown[at]));
  }
  const int E1 = static_cast<int>(R1.edges.size());
  std::vector<std::vector<int>> segs1(E1);
  for (int a = 0; a < E1; ++a) {
    auto pieces = split(LN1.cx, edge_path(tower, 1, a, N + 1), [&](int v) { return s0.count(LN1.vdown[v]) > 0; });
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      auto endpoint = [&](int v) {
        auto it = v1_of.find(v);
        if (it != v1_of.end()) return it->second;
        int nv = C1.add_vertex(fresh(used1, LN1.cx.vertices[v]));
        v1_of[v] = nv;
        out.carrier_vertex.push_back(rule.carrier_edge[a].kind == CellKind::Tile ? rule.carrier_edge[a] : where_v.at(v));
        out.map_vertex.push_back(v0_of.at(LN1.vdown[v]));
        return nv;
      };
      int tail = endpoint(LN1.cx.start(pieces[i].front()));
      int head = endpoint(LN1.cx.end(pieces[i].back()));
      int s = C1.add_edge(seg_id(R1.edges[a].id, i, pieces.size()), tail, head);
      segs1[a].push_back(s);
      out.carrier_edge.push_back(rule.carrier_edge[a].kind == CellKind::Tile
                                     ? rule.carrier_edge[a]
                                     : CellRef{CellKind::Edge, where_e.at(pieces[i].front().edge)});
      Side b = pieces[i].front();
      bool down_fwd = (b.forward == (LN1.edown_sign[b.edge] != 0));
      auto [seg, same] = seg_of_N.at(LN1.edown[b.edge]);
      out.map_edge.push_back({seg, down_fwd == same});
    }
  }
  for (int P = 0; P < static_cast<int>(R1.tiles.size()); ++P) {
    C1.add_tile(R1.tiles[P].id, refine_walk(R1.tiles[P].walk, segs1, nullptr));
    out.carrier_tile.push_back(rule.carrier_tile[P]);
    const int t = rule.map_tile[P].tile;
    const int m = static_cast<int>(R1.tiles[P].walk.size());
    out.map_tile.push_back({t, offset0[t][((rule.map_tile[P].alignment % m) + m) % m]});
  }

  auto rep = validate_rule(out);
  if (!rep.ok) fail(ErrorKind::Inconsistency, "isolated rule is invalid: " + rep.failure + " " + rep.detail);
  return out;
}

SubdivisionRule normalize_for_energy(const SubdivisionRule& rule) {
  auto eg = edge_digraph(rule);
  for (int e = 0; e < eg.size(); ++e)
    if (growth_class(eg, e).exponential)
      fail(ErrorKind::UnsupportedRegime, "normalization needs polynomial edge growth");
  auto levy = is_levy_free(rule);
  if (!levy.levy_free) fail(ErrorKind::Inconsistency, "rule has a Levy cycle");
  auto x = collapsible_from_julia_edges(rule);
  SubdivisionRule cur = rule;
  std::string steps;
  if (!x.empty()) {
    cur = quotient_rule(rule, x).rule;
    steps = "collapsed " + std::to_string(x.edges.size()) + " Julia edges and " + std::to_string(x.tiles.size()) +
            " tiles";
  }
  SubdivisionRule iso = isolate_julia_vertices(cur);
  if (iso.level0.vertices.size() != cur.level0.vertices.size())
    steps += std::string(steps.empty() ? "" : "; ") + "added " +
             std::to_string(iso.level0.vertices.size() - cur.level0.vertices.size()) + " Fatou vertices";
  iso.name = rule.name;
  if (!steps.empty()) {
    iso.name += "~normalized";
    iso.metadata["normalization"] = steps;
    iso.metadata["combinatorial_class"] = "same as " + rule.name + " (not re-verified)";
  }
  return iso;
}

}  // namespace fsr
