#include "fsr/subdivision.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "fsr/error.hpp"

namespace fsr {

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

[[noreturn]] void bad(const std::string& what) { fail(ErrorKind::Validation, what); }

void check_sizes(const SubdivisionRule& r) {
  const auto& L1 = r.level1;
  if (r.carrier_vertex.size() != L1.vertices.size() || r.map_vertex.size() != L1.vertices.size() ||
      r.carrier_edge.size() != L1.edges.size() || r.map_edge.size() != L1.edges.size() ||
      r.carrier_tile.size() != L1.tiles.size() || r.map_tile.size() != L1.tiles.size())
    bad("unknown reference: carrier/map tables do not cover level 1");
  const int V0 = static_cast<int>(r.level0.vertices.size());
  const int E0 = static_cast<int>(r.level0.edges.size());
  const int T0 = static_cast<int>(r.level0.tiles.size());
  auto valid_ref = [&](CellRef c) {
    switch (c.kind) {
      case CellKind::Vertex: return c.index >= 0 && c.index < V0;
      case CellKind::Edge: return c.index >= 0 && c.index < E0;
      case CellKind::Tile: return c.index >= 0 && c.index < T0;
    }
    return false;
  };
  for (auto c : r.carrier_vertex)
    if (!valid_ref(c)) bad("unknown reference: vertex carrier");
  for (auto c : r.carrier_edge)
    if (!valid_ref(c) || c.kind == CellKind::Vertex) bad("unknown reference: edge carrier");
  for (int t : r.carrier_tile)
    if (t < 0 || t >= T0) bad("unknown reference: tile carrier");
  for (int v : r.map_vertex)
    if (v < 0 || v >= V0) bad("unknown reference: vertex map");
  for (auto s : r.map_edge)
    if (s.edge < 0 || s.edge >= E0) bad("unknown reference: edge map");
  for (auto t : r.map_tile)
    if (t.tile < 0 || t.tile >= T0) bad("unknown reference: tile map");
}

EdgePattern build_edge_pattern(const SubdivisionRule& r, int e0) {
  const auto& L0 = r.level0;
  const auto& L1 = r.level1;
  std::vector<int> carried;
  for (int a = 0; a < static_cast<int>(L1.edges.size()); ++a)
    if (r.carrier_edge[a].kind == CellKind::Edge && r.carrier_edge[a].index == e0) carried.push_back(a);
  const int tplus = L0.slot(e0, true).tile;
  const int tminus = L0.slot(e0, false).tile;
  const bool signs_known = tplus != tminus;
  std::vector<char> sign(L1.edges.size(), 1);
  if (signs_known)
    for (int a : carried) sign[a] = r.carrier_tile[L1.slot(a, true).tile] == tplus;

  // Locate the level-1 copies of the endpoints.
  auto copy_of = [&](int v0) {
    for (int u = 0; u < static_cast<int>(L1.vertices.size()); ++u)
      if (r.carrier_vertex[u].kind == CellKind::Vertex && r.carrier_vertex[u].index == v0) return u;
    bad("carrier: level-0 vertex " + L0.vertices[v0] + " has no level-1 copy");
  };
  EdgePattern p;
  int cur = copy_of(L0.edges[e0].tail);
  const int goal = copy_of(L0.edges[e0].head);
  p.points.push_back(cur);
  std::vector<char> used(L1.edges.size(), 0);
  for (std::size_t step = 0; step < carried.size(); ++step) {
    int pick = -1;
    bool fwd = true;
    for (int a : carried) {
      if (used[a]) continue;
      const auto& ed = L1.edges[a];
      if (signs_known) {
        int st = sign[a] ? ed.tail : ed.head;
        if (st == cur) {
          pick = a;
          fwd = sign[a];
          break;
        }
      } else if (ed.tail == cur || ed.head == cur) {
        pick = a;
        fwd = ed.tail == cur;
        break;
      }
    }
    if (pick < 0) bad("carrier: subedges of " + L0.edges[e0].id + " do not form a path");
    used[pick] = 1;
    p.path.push_back({pick, fwd});
    cur = fwd ? L1.edges[pick].head : L1.edges[pick].tail;
    p.points.push_back(cur);
  }
  if (carried.empty() || cur != goal)
    bad("carrier: subedges of " + L0.edges[e0].id + " do not join its endpoints");
  for (std::size_t k = 1; k + 1 < p.points.size(); ++k) {
    auto c = r.carrier_vertex[p.points[k]];
    if (c.kind != CellKind::Edge || c.index != e0)
      bad("carrier: interior vertex of " + L0.edges[e0].id + " is not carried by it");
  }
  return p;
}

TilePattern build_tile_pattern(const SubdivisionRule& r, const std::vector<EdgePattern>& ep, int t0) {
  const auto& L0 = r.level0;
  const auto& L1 = r.level1;
  const std::string& tid = L0.tiles[t0].id;
  TilePattern tp;
  const auto& walk = L0.tiles[t0].walk;
  for (int j = 0; j < static_cast<int>(walk.size()); ++j) {
    const auto& path = ep[walk[j].edge].path;
    const int n = static_cast<int>(path.size());
    for (int k = 0; k < n; ++k) {
      Side s = walk[j].forward ? path[k] : Side{path[n - 1 - k].edge, !path[n - 1 - k].forward};
      int q = static_cast<int>(tp.boundary.size());
      tp.boundary.push_back(s);
      tp.boundary_at.push_back({j, k});
      tp.boundary_side[{s.edge, s.forward}] = q;
    }
  }
  for (int u = 0; u < static_cast<int>(L1.vertices.size()); ++u)
    if (r.carrier_vertex[u].kind == CellKind::Tile && r.carrier_vertex[u].index == t0) tp.vertices.push_back(u);
  for (int a = 0; a < static_cast<int>(L1.edges.size()); ++a)
    if (r.carrier_edge[a].kind == CellKind::Tile && r.carrier_edge[a].index == t0) tp.edges.push_back(a);
  for (int P = 0; P < static_cast<int>(L1.tiles.size()); ++P)
    if (r.carrier_tile[P] == t0) tp.tiles.push_back(P);
  if (tp.tiles.empty()) bad("carrier: tile " + tid + " carries no level-1 tile");

  std::map<int, int> offset;
  int total = 0;
  for (int P : tp.tiles) {
    offset[P] = total;
    total += static_cast<int>(L1.tiles[P].walk.size());
  }
  auto interior = [&](int a) {
    return r.carrier_edge[a].kind == CellKind::Tile && r.carrier_edge[a].index == t0;
  };
  UnionFind uf(total);
  std::size_t boundary_sides = 0;
  for (int P : tp.tiles) {
    const auto& w = L1.tiles[P].walk;
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      if (!interior(w[i].edge)) {
        if (!tp.boundary_side.count({w[i].edge, w[i].forward}))
          bad("carrier: a subtile of " + tid + " reaches outside its boundary");
        ++boundary_sides;
        continue;
      }
      Slot o = L1.slot(w[i].edge, !w[i].forward);
      if (!offset.count(o.tile)) bad("carrier: interior edge of " + tid + " borders a foreign tile");
      int len = static_cast<int>(L1.tiles[o.tile].walk.size());
      uf.unite(offset[P] + i, offset[o.tile] + (o.pos + 1) % len);
    }
  }
  if (boundary_sides != tp.boundary.size()) bad("carrier: boundary of tile " + tid + " does not match its subtiles");
  std::map<int, int> class_q;
  for (int q = 0; q < static_cast<int>(tp.boundary.size()); ++q) {
    Slot s = L1.slot(tp.boundary[q].edge, tp.boundary[q].forward);
    if (!offset.count(s.tile)) bad("carrier: boundary side of " + tid + " lies in a foreign tile");
    int rep = uf.find(offset[s.tile] + s.pos);
    if (class_q.count(rep)) bad("carrier: tile " + tid + " is not subdivided as a disk");
    class_q[rep] = q;
  }
  std::set<int> interior_seen;
  for (int P : tp.tiles) {
    const auto& w = L1.tiles[P].walk;
    std::vector<int> desc(w.size());
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      int rep = uf.find(offset[P] + i);
      auto it = class_q.find(rep);
      if (it != class_q.end()) {
        desc[i] = it->second;
        if (L1.start(w[i]) != L1.start(tp.boundary[it->second]))
          bad("carrier: corner of a subtile of " + tid + " sits at the wrong boundary vertex");
      } else {
        int v = L1.start(w[i]);
        auto c = r.carrier_vertex[v];
        if (c.kind != CellKind::Tile || c.index != t0)
          bad("carrier: interior corner of " + tid + " at a vertex not carried by it");
        desc[i] = -(v + 1);
        interior_seen.insert(rep);
      }
    }
    tp.corner[P] = std::move(desc);
  }
  if (interior_seen.size() != tp.vertices.size())
    bad("carrier: interior vertices of tile " + tid + " are not disks");
  int chi = static_cast<int>(tp.vertices.size()) - static_cast<int>(tp.edges.size()) +
            static_cast<int>(tp.tiles.size());
  if (chi != 1) bad("carrier: subdivision of tile " + tid + " is not a disk");
  return tp;
}

}  // namespace

void resize_maps(SubdivisionRule& r) {
  r.carrier_vertex.resize(r.level1.vertices.size());
  r.map_vertex.resize(r.level1.vertices.size(), -1);
  r.carrier_edge.resize(r.level1.edges.size());
  r.map_edge.resize(r.level1.edges.size());
  r.carrier_tile.resize(r.level1.tiles.size(), -1);
  r.map_tile.resize(r.level1.tiles.size());
}

RulePattern analyze_pattern(const SubdivisionRule& r) {
  check_sizes(r);
  const auto& L0 = r.level0;
  const auto& L1 = r.level1;
  RulePattern p;
  auto c0 = L0.corner_counts();
  auto c1 = L1.corner_counts();
  p.local_degree.assign(L1.vertices.size(), 0);
  for (int u = 0; u < static_cast<int>(L1.vertices.size()); ++u) {
    int img = c0[r.map_vertex[u]];
    if (img == 0 || c1[u] % img != 0) bad("local degree: vertex " + L1.vertices[u]);
    p.local_degree[u] = c1[u] / img;
  }
  p.vertex_of0.assign(L0.vertices.size(), -1);
  for (int u = 0; u < static_cast<int>(L1.vertices.size()); ++u) {
    auto c = r.carrier_vertex[u];
    if (c.kind != CellKind::Vertex) continue;
    if (p.vertex_of0[c.index] >= 0) bad("carrier: level-0 vertex carries two level-1 vertices");
    p.vertex_of0[c.index] = u;
  }
  for (int v = 0; v < static_cast<int>(L0.vertices.size()); ++v)
    if (p.vertex_of0[v] < 0) bad("carrier: level-0 vertex " + L0.vertices[v] + " has no level-1 copy");
  p.f0.resize(L0.vertices.size());
  for (int v = 0; v < static_cast<int>(L0.vertices.size()); ++v) p.f0[v] = r.map_vertex[p.vertex_of0[v]];

  std::vector<int> count(L0.tiles.size(), 0);
  for (auto t : r.map_tile) ++count[t.tile];
  p.degree = count.empty() ? 0 : count[0];

  for (int e = 0; e < static_cast<int>(L0.edges.size()); ++e) p.edge.push_back(build_edge_pattern(r, e));
  for (int t = 0; t < static_cast<int>(L0.tiles.size()); ++t) p.tile.push_back(build_tile_pattern(r, p.edge, t));
  p.root_pos.resize(L1.tiles.size());
  for (int P = 0; P < static_cast<int>(L1.tiles.size()); ++P) {
    const auto& tp = p.tile[r.carrier_tile[P]];
    for (const auto& s : L1.tiles[P].walk) {
      auto it = tp.boundary_side.find({s.edge, s.forward});
      p.root_pos[P].push_back(it == tp.boundary_side.end() ? -1 : tp.boundary_at[it->second].first);
    }
  }
  return p;
}

std::vector<int> postcritical_set(const SubdivisionRule& r) {
  RulePattern p = analyze_pattern(r);
  std::set<int> pf;
  std::vector<int> stack;
  for (int u = 0; u < static_cast<int>(r.level1.vertices.size()); ++u)
    if (p.local_degree[u] > 1) stack.push_back(r.map_vertex[u]);
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (!pf.insert(v).second) continue;
    stack.push_back(p.f0[v]);
  }
  return {pf.begin(), pf.end()};
}

ValidationReport validate_rule(const SubdivisionRule& r) {
  auto c0 = validate_complex(r.level0);
  if (!c0.ok) return ValidationReport::fail("level0: " + c0.failure, c0.detail);
  auto c1 = validate_complex(r.level1);
  if (!c1.ok) return ValidationReport::fail("level1: " + c1.failure, c1.detail);
  try {
    check_sizes(r);
  } catch (const FsrError& e) {
    return ValidationReport::fail("unknown reference", e.what());
  }
  const auto& L0 = r.level0;
  const auto& L1 = r.level1;
  for (int P = 0; P < static_cast<int>(L1.tiles.size()); ++P) {
    const auto& w = L1.tiles[P].walk;
    const auto& img = L0.tiles[r.map_tile[P].tile].walk;
    if (w.size() != img.size()) return ValidationReport::fail("transport", "tile " + L1.tiles[P].id);
    const int m = static_cast<int>(img.size());
    const int a = ((r.map_tile[P].alignment % m) + m) % m;
    for (int i = 0; i < m; ++i) {
      Side me = r.map_edge[w[i].edge];
      Side got{me.edge, w[i].forward == me.forward};
      Side want = img[(i + a) % m];
      if (got.edge != want.edge) return ValidationReport::fail("transport", "tile " + L1.tiles[P].id);
      if (got.forward != want.forward)
        return ValidationReport::fail("orientation", "tile " + L1.tiles[P].id);
      if (r.map_vertex[L1.start(w[i])] != L0.start(want))
        return ValidationReport::fail("vertex map", "tile " + L1.tiles[P].id);
    }
  }
  RulePattern p;
  try {
    p = analyze_pattern(r);
  } catch (const FsrError& e) {
    std::string msg = e.what();
    auto colon = msg.find(':');
    return ValidationReport::fail(colon == std::string::npos ? "carrier" : msg.substr(0, colon), msg);
  }
  const int d = p.degree;
  std::vector<int> tcount(L0.tiles.size(), 0), ecount(L0.edges.size(), 0);
  for (auto t : r.map_tile) ++tcount[t.tile];
  for (auto s : r.map_edge) ++ecount[s.edge];
  for (int c : tcount)
    if (c != d || d < 1) return ValidationReport::fail("degree", "tile preimage counts differ");
  for (int c : ecount)
    if (c != d) return ValidationReport::fail("degree", "edge preimage counts differ");
  std::vector<int> sum(L0.vertices.size(), 0);
  for (int u = 0; u < static_cast<int>(L1.vertices.size()); ++u) sum[r.map_vertex[u]] += p.local_degree[u];
  for (int v = 0; v < static_cast<int>(L0.vertices.size()); ++v)
    if (sum[v] != d) return ValidationReport::fail("local degree", "vertex " + L0.vertices[v]);

  std::vector<int> pf = postcritical_set(r);
  for (int v : pf)
    if (!L0.is_marked(v))
      return ValidationReport::fail("post-critical containment", "vertex " + L0.vertices[v] + " is post-critical but unmarked");
  for (int v : L0.marked)
    if (!L0.is_marked(p.f0[v]))
      return ValidationReport::fail("post-critical containment", "image of marked vertex " + L0.vertices[v] + " is unmarked");

  ValidationReport ok;
  ok.euler = 2;
  ok.degree = d;
  for (int u = 0; u < static_cast<int>(L1.vertices.size()); ++u)
    if (p.local_degree[u] > 1) ok.critical.push_back(L1.vertices[u]);
  std::sort(ok.critical.begin(), ok.critical.end());
  return ok;
}

namespace {

LeveledComplex make_level0(const SubdivisionRule& r, const RulePattern& p) {
  LeveledComplex L;
  L.level = 0;
  L.cx = r.level0;
  const int V = static_cast<int>(L.cx.vertices.size());
  const int E = static_cast<int>(L.cx.edges.size());
  const int T = static_cast<int>(L.cx.tiles.size());
  L.vtype.resize(V);
  std::iota(L.vtype.begin(), L.vtype.end(), 0);
  L.etype.resize(E);
  std::iota(L.etype.begin(), L.etype.end(), 0);
  L.ttype.resize(T);
  std::iota(L.ttype.begin(), L.ttype.end(), 0);
  L.esign.assign(E, 1);
  L.talign.assign(T, 0);
  for (int v = 0; v < V; ++v) L.vcarrier0.push_back({CellKind::Vertex, v});
  for (int e = 0; e < E; ++e) L.ecarrier0.push_back({CellKind::Edge, e});
  L.tcarrier0 = L.ttype;
  L.vparent = L.vcarrier0;
  L.eparent = L.ecarrier0;
  L.tparent = L.ttype;
  L.vdown.assign(V, -1);
  L.edown.assign(E, -1);
  L.edown_sign.assign(E, 1);
  L.tdown.assign(T, -1);
  L.tdown_align.assign(T, 0);
  for (int t = 0; t < T; ++t) {
    std::vector<int> pos(L.cx.tiles[t].walk.size());
    std::iota(pos.begin(), pos.end(), 0);
    L.troot.push_back(pos);
  }
  L.persist = p.vertex_of0;
  return L;
}

LeveledComplex make_level1(const SubdivisionRule& r, const RulePattern& p) {
  LeveledComplex L;
  L.level = 1;
  L.cx = r.level1;
  L.cx.marked.clear();
  for (int v : r.level0.marked) L.cx.mark(p.vertex_of0[v]);
  L.vtype = r.map_vertex;
  for (auto s : r.map_edge) {
    L.etype.push_back(s.edge);
    L.esign.push_back(s.forward);
  }
  for (auto t : r.map_tile) {
    L.ttype.push_back(t.tile);
    L.talign.push_back(t.alignment);
  }
  L.vcarrier0 = r.carrier_vertex;
  L.ecarrier0 = r.carrier_edge;
  L.tcarrier0 = r.carrier_tile;
  L.vparent = L.vcarrier0;
  L.eparent = L.ecarrier0;
  L.tparent = L.tcarrier0;
  L.vdown = L.vtype;
  L.edown = L.etype;
  L.edown_sign = L.esign;
  L.tdown = L.ttype;
  L.tdown_align = L.talign;
  L.troot = p.root_pos;
  L.persist.resize(L.cx.vertices.size());
  std::iota(L.persist.begin(), L.persist.end(), 0);
  return L;
}

}  // namespace

Tower::Tower(const SubdivisionRule& rule, std::size_t budget)
    : rule_(std::make_shared<SubdivisionRule>(rule)), pat_(analyze_pattern(rule)), budget_(budget) {
  levels_.push_back(make_level0(*rule_, pat_));
}

const LeveledComplex& Tower::level(int n) {
  if (n < 0) fail(ErrorKind::UnsupportedInput, "negative level");
  while (static_cast<int>(levels_.size()) <= n) grow();
  return levels_[n];
}

void Tower::grow() {
  const int n = static_cast<int>(levels_.size()) - 1;
  if (n == 0) {
    levels_.push_back(make_level1(*rule_, pat_));
    for (const auto& ep : pat_.edge) levels_[0].echild.push_back(ep.path);
    if (levels_.back().cx.cell_count() > budget_)
      fail(ErrorKind::Resource, "cell budget exceeded at level 1");
    return;
  }
  const SubdivisionRule& r = *rule_;
  const LeveledComplex& L = levels_[n];
  const LeveledComplex& Lprev = levels_[n - 1];
  const auto& L1 = r.level1;
  LeveledComplex N;
  N.level = n + 1;
  std::size_t cells = 0;
  auto charge = [&]() {
    if (++cells > budget_)
      fail(ErrorKind::Resource, "cell budget exceeded at level " + std::to_string(n + 1) +
                                    " (reached level " + std::to_string(n) + ")");
  };

  // Name of the level-n cell f(X)/c, where X is a level-n cell and c a pattern cell.
  auto down_name = [&](const std::string& parent_down, const std::string& c) {
    return n == 1 ? c : parent_down + "/" + c;
  };

  const int Vn = static_cast<int>(L.cx.vertices.size());
  for (int v = 0; v < Vn; ++v) {
    charge();
    N.cx.add_vertex(L.cx.vertices[v]);
    N.vcarrier0.push_back(L.vcarrier0[v]);
    N.vparent.push_back({CellKind::Vertex, v});
    N.vdown.push_back(Lprev.persist[L.vdown[v]]);
    N.vtype.push_back(L.vtype[N.vdown.back()]);
  }

  // Children of level-n edges.
  const int En = static_cast<int>(L.cx.edges.size());
  std::vector<std::vector<int>> edge_child(En), edge_point(En);
  for (int E = 0; E < En; ++E) {
    const int tau = L.etype[E];
    const auto& pat = pat_.edge[tau];
    const int len = static_cast<int>(pat.path.size());
    const std::string& eid = L.cx.edges[E].id;
    const std::string fE = L.edown[E] >= 0 ? Lprev.cx.edges[L.edown[E]].id : std::string();
    std::vector<int> pt(len + 1);
    pt[0] = L.esign[E] ? L.cx.edges[E].tail : L.cx.edges[E].head;
    pt[len] = L.esign[E] ? L.cx.edges[E].head : L.cx.edges[E].tail;
    for (int k = 1; k < len; ++k) {
      charge();
      const int u = pat.points[k];
      pt[k] = N.cx.add_vertex(eid + "/" + L1.vertices[u]);
      N.vtype.push_back(r.map_vertex[u]);
      N.vcarrier0.push_back(L.ecarrier0[E]);
      N.vparent.push_back({CellKind::Edge, E});
      N.vdown.push_back(n == 1 ? u : L.cx.vertex_index(down_name(fE, L1.vertices[u])));
    }
    edge_point[E] = pt;
    for (int k = 0; k < len; ++k) {
      charge();
      const Side a = pat.path[k];
      int tail = a.forward ? pt[k] : pt[k + 1];
      int head = a.forward ? pt[k + 1] : pt[k];
      int idx = N.cx.add_edge(eid + "/" + L1.edges[a.edge].id, tail, head);
      edge_child[E].push_back(idx);
      N.etype.push_back(r.map_edge[a.edge].edge);
      N.esign.push_back(r.map_edge[a.edge].forward);
      N.ecarrier0.push_back(L.ecarrier0[E]);
      N.eparent.push_back({CellKind::Edge, E});
      N.edown.push_back(n == 1 ? a.edge : L.cx.edge_index(down_name(fE, L1.edges[a.edge].id)));
      N.edown_sign.push_back(1);
    }
  }
  auto child_of_edge = [&](int E, int a) {
    const auto& path = pat_.edge[L.etype[E]].path;
    for (std::size_t k = 0; k < path.size(); ++k)
      if (path[k].edge == a) return edge_child[E][k];
    fail(ErrorKind::Inconsistency, "subedge lookup failed");
  };
  auto point_of_edge = [&](int E, int u) {
    const auto& pts = pat_.edge[L.etype[E]].points;
    for (std::size_t k = 1; k + 1 < pts.size(); ++k)
      if (pts[k] == u) return edge_point[E][k];
    fail(ErrorKind::Inconsistency, "subdivision point lookup failed");
  };

  // Children of level-n tiles.
  const int Tn = static_cast<int>(L.cx.tiles.size());
  for (int T = 0; T < Tn; ++T) {
    const int tau = L.ttype[T];
    const auto& tp = pat_.tile[tau];
    const auto& walk = L.cx.tiles[T].walk;
    const int m = static_cast<int>(walk.size());
    const int alpha = ((L.talign[T] % m) + m) % m;
    const std::string& tid = L.cx.tiles[T].id;
    const std::string fT = L.tdown[T] >= 0 ? Lprev.cx.tiles[L.tdown[T]].id : std::string();
    const int c0 = L.tcarrier0[T];

    auto boundary_vertex = [&](int q) {
      auto [j, k] = tp.boundary_at[q];
      const Side s = walk[(j - alpha + m) % m];
      if (k == 0) return L.cx.start(s);
      return point_of_edge(s.edge, L1.start(tp.boundary[q]));
    };
    std::map<int, int> inner_vertex;
    for (int u : tp.vertices) {
      charge();
      inner_vertex[u] = N.cx.add_vertex(tid + "/" + L1.vertices[u]);
      N.vtype.push_back(r.map_vertex[u]);
      N.vcarrier0.push_back({CellKind::Tile, c0});
      N.vparent.push_back({CellKind::Tile, T});
      N.vdown.push_back(n == 1 ? u : L.cx.vertex_index(down_name(fT, L1.vertices[u])));
    }
    auto corner_vertex = [&](int desc) {
      return desc >= 0 ? boundary_vertex(desc) : inner_vertex.at(-desc - 1);
    };
    std::map<int, int> inner_edge;
    for (int a : tp.edges) {
      charge();
      Slot sp = L1.slot(a, true);
      Slot sm = L1.slot(a, false);
      int tail = corner_vertex(tp.corner.at(sp.tile)[sp.pos]);
      int head = corner_vertex(tp.corner.at(sm.tile)[sm.pos]);
      inner_edge[a] = N.cx.add_edge(tid + "/" + L1.edges[a].id, tail, head);
      N.etype.push_back(r.map_edge[a].edge);
      N.esign.push_back(r.map_edge[a].forward);
      N.ecarrier0.push_back({CellKind::Tile, c0});
      N.eparent.push_back({CellKind::Tile, T});
      N.edown.push_back(n == 1 ? a : L.cx.edge_index(down_name(fT, L1.edges[a].id)));
      N.edown_sign.push_back(1);
    }
    for (int P : tp.tiles) {
      charge();
      std::vector<Side> w;
      std::vector<int> root;
      for (const auto& s : L1.tiles[P].walk) {
        auto it = inner_edge.find(s.edge);
        if (it != inner_edge.end()) {
          w.push_back({it->second, s.forward});
          root.push_back(-1);
          continue;
        }
        int q = tp.boundary_side.at({s.edge, s.forward});
        int jj = (tp.boundary_at[q].first - alpha + m) % m;
        w.push_back({child_of_edge(walk[jj].edge, s.edge), s.forward});
        root.push_back(L.troot[T][jj]);
      }
      N.cx.add_tile(tid + "/" + L1.tiles[P].id, std::move(w));
      N.ttype.push_back(r.map_tile[P].tile);
      N.talign.push_back(r.map_tile[P].alignment);
      N.tcarrier0.push_back(c0);
      N.tparent.push_back(T);
      N.tdown.push_back(n == 1 ? P : L.cx.tile_index(down_name(fT, L1.tiles[P].id)));
      N.tdown_align.push_back(0);
      N.troot.push_back(std::move(root));
    }
  }
  for (int v : r.level0.marked) {
    int x = v;
    for (int k = 0; k <= n; ++k) x = levels_[k].persist[x];
    N.cx.mark(x);
  }
  for (int d : N.vdown)
    if (d < 0) fail(ErrorKind::Inconsistency, "vertex image lookup failed");
  for (int d : N.edown)
    if (d < 0) fail(ErrorKind::Inconsistency, "edge image lookup failed");
  for (int d : N.tdown)
    if (d < 0) fail(ErrorKind::Inconsistency, "tile image lookup failed");
  N.persist.resize(N.cx.vertices.size());
  std::iota(N.persist.begin(), N.persist.end(), 0);
  auto& parent = levels_[n];
  parent.echild.assign(En, {});
  for (int E = 0; E < En; ++E) {
    const auto& path = pat_.edge[L.etype[E]].path;
    const int len = static_cast<int>(path.size());
    for (int k = 0; k < len; ++k) {
      int kk = L.esign[E] ? k : len - 1 - k;
      bool fwd = L.esign[E] ? path[kk].forward : !path[kk].forward;
      parent.echild[E].push_back({edge_child[E][kk], fwd});
    }
  }
  levels_.push_back(std::move(N));
}

std::vector<Side> edge_path(Tower& tower, int l, int e, int m) {
  std::vector<Side> cur{{e, true}};
  for (int k = l; k < m; ++k) {
    tower.level(k + 1);
    const auto& L = tower.level(k);
    std::vector<Side> next;
    for (const Side& s : cur) {
      const auto& ch = L.echild[s.edge];
      if (s.forward)
        next.insert(next.end(), ch.begin(), ch.end());
      else
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) next.push_back({it->edge, !it->forward});
    }
    cur = std::move(next);
  }
  return cur;
}

LeveledComplex subdivide(const SubdivisionRule& rule, int n, std::size_t budget) {
  Tower t(rule, budget);
  return t.level(n);
}

VertexClass classify_vertices(const SubdivisionRule& rule) {
  RulePattern p = analyze_pattern(rule);
  const int V = static_cast<int>(rule.level0.vertices.size());
  VertexClass vc;
  vc.fatou.assign(V, 0);
  vc.periodic.assign(V, 0);
  vc.cycle.resize(V);
  vc.local_degree.resize(V);
  for (int v = 0; v < V; ++v) vc.local_degree[v] = p.local_degree[p.vertex_of0[v]];
  for (int v = 0; v < V; ++v) {
    std::vector<int> seen(V, -1);
    std::vector<int> orbit;
    int x = v;
    while (seen[x] < 0) {
      seen[x] = static_cast<int>(orbit.size());
      orbit.push_back(x);
      x = p.f0[x];
    }
    vc.cycle[v].assign(orbit.begin() + seen[x], orbit.end());
    for (int c : vc.cycle[v]) {
      if (c == v) vc.periodic[v] = 1;
      if (vc.local_degree[c] > 1) vc.fatou[v] = 1;
    }
  }
  return vc;
}

namespace {

// Cells whose forward type-orbit only meets Julia vertices.
std::vector<int> julia_closure(int n, const std::vector<std::vector<int>>& succ,
                               const std::vector<char>& has_fatou) {
  std::vector<char> bad(n, 0);
  for (int i = 0; i < n; ++i) bad[i] = has_fatou[i];
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (bad[i]) continue;
      for (int j : succ[i])
        if (bad[j]) {
          bad[i] = 1;
          changed = true;
          break;
        }
    }
  }
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (!bad[i]) out.push_back(i);
  return out;
}

}  // namespace

std::vector<int> julia_edges(const SubdivisionRule& rule) {
  RulePattern p = analyze_pattern(rule);
  VertexClass vc = classify_vertices(rule);
  const auto& L0 = rule.level0;
  const int E = static_cast<int>(L0.edges.size());
  std::vector<std::vector<int>> succ(E);
  std::vector<char> has_fatou(E, 0);
  for (int e = 0; e < E; ++e) {
    has_fatou[e] = vc.fatou[L0.edges[e].tail] || vc.fatou[L0.edges[e].head];
    for (auto s : p.edge[e].path) succ[e].push_back(rule.map_edge[s.edge].edge);
  }
  return julia_closure(E, succ, has_fatou);
}

std::vector<int> julia_tiles(const SubdivisionRule& rule) {
  VertexClass vc = classify_vertices(rule);
  const auto& L0 = rule.level0;
  const int T = static_cast<int>(L0.tiles.size());
  std::vector<std::vector<int>> succ(T);
  std::vector<char> has_fatou(T, 0);
  for (int t = 0; t < T; ++t)
    for (auto s : L0.tiles[t].walk)
      if (vc.fatou[L0.start(s)]) has_fatou[t] = 1;
  for (int P = 0; P < static_cast<int>(rule.level1.tiles.size()); ++P)
    succ[rule.carrier_tile[P]].push_back(rule.map_tile[P].tile);
  return julia_closure(T, succ, has_fatou);
}

SubdivisionRule rule_from_levels(const LeveledComplex& lo, const LeveledComplex& hi, bool use_type_map,
                                 const std::string& name) {
  SubdivisionRule r;
  r.name = name;
  r.level0 = lo.cx;
  r.level1 = hi.cx;
  r.level1.marked.clear();
  r.level0.rebuild_index();
  r.level1.rebuild_index();
  const int V = static_cast<int>(hi.cx.vertices.size());
  const int E = static_cast<int>(hi.cx.edges.size());
  const int T = static_cast<int>(hi.cx.tiles.size());
  for (int v = 0; v < V; ++v) {
    r.carrier_vertex.push_back(use_type_map ? hi.vcarrier0[v] : hi.vparent[v]);
    r.map_vertex.push_back(use_type_map ? hi.vtype[v] : hi.vdown[v]);
  }
  for (int e = 0; e < E; ++e) {
    r.carrier_edge.push_back(use_type_map ? hi.ecarrier0[e] : hi.eparent[e]);
    r.map_edge.push_back(use_type_map ? Side{hi.etype[e], hi.esign[e] != 0} : Side{hi.edown[e], hi.edown_sign[e] != 0});
  }
  for (int t = 0; t < T; ++t) {
    r.carrier_tile.push_back(use_type_map ? hi.tcarrier0[t] : hi.tparent[t]);
    r.map_tile.push_back(use_type_map ? TileImage{hi.ttype[t], hi.talign[t]} : TileImage{hi.tdown[t], hi.tdown_align[t]});
  }
  return r;
}

SubdivisionRule shift(const SubdivisionRule& rule, int k, std::size_t budget) {
  if (k < 0) fail(ErrorKind::UnsupportedInput, "shift needs k >= 0");
  if (k == 0) return rule;
  Tower t(rule, budget);
  t.level(k + 1);
  const auto& lo = t.level(k);
  const auto& hi = t.level(k + 1);
  SubdivisionRule r = rule_from_levels(lo, hi, false, rule.name + "~shift" + std::to_string(k));
  r.metadata = rule.metadata;
  r.metadata["derived"] = "shift " + std::to_string(k) + " of " + rule.name;
  return r;
}

SubdivisionRule power(const SubdivisionRule& rule, int k, std::size_t budget) {
  if (k < 1) fail(ErrorKind::UnsupportedInput, "power needs k >= 1");
  if (k == 1) return rule;
  Tower t(rule, budget);
  const auto& hi = t.level(k);
  SubdivisionRule r = rule_from_levels(t.level(0), hi, true, rule.name + "~power" + std::to_string(k));
  r.metadata = rule.metadata;
  r.metadata["derived"] = "power " + std::to_string(k) + " of " + rule.name;
  return r;
}

}  // namespace fsr
