#include "fsr/sphere_complex.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

#include "fsr/error.hpp"

namespace fsr {

namespace {

template <class Map>
int lookup(const Map& m, std::string_view id) {
  auto it = m.find(std::string(id));
  return it == m.end() ? -1 : it->second;
}

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p[a] = b;
    return true;
  }
};

}  // namespace

int SphereComplex::add_vertex(const std::string& id) {
  if (vmap_.count(id)) fail(ErrorKind::Validation, "duplicate vertex id '" + id + "'");
  vertices.push_back(id);
  vmap_[id] = static_cast<int>(vertices.size()) - 1;
  return static_cast<int>(vertices.size()) - 1;
}

int SphereComplex::add_edge(const std::string& id, int tail, int head) {
  if (emap_.count(id)) fail(ErrorKind::Validation, "duplicate edge id '" + id + "'");
  edges.push_back({id, tail, head});
  emap_[id] = static_cast<int>(edges.size()) - 1;
  slots_ready_ = false;
  return static_cast<int>(edges.size()) - 1;
}

int SphereComplex::add_edge(const std::string& id, const std::string& tail, const std::string& head) {
  return add_edge(id, vertex_at(tail), vertex_at(head));
}

int SphereComplex::add_tile(const std::string& id, std::vector<Side> walk) {
  if (tmap_.count(id)) fail(ErrorKind::Validation, "duplicate tile id '" + id + "'");
  tiles.push_back({id, std::move(walk)});
  tmap_[id] = static_cast<int>(tiles.size()) - 1;
  slots_ready_ = false;
  return static_cast<int>(tiles.size()) - 1;
}

int SphereComplex::add_tile(const std::string& id,
                            const std::vector<std::pair<std::string, bool>>& walk) {
  std::vector<Side> w;
  w.reserve(walk.size());
  for (const auto& [e, fwd] : walk) w.push_back({edge_at(e), fwd});
  return add_tile(id, std::move(w));
}

void SphereComplex::mark(int v) {
  if (v < 0 || v >= static_cast<int>(vertices.size()))
    fail(ErrorKind::Validation, "marked vertex out of range");
  auto it = std::lower_bound(marked.begin(), marked.end(), v);
  if (it == marked.end() || *it != v) marked.insert(it, v);
}

int SphereComplex::vertex_index(std::string_view id) const { return lookup(vmap_, id); }
int SphereComplex::edge_index(std::string_view id) const { return lookup(emap_, id); }
int SphereComplex::tile_index(std::string_view id) const { return lookup(tmap_, id); }

int SphereComplex::vertex_at(std::string_view id) const {
  int i = vertex_index(id);
  if (i < 0) fail(ErrorKind::Validation, "unknown vertex '" + std::string(id) + "'");
  return i;
}
int SphereComplex::edge_at(std::string_view id) const {
  int i = edge_index(id);
  if (i < 0) fail(ErrorKind::Validation, "unknown edge '" + std::string(id) + "'");
  return i;
}
int SphereComplex::tile_at(std::string_view id) const {
  int i = tile_index(id);
  if (i < 0) fail(ErrorKind::Validation, "unknown tile '" + std::string(id) + "'");
  return i;
}

bool SphereComplex::is_marked(int v) const {
  return std::binary_search(marked.begin(), marked.end(), v);
}

void SphereComplex::rebuild_index() {
  vmap_.clear();
  emap_.clear();
  tmap_.clear();
  for (int i = 0; i < static_cast<int>(vertices.size()); ++i) vmap_[vertices[i]] = i;
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) emap_[edges[i].id] = i;
  for (int i = 0; i < static_cast<int>(tiles.size()); ++i) tmap_[tiles[i].id] = i;
  std::sort(marked.begin(), marked.end());
  marked.erase(std::unique(marked.begin(), marked.end()), marked.end());
  slots_ready_ = false;
}

void SphereComplex::build_slots() const {
  plus_.assign(edges.size(), Slot{});
  minus_.assign(edges.size(), Slot{});
  for (int t = 0; t < static_cast<int>(tiles.size()); ++t) {
    const auto& w = tiles[t].walk;
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      if (w[i].edge < 0 || w[i].edge >= static_cast<int>(edges.size())) continue;
      (w[i].forward ? plus_ : minus_)[w[i].edge] = {t, i};
    }
  }
  slots_ready_ = true;
}

const Slot& SphereComplex::slot(int e, bool forward) const {
  if (!slots_ready_) build_slots();
  return forward ? plus_[e] : minus_[e];
}

std::vector<int> SphereComplex::corner_counts() const {
  std::vector<int> c(vertices.size(), 0);
  for (const auto& t : tiles)
    for (const auto& s : t.walk) ++c[start(s)];
  return c;
}

int euler_characteristic(const SphereComplex& cx) {
  return static_cast<int>(cx.vertices.size()) - static_cast<int>(cx.edges.size()) +
         static_cast<int>(cx.tiles.size());
}

ValidationReport validate_complex(const SphereComplex& cx) {
  const int V = static_cast<int>(cx.vertices.size());
  const int E = static_cast<int>(cx.edges.size());
  for (const auto& e : cx.edges)
    if (e.tail < 0 || e.tail >= V || e.head < 0 || e.head >= V)
      return ValidationReport::fail("unknown reference", "edge " + e.id);
  for (int v : cx.marked)
    if (v < 0 || v >= V) return ValidationReport::fail("unknown reference", "marked vertex");
  std::vector<int> plus(E, 0), minus(E, 0);
  for (const auto& t : cx.tiles) {
    if (t.walk.empty()) return ValidationReport::fail("empty walk", "tile " + t.id);
    for (const auto& s : t.walk) {
      if (s.edge < 0 || s.edge >= E) return ValidationReport::fail("unknown reference", "tile " + t.id);
      ++(s.forward ? plus : minus)[s.edge];
    }
  }
  for (int e = 0; e < E; ++e)
    if (plus[e] != 1 || minus[e] != 1)
      return ValidationReport::fail("orientation pairing", "edge " + cx.edges[e].id);
  for (const auto& t : cx.tiles) {
    const auto& w = t.walk;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (cx.end(w[i]) != cx.start(w[(i + 1) % w.size()]))
        return ValidationReport::fail("walk chaining", "tile " + t.id);
  }
  for (const auto& t : cx.tiles)
    if (t.walk.size() < 2) return ValidationReport::fail("monogon", "tile " + t.id);

  if (V == 0 || cx.tiles.empty()) return ValidationReport::fail("connectivity", "empty complex");
  UnionFind uf(V);
  std::vector<char> touched(V, 0);
  for (const auto& e : cx.edges) {
    uf.unite(e.tail, e.head);
    touched[e.tail] = touched[e.head] = 1;
  }
  for (int v = 0; v < V; ++v)
    if (!touched[v] || uf.find(v) != uf.find(0))
      return ValidationReport::fail("connectivity", "vertex " + cx.vertices[v]);

  int chi = euler_characteristic(cx);
  if (chi != 2)
    return ValidationReport::fail("euler characteristic", "chi = " + std::to_string(chi));

  // Each vertex must have a single cycle of corners around it.
  DualSkeleton dual = dual_skeleton(cx);
  if (static_cast<int>(dual.faces.size()) != V)
    return ValidationReport::fail("vertex link", "corner cycles != vertices");

  ValidationReport ok;
  ok.euler = chi;
  return ok;
}

DualSkeleton dual_skeleton(const SphereComplex& cx) {
  DualSkeleton d;
  d.num_vertices = static_cast<int>(cx.tiles.size());
  d.edges.resize(cx.edges.size());
  for (int e = 0; e < static_cast<int>(cx.edges.size()); ++e) {
    d.edges[e].edge = e;
    d.edges[e].from = cx.slot(e, true);
    d.edges[e].to = cx.slot(e, false);
    if (d.edges[e].from.tile < 0 || d.edges[e].to.tile < 0)
      fail(ErrorKind::Validation, "dual skeleton of malformed complex");
  }
  d.rotation.resize(cx.tiles.size());
  for (int t = 0; t < static_cast<int>(cx.tiles.size()); ++t)
    for (const auto& s : cx.tiles[t].walk) d.rotation[t].push_back(s.edge);

  // Corner (t,i) sits at start(walk[i]); rotating across side i lands in the tile holding
  // the opposite orientation, at the corner after that side.
  std::vector<std::vector<char>> seen(cx.tiles.size());
  for (std::size_t t = 0; t < cx.tiles.size(); ++t) seen[t].assign(cx.tiles[t].walk.size(), 0);
  for (int t = 0; t < static_cast<int>(cx.tiles.size()); ++t) {
    for (int i = 0; i < static_cast<int>(cx.tiles[t].walk.size()); ++i) {
      if (seen[t][i]) continue;
      std::vector<Slot> face;
      Slot c{t, i};
      while (!seen[c.tile][c.pos]) {
        seen[c.tile][c.pos] = 1;
        face.push_back(c);
        Side s = cx.tiles[c.tile].walk[c.pos];
        Slot o = cx.slot(s.edge, !s.forward);
        c = {o.tile, (o.pos + 1) % static_cast<int>(cx.tiles[o.tile].walk.size())};
      }
      d.face_vertex.push_back(cx.start(cx.tiles[t].walk[i]));
      d.faces.push_back(std::move(face));
    }
  }
  return d;
}

namespace {

int entry_tile(const SphereComplex& cx, DualStep s) { return cx.slot(s.edge, s.forward).tile; }
int exit_tile(const SphereComplex& cx, DualStep s) { return cx.slot(s.edge, !s.forward).tile; }

}  // namespace

bool curve_is_closed(const SphereComplex& cx, const CombinatorialCurve& c) {
  const auto& st = c.steps;
  if (st.empty()) return false;
  for (const auto& s : st)
    if (s.edge < 0 || s.edge >= static_cast<int>(cx.edges.size())) return false;
  for (std::size_t k = 0; k < st.size(); ++k)
    if (exit_tile(cx, st[k]) != entry_tile(cx, st[(k + 1) % st.size()])) return false;
  return true;
}

bool curve_is_simple(const SphereComplex& cx, const CombinatorialCurve& c) {
  if (!curve_is_closed(cx, c)) return false;
  std::set<int> tiles, edges;
  for (const auto& s : c.steps) {
    if (!tiles.insert(entry_tile(cx, s)).second) return false;
    if (!edges.insert(s.edge).second) return false;
  }
  return true;
}

CombinatorialCurve reversed(const CombinatorialCurve& c) {
  CombinatorialCurve r;
  for (auto it = c.steps.rbegin(); it != c.steps.rend(); ++it) r.steps.push_back({it->edge, !it->forward});
  return r;
}

CurveSides enclosed_vertices(const SphereComplex& cx, const CombinatorialCurve& c) {
  if (!curve_is_simple(cx, c)) fail(ErrorKind::UnsupportedInput, "curve is not a simple closed dual curve");
  const int V = static_cast<int>(cx.vertices.size());
  std::vector<char> crossed(cx.edges.size(), 0);
  for (const auto& s : c.steps) {
    const auto& e = cx.edges[s.edge];
    if (e.tail == e.head) fail(ErrorKind::UnsupportedInput, "curve crosses a loop edge");
    crossed[s.edge] = 1;
  }
  std::vector<std::vector<int>> adj(V);
  for (int e = 0; e < static_cast<int>(cx.edges.size()); ++e) {
    if (crossed[e]) continue;
    adj[cx.edges[e].tail].push_back(cx.edges[e].head);
    adj[cx.edges[e].head].push_back(cx.edges[e].tail);
  }
  // Crossing (e,+) -> (e,-) leaves the head of e on the left of the curve.
  const auto& e0 = cx.edges[c.steps[0].edge];
  int left_seed = c.steps[0].forward ? e0.head : e0.tail;
  int right_seed = c.steps[0].forward ? e0.tail : e0.head;
  auto flood = [&](int seed) {
    std::vector<char> in(V, 0);
    std::deque<int> q{seed};
    in[seed] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int w : adj[v])
        if (!in[w]) {
          in[w] = 1;
          q.push_back(w);
        }
    }
    return in;
  };
  auto L = flood(left_seed);
  auto R = flood(right_seed);
  CurveSides out;
  for (int v = 0; v < V; ++v) {
    if (L[v] == R[v]) fail(ErrorKind::Inconsistency, "curve does not separate the sphere into two sides");
    (L[v] ? out.left : out.right).push_back(v);
  }
  return out;
}

CurveSides enclosed_markings(const SphereComplex& cx, const CombinatorialCurve& c) {
  CurveSides all = enclosed_vertices(cx, c);
  CurveSides out;
  for (int v : all.left)
    if (cx.is_marked(v)) out.left.push_back(v);
  for (int v : all.right)
    if (cx.is_marked(v)) out.right.push_back(v);
  return out;
}

}  // namespace fsr
