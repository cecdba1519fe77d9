#include "fsr/dynamics_digraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>

#include "fsr/error.hpp"

namespace fsr {

int DynDigraph::add_vertex(std::string label) {
  vertices.push_back(std::move(label));
  return size() - 1;
}

void DynDigraph::add_arc(int s, int t, std::string tag) {
  if (s < 0 || t < 0 || s >= size() || t >= size()) fail(ErrorKind::Inconsistency, "arc references a missing vertex");
  arcs.push_back({s, t, std::move(tag)});
}

std::vector<std::vector<int>> DynDigraph::successors() const {
  std::vector<std::vector<int>> out(vertices.size());
  for (const auto& a : arcs) out[a.source].push_back(a.target);
  return out;
}

std::string to_string(const GrowthClass& g) {
  if (g.exponential) return "exponential";
  return "polynomial(" + std::to_string(g.degree) + ")";
}

SccDecomposition strongly_connected(const DynDigraph& g) {
  const int n = g.size();
  auto succ = g.successors();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> found;
  int counter = 0;
  // Iterative Tarjan; frames hold (vertex, next successor position).
  std::vector<std::pair<int, std::size_t>> frames;
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < succ[v].size()) {
        int w = succ[v][pos++];
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<int> members;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          members.push_back(w);
        } while (w != v);
        std::sort(members.begin(), members.end());
        found.push_back(std::move(members));
      }
      int done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
    }
  }
  // Tarjan emits sinks first; reverse for a topological order.
  std::reverse(found.begin(), found.end());
  SccDecomposition d;
  d.members = std::move(found);
  for (int c = 0; c < d.count(); ++c)
    for (int v : d.members[c]) comp[v] = c;
  d.component = comp;
  d.internal_arcs.assign(d.count(), 0);
  for (const auto& a : g.arcs)
    if (comp[a.source] == comp[a.target]) ++d.internal_arcs[comp[a.source]];
  d.cyclic.resize(d.count());
  for (int c = 0; c < d.count(); ++c) d.cyclic[c] = d.internal_arcs[c] > 0;
  return d;
}

std::vector<std::vector<char>> reachability(const DynDigraph& g) {
  const int n = g.size();
  auto succ = g.successors();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int s = 0; s < n; ++s) {
    std::vector<int> todo{s};
    reach[s][s] = 1;
    while (!todo.empty()) {
      int v = todo.back();
      todo.pop_back();
      for (int w : succ[v])
        if (!reach[s][w]) {
          reach[s][w] = 1;
          todo.push_back(w);
        }
    }
  }
  return reach;
}

std::vector<char> recurrent_vertices(const DynDigraph& g) {
  auto d = strongly_connected(g);
  std::vector<char> out(g.size());
  for (int v = 0; v < g.size(); ++v) out[v] = d.cyclic[d.component[v]];
  return out;
}

std::vector<int> vertex_periods(const DynDigraph& g) {
  auto d = strongly_connected(g);
  auto succ = g.successors();
  std::vector<int> out(g.size(), 0);
  std::vector<int> depth(g.size(), -1);
  for (int c = 0; c < d.count(); ++c) {
    if (!d.cyclic[c]) continue;
    const int root = d.members[c][0];
    std::deque<int> q{root};
    depth[root] = 0;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int w : succ[v])
        if (d.component[w] == c && depth[w] < 0) {
          depth[w] = depth[v] + 1;
          q.push_back(w);
        }
    }
    int p = 0;
    for (const auto& a : g.arcs)
      if (d.component[a.source] == c && d.component[a.target] == c)
        p = std::gcd(p, std::abs(depth[a.source] + 1 - depth[a.target]));
    for (int v : d.members[c]) out[v] = p;
  }
  return out;
}

GrowthClass growth_class(const DynDigraph& g, int v) {
  auto d = strongly_connected(g);
  const int C = d.count();
  std::vector<std::vector<int>> csucc(C);
  for (const auto& a : g.arcs) {
    int x = d.component[a.source], y = d.component[a.target];
    if (x != y) csucc[x].push_back(y);
  }
  // Components are topologically sorted, so successors have larger ids.
  std::vector<int> chain(C, 0);
  std::vector<char> bicycle(C, 0);
  for (int c = C - 1; c >= 0; --c) {
    int best = 0;
    bool exp = d.cyclic[c] && d.internal_arcs[c] > static_cast<int>(d.members[c].size());
    for (int y : csucc[c]) {
      best = std::max(best, chain[y]);
      exp = exp || bicycle[y];
    }
    chain[c] = best + (d.cyclic[c] ? 1 : 0);
    bicycle[c] = exp;
  }
  int c = d.component[v];
  GrowthClass out;
  out.exponential = bicycle[c];
  out.degree = out.exponential ? -1 : chain[c] - 1;
  return out;
}

PathCount path_count(const DynDigraph& g, int v, int n) {
  std::vector<PathCount> cur(g.size(), 1), next(g.size());
  for (int k = 0; k < n; ++k) {
    std::fill(next.begin(), next.end(), 0);
    for (const auto& a : g.arcs) next[a.source] += cur[a.target];
    cur.swap(next);
  }
  return cur[v];
}

std::string to_string(PathCount c) {
  if (c == 0) return "0";
  std::string s;
  while (c > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(c % 10)));
    c /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::vector<int> ideal_closure(const DynDigraph& g, const std::vector<int>& X) {
  auto succ = g.successors();
  std::vector<char> in(g.size(), 0);
  std::vector<int> todo;
  for (int x : X)
    if (!in[x]) {
      in[x] = 1;
      todo.push_back(x);
    }
  while (!todo.empty()) {
    int v = todo.back();
    todo.pop_back();
    for (int w : succ[v])
      if (!in[w]) {
        in[w] = 1;
        todo.push_back(w);
      }
  }
  std::vector<int> out;
  for (int v = 0; v < g.size(); ++v)
    if (in[v]) out.push_back(v);
  return out;
}

std::vector<int> radical_closure(const DynDigraph& g, const std::vector<int>& X) {
  std::vector<int> cur = ideal_closure(g, X);
  auto succ = g.successors();
  while (true) {
    std::vector<char> in(g.size(), 0);
    for (int v : cur) in[v] = 1;
    // Outside the current set, a vertex escapes iff it reaches a cycle avoiding the set.
    DynDigraph rest;
    rest.vertices = g.vertices;
    for (const auto& a : g.arcs)
      if (!in[a.source] && !in[a.target]) rest.arcs.push_back(a);
    auto d = strongly_connected(rest);
    std::vector<char> escapes(g.size(), 0);
    auto rsucc = rest.successors();
    std::vector<char> comp_escapes(d.count(), 0);
    for (int c = d.count() - 1; c >= 0; --c) {
      bool e = d.cyclic[c] && !in[d.members[c][0]];
      for (int v : d.members[c])
        for (int w : rsucc[v])
          if (d.component[w] != c) e = e || comp_escapes[d.component[w]];
      comp_escapes[c] = e;
    }
    std::vector<int> next;
    for (int v = 0; v < g.size(); ++v) {
      escapes[v] = !in[v] && comp_escapes[d.component[v]];
      if (!escapes[v]) next.push_back(v);
    }
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

namespace {

// Spectral radius of an irreducible block via power iteration on B = A + I.
SpectralEstimate irreducible_radius(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  SpectralEstimate est;
  // A simple cycle has radius equal to the geometric mean of its weights.
  bool cycle = true;
  double logprod = 0.0;
  for (int i = 0; i < n && cycle; ++i) {
    int nz = 0;
    for (int j = 0; j < n; ++j)
      if (a[i][j] > 0) {
        ++nz;
        logprod += std::log(a[i][j]);
      }
    cycle = nz == 1;
  }
  if (cycle) {
    est.value = est.lower = est.upper = std::exp(logprod / n);
    return est;
  }
  std::vector<double> x(n, 1.0), y(n);
  double lo = 0, hi = 0;
  for (int it = 1; it <= 100000; ++it) {
    for (int i = 0; i < n; ++i) {
      double s = x[i];
      for (int j = 0; j < n; ++j) s += a[i][j] * x[j];
      y[i] = s;
    }
    lo = INFINITY;
    hi = 0;
    double norm = 0;
    for (int i = 0; i < n; ++i) {
      double r = y[i] / x[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      norm = std::max(norm, y[i]);
    }
    for (int i = 0; i < n; ++i) x[i] = y[i] / norm;
    est.iterations = it;
    if (hi - lo <= 1e-12 * hi) break;
  }
  est.lower = lo - 1.0;
  est.upper = hi - 1.0;
  est.value = 0.5 * (lo + hi) - 1.0;
  return est;
}

}  // namespace

SpectralEstimate spectral_radius(const std::vector<std::vector<double>>& m) {
  const int n = static_cast<int>(m.size());
  DynDigraph g;
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(m[i].size()) != n) fail(ErrorKind::Inconsistency, "matrix is not square");
    g.add_vertex({});
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (m[i][j] < 0 || !std::isfinite(m[i][j])) fail(ErrorKind::Inconsistency, "matrix has a negative entry");
      if (m[i][j] > 0) g.arcs.push_back({i, j, {}});
    }
  auto d = strongly_connected(g);
  SpectralEstimate best;
  for (int c = 0; c < d.count(); ++c) {
    if (!d.cyclic[c]) continue;
    const auto& mem = d.members[c];
    std::vector<std::vector<double>> block(mem.size(), std::vector<double>(mem.size()));
    for (std::size_t i = 0; i < mem.size(); ++i)
      for (std::size_t j = 0; j < mem.size(); ++j) block[i][j] = m[mem[i]][mem[j]];
    auto e = irreducible_radius(block);
    best.lower = std::max(best.lower, e.lower);
    best.upper = std::max(best.upper, e.upper);
    if (e.value > best.value) best.value = e.value;
    best.iterations = std::max(best.iterations, e.iterations);
  }
  return best;
}

std::vector<std::vector<double>> adjacency_matrix(const DynDigraph& g) {
  std::vector<std::vector<double>> m(g.size(), std::vector<double>(g.size(), 0.0));
  for (const auto& a : g.arcs) m[a.source][a.target] += 1.0;
  return m;
}

SpectralEstimate spectral_radius_from(const DynDigraph& g, int v) {
  auto reach = reachability(g);
  std::vector<int> keep;
  std::vector<int> at(g.size(), -1);
  for (int w = 0; w < g.size(); ++w)
    if (reach[v][w]) {
      at[w] = static_cast<int>(keep.size());
      keep.push_back(w);
    }
  std::vector<std::vector<double>> m(keep.size(), std::vector<double>(keep.size(), 0.0));
  for (const auto& a : g.arcs)
    if (at[a.source] >= 0 && at[a.target] >= 0) m[at[a.source]][at[a.target]] += 1.0;
  return spectral_radius(m);
}

Band make_band(int tile, int a, int b) { return {tile, std::min(a, b), std::max(a, b)}; }

std::vector<Band> all_bands(const SphereComplex& cx) {
  std::vector<Band> out;
  for (int t = 0; t < static_cast<int>(cx.tiles.size()); ++t) {
    const int m = static_cast<int>(cx.tiles[t].walk.size());
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) out.push_back({t, i, j});
  }
  return out;
}

std::string band_label(const SphereComplex& cx, const Band& b) {
  const auto& w = cx.tiles[b.tile].walk;
  return "(" + cx.tiles[b.tile].id + ";" + cx.edges[w[b.i].edge].id + "@" + std::to_string(b.i) + "," +
         cx.edges[w[b.j].edge].id + "@" + std::to_string(b.j) + ")";
}

DynDigraph edge_digraph(const SubdivisionRule& r) {
  DynDigraph g;
  for (const auto& e : r.level0.edges) g.add_vertex("[" + e.id + "]");
  for (int a = 0; a < static_cast<int>(r.level1.edges.size()); ++a)
    if (r.carrier_edge[a].kind == CellKind::Edge)
      g.add_arc(r.carrier_edge[a].index, r.map_edge[a].edge, r.level1.edges[a].id);
  return g;
}

DynDigraph tile_digraph(const SubdivisionRule& r) {
  DynDigraph g;
  for (const auto& t : r.level0.tiles) g.add_vertex("[" + t.id + "]");
  for (int P = 0; P < static_cast<int>(r.level1.tiles.size()); ++P)
    g.add_arc(r.carrier_tile[P], r.map_tile[P].tile, r.level1.tiles[P].id);
  return g;
}

Band band_carrier(const LeveledComplex& L, const Band& b) {
  int ri = L.troot[b.tile][b.i], rj = L.troot[b.tile][b.j];
  if (ri < 0 || rj < 0 || ri == rj) return {};
  return make_band(L.tcarrier0[b.tile], ri, rj);
}

Band band_type(const LeveledComplex& L, const SphereComplex& level0, const Band& b) {
  const int t = L.ttype[b.tile];
  const int m = static_cast<int>(level0.tiles[t].walk.size());
  const int a = ((L.talign[b.tile] % m) + m) % m;
  return make_band(t, (b.i + a) % m, (b.j + a) % m);
}

std::vector<Band> level_bands(const LeveledComplex& L) {
  std::vector<Band> out;
  for (int T = 0; T < static_cast<int>(L.cx.tiles.size()); ++T) {
    const auto& w = L.cx.tiles[T].walk;
    const int m = static_cast<int>(w.size());
    for (int i = 0; i < m; ++i) {
      if (L.ecarrier0[w[i].edge].kind != CellKind::Edge) continue;
      for (int j = i + 1; j < m; ++j)
        if (L.ecarrier0[w[j].edge].kind == CellKind::Edge) out.push_back({T, i, j});
    }
  }
  return out;
}

DynDigraph band_digraph(const SubdivisionRule& r) {
  DynDigraph g;
  auto bands = all_bands(r.level0);
  for (const auto& b : bands) g.add_vertex("[" + band_label(r.level0, b) + "]");
  auto index_of = [&](const Band& b) {
    return static_cast<int>(std::lower_bound(bands.begin(), bands.end(), b) - bands.begin());
  };
  Tower t(r);
  const auto& L1 = t.level(1);
  for (const auto& b : level_bands(L1)) {
    Band c = band_carrier(L1, b);
    if (c.tile < 0) continue;
    g.add_arc(index_of(c), index_of(band_type(L1, r.level0, b)), band_label(L1.cx, b));
  }
  return g;
}

double edge_growth_rate(const SubdivisionRule& rule, int e) {
  auto g = edge_digraph(rule);
  if (!growth_class(g, e).exponential) return 1.0;
  return spectral_radius_from(g, e).value;
}

}  // namespace fsr
