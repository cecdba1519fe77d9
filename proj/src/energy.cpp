#include "fsr/energy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

#include "fsr/error.hpp"
#include "fsr/quotient.hpp"
#include "fsr/spine.hpp"

namespace fsr {

namespace {

constexpr double kMargin = 1e-9;

bool is_infinite(double p) { return std::isinf(p); }

void check_exponent(double p) {
  if (!(p >= 1.0)) fail(ErrorKind::UnsupportedInput, "energy exponent must be at least 1");
}

double pow_pm1(double x, double p) { return std::pow(x, p - 1.0); }

}  // namespace

void validate_map(const PLGraphMap& m) {
  const auto& D = m.domain;
  const auto& C = m.codomain;
  if (m.action.size() != D.edges.size() || m.vertex_image.size() != static_cast<std::size_t>(D.num_vertices))
    fail(ErrorKind::Validation, "map arrays do not match the domain graph");
  for (std::size_t a = 0; a < D.edges.size(); ++a) {
    const auto& act = m.action[a];
    auto [s, t] = D.edges[a];
    int fs = m.vertex_image[s], ft = m.vertex_image[t];
    if (act.onto) {
      if (act.target < 0 || act.target >= static_cast<int>(C.edges.size()))
        fail(ErrorKind::Validation, "edge image out of range");
      auto [cs, ct] = C.edges[act.target];
      if (!act.forward) std::swap(cs, ct);
      if (fs != cs || ft != ct) fail(ErrorKind::Validation, "edge image does not match its endpoints: " + D.edge_ids[a]);
      double want = C.lengths[act.target] / D.lengths[a];
      if (std::fabs(act.derivative - want) > 1e-12 * std::max(1.0, want))
        fail(ErrorKind::Validation, "recorded derivative differs from the length ratio");
    } else if (act.target != fs || fs != ft) {
      fail(ErrorKind::Validation, "collapsed edge must go to the common image of its endpoints");
    }
  }
}

std::vector<double> fill_pp(const PLGraphMap& m, double p) {
  check_exponent(p);
  if (is_infinite(p)) fail(ErrorKind::UnsupportedInput, "fill is defined for finite p");
  std::vector<double> fill(m.codomain.edges.size(), 0.0);
  for (std::size_t a = 0; a < m.action.size(); ++a) {
    const auto& act = m.action[a];
    if (!act.onto) continue;
    if (p == 1.0)
      fill[act.target] += m.domain.lengths[a];
    else
      fill[act.target] += pow_pm1(act.derivative, p);
  }
  if (p == 1.0)
    for (std::size_t e = 0; e < fill.size(); ++e) fill[e] /= m.codomain.lengths[e];
  return fill;
}

double energy_pp(const PLGraphMap& m, double p) {
  check_exponent(p);
  if (is_infinite(p)) {
    double best = 0.0;
    for (const auto& act : m.action)
      if (act.onto) best = std::max(best, act.derivative);
    return best;
  }
  auto fill = fill_pp(m, p);
  double best = 0.0;
  for (double f : fill) best = std::max(best, f);
  return std::pow(best, 1.0 / p);
}

double energy_1p(const PLGraphMap& m, double p) {
  check_exponent(p);
  if (p == 1.0) fail(ErrorKind::UnsupportedInput, "energy_1p needs p > 1");
  std::vector<double> mult(m.codomain.edges.size(), 0.0);
  for (std::size_t a = 0; a < m.action.size(); ++a)
    if (m.action[a].onto) mult[m.action[a].target] += m.domain.lengths[a];
  if (is_infinite(p)) {
    // Dual exponent 1.
    double s = 0.0;
    for (std::size_t e = 0; e < mult.size(); ++e) s += mult[e] * m.codomain.lengths[e];
    return s;
  }
  const double q = p / (p - 1.0);
  double s = 0.0;
  for (std::size_t e = 0; e < mult.size(); ++e) s += std::pow(mult[e], q) * m.codomain.lengths[e];
  return std::pow(s, 1.0 / q);
}

ConformalGraph dual_graph(const LeveledComplex& L, const std::vector<double>& base_lengths, double p) {
  ConformalGraph g;
  g.p = p;
  g.num_vertices = static_cast<int>(L.cx.tiles.size());
  const int E = static_cast<int>(L.cx.edges.size());
  for (int a = 0; a < E; ++a) {
    g.edges.push_back({L.cx.slot(a, true).tile, L.cx.slot(a, false).tile});
    g.edge_ids.push_back(L.cx.edges[a].id);
    g.lengths.push_back(base_lengths.empty() ? 1.0 : base_lengths.at(L.etype[a]));
  }
  return g;
}

PLGraphMap natural_representative(Tower& tower, int n, int m, double p, const std::vector<double>& base_lengths) {
  if (m < 0 || n < m) fail(ErrorKind::UnsupportedInput, "natural representative needs n >= m >= 0");
  const auto& Ln = tower.level(n);
  const auto& Lm = tower.level(m);
  if (!base_lengths.empty() && base_lengths.size() != tower.rule().level0.edges.size())
    fail(ErrorKind::UnsupportedInput, "one base length per level-0 edge is required");
  PLGraphMap out;
  out.domain = dual_graph(Ln, base_lengths, p);
  out.codomain = dual_graph(Lm, base_lengths, p);

  // Orientation of each level-k edge relative to its parent edge, when it has one.
  std::vector<std::vector<char>> up_sign(n + 1);
  for (int k = m + 1; k <= n; ++k) {
    const auto& Lk = tower.level(k);
    const auto& Lp = tower.level(k - 1);
    up_sign[k].assign(Lk.cx.edges.size(), 1);
    for (std::size_t E = 0; E < Lp.echild.size(); ++E)
      for (const Side& s : Lp.echild[E]) up_sign[k][s.edge] = s.forward;
  }
  auto tile_up = [&](int t) {
    for (int k = n; k > m; --k) t = tower.level(k).tparent[t];
    return t;
  };

  const int T = static_cast<int>(Ln.cx.tiles.size());
  out.vertex_image.resize(T);
  for (int t = 0; t < T; ++t) out.vertex_image[t] = tile_up(t);

  const int E = static_cast<int>(Ln.cx.edges.size());
  out.action.resize(E);
  for (int a = 0; a < E; ++a) {
    CellRef c{CellKind::Edge, a};
    bool fwd = true;
    for (int k = n; k > m; --k) {
      const auto& Lk = tower.level(k);
      if (c.kind == CellKind::Edge) {
        CellRef up = Lk.eparent[c.index];
        if (up.kind == CellKind::Edge && !up_sign[k][c.index]) fwd = !fwd;
        c = up;
      } else {
        c = {CellKind::Tile, Lk.tparent[c.index]};
      }
    }
    auto& act = out.action[a];
    if (c.kind == CellKind::Edge) {
      act.onto = true;
      act.target = c.index;
      act.forward = fwd;
      act.derivative = out.codomain.lengths[c.index] / out.domain.lengths[a];
    } else {
      act.target = c.index;
    }
  }
  return out;
}

PLGraphMap natural_representative(const SubdivisionRule& rule, int n, int m, double p,
                                  const std::vector<double>& base_lengths) {
  Tower t(rule);
  return natural_representative(t, n, m, p, base_lengths);
}

PathCount e1_exact(const SubdivisionRule& rule, int n) {
  auto g = edge_digraph(rule);
  PathCount best = 0;
  for (int e = 0; e < g.size(); ++e) best = std::max(best, path_count(g, e, n));
  return best;
}

KExpandingLength k_expanding_length(const SubdivisionRule& rule, double K) {
  if (!(K >= 1.0)) fail(ErrorKind::UnsupportedInput, "K must be at least 1");
  auto g = edge_digraph(rule);
  const int E = g.size();
  auto scc = strongly_connected(g);
  for (int e = 0; e < E; ++e)
    if (growth_class(g, e).exponential) fail(ErrorKind::UnsupportedRegime, "K-expanding lengths need polynomial growth");
  for (int c = 0; c < scc.count(); ++c)
    if (scc.members[c].size() > 1)
      fail(ErrorKind::UnsupportedRegime, "edge digraph has a cycle that is not a loop; pass to a power first");

  // Kahn's algorithm on the arcs between distinct edges, smallest id first among ties.
  std::vector<int> indeg(E, 0);
  std::vector<std::vector<int>> succ(E);
  for (const auto& a : g.arcs)
    if (a.source != a.target) {
      succ[a.source].push_back(a.target);
      ++indeg[a.target];
    }
  const auto& edges = rule.level0.edges;
  auto later = [&](int x, int y) { return edges[x].id > edges[y].id; };
  std::priority_queue<int, std::vector<int>, decltype(later)> ready(later);
  for (int e = 0; e < E; ++e)
    if (indeg[e] == 0) ready.push(e);
  KExpandingLength out;
  out.rank.assign(E, 0);
  out.lengths.assign(E, 1.0);
  while (!ready.empty()) {
    int e = ready.top();
    ready.pop();
    out.rank[e] = static_cast<int>(out.order.size());
    out.order.push_back(e);
    for (int f : succ[e])
      if (--indeg[f] == 0) ready.push(f);
  }
  for (int e = 0; e < E; ++e) out.lengths[e] = std::pow(2.0 * K, out.rank[e]);
  return out;
}

// ---------------------------------------------------------------------------
// Crochet certificate

namespace {

struct CrochetSetup {
  SubdivisionRule rule;
  int shift = 0;
  int power = 1;
  std::vector<int> rank;
  std::vector<std::pair<int, int>> dual0;  // level-0 dual edge endpoints (tiles)
  std::vector<char> recurrent, h0, f0;
  std::vector<int> onto;                   // level-1 edge -> carrier level-0 edge, or -1
  std::vector<int> type;                   // level-1 edge -> level-0 edge
  std::vector<int> rec_pre;                // level-0 edge -> its recurrent preimage, or -1
  std::vector<char> f1edge;                // level-1 edge is in F_1
  int N = 0, M = 0, L = 0;
  // Julia incidence for the retraction: per Julia vertex, (removed edge, other incidences).
  std::vector<std::pair<int, std::vector<int>>> julia;
  std::string failure;

  // Forest structure of F_0.
  std::vector<int> parent_edge;  // per level-0 tile in F_0: F_0 edge towards the root, -1 at roots
  std::vector<int> depth;        // per tile, -1 off F_0
  std::vector<int> comp_depth;   // per tile: max internal depth of its component
  std::vector<char> leaf;
  std::vector<char> single;      // tile belongs to a one-edge component
  std::vector<int> lift;         // F_0 tile -> F_1 tile
  std::vector<int> zone;         // level-1 tile -> moved level-0 tile, or -1
  std::vector<int> pulled_count; // per level-0 tile: H_1 edge ends pulled at its zone
  int components = 0;
};

// Longest-path height in an acyclic arc list; lengths (2K)^height are K-expanding for it.
std::vector<int> heights(int n, const std::vector<std::pair<int, int>>& arcs) {
  std::vector<int> indeg(n, 0), h(n, 0);
  std::vector<std::vector<int>> succ(n);
  for (auto [s, t] : arcs) succ[s].push_back(t), ++indeg[t];
  std::queue<int> q;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) q.push(v);
  int seen = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    ++seen;
    for (int w : succ[v]) {
      h[w] = std::max(h[w], h[v] + 1);
      if (--indeg[w] == 0) q.push(w);
    }
  }
  if (seen != n) fail(ErrorKind::Inconsistency, "length order is cyclic");
  return h;
}

bool loops_only(const SubdivisionRule& r, int& period) {
  auto g = edge_digraph(r);
  auto scc = strongly_connected(g);
  auto per = vertex_periods(g);
  period = 1;
  bool ok = true;
  for (int c = 0; c < scc.count(); ++c)
    if (scc.members[c].size() > 1) {
      ok = false;
      for (int v : scc.members[c])
        if (per[v] > 0) period = std::lcm(period, per[v]);
    }
  return ok;
}

CrochetSetup prepare(const SubdivisionRule& input) {
  auto g = edge_digraph(input);
  for (int e = 0; e < g.size(); ++e)
    if (growth_class(g, e).exponential) fail(ErrorKind::UnsupportedRegime, "crochet certificate needs polynomial growth");
  if (!julia_edges(input).empty())
    fail(ErrorKind::UnsupportedRegime, "rule has Julia edges; normalize it first");
  {
    auto vc = classify_vertices(input);
    for (const auto& e : input.level0.edges)
      if (!vc.fatou[e.tail] && !vc.fatou[e.head])
        fail(ErrorKind::UnsupportedRegime, "rule has adjacent Julia vertices; normalize it first");
  }

  CrochetSetup S;
  auto rp = recurrence_periods(input);
  S.shift = std::max(2 * rp.threshold, 1);
  S.rule = shift(input, S.shift);
  for (int attempt = 0;; ++attempt) {
    int period = 1;
    if (loops_only(S.rule, period)) break;
    if (attempt == 3) fail(ErrorKind::UnsupportedRegime, "could not reach a power whose edge cycles are loops");
    S.rule = power(S.rule, period);
    S.power *= period;
  }

  const auto& R = S.rule;
  const auto& L0 = R.level0;
  const auto& L1 = R.level1;
  const int E0 = static_cast<int>(L0.edges.size());
  const int E1 = static_cast<int>(L1.edges.size());
  const int T0 = static_cast<int>(L0.tiles.size());
  const int T1 = static_cast<int>(L1.tiles.size());

  auto eg = edge_digraph(R);
  std::vector<std::pair<int, int>> order_arcs;
  for (const auto& a : eg.arcs)
    if (a.source != a.target) order_arcs.push_back({a.source, a.target});
  S.rank = heights(E0, order_arcs);
  S.recurrent.assign(E0, 0);
  for (const auto& a : eg.arcs)
    if (a.source == a.target) S.recurrent[a.source] = 1;
  for (int e = 0; e < E0; ++e) S.dual0.push_back({L0.slot(e, true).tile, L0.slot(e, false).tile});

  S.onto.assign(E1, -1);
  S.type.assign(E1, -1);
  S.rec_pre.assign(E0, -1);
  std::vector<int> preimages(E0, 0);
  for (int a = 0; a < E1; ++a) {
    S.type[a] = R.map_edge[a].edge;
    if (R.carrier_edge[a].kind == CellKind::Edge) {
      int e = R.carrier_edge[a].index;
      S.onto[a] = e;
      ++preimages[e];
      if (S.type[a] == e) S.rec_pre[e] = a;
    }
  }
  for (int e = 0; e < E0; ++e) S.N = std::max(S.N, preimages[e]);
  for (const auto& t : L0.tiles) S.M = std::max(S.M, static_cast<int>(t.walk.size()));

  // Retraction data: at each Julia vertex drop the longest incident edge.
  auto vc = classify_vertices(R);
  auto corners = L0.corner_counts();
  S.h0.assign(E0, 1);
  for (int v = 0; v < static_cast<int>(L0.vertices.size()); ++v) {
    if (vc.fatou[v]) continue;
    S.L = std::max(S.L, corners[v]);
    std::vector<int> inc;
    for (int e = 0; e < E0; ++e) {
      if (L0.edges[e].tail == v) inc.push_back(e);
      if (L0.edges[e].head == v) inc.push_back(e);
    }
    if (inc.empty()) continue;
    int longest = *std::max_element(inc.begin(), inc.end(), [&](int x, int y) {
      return S.rank[x] != S.rank[y] ? S.rank[x] < S.rank[y] : L0.edges[x].id < L0.edges[y].id;
    });
    std::vector<int> others;
    for (int e : inc)
      if (e != longest) others.push_back(e), order_arcs.push_back({e, longest});
    S.h0[longest] = 0;
    S.julia.push_back({longest, others});
  }
  // The removed edge at each Julia vertex must be 2K times longer than the others there.
  S.rank = heights(E0, order_arcs);

  S.f0.assign(E0, 0);
  for (int e = 0; e < E0; ++e) S.f0[e] = S.recurrent[e] && S.h0[e];
  S.f1edge.assign(E1, 0);
  for (int e = 0; e < E0; ++e)
    if (S.f0[e]) S.f1edge[S.rec_pre[e]] = 1;

  // F_0 and F_1 must be forests, and phi must identify them.
  std::vector<int> uf(T0);
  std::iota(uf.begin(), uf.end(), 0);
  std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
  std::vector<std::vector<int>> nbr(T0);
  for (int e = 0; e < E0; ++e) {
    if (!S.f0[e]) continue;
    auto [s, t] = S.dual0[e];
    if (find(s) == find(t)) {
      S.failure = "F_1 is not tree-like: the recurrent dual edges in H_0 contain a cycle";
      return S;
    }
    uf[find(s)] = find(t);
    nbr[s].push_back(e);
    nbr[t].push_back(e);
  }
  S.lift.assign(T0, -1);
  const auto pat = analyze_pattern(R);
  for (int e = 0; e < E0; ++e) {
    if (!S.f0[e]) continue;
    int a = S.rec_pre[e];
    auto [s, t] = S.dual0[e];
    bool same = false;
    for (const Side& sd : pat.edge[e].path)
      if (sd.edge == a) same = sd.forward;
    int ls = L1.slot(a, same).tile, lt = L1.slot(a, !same).tile;
    for (auto [u, x] : {std::pair{s, ls}, std::pair{t, lt}}) {
      if (S.lift[u] >= 0 && S.lift[u] != x) {
        S.failure = "F_1 does not map homeomorphically onto F_0";
        return S;
      }
      S.lift[u] = x;
    }
  }

  // Root each component at an internal vertex of least eccentricity.
  S.parent_edge.assign(T0, -1);
  S.depth.assign(T0, -1);
  S.comp_depth.assign(T0, 0);
  S.leaf.assign(T0, 0);
  S.single.assign(T0, 0);
  auto other_end = [&](int e, int u) { return S.dual0[e].first == u ? S.dual0[e].second : S.dual0[e].first; };
  auto bfs = [&](int root, std::vector<int>& dist, std::vector<int>& par, std::vector<int>& seen) {
    std::queue<int> q;
    q.push(root);
    dist[root] = 0;
    seen.push_back(root);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int e : nbr[u]) {
        int w = other_end(e, u);
        if (dist[w] >= 0) continue;
        dist[w] = dist[u] + 1;
        par[w] = e;
        seen.push_back(w);
        q.push(w);
      }
    }
  };
  std::vector<char> done(T0, 0);
  for (int start = 0; start < T0; ++start) {
    if (nbr[start].empty() || done[start]) continue;
    ++S.components;
    std::vector<int> dist(T0, -1), par(T0, -1), members;
    bfs(start, dist, par, members);
    std::sort(members.begin(), members.end());
    for (int u : members) {
      done[u] = 1;
      S.leaf[u] = nbr[u].size() == 1;
    }
    if (members.size() == 2) {
      for (int u : members) S.single[u] = 1, S.depth[u] = 1;
      S.parent_edge[members[0]] = S.parent_edge[members[1]] = nbr[members[0]][0];
      continue;
    }
    int root = -1, best = std::numeric_limits<int>::max();
    for (int u : members) {
      if (S.leaf[u]) continue;
      std::vector<int> d(T0, -1), p(T0, -1), seen;
      bfs(u, d, p, seen);
      int ecc = 0;
      for (int w : seen) ecc = std::max(ecc, d[w]);
      if (ecc < best) best = ecc, root = u;
    }
    std::vector<int> d(T0, -1), p(T0, -1), seen;
    bfs(root, d, p, seen);
    int kmax = 0;
    for (int u : members) {
      S.depth[u] = d[u];
      S.parent_edge[u] = p[u];
      if (!S.leaf[u]) kmax = std::max(kmax, d[u]);
    }
    for (int u : members) S.comp_depth[u] = kmax;
  }

  // Zones: the component of phi^{-1}(u) in H_1 through the lift of u, for every moved u.
  S.zone.assign(T1, -1);
  S.pulled_count.assign(T0, 0);
  std::vector<std::vector<std::pair<int, int>>> inner(T1);  // collapsed H_1 edges
  for (int a = 0; a < E1; ++a) {
    if (S.onto[a] >= 0 || !S.h0[S.type[a]]) continue;
    int x = L1.slot(a, true).tile, y = L1.slot(a, false).tile;
    inner[x].push_back({y, a});
    inner[y].push_back({x, a});
  }
  for (int u = 0; u < T0; ++u) {
    if (S.depth[u] <= 0) continue;
    std::queue<int> q;
    q.push(S.lift[u]);
    S.zone[S.lift[u]] = u;
    while (!q.empty()) {
      int x = q.front();
      q.pop();
      for (auto [y, a] : inner[x])
        if (S.zone[y] < 0) S.zone[y] = u, q.push(y);
    }
  }
  for (int a = 0; a < E1; ++a) {
    if (S.onto[a] < 0 || !S.h0[S.type[a]]) continue;
    for (bool side : {true, false}) {
      int z = S.zone[L1.slot(a, side).tile];
      if (z >= 0) ++S.pulled_count[z];
    }
  }
  for (int u = 0; u < T0; ++u)
    if (S.depth[u] > 0) --S.pulled_count[u];  // the F_1 edge towards the root is not pulled at u
  return S;
}

struct Moves {
  std::vector<double> delta, delta_pull;  // per level-0 tile
};

Moves schedule(const CrochetSetup& S, double eps, double q) {
  const int T0 = static_cast<int>(S.depth.size());
  Moves mv{std::vector<double>(T0, 0.0), std::vector<double>(T0, 0.0)};
  for (int u = 0; u < T0; ++u) {
    if (S.depth[u] <= 0) continue;
    if (S.leaf[u]) {
      mv.delta[u] = eps;
      mv.delta_pull[u] = eps / q;
    } else {
      int e = 2 * (S.comp_depth[u] - S.depth[u]);
      mv.delta[u] = eps * std::pow(q, e + 2);
      mv.delta_pull[u] = eps * std::pow(q, e + 1);
    }
  }
  return mv;
}

// Evaluates the deformation for one parameter choice; returns false if inadmissible.
bool evaluate(const CrochetSetup& S, double p, const CrochetParams& prm, CrochetCertificate& out) {
  const auto& L1 = S.rule.level1;
  const int E0 = static_cast<int>(S.dual0.size());
  const int E1 = static_cast<int>(S.onto.size());
  const double K = prm.K;
  const double q = prm.eps / prm.eps1;
  std::vector<double> alpha(E0);
  for (int e = 0; e < E0; ++e) alpha[e] = std::pow(2.0 * K, S.rank[e]);
  for (int e = 0; e < E0; ++e)
    if (!(4.0 * prm.eps1 < K * alpha[e])) return false;
  Moves mv = schedule(S, prm.eps, q);

  std::vector<double> extra(E0, 0.0);  // fill from non-F_1 preimages
  for (int a = 0; a < E1; ++a) {
    int e = S.onto[a];
    if (e < 0 || !S.h0[S.type[a]] || S.f1edge[a]) continue;
    double len = alpha[S.type[a]];
    for (bool side : {true, false}) {
      int z = S.zone[L1.slot(a, side).tile];
      if (z >= 0) len -= mv.delta_pull[z];
    }
    if (!(len > 0.0)) return false;
    extra[e] += pow_pm1(alpha[e] / len, p);
  }

  double worst = 0.0, tree_worst = 0.0;
  for (int e = 0; e < E0; ++e) {
    double tree = 0.0;
    if (S.f0[e]) {
      auto [s, t] = S.dual0[e];
      const double ell = alpha[e];
      double shrink;  // 1 - derivative of the F_1 edge over e
      if (S.single[s]) {
        if (!(ell > 2.0 * prm.eps)) return false;
        shrink = 2.0 * prm.eps / ell;
        tree = std::max(S.pulled_count[s], S.pulled_count[t]) * pow_pm1(q, p);
      } else {
        int w = S.parent_edge[s] == e ? s : t;
        int u = w == s ? t : s;
        if (!(ell > mv.delta[w]) || !(ell > mv.delta_pull[u])) return false;
        shrink = (mv.delta[w] - mv.delta_pull[u]) / (ell - mv.delta_pull[u]);
        if (!(shrink > 0.0)) return false;
        tree = S.pulled_count[w] * pow_pm1(mv.delta[w] / mv.delta_pull[w], p);
      }
      tree = std::max(tree, std::exp((p - 1.0) * std::log1p(-shrink)));
      tree_worst = std::max(tree_worst, tree);
    }
    worst = std::max(worst, tree + extra[e]);
  }

  out.params = prm;
  out.psi_bound = std::pow(worst, 1.0 / p);
  out.eps2 = 1.0 - tree_worst;

  double rho = 1.0;
  if (!S.julia.empty()) {
    std::vector<double> fill(E0, 1.0);
    for (const auto& [longest, others] : S.julia) {
      double span = 0.0;
      for (int e : others) span += alpha[e];
      double d = span / alpha[longest];
      for (int e : others) fill[e] += pow_pm1(d, p);
    }
    double exact = 0.0;
    for (double f : fill) exact = std::max(exact, f);
    double closed = std::pow(pow_pm1(S.L / K, p) + 1.0, 1.0 / p);
    rho = std::max(std::pow(exact, 1.0 / p), closed);
  }
  out.rho_bound = rho;
  out.bound = out.psi_bound * rho;
  out.certified = out.bound < 1.0 - kMargin;

  const double tail = S.N / pow_pm1(K, p);
  out.case1 = S.M * S.N * pow_pm1(q, p) + tail;
  out.case2 = 1.0 - out.eps2 + tail;
  out.case3 = tail;
  out.case4 = S.N / pow_pm1(K / 2.0, p);
  return true;
}

}  // namespace

CrochetCertificate crochet_certificate(const SubdivisionRule& rule, double p, const std::optional<CrochetParams>& params) {
  if (!(p > 1.0) || is_infinite(p)) fail(ErrorKind::UnsupportedInput, "crochet certificate needs finite p > 1");
  CrochetSetup S = prepare(rule);
  CrochetCertificate base;
  base.p = p;
  base.shift = S.shift;
  base.power = S.power;
  base.N = S.N;
  base.M = S.M;
  base.L = S.L;
  base.forest_components = S.components;
  if (!S.failure.empty()) {
    base.reason = S.failure;
    return base;
  }

  std::vector<CrochetParams> grid;
  if (params) {
    grid.push_back(*params);
  } else {
    for (double K : {4.0, 16.0, 64.0, 256.0, 1024.0})
      for (double q : {1.0 / 4, 1.0 / 16, 1.0 / 64}) grid.push_back({K, q / 8.0, 1.0 / 8.0});
  }
  std::optional<CrochetCertificate> best;
  for (const auto& prm : grid) {
    CrochetCertificate c = base;
    if (!evaluate(S, p, prm, c)) continue;
    if (!best || c.bound < best->bound) best = c;
  }
  if (!best) {
    base.reason = "no admissible deformation parameters";
    return base;
  }
  if (!best->certified) best->reason = "search exhausted without a bound below one";
  return *best;
}

// ---------------------------------------------------------------------------
// Asymptotic bounds

const std::vector<double>& default_energy_samples() {
  static const std::vector<double> ps{1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0};
  return ps;
}

EnergyBound asymptotic_bounds(const SubdivisionRule& rule, double p, int n_max, const std::vector<MulticurveSpec>& multicurves) {
  check_exponent(p);
  if (is_infinite(p)) fail(ErrorKind::UnsupportedInput, "asymptotic bounds are sampled at finite p");
  if (n_max < 1) fail(ErrorKind::UnsupportedInput, "n_max must be positive");
  EnergyBound out;
  out.p = p;

  auto g = edge_digraph(rule);
  bool polynomial = true;
  for (int e = 0; e < g.size(); ++e) polynomial = polynomial && !growth_class(g, e).exponential;

  Tower tower(rule);
  for (int n = 1; n <= n_max; ++n) {
    double a = energy_pp(natural_representative(tower, n, 0, p), p);
    out.level_values.push_back(a);
    double root = std::pow(a, 1.0 / n);
    if (!out.upper || root < *out.upper) {
      out.upper = root;
      out.upper_source = "natural representative at level " + std::to_string(n);
    }
  }

  if (p == 1.0 && polynomial) {
    out.upper = 1.0;
    out.upper_source = "polynomial growth";
  }
  if (p > 1.0 && polynomial && is_levy_free(rule).levy_free) {
    auto cert = crochet_certificate(normalize_for_energy(rule), p);
    if (cert.certified) {
      double root = std::pow(cert.bound, 1.0 / cert.power);
      if (root < *out.upper) {
        out.upper = root;
        out.upper_source = "crochet certificate";
      }
    }
    out.certificate = cert;
  }

  if (p == 1.0) {
    out.lower = 1.0;
    out.lower_source = "p = 1";
  }
  for (const auto& mc : multicurves) {
    double l = std::pow(lambda_p(mc, p).value, 1.0 / p);
    if (!out.lower || l > *out.lower) {
      out.lower = l;
      out.lower_source = "multicurve " + mc.name;
    }
  }
  if (out.lower && *out.lower > *out.upper + kMargin)
    fail(ErrorKind::Inconsistency, "energy lower bound exceeds the upper bound at p = " + std::to_string(p));
  return out;
}

DimensionBracket bracket_dimension(const SubdivisionRule& rule, int n_max, const std::vector<MulticurveSpec>& multicurves,
                                   const std::vector<double>& ps) {
  std::vector<double> sorted = ps;
  std::sort(sorted.begin(), sorted.end());
  DimensionBracket out;
  std::optional<double> envelope;
  for (double p : sorted) {
    auto b = asymptotic_bounds(rule, p, n_max, multicurves);
    if (envelope && *envelope < *b.upper) {
      b.upper = envelope;
      b.upper_source = "monotone in p";
    }
    envelope = b.upper;
    if (b.lower && *b.lower >= 1.0) out.lower = std::max(out.lower, p);
    if (!out.upper && *b.upper < 1.0 - kMargin) out.upper = p;
    out.bounds.push_back(std::move(b));
  }
  for (const auto& mc : multicurves) {
    try {
      out.lower = std::max(out.lower, critical_exponent(mc).value);
    } catch (const FsrError&) {
      // Levy or nilpotent patterns have no finite exponent.
    }
  }
  if (out.upper && out.lower > *out.upper + kMargin)
    fail(ErrorKind::Inconsistency, "dimension lower bound exceeds the certified upper bound");
  return out;
}

}  // namespace fsr
