#include "fsr/multicurve.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fsr/error.hpp"

namespace fsr {

int MulticurveSpec::index(const std::string& curve) const {
  for (int i = 0; i < static_cast<int>(curves.size()); ++i)
    if (curves[i] == curve) return i;
  return -1;
}

void validate_multicurve(const MulticurveSpec& mc) {
  std::set<std::string> seen;
  for (const auto& c : mc.curves) {
    if (c.empty() || c == kInessential) fail(ErrorKind::Validation, "multicurve: reserved or empty curve id");
    if (!seen.insert(c).second) fail(ErrorKind::Validation, "multicurve: duplicate curve " + c);
  }
  std::vector<int> sum(mc.curves.size(), 0);
  for (const auto& l : mc.lifts) {
    int i = mc.index(l.image);
    if (i < 0) fail(ErrorKind::Validation, "multicurve: unknown image curve " + l.image);
    if (l.preimage != kInessential && mc.index(l.preimage) < 0)
      fail(ErrorKind::Validation, "multicurve: unknown preimage curve " + l.preimage);
    if (l.degree < 1) fail(ErrorKind::Validation, "multicurve: lift degree must be positive");
    sum[i] += l.degree;
  }
  if (mc.map_degree > 0)
    for (std::size_t i = 0; i < sum.size(); ++i)
      if (sum[i] != mc.map_degree)
        fail(ErrorKind::Validation, "multicurve: lift degrees of " + mc.curves[i] + " sum to " + std::to_string(sum[i]) +
                                        ", not " + std::to_string(mc.map_degree));
}

std::vector<std::vector<double>> p_matrix(const MulticurveSpec& mc, double p) {
  if (!(p >= 1.0)) fail(ErrorKind::UnsupportedInput, "p must be at least 1");
  const int n = static_cast<int>(mc.curves.size());
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (const auto& l : mc.lifts) {
    if (l.preimage == kInessential) continue;
    const int i = mc.index(l.image), j = mc.index(l.preimage);
    if (std::isinf(p))
      m[j][i] += l.degree == 1 ? 1.0 : 0.0;
    else
      m[j][i] += std::pow(static_cast<double>(l.degree), 1.0 - p);
  }
  return m;
}

std::vector<std::vector<long long>> integer_matrix(const MulticurveSpec& mc, bool infinite) {
  const int n = static_cast<int>(mc.curves.size());
  std::vector<std::vector<long long>> m(n, std::vector<long long>(n, 0));
  for (const auto& l : mc.lifts) {
    if (l.preimage == kInessential || (infinite && l.degree != 1)) continue;
    ++m[mc.index(l.preimage)][mc.index(l.image)];
  }
  return m;
}

namespace {

DynDigraph pattern_digraph(const MulticurveSpec& mc, bool infinite) {
  DynDigraph g;
  for (const auto& c : mc.curves) g.add_vertex(c);
  auto m = integer_matrix(mc, infinite);
  for (std::size_t j = 0; j < m.size(); ++j)
    for (std::size_t i = 0; i < m.size(); ++i)
      for (long long k = 0; k < m[j][i]; ++k) g.add_arc(static_cast<int>(i), static_cast<int>(j));
  return g;
}

bool is_exact_p(double p) { return p == 1.0 || std::isinf(p); }

}  // namespace

std::vector<std::vector<int>> irreducible_blocks(const MulticurveSpec& mc) {
  validate_multicurve(mc);
  auto d = strongly_connected(pattern_digraph(mc, false));
  std::vector<std::vector<int>> out;
  for (int c = 0; c < d.count(); ++c)
    if (d.cyclic[c]) {
      auto b = d.members[c];
      std::sort(b.begin(), b.end());
      out.push_back(b);
    }
  std::sort(out.begin(), out.end());
  return out;
}

SpectralEstimate block_lambda(const MulticurveSpec& mc, const std::vector<int>& block, double p) {
  const int k = static_cast<int>(block.size());
  if (is_exact_p(p)) {
    auto im = integer_matrix(mc, std::isinf(p));
    // Constant row sums give the Perron root exactly.
    std::set<long long> rows;
    for (int a = 0; a < k; ++a) {
      long long s = 0;
      for (int b = 0; b < k; ++b) s += im[block[a]][block[b]];
      rows.insert(s);
    }
    if (rows.size() == 1) {
      double r = static_cast<double>(*rows.begin());
      return {r, r, r, 0};
    }
  }
  auto m = p_matrix(mc, p);
  std::vector<std::vector<double>> sub(k, std::vector<double>(k));
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) sub[a][b] = m[block[a]][block[b]];
  return spectral_radius(sub);
}

SpectralEstimate lambda_p(const MulticurveSpec& mc, double p) {
  SpectralEstimate best{0.0, 0.0, 0.0, 0};
  for (const auto& b : irreducible_blocks(mc)) {
    auto s = block_lambda(mc, b, p);
    best.value = std::max(best.value, s.value);
    best.lower = std::max(best.lower, s.lower);
    best.upper = std::max(best.upper, s.upper);
    best.iterations = std::max(best.iterations, s.iterations);
  }
  return best;
}

namespace {

// lambda_infinity >= 1 exactly when some cycle uses degree-one lifts only.
bool has_levy_cycle(const MulticurveSpec& mc) {
  auto d = strongly_connected(pattern_digraph(mc, true));
  for (int c = 0; c < d.count(); ++c)
    if (d.cyclic[c]) return true;
  return false;
}

// lambda_1 = 1 exactly when every irreducible block is a single cycle.
bool lambda1_exceeds_one(const MulticurveSpec& mc) {
  auto im = integer_matrix(mc, false);
  for (const auto& b : irreducible_blocks(mc)) {
    long long internal = 0;
    for (int x : b)
      for (int y : b) internal += im[x][y];
    if (internal > static_cast<long long>(b.size())) return true;
  }
  return false;
}

}  // namespace

CriticalExponent critical_exponent(const MulticurveSpec& mc) {
  if (irreducible_blocks(mc).empty())
    fail(ErrorKind::UnsupportedRegime, "critical exponent undefined: lift pattern is nilpotent");
  if (has_levy_cycle(mc)) fail(ErrorKind::UnsupportedRegime, "critical exponent undefined: multicurve has a Levy cycle");
  CriticalExponent q;
  if (!lambda1_exceeds_one(mc)) {
    q.exact = true;
    return q;
  }
  double lo = 1.0, hi = 2.0;
  while (lambda_p(mc, hi).value >= 1.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e18) fail(ErrorKind::Resource, "critical exponent bracket diverged");
  }
  while (hi - lo > 1e-10 * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    const auto s = lambda_p(mc, mid);
    if (std::fabs(s.value - 1.0) <= 1e-14) {
      lo = hi = mid;
      break;
    }
    (s.value > 1.0 ? lo : hi) = mid;
  }
  q.lower = lo;
  q.upper = hi;
  q.value = 0.5 * (lo + hi);
  return q;
}

const std::vector<double>& default_multicurve_samples() {
  static const std::vector<double> ps{1.0, 1.5, 2.0, 4.0, 8.0, kInfiniteP};
  return ps;
}

SpectralProfile classify_multicurve(const MulticurveSpec& mc, const std::vector<double>& ps) {
  validate_multicurve(mc);
  SpectralProfile prof;
  for (double p : ps) prof.samples.push_back({p, lambda_p(mc, p)});
  auto blocks = irreducible_blocks(mc);
  for (const auto& b : blocks) {
    std::vector<std::string> ids;
    for (int i : b) ids.push_back(mc.curves[i]);
    prof.blocks.push_back(ids);
  }
  prof.nilpotent = blocks.empty();
  prof.levy = has_levy_cycle(mc);
  prof.cantor = lambda1_exceeds_one(mc) && !prof.levy;
  prof.thurston_obstruction = prof.levy || lambda_p(mc, 2.0).value >= 1.0;
  if (!prof.levy && !prof.nilpotent) prof.exponent = critical_exponent(mc);
  return prof;
}

namespace {

using Partition = std::set<std::set<int>>;

Partition marked_partition(const SphereComplex& cx, const CombinatorialCurve& c, const std::vector<int>& to0) {
  auto sides = enclosed_markings(cx, c);
  std::set<int> a, b;
  for (int v : sides.left) a.insert(to0[v]);
  for (int v : sides.right) b.insert(to0[v]);
  return {a, b};
}

std::vector<DualStep> image_steps(const SubdivisionRule& r, const CombinatorialCurve& c) {
  std::vector<DualStep> out;
  for (auto s : c.steps) {
    Side m = r.map_edge[s.edge];
    out.push_back({m.edge, s.forward == m.forward});
  }
  return out;
}

bool is_cyclic_repeat(const std::vector<DualStep>& seq, const std::vector<DualStep>& unit, int times) {
  if (unit.empty() || seq.size() != unit.size() * static_cast<std::size_t>(times)) return false;
  const std::size_t n = seq.size();
  for (std::size_t shift = 0; shift < n; ++shift) {
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) ok = seq[(k + shift) % n] == unit[k % unit.size()];
    if (ok) return true;
  }
  return false;
}

}  // namespace

LiftConsistency check_lift_partitions(const SubdivisionRule& rule, const std::map<std::string, CombinatorialCurve>& curves,
                                      const std::vector<DrawnLift>& lifts) {
  LiftConsistency out;
  auto problem = [&](const std::string& msg) {
    out.heuristically_consistent = false;
    out.problems.push_back(msg);
  };
  RulePattern pat = analyze_pattern(rule);
  const int V0 = static_cast<int>(rule.level0.vertices.size());
  std::vector<int> id0(V0);
  for (int v = 0; v < V0; ++v) id0[v] = v;
  SphereComplex L1 = rule.level1;
  L1.marked.clear();
  for (int v : rule.level0.marked) L1.mark(pat.vertex_of0[v]);
  std::vector<int> to0(L1.vertices.size(), -1);
  for (int v = 0; v < V0; ++v) to0[pat.vertex_of0[v]] = v;

  for (const auto& [id, c] : curves)
    if (!curve_is_closed(rule.level0, c) || !curve_is_simple(rule.level0, c)) problem("curve " + id + " is not a simple closed dual curve");
  for (const auto& dl : lifts) {
    const auto& l = dl.lift;
    const std::string tag = l.image + " -> " + l.preimage;
    auto it = curves.find(l.image);
    if (it == curves.end()) {
      problem(tag + ": image curve is not drawn");
      continue;
    }
    if (!curve_is_closed(L1, dl.component) || !curve_is_simple(L1, dl.component)) {
      problem(tag + ": component is not a simple closed dual curve in level 1");
      continue;
    }
    auto img = image_steps(rule, dl.component);
    auto unit = it->second.steps;
    auto rev = reversed(it->second).steps;
    if (!is_cyclic_repeat(img, unit, l.degree) && !is_cyclic_repeat(img, rev, l.degree))
      problem(tag + ": component does not cover the image curve with degree " + std::to_string(l.degree));
    auto part = marked_partition(L1, dl.component, to0);
    if (l.preimage == kInessential) {
      std::size_t small = std::min(part.begin()->size(), part.rbegin()->size());
      if (small > 1) problem(tag + ": component separates the marked points");
      continue;
    }
    auto jt = curves.find(l.preimage);
    if (jt == curves.end()) {
      problem(tag + ": preimage curve is not drawn");
      continue;
    }
    if (marked_partition(rule.level0, jt->second, id0) != part)
      problem(tag + ": marked partitions differ");
  }
  return out;
}

std::optional<MulticurveSpec> catalog_multicurve(const std::string& rule_name) {
  if (rule_name == "levy_bigon") {
    MulticurveSpec mc;
    mc.name = "levy_bigon:gamma";
    mc.curves = {"gamma"};
    mc.lifts = {{"gamma", "gamma", 1}, {"gamma", kInessential, 1}};
    mc.map_degree = 2;
    return mc;
  }
  return std::nullopt;
}

}  // namespace fsr
