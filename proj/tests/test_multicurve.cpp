#include <doctest.h>

#include <cmath>
#include <random>

#include "fsr/catalog.hpp"
#include "fsr/error.hpp"
#include "fsr/multicurve.hpp"

using namespace fsr;

namespace {

MulticurveSpec spec(std::vector<std::string> curves, std::vector<CurveLift> lifts, int degree = 0) {
  MulticurveSpec mc;
  mc.curves = std::move(curves);
  mc.lifts = std::move(lifts);
  mc.map_degree = degree;
  return mc;
}

MulticurveSpec two_lifts_degree3() { return spec({"g"}, {{"g", "g", 3}, {"g", "g", 3}}, 6); }

// Spectral radius via Gelfand's formula ||A^k||^(1/k) with k = 2^60, by repeated squaring.
double oracle_radius(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double log_scale = 0.0;  // log of the factor removed so far, per unit power
  double weight = 1.0;
  for (int step = 0; step < 60; ++step) {
    double norm = 0.0;
    for (const auto& row : a)
      for (double v : row) norm = std::max(norm, v);
    if (norm == 0.0) return 0.0;
    for (auto& row : a)
      for (auto& v : row) v /= norm;
    log_scale += std::log(norm) * weight;
    std::vector<std::vector<double>> b(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) b[i][j] += a[i][k] * a[k][j];
    a = std::move(b);
    weight /= 2.0;
  }
  double norm = 0.0;
  for (const auto& row : a)
    for (double v : row) norm = std::max(norm, v);
  if (norm == 0.0) return 0.0;
  return std::exp(log_scale + std::log(norm) * weight);
}

}  // namespace

TEST_CASE("p-matrices of two degree-3 lifts") {
  auto mc = two_lifts_degree3();
  CHECK(p_matrix(mc, 1.0)[0][0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(p_matrix(mc, 2.0)[0][0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(p_matrix(mc, kInfiniteP)[0][0] == 0.0);
  auto l2 = lambda_p(mc, 2.0);
  CHECK(std::fabs(l2.value - 2.0 / 3.0) <= 1e-9);
  CHECK(l2.upper - l2.lower <= 1e-9);
  CHECK(lambda_p(mc, 1.0).value == 2.0);
}

TEST_CASE("critical exponent of two degree-3 lifts") {
  auto q = critical_exponent(two_lifts_degree3());
  const double want = 1.0 + std::log(2.0) / std::log(3.0);
  CHECK(std::fabs(q.value - want) <= 1e-8);
  CHECK(q.lower <= want + 1e-12);
  CHECK(q.upper >= want - 1e-12);
  auto prof = classify_multicurve(two_lifts_degree3());
  CHECK(prof.cantor);
  CHECK_FALSE(prof.levy);
  CHECK_FALSE(prof.thurston_obstruction);
  CHECK_FALSE(prof.nilpotent);
}

TEST_CASE("golden ratio pattern at p = 1") {
  auto mc = spec({"a", "b"}, {{"a", "a", 1}, {"a", "b", 1}, {"b", "a", 1}});
  auto l = lambda_p(mc, 1.0);
  CHECK(std::fabs(l.value - (1.0 + std::sqrt(5.0)) / 2.0) <= 1e-9);
  CHECK(l.lower <= l.value);
  CHECK(l.upper >= l.value);
  CHECK(classify_multicurve(mc).levy);
}

TEST_CASE("mixed degrees against the closed-form 2x2 root") {
  // Entries x = 2^(1-p) on (a,a) and (b,a), y = 3^(1-p) on (a,b).
  auto mc = spec({"a", "b"}, {{"a", "a", 2}, {"a", "b", 2}, {"b", "a", 3}});
  auto closed = [](double p) {
    double x = std::pow(2.0, 1.0 - p), y = std::pow(3.0, 1.0 - p);
    return (x + std::sqrt(x * x + 4.0 * x * y)) / 2.0;
  };
  for (double p : {1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0}) CHECK(std::fabs(lambda_p(mc, p).value - closed(p)) <= 1e-9);
  // Root of closed(p) = 1 by bisection on the formula.
  double lo = 1.0, hi = 4.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (closed(mid) > 1.0 ? lo : hi) = mid;
  }
  CHECK(std::fabs(critical_exponent(mc).value - lo) <= 1e-8);
}

TEST_CASE("single lift of degree d has exponent one") {
  for (int d = 2; d <= 5; ++d) {
    auto mc = spec({"g"}, {{"g", "g", d}});
    CHECK(lambda_p(mc, 3.0).value == doctest::Approx(std::pow(d, -2.0)).epsilon(1e-12));
    auto q = critical_exponent(mc);
    CHECK(q.exact);
    CHECK(q.value == 1.0);
    CHECK_FALSE(classify_multicurve(mc).cantor);
  }
}

TEST_CASE("disjoint blocks take the larger exponent") {
  auto mc = spec({"a", "b"}, {{"a", "a", 3}, {"a", "a", 3}, {"b", "b", 2}, {"b", "b", 2}, {"b", "b", 2}});
  const double qa = 1.0 + std::log(2.0) / std::log(3.0);
  const double qb = 1.0 + std::log(3.0) / std::log(2.0);
  CHECK(std::fabs(critical_exponent(mc).value - std::max(qa, qb)) <= 1e-8);
  CHECK(irreducible_blocks(mc).size() == 2);
}

TEST_CASE("nilpotent and Levy patterns") {
  auto nil = spec({"a", "b"}, {{"a", "b", 1}, {"b", kInessential, 2}});
  CHECK(lambda_p(nil, 1.0).value == 0.0);
  CHECK(lambda_p(nil, 2.0).value == 0.0);
  CHECK(classify_multicurve(nil).nilpotent);
  CHECK_THROWS_AS(critical_exponent(nil), FsrError);

  auto levy = *catalog_multicurve("levy_bigon");
  auto prof = classify_multicurve(levy);
  CHECK(prof.levy);
  CHECK(prof.thurston_obstruction);
  CHECK_FALSE(prof.exponent.has_value());
  for (const auto& s : prof.samples) CHECK(s.lambda.value == 1.0);
  CHECK_THROWS_AS(critical_exponent(levy), FsrError);
}

TEST_CASE("degree sums are checked") {
  auto mc = spec({"g"}, {{"g", "g", 3}}, 6);
  CHECK_THROWS_AS(validate_multicurve(mc), FsrError);
  CHECK_THROWS_AS(validate_multicurve(spec({"g"}, {{"h", "g", 1}})), FsrError);
}

TEST_CASE("random multicurves: monotone spectra and block maxima") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    std::vector<std::string> curves;
    for (int i = 0; i < n; ++i) curves.push_back("c" + std::to_string(i));
    std::vector<CurveLift> lifts;
    const int k = static_cast<int>(rng() % 7);
    for (int t = 0; t < k; ++t) {
      int i = static_cast<int>(rng() % n);
      int j = static_cast<int>(rng() % (n + 1));
      lifts.push_back({curves[i], j == n ? kInessential : curves[j], 1 + static_cast<int>(rng() % 4)});
    }
    auto mc = spec(curves, lifts);
    double prev = std::numeric_limits<double>::infinity();
    for (double p : {1.0, 1.5, 2.0, 4.0, 8.0}) {
      auto l = lambda_p(mc, p);
      CHECK(std::fabs(l.value - oracle_radius(p_matrix(mc, p))) <= 1e-6);
      CHECK(l.value <= prev + 1e-12);
      prev = l.value;
    }
    CHECK(lambda_p(mc, kInfiniteP).value <= lambda_p(mc, 8.0).value + 1e-12);
    auto prof = classify_multicurve(mc);
    if (!prof.levy && prof.exponent) CHECK((prof.exponent->value > 1.0) == prof.cantor);
    if (!prof.nilpotent) CHECK(lambda_p(mc, 1.0).value >= 1.0);
  }
}

TEST_CASE("drawn lifts on the Levy bigon are heuristically consistent") {
  auto r = levy_bigon();
  const auto& L0 = r.level0;
  const auto& L1 = r.level1;
  CombinatorialCurve gamma{{{L0.edge_at("g1"), false}, {L0.edge_at("g3"), true}}};
  CombinatorialCurve same{{{L1.edge_at("g1a"), false}, {L1.edge_at("g3a"), true}}};
  CombinatorialCurve other{{{L1.edge_at("g1b"), false}, {L1.edge_at("g3b"), true}}};
  std::map<std::string, CombinatorialCurve> curves{{"gamma", gamma}};
  auto ok = check_lift_partitions(r, curves, {{{"gamma", "gamma", 1}, same}, {{"gamma", kInessential, 1}, other}});
  CHECK(ok.heuristically_consistent);
  CHECK(ok.problems.empty());
  auto bad = check_lift_partitions(r, curves, {{{"gamma", kInessential, 1}, same}, {{"gamma", "gamma", 1}, other}});
  CHECK_FALSE(bad.heuristically_consistent);
  CHECK(bad.problems.size() == 2);
  auto wrong_degree = check_lift_partitions(r, curves, {{{"gamma", "gamma", 2}, same}});
  CHECK_FALSE(wrong_degree.heuristically_consistent);
}
