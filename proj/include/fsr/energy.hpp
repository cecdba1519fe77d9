#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsr/dynamics_digraph.hpp"
#include "fsr/multicurve.hpp"
#include "fsr/subdivision.hpp"

namespace fsr {

// A finite graph with a p-length (for p = 1 the lengths are weights).
struct ConformalGraph {
  int num_vertices = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::string> edge_ids;
  std::vector<double> lengths;
  double p = 1.0;
};

struct EdgeAction {
  bool onto = false;
  int target = -1;        // codomain edge when onto, codomain vertex when collapsed
  bool forward = true;
  double derivative = 0;  // codomain length / domain length
};

struct PLGraphMap {
  ConformalGraph domain;
  ConformalGraph codomain;
  std::vector<int> vertex_image;
  std::vector<EdgeAction> action;
};

// Checks endpoint consistency and recorded derivatives; throws a validation error.
void validate_map(const PLGraphMap& m);

std::vector<double> fill_pp(const PLGraphMap& m, double p);
double energy_pp(const PLGraphMap& m, double p);
// Norm of the multiplicity function with exponent p/(p-1); needs p > 1.
double energy_1p(const PLGraphMap& m, double p);

// Dual graph of a level, with lengths lifted from level-0 edge lengths through the type map.
ConformalGraph dual_graph(const LeveledComplex& L, const std::vector<double>& base_lengths, double p);

// phi^n_m : G_n -> G_m. Empty base lengths mean unit lengths.
PLGraphMap natural_representative(Tower& tower, int n, int m, double p = 1.0,
                                  const std::vector<double>& base_lengths = {});
PLGraphMap natural_representative(const SubdivisionRule& rule, int n, int m, double p = 1.0,
                                  const std::vector<double>& base_lengths = {});

// max over level-0 edges of |R^n(e)|.
PathCount e1_exact(const SubdivisionRule& rule, int n);

struct KExpandingLength {
  std::vector<double> lengths;  // per level-0 edge
  std::vector<int> rank;
  std::vector<int> order;       // level-0 edges from shortest to longest
};

// Throws UnsupportedRegime for exponential growth or cycles that are not loops.
KExpandingLength k_expanding_length(const SubdivisionRule& rule, double K);

struct CrochetParams {
  double K = 16;
  double eps = 1.0 / 32;
  double eps1 = 1.0 / 8;
};

struct CrochetCertificate {
  bool certified = false;
  double p = 2;
  double bound = 0;      // psi_bound * rho_bound
  double psi_bound = 0;  // E^p_p of the deformed map on H_1
  double rho_bound = 1;  // retraction onto H_0
  CrochetParams params;
  int shift = 0;
  int power = 1;
  int N = 0, M = 0, L = 0;
  double eps2 = 0;
  double case1 = 0, case2 = 0, case3 = 0, case4 = 0;  // closed-form case bounds
  int forest_components = 0;
  std::string reason;
};

// Runs the deformation family on a normalized rule; searches a parameter grid when params are absent.
CrochetCertificate crochet_certificate(const SubdivisionRule& rule, double p,
                                       const std::optional<CrochetParams>& params = std::nullopt);

struct EnergyBound {
  double p = 1;
  std::optional<double> upper;
  std::string upper_source;
  std::optional<double> lower;
  std::string lower_source;
  std::vector<double> level_values;  // a_n = E^p_p of phi^n_0 with unit lengths, n = 1..n_max
  std::optional<CrochetCertificate> certificate;
};

const std::vector<double>& default_energy_samples();

EnergyBound asymptotic_bounds(const SubdivisionRule& rule, double p, int n_max,
                              const std::vector<MulticurveSpec>& multicurves = {});

struct DimensionBracket {
  std::vector<EnergyBound> bounds;  // upper bounds made non-increasing in p
  double lower = 1;                 // lower bound on the conformal dimension
  std::optional<double> upper;      // smallest sampled p with certified upper bound < 1
};

DimensionBracket bracket_dimension(const SubdivisionRule& rule, int n_max, const std::vector<MulticurveSpec>& multicurves = {},
                                   const std::vector<double>& ps = default_energy_samples());

}  // namespace fsr
