#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fsr/dynamics_digraph.hpp"
#include "fsr/sphere_complex.hpp"
#include "fsr/subdivision.hpp"

namespace fsr {

inline constexpr double kInfiniteP = std::numeric_limits<double>::infinity();
inline const std::string kInessential = "inessential";

// One connected component of the preimage of a curve.
struct CurveLift {
  std::string image;
  std::string preimage;  // a curve id or kInessential
  int degree = 1;
};

struct MulticurveSpec {
  std::string name;
  std::vector<std::string> curves;
  std::vector<CurveLift> lifts;
  int map_degree = 0;  // 0 when not supplied

  int index(const std::string& curve) const;  // -1 if absent
};

// Throws a validation error on unknown curves, bad degrees or degree sums that miss map_degree.
void validate_multicurve(const MulticurveSpec& mc);

// Entry (j, i) sums deg^(1-p) over lifts of curve i assigned to curve j.
std::vector<std::vector<double>> p_matrix(const MulticurveSpec& mc, double p);
// Lift counts (p = 1) or degree-one lift counts (p = infinity).
std::vector<std::vector<long long>> integer_matrix(const MulticurveSpec& mc, bool infinite);

// Irreducible diagonal blocks of the lift pattern, as sorted curve indices.
std::vector<std::vector<int>> irreducible_blocks(const MulticurveSpec& mc);

// Leading eigenvalue with a Collatz-Wielandt interval; the maximum over diagonal blocks.
SpectralEstimate lambda_p(const MulticurveSpec& mc, double p);
SpectralEstimate block_lambda(const MulticurveSpec& mc, const std::vector<int>& block, double p);

struct CriticalExponent {
  double value = 1.0;
  double lower = 1.0;
  double upper = 1.0;
  bool exact = false;  // Q = 1 because lambda_1 = 1
};

// Throws UnsupportedRegime when the exponent is undefined (Levy cycle or nilpotent pattern).
CriticalExponent critical_exponent(const MulticurveSpec& mc);

struct LambdaSample {
  double p = 1.0;
  SpectralEstimate lambda;
};

struct SpectralProfile {
  std::vector<LambdaSample> samples;
  std::vector<std::vector<std::string>> blocks;
  bool nilpotent = false;
  bool levy = false;
  bool cantor = false;
  bool thurston_obstruction = false;
  std::optional<CriticalExponent> exponent;
};

const std::vector<double>& default_multicurve_samples();
SpectralProfile classify_multicurve(const MulticurveSpec& mc, const std::vector<double>& ps = default_multicurve_samples());

// Curves drawn on a rule: level-0 curves by id and, per lift, the component drawn in level 1.
struct DrawnLift {
  CurveLift lift;
  CombinatorialCurve component;
};

struct LiftConsistency {
  bool heuristically_consistent = true;
  std::vector<std::string> problems;
};

// Compares the marked-point partitions of each drawn lift with its assigned curve.
// Passing is necessary for a correct assignment, not sufficient.
LiftConsistency check_lift_partitions(const SubdivisionRule& rule, const std::map<std::string, CombinatorialCurve>& curves,
                                      const std::vector<DrawnLift>& lifts);

// Invariant multicurves shipped with catalog rules.
std::optional<MulticurveSpec> catalog_multicurve(const std::string& rule_name);

}  // namespace fsr
