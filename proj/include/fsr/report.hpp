#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsr/dynamics_digraph.hpp"
#include "fsr/multicurve.hpp"
#include "fsr/serialize.hpp"
#include "fsr/spine.hpp"
#include "fsr/subdivision.hpp"

namespace fsr {

struct AnalysisOptions {
  int energy_levels = 6;
  std::vector<double> ps = {1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0};
  std::vector<MulticurveSpec> multicurves;
  std::size_t budget = kDefaultBudget;
};

// Runs validate, growth, Levy, normalization, spine, multicurve and energy stages.
// A failing stage is recorded under "errors" with its stage name; later stages still run when they can.
Json analyze(const SubdivisionRule& rule, const AnalysisOptions& options = {});

Json growth_json(const SubdivisionRule& rule);
Json spine_json(const SphereComplex& cx, const Spine& s);
Json levy_json(const SubdivisionRule& rule, const LevyResult& r);
Json profile_json(const MulticurveSpec& mc, const SpectralProfile& prof);

std::string digraph_dot(const DynDigraph& g, const std::string& name);
std::string complex_dot(const SphereComplex& cx, const std::string& name);

constexpr std::size_t kRenderBudget = 10000;

// Tutte layout of the dual graph with fixed outer face; highlighted dual edges are stroked in bold.
std::string render_svg(const SphereComplex& cx, const std::vector<int>& highlight_edges = {},
                       const std::vector<char>& fatou = {});

}  // namespace fsr
