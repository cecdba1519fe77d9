#pragma once

#include <map>
#include <string>
#include <vector>

#include "fsr/subdivision.hpp"

namespace fsr {

struct CollapsibleSubcomplex {
  std::vector<int> edges;  // level-0 edge indices (X_E)
  std::vector<int> tiles;  // level-0 tile indices (X_T)
  bool empty() const { return edges.empty() && tiles.empty(); }
};

// Connected pieces of the subcomplex spanned by the edges and tiles, as vertex sets.
std::vector<std::vector<int>> subcomplex_components(const SphereComplex& cx, const std::vector<int>& edges,
                                                    const std::vector<int>& tiles);

// Checks the ideal, radical, subcomplex and simple-connectivity conditions and marked-point injectivity.
ValidationReport check_collapsible(const SubdivisionRule& rule, const CollapsibleSubcomplex& x);

// Collapse of a complex along a subcomplex; every component becomes its lexicographically smallest vertex.
struct CollapsedComplex {
  SphereComplex cx;
  std::vector<int> vmap;  // old vertex -> new vertex
  std::vector<int> emap;  // old edge -> new edge or -1
  std::vector<int> tmap;  // old tile -> new tile or -1
  std::vector<std::vector<int>> kept;  // per old tile: kept walk positions
};

CollapsedComplex collapse_complex(const SphereComplex& cx, const std::vector<int>& edges,
                                  const std::vector<int>& tiles);

struct QuotientResult {
  SubdivisionRule rule;
  std::map<std::string, std::string> level0_vertices;  // old id -> new id
  std::map<std::string, std::string> level1_vertices;
};

QuotientResult quotient_rule(const SubdivisionRule& rule, const CollapsibleSubcomplex& x);

CollapsibleSubcomplex collapsible_from_julia_edges(const SubdivisionRule& rule);

// Adds forward orbits of Fatou points so that no edge joins two Julia vertices.
SubdivisionRule isolate_julia_vertices(const SubdivisionRule& rule, std::size_t budget = kDefaultBudget);

SubdivisionRule normalize_for_energy(const SubdivisionRule& rule);

}  // namespace fsr
