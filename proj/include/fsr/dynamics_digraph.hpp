#pragma once

#include <string>
#include <vector>

#include "fsr/subdivision.hpp"

namespace fsr {

struct Arc {
  int source = -1;
  int target = -1;
  std::string tag;  // witnessing level-1 cell
};

struct DynDigraph {
  std::vector<std::string> vertices;
  std::vector<Arc> arcs;

  int add_vertex(std::string label);
  void add_arc(int s, int t, std::string tag = {});
  int size() const { return static_cast<int>(vertices.size()); }
  std::vector<std::vector<int>> successors() const;  // with multiplicity
};

struct GrowthClass {
  bool exponential = false;
  int degree = -1;  // polynomial degree; -1 when path counts vanish eventually
  bool operator==(const GrowthClass&) const = default;
};

std::string to_string(const GrowthClass& g);

struct SccDecomposition {
  std::vector<int> component;                 // vertex -> component id, topological order (sources first)
  std::vector<std::vector<int>> members;
  std::vector<int> internal_arcs;             // arcs with both ends in the component
  std::vector<char> cyclic;                   // component contains a cycle
  int count() const { return static_cast<int>(members.size()); }
};

SccDecomposition strongly_connected(const DynDigraph& g);
// reach[v][w] iff there is a path (possibly empty) from v to w.
std::vector<std::vector<char>> reachability(const DynDigraph& g);
// v lies on a cycle.
std::vector<char> recurrent_vertices(const DynDigraph& g);
// Gcd of the cycle lengths through each vertex; 0 for vertices on no cycle.
std::vector<int> vertex_periods(const DynDigraph& g);

GrowthClass growth_class(const DynDigraph& g, int v);

using PathCount = unsigned __int128;
PathCount path_count(const DynDigraph& g, int v, int n);
std::string to_string(PathCount c);

std::vector<int> ideal_closure(const DynDigraph& g, const std::vector<int>& X);
std::vector<int> radical_closure(const DynDigraph& g, const std::vector<int>& X);

struct SpectralEstimate {
  double value = 0.0;
  double lower = 0.0;  // Collatz-Wielandt interval
  double upper = 0.0;
  int iterations = 0;
};

// Spectral radius of a square nonnegative matrix.
SpectralEstimate spectral_radius(const std::vector<std::vector<double>>& m);
std::vector<std::vector<double>> adjacency_matrix(const DynDigraph& g);
// Restricted to the vertices reachable from v.
SpectralEstimate spectral_radius_from(const DynDigraph& g, int v);

// Unordered pair of distinct walk positions of one tile.
struct Band {
  int tile = -1;
  int i = -1;
  int j = -1;
  bool operator==(const Band&) const = default;
  bool operator<(const Band& o) const {
    return tile != o.tile ? tile < o.tile : i != o.i ? i < o.i : j < o.j;
  }
};

Band make_band(int tile, int a, int b);
std::vector<Band> all_bands(const SphereComplex& cx);
std::string band_label(const SphereComplex& cx, const Band& b);

DynDigraph edge_digraph(const SubdivisionRule& rule);
DynDigraph tile_digraph(const SubdivisionRule& rule);
// Vertices follow all_bands(rule.level0).
DynDigraph band_digraph(const SubdivisionRule& rule);

// Level-0 band carrying a level-n band, or nullopt-like tile -1 when the two sides share a root side.
Band band_carrier(const LeveledComplex& L, const Band& b);
Band band_type(const LeveledComplex& L, const SphereComplex& level0, const Band& b);
// Level-n bands whose sides are both subedges of level-0 edges.
std::vector<Band> level_bands(const LeveledComplex& L);

double edge_growth_rate(const SubdivisionRule& rule, int e);

}  // namespace fsr
