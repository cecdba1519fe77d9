#pragma once

#include <map>
#include <string>
#include <vector>

#include "fsr/dynamics_digraph.hpp"
#include "fsr/subdivision.hpp"

namespace fsr {

struct RecurrentCells {
  std::vector<int> edges;   // level-n edge indices
  std::vector<Band> bands;  // sorted
};

RecurrentCells recurrent_cells(Tower& tower, int n);
RecurrentCells recurrent_cells(const SubdivisionRule& rule, int n);

struct RecurrencePeriods {
  std::vector<int> edge;  // per level-0 edge, 0 if not recurrent
  std::vector<int> band;  // per level-0 band in all_bands order
  int threshold = 1;      // K: max lcm over pairs of recurrent edges
  int period = 1;         // lcm over all recurrent edges and bands
};

RecurrencePeriods recurrence_periods(const SubdivisionRule& rule);

// Half of a dual edge: the part inside `tile` reaching walk position `pos`.
struct HalfEdge {
  int tile = -1;
  int pos = -1;
  int edge = -1;
  bool operator==(const HalfEdge&) const = default;
};

struct SpineComponent {
  std::vector<int> tiles;
  std::vector<int> edges;  // full dual edges
  std::string shape;       // star-tree, edge-component, cycle, peripheral-cycle
  int vertex = -1;         // level-0 vertex enclosed by a peripheral cycle
};

struct Spine {
  int level = 0;
  int threshold = 1;
  bool polynomial = true;
  std::vector<int> recurrent_edges;
  std::vector<Band> recurrent_bands;
  std::vector<HalfEdge> halves;   // the truncated spine, one gate per half
  std::vector<int> full_edges;    // dual edges with both halves present
  std::vector<SpineComponent> components;
  std::vector<SpineComponent> skeleton_components;  // of the untruncated skeleton
  bool empty() const { return halves.empty(); }
};

// Dual edges of the recurrent level-n edges.
std::vector<int> dual_recurrent_skeleton(Tower& tower, int n);
// Throws UnsupportedRegime when n is below the threshold K.
Spine non_expanding_spine(Tower& tower, int n);
Spine non_expanding_spine(const SubdivisionRule& rule, int n);

// Corner bands around each periodic Julia vertex, in dual-face order.
std::map<int, std::vector<Band>> peripheral_cycles(Tower& tower, int n);

enum class CycleClass { Trivial, PeripheralJulia, PeripheralFatou, Essential };
std::string to_string(CycleClass c);

// Classifies a simple dual curve at level n relative to the marked set (level-0 indices).
CycleClass classify_cycle(Tower& tower, int n, const CombinatorialCurve& c, const std::vector<int>& marked0);

// Simple cycles of the full dual edges in a spine, as closed dual curves. Capped at `cap`.
std::vector<CombinatorialCurve> spine_cycles(const SphereComplex& cx, const Spine& s, std::size_t cap = 100000);

struct LevyResult {
  bool levy_free = true;
  int level = 0;
  CombinatorialCurve witness;
  std::vector<std::string> witness_edges;  // level ids of the crossed edges
  std::size_t cycles_checked = 0;
};

// Levy decision for polynomial-growth rules. marked0 empty means the rule's marked set.
LevyResult is_levy_free(const SubdivisionRule& rule, std::vector<int> marked0 = {});

// Level-n index of each level-0 vertex.
std::vector<int> level_vertex_of0(Tower& tower, int n);

// Counts triples where two recurrent bands share a side but the third band is not recurrent.
int band_transitivity_violations(const LeveledComplex& L, const std::vector<Band>& recurrent);

// Isomorphism of spines as type-labelled graphs, matched through level-0 carriers of recurrent edges.
bool spines_isomorphic(const LeveledComplex& La, const Spine& a, const LeveledComplex& Lb, const Spine& b);

}  // namespace fsr
