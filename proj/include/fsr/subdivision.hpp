#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fsr/sphere_complex.hpp"

namespace fsr {

enum class CellKind { Vertex, Edge, Tile };

struct CellRef {
  CellKind kind = CellKind::Vertex;
  int index = -1;
  bool operator==(const CellRef&) const = default;
};

struct TileImage {
  int tile = -1;
  int alignment = 0;  // position of the image walk hit by position 0 of the source
};

struct SubdivisionRule {
  std::string name;
  SphereComplex level0;  // carries the marked set
  SphereComplex level1;
  std::vector<CellRef> carrier_vertex;  // level-1 vertex -> level-0 cell
  std::vector<CellRef> carrier_edge;    // level-1 edge -> level-0 edge or tile
  std::vector<int> carrier_tile;        // level-1 tile -> level-0 tile
  std::vector<int> map_vertex;
  std::vector<Side> map_edge;
  std::vector<TileImage> map_tile;
  std::map<std::string, std::string> metadata;
};

// Fills the per-cell arrays with defaults matching the current level-1 sizes.
void resize_maps(SubdivisionRule& r);

// How one level-0 edge is cut by the level-1 complex.
struct EdgePattern {
  std::vector<Side> path;   // level-1 sides from tail to head
  std::vector<int> points;  // level-1 vertices along the path, size path.size()+1
};

// How one level-0 tile is cut by the level-1 complex, with its boundary unfolded.
struct TilePattern {
  std::vector<Side> boundary;                    // level-1 sides around the unfolded walk
  std::vector<std::pair<int, int>> boundary_at;  // q -> (walk position j, index along side j)
  std::vector<int> tiles, edges, vertices;       // carried level-1 cells
  // Corner descriptor per carried tile and walk position: >= 0 boundary point q,
  // otherwise -(v+1) for an interior level-1 vertex v.
  std::map<int, std::vector<int>> corner;
  std::map<std::pair<int, bool>, int> boundary_side;  // level-1 side -> q
};

struct RulePattern {
  int degree = 0;
  std::vector<int> local_degree;  // per level-1 vertex
  std::vector<int> vertex_of0;    // level-0 vertex -> level-1 copy
  std::vector<int> f0;            // level-0 vertex -> level-0 vertex
  std::vector<EdgePattern> edge;
  std::vector<TilePattern> tile;
  // For each level-1 tile side: position in the carrier tile walk, or -1 if interior.
  std::vector<std::vector<int>> root_pos;
};

ValidationReport validate_rule(const SubdivisionRule& rule);
// Throws a validation error when the rule is invalid.
RulePattern analyze_pattern(const SubdivisionRule& rule);

struct LeveledComplex {
  int level = 0;
  SphereComplex cx;
  // Image under f^level in the level-0 complex.
  std::vector<int> vtype, etype, ttype;
  std::vector<char> esign;
  std::vector<int> talign;
  // Containing level-0 cell.
  std::vector<CellRef> vcarrier0, ecarrier0;
  std::vector<int> tcarrier0;
  // Containing level-(n-1) cell.
  std::vector<CellRef> vparent, eparent;
  std::vector<int> tparent;
  // Image under f in the level-(n-1) complex.
  std::vector<int> vdown, edown, tdown;
  std::vector<char> edown_sign;
  std::vector<int> tdown_align;
  // Per tile side: position in the level-0 carrier tile walk, or -1.
  std::vector<std::vector<int>> troot;
  // Index of each level-(n-1) vertex in this level.
  std::vector<int> persist;
  // Level-(n+1) subedges of each edge from tail to head; filled once level n+1 exists.
  std::vector<std::vector<Side>> echild;
};

constexpr std::size_t kDefaultBudget = 1000000;

class Tower {
 public:
  explicit Tower(const SubdivisionRule& rule, std::size_t budget = kDefaultBudget);
  const LeveledComplex& level(int n);
  const SubdivisionRule& rule() const { return *rule_; }
  const RulePattern& pattern() const { return pat_; }
  int degree() const { return pat_.degree; }

 private:
  std::shared_ptr<const SubdivisionRule> rule_;
  RulePattern pat_;
  std::size_t budget_;
  std::deque<LeveledComplex> levels_;  // stable references while growing
  void grow();
};

// Level-m sides making up a level-l edge, from its tail to its head (m >= l).
std::vector<Side> edge_path(Tower& tower, int l, int e, int m);

LeveledComplex subdivide(const SubdivisionRule& rule, int n, std::size_t budget = kDefaultBudget);

struct VertexClass {
  std::vector<char> fatou;               // per level-0 vertex
  std::vector<std::vector<int>> cycle;   // eventual periodic cycle of each vertex
  std::vector<char> periodic;
  std::vector<int> local_degree;         // per level-0 vertex
};

VertexClass classify_vertices(const SubdivisionRule& rule);
std::vector<int> julia_edges(const SubdivisionRule& rule);
std::vector<int> julia_tiles(const SubdivisionRule& rule);
// Post-critical set as level-0 vertex indices.
std::vector<int> postcritical_set(const SubdivisionRule& rule);

SubdivisionRule shift(const SubdivisionRule& rule, int k, std::size_t budget = kDefaultBudget);
SubdivisionRule power(const SubdivisionRule& rule, int k, std::size_t budget = kDefaultBudget);

// Builds a rule whose level 0 and level 1 are two consecutive levels of a tower.
// `map` selects f (down) or the type map to level 0.
SubdivisionRule rule_from_levels(const LeveledComplex& lo, const LeveledComplex& hi, bool use_type_map,
                                 const std::string& name);

}  // namespace fsr
