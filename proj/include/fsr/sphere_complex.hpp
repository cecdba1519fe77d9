#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fsr {

// An oriented occurrence of an edge in a tile boundary walk.
struct Side {
  int edge = -1;
  bool forward = true;
  bool operator==(const Side&) const = default;
};

struct Edge {
  std::string id;
  int tail = -1;
  int head = -1;
};

struct Tile {
  std::string id;
  std::vector<Side> walk;  // the tile lies to the left of its walk
};

// Location of a side inside a tile walk.
struct Slot {
  int tile = -1;
  int pos = -1;
};

struct ValidationReport {
  bool ok = true;
  std::string failure;  // first violated invariant
  std::string detail;
  int euler = 0;
  int degree = 0;
  std::vector<std::string> critical;

  static ValidationReport fail(std::string what, std::string detail = {}) {
    ValidationReport r;
    r.ok = false;
    r.failure = std::move(what);
    r.detail = std::move(detail);
    return r;
  }
};

class SphereComplex {
 public:
  std::vector<std::string> vertices;
  std::vector<Edge> edges;
  std::vector<Tile> tiles;
  std::vector<int> marked;  // sorted vertex indices

  int add_vertex(const std::string& id);
  int add_edge(const std::string& id, int tail, int head);
  int add_edge(const std::string& id, const std::string& tail, const std::string& head);
  int add_tile(const std::string& id, std::vector<Side> walk);
  // Walk given as (edge id, forward) pairs.
  int add_tile(const std::string& id, const std::vector<std::pair<std::string, bool>>& walk);
  void mark(int v);
  void mark(const std::string& v) { mark(vertex_index(v)); }

  int vertex_index(std::string_view id) const;
  int edge_index(std::string_view id) const;
  int tile_index(std::string_view id) const;
  int vertex_at(std::string_view id) const;  // throws if missing
  int edge_at(std::string_view id) const;
  int tile_at(std::string_view id) const;

  bool is_marked(int v) const;
  int start(Side s) const { return s.forward ? edges[s.edge].tail : edges[s.edge].head; }
  int end(Side s) const { return s.forward ? edges[s.edge].head : edges[s.edge].tail; }

  // Slots of (e,+) and (e,-). Valid once validate_complex passes.
  const Slot& slot(int e, bool forward) const;
  // Corner count at each vertex.
  std::vector<int> corner_counts() const;
  std::size_t cell_count() const { return vertices.size() + edges.size() + tiles.size(); }

  void rebuild_index();

 private:
  std::unordered_map<std::string, int> vmap_, emap_, tmap_;
  mutable std::vector<Slot> plus_, minus_;
  mutable bool slots_ready_ = false;
  void build_slots() const;
  friend ValidationReport validate_complex(const SphereComplex& cx);
};

ValidationReport validate_complex(const SphereComplex& cx);
int euler_characteristic(const SphereComplex& cx);

struct DualEdge {
  int edge = -1;  // primal edge
  Slot from;      // slot of (e,+): the tile on the left of e
  Slot to;        // slot of (e,-)
};

struct DualSkeleton {
  int num_vertices = 0;
  std::vector<DualEdge> edges;
  std::vector<std::vector<int>> rotation;  // per tile, dual edge ids in walk order
  // Faces of the dual graph, one per primal vertex: corners (tile, pos) in cyclic order.
  std::vector<std::vector<Slot>> faces;
  std::vector<int> face_vertex;  // primal vertex of each face
  int euler() const {
    return num_vertices - static_cast<int>(edges.size()) + static_cast<int>(faces.size());
  }
};

DualSkeleton dual_skeleton(const SphereComplex& cx);

// A closed walk in the dual graph. Step (e, true) crosses e from the tile holding (e,+)
// to the tile holding (e,-).
struct DualStep {
  int edge = -1;
  bool forward = true;
  bool operator==(const DualStep&) const = default;
};

struct CombinatorialCurve {
  std::vector<DualStep> steps;
};

bool curve_is_closed(const SphereComplex& cx, const CombinatorialCurve& c);
bool curve_is_simple(const SphereComplex& cx, const CombinatorialCurve& c);
CombinatorialCurve reversed(const CombinatorialCurve& c);

struct CurveSides {
  std::vector<int> left;   // marked vertices on the left of the curve
  std::vector<int> right;
};

CurveSides enclosed_markings(const SphereComplex& cx, const CombinatorialCurve& c);
// Same partition applied to every vertex rather than only the marked ones.
CurveSides enclosed_vertices(const SphereComplex& cx, const CombinatorialCurve& c);

}  // namespace fsr
