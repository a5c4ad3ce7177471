#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ksfrac {

enum class Family { Vicsek, Gasket };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double euclidean_distance(Point a, Point b);

// Integer coordinates of a vertex at a given level. The physical point is
// (x / s, y * y_unit / s) with s = 2 * ratio^-level, so every vertex of V_n
// has an exact key and deduplication never compares floats.
struct LatticeKey {
  std::int64_t x = 0;
  std::int64_t y = 0;
  auto operator<=>(const LatticeKey&) const = default;
};

// Immutable description of one of the two self-similar families.
//
// Vicsek: unit square, corners (0,0) (1,0) (1,1) (0,1) and the centre
// (1/2,1/2) as the fifth fixed point; ratio 1/3, five maps.
// Gasket: equilateral triangle of side 1, corners (0,0) (1,0) (1/2,sqrt3/2);
// ratio 1/2, three maps.
struct IfsSpec {
  Family family;
  int branch_count;    // number of contractions m
  int inverse_ratio;   // 1 / contraction ratio
  double y_unit;       // 1 for Vicsek, sqrt(3) for the gasket
  std::vector<LatticeKey> fixed_points;  // level-0 lattice keys of q_1..q_m
  std::vector<std::pair<int, int>> base_edges;  // edges of the level-0 graph
  double hausdorff_dim;
  double walk_dim;
  double euclidean_diameter;
  double base_edge_length;  // length of a level-0 edge
  double time_factor;       // 15 for Vicsek, 5 for the gasket
  int max_graph_level;
  int max_measure_level;

  static const IfsSpec& vicsek();
  static const IfsSpec& gasket();
  static const IfsSpec& of(Family family);

  double ratio() const { return 1.0 / inverse_ratio; }
  int corner_count() const { return static_cast<int>(fixed_points.size()); }
  // Number of level-n cells, m^n.
  std::size_t cell_count(int level) const;
  double edge_length(int level) const;
  // 4 * ratio^N: smallest admissible radius for ball queries at level N.
  double resolution_floor(int level) const;
  Point to_point(LatticeKey key, int level) const;
  // Key of a level-`from` vertex expressed at the finer level `to`.
  LatticeKey refine(LatticeKey key, int from, int to) const;
  Point fixed_point(int i) const { return to_point(fixed_points[i], 0); }
};

std::int64_t ipow(std::int64_t base, int exponent);

// Address of the n-cell Psi_w(K).
struct Word {
  std::vector<std::uint8_t> digits;

  int level() const { return static_cast<int>(digits.size()); }
  // Position of the word in lexicographic order of W_n (first digit most
  // significant), which is also the atom/cell index at that level.
  std::size_t index(int branch_count) const;
  static Word from_index(std::size_t index, int level, int branch_count);
  bool operator==(const Word&) const = default;
};

// Lattice key of Psi_w(q_corner) at level |w|.
LatticeKey cell_vertex_key(const IfsSpec& spec, const Word& word, int corner);

struct Edge {
  int u;
  int v;
  std::size_t cell;  // index of the owning word in W_n
};

// Deduplicated vertex set V_n with its cell structure and adjacency.
class LevelGraph {
 public:
  const IfsSpec& spec() const { return *spec_; }
  Family family() const { return spec_->family; }
  int level() const { return level_; }

  std::size_t vertex_count() const { return keys_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t cell_count() const { return cells_.size() / stride(); }

  std::span<const LatticeKey> keys() const { return keys_; }
  std::span<const Point> points() const { return points_; }
  std::span<const Edge> edges() const { return edges_; }
  std::optional<int> find(LatticeKey key) const;

  // Vertex ids of Psi_w(q_0..q_{k-1}) in fixed-point order.
  std::span<const int> cell_vertices(std::size_t cell) const {
    return {cells_.data() + cell * stride(), stride()};
  }
  std::span<const int> neighbors(int v) const {
    return {adjacency_.data() + adjacency_offsets_[v],
            adjacency_offsets_[v + 1] - adjacency_offsets_[v]};
  }
  std::size_t degree(int v) const { return neighbors(v).size(); }
  // Cells having v among their vertices, ascending.
  std::span<const std::size_t> incident_cells(int v) const {
    return {incidence_.data() + incidence_offsets_[v],
            incidence_offsets_[v + 1] - incidence_offsets_[v]};
  }
  double edge_length() const { return spec_->edge_length(level_); }

 private:
  friend LevelGraph build_level_graph(const IfsSpec& spec, int level);
  std::size_t stride() const { return spec_->fixed_points.size(); }

  const IfsSpec* spec_ = nullptr;
  int level_ = 0;
  std::vector<LatticeKey> keys_;
  std::vector<Point> points_;
  std::vector<Edge> edges_;
  std::vector<int> cells_;
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<int> adjacency_;
  std::vector<std::size_t> incidence_offsets_;
  std::vector<std::size_t> incidence_;
};

// Throws ResourceError above spec.max_graph_level.
LevelGraph build_level_graph(const IfsSpec& spec, int level);

// Breadth-first hop counts from `source`; vertices farther than `max_hops`
// are left at -1.
std::vector<int> hop_distances(const LevelGraph& graph, int source,
                               int max_hops = -1);
double geodesic_distance(const LevelGraph& graph, int u, int v);

// Level-N atomic approximation of the normalized Hausdorff measure: one atom
// per word, placed at the barycentre of the cell's fixed-point images.
class DiscreteMeasure {
 public:
  const IfsSpec& spec() const { return *spec_; }
  Family family() const { return spec_->family; }
  int level() const { return level_; }
  std::size_t size() const { return atoms_.size(); }
  std::span<const Point> atoms() const { return atoms_; }
  double weight() const { return weight_; }
  // Total weight of the atoms lying in the cell K_w.
  double prefix_mass(const Word& prefix) const;

 private:
  friend DiscreteMeasure build_measure(const IfsSpec& spec, int level);
  const IfsSpec* spec_ = nullptr;
  int level_ = 0;
  double weight_ = 1.0;
  std::vector<Point> atoms_;
};

DiscreteMeasure build_measure(const IfsSpec& spec, int level);

enum class Metric { Euclidean, Geodesic };
std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

struct Neighbor {
  std::size_t index;
  double distance;
};

// Distances between the atoms of one DiscreteMeasure.
class DistanceOracle {
 public:
  virtual ~DistanceOracle() = default;
  virtual Metric metric() const = 0;
  virtual std::size_t size() const = 0;
  virtual double distance(std::size_t i, std::size_t j) const = 0;
  // Every atom j with d(i, j) < radius, in ascending index order.
  virtual void neighbors_within(std::size_t i, double radius,
                                std::vector<Neighbor>& out) const = 0;
};

// Strict ball membership with a relative slack so that lattice-exact
// distances sitting on the sphere are excluded regardless of rounding.
inline bool inside_ball(double distance, double radius) {
  return distance < radius * (1.0 - 1e-9);
}

enum class NeighborSearch { Bucketed, BruteForce };

class EuclideanOracle final : public DistanceOracle {
 public:
  EuclideanOracle(std::span<const Point> points, double bucket_size,
                  NeighborSearch search = NeighborSearch::Bucketed);
  Metric metric() const override { return Metric::Euclidean; }
  std::size_t size() const override { return points_.size(); }
  double distance(std::size_t i, std::size_t j) const override;
  void neighbors_within(std::size_t i, double radius,
                        std::vector<Neighbor>& out) const override;

 private:
  void scan_all(std::size_t i, double radius, std::vector<Neighbor>& out) const;

  std::vector<Point> points_;
  NeighborSearch search_;
  double bucket_size_;
  double min_x_ = 0.0;
  double min_y_ = 0.0;
  std::int64_t columns_ = 1;
  std::int64_t rows_ = 1;
  std::vector<std::size_t> bucket_offsets_;
  std::vector<std::size_t> bucket_atoms_;
};

// Graph distance on the level-N graph. On the Vicsek set every atom is the
// centre vertex of its cell and the distance is the exact skeleton geodesic.
// On the gasket the atom of cell w is identified with the cell, and
// d(w, w') = edge_length * (min hops between their corners + 1) for w != w',
// which is a metric within O(2^-N) of the graph geodesic.
class GeodesicOracle final : public DistanceOracle {
 public:
  GeodesicOracle(const DiscreteMeasure& measure);
  Metric metric() const override { return Metric::Geodesic; }
  std::size_t size() const override { return atom_count_; }
  double distance(std::size_t i, std::size_t j) const override;
  void neighbors_within(std::size_t i, double radius,
                        std::vector<Neighbor>& out) const override;

 private:
  // Hop distance from atom i to every atom, truncated at max_hops.
  std::vector<int> atom_hops(std::size_t i, int max_hops) const;

  LevelGraph graph_;
  std::size_t atom_count_;
};

std::unique_ptr<DistanceOracle> make_oracle(
    const DiscreteMeasure& measure, Metric metric,
    NeighborSearch search = NeighborSearch::Bucketed);

// mu(B(x, r)) for the atom x. Requires r >= resolution floor.
double ball_measure(const DiscreteMeasure& measure,
                    const DistanceOracle& oracle, std::size_t x, double radius);

void require_resolved(const DiscreteMeasure& measure, double radius);

// Uniform word of W_N drawn with i.i.d. digits.
Word sample_point(const IfsSpec& spec, int level, std::mt19937_64& rng);

struct EpsNet {
  double epsilon = 0.0;
  std::vector<std::size_t> centers;
  std::vector<std::size_t> assignment;  // atom -> position in `centers`
  int overlap_k2 = 0;  // max_x #{a : x in B(a, 2 eps)}
  int overlap_k5 = 0;  // max_x #{a : x in B(a, 5 eps)}
};

// Greedy maximal eps-separated set of atoms in index order.
EpsNet build_eps_net(const DiscreteMeasure& measure,
                     const DistanceOracle& oracle, double epsilon);

}  // namespace ksfrac
