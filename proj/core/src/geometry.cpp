#include "ksfrac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include "ksfrac/error.hpp"

namespace ksfrac {

std::string_view to_string(Family family) {
  return family == Family::Vicsek ? "vicsek" : "gasket";
}

Family parse_family(std::string_view name) {
  if (name == "vicsek") return Family::Vicsek;
  if (name == "gasket") return Family::Gasket;
  throw ContractError("unknown fractal family '" + std::string(name) + "'");
}

std::string_view to_string(Metric metric) {
  return metric == Metric::Euclidean ? "euclidean" : "geodesic";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "geodesic") return Metric::Geodesic;
  throw ContractError("unknown metric '" + std::string(name) + "'");
}

double euclidean_distance(Point a, Point b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::int64_t ipow(std::int64_t base, int exponent) {
  std::int64_t result = 1;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

const IfsSpec& IfsSpec::vicsek() {
  static const IfsSpec spec{
      .family = Family::Vicsek,
      .branch_count = 5,
      .inverse_ratio = 3,
      .y_unit = 1.0,
      .fixed_points = {{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}},
      .base_edges = {{4, 0}, {4, 1}, {4, 2}, {4, 3}},
      .hausdorff_dim = std::log(5.0) / std::log(3.0),
      // alpha_2 = 1 + (d_h - 1)/2 = d_w / 2
      .walk_dim = std::log(15.0) / std::log(3.0),
      .euclidean_diameter = std::sqrt(2.0),
      .base_edge_length = std::sqrt(2.0) / 2.0,
      .time_factor = 15.0,
      .max_graph_level = 6,
      .max_measure_level = 7,
  };
  return spec;
}

const IfsSpec& IfsSpec::gasket() {
  static const IfsSpec spec{
      .family = Family::Gasket,
      .branch_count = 3,
      .inverse_ratio = 2,
      .y_unit = std::sqrt(3.0),
      .fixed_points = {{0, 0}, {2, 0}, {1, 1}},
      .base_edges = {{0, 1}, {1, 2}, {2, 0}},
      .hausdorff_dim = std::log(3.0) / std::log(2.0),
      // alpha_2 = (log 3 - log(3/5)) / (2 log 2) = d_w / 2
      .walk_dim = std::log(5.0) / std::log(2.0),
      .euclidean_diameter = 1.0,
      .base_edge_length = 1.0,
      .time_factor = 5.0,
      .max_graph_level = 9,
      .max_measure_level = 10,
  };
  return spec;
}

const IfsSpec& IfsSpec::of(Family family) {
  return family == Family::Vicsek ? vicsek() : gasket();
}

std::size_t IfsSpec::cell_count(int level) const {
  return static_cast<std::size_t>(ipow(branch_count, level));
}

double IfsSpec::edge_length(int level) const {
  return base_edge_length * std::pow(ratio(), level);
}

double IfsSpec::resolution_floor(int level) const {
  return 4.0 * std::pow(ratio(), level);
}

Point IfsSpec::to_point(LatticeKey key, int level) const {
  const double scale = 2.0 * static_cast<double>(ipow(inverse_ratio, level));
  return {static_cast<double>(key.x) / scale,
          static_cast<double>(key.y) * y_unit / scale};
}

LatticeKey IfsSpec::refine(LatticeKey key, int from, int to) const {
  const std::int64_t factor = ipow(inverse_ratio, to - from);
  return {key.x * factor, key.y * factor};
}

std::size_t Word::index(int branch_count) const {
  std::size_t idx = 0;
  for (auto d : digits) idx = idx * branch_count + d;
  return idx;
}

Word Word::from_index(std::size_t index, int level, int branch_count) {
  Word w;
  w.digits.resize(level);
  for (int k = level - 1; k >= 0; --k) {
    w.digits[k] = static_cast<std::uint8_t>(index % branch_count);
    index /= branch_count;
  }
  return w;
}

namespace {

// Lattice offset of Psi_w at level |w|, accumulated digit by digit.
LatticeKey word_offset(const IfsSpec& spec, std::span<const std::uint8_t> digits) {
  const std::int64_t inv = spec.inverse_ratio;
  LatticeKey acc{0, 0};
  for (auto d : digits) {
    acc.x = acc.x * inv + (inv - 1) * spec.fixed_points[d].x;
    acc.y = acc.y * inv + (inv - 1) * spec.fixed_points[d].y;
  }
  return acc;
}

void check_level(const IfsSpec& spec, int level, int max_level,
                 const char* what, double size) {
  if (level < 0) throw ContractError(std::string(what) + ": negative level");
  if (level > max_level) {
    std::ostringstream msg;
    msg << what << ": level " << level << " exceeds the " << to_string(spec.family)
        << " limit " << max_level << " (estimated " << size << " elements)";
    throw ResourceError(msg.str(), size);
  }
}

}  // namespace

LatticeKey cell_vertex_key(const IfsSpec& spec, const Word& word, int corner) {
  const LatticeKey off = word_offset(spec, word.digits);
  const LatticeKey q = spec.fixed_points[corner];
  return {q.x + off.x, q.y + off.y};
}

std::optional<int> LevelGraph::find(LatticeKey key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return std::nullopt;
  return static_cast<int>(it - keys_.begin());
}

LevelGraph build_level_graph(const IfsSpec& spec, int level) {
  const double estimate = static_cast<double>(spec.corner_count()) *
                          std::pow(spec.branch_count, level);
  check_level(spec, level, spec.max_graph_level, "build_level_graph", estimate);

  LevelGraph g;
  g.spec_ = &spec;
  g.level_ = level;
  const std::size_t ncells = spec.cell_count(level);
  const std::size_t stride = spec.fixed_points.size();

  std::vector<LatticeKey> raw(ncells * stride);
  for (std::size_t c = 0; c < ncells; ++c) {
    const Word w = Word::from_index(c, level, spec.branch_count);
    const LatticeKey off = word_offset(spec, w.digits);
    for (std::size_t j = 0; j < stride; ++j) {
      raw[c * stride + j] = {spec.fixed_points[j].x + off.x,
                             spec.fixed_points[j].y + off.y};
    }
  }
  g.keys_ = raw;
  std::sort(g.keys_.begin(), g.keys_.end());
  g.keys_.erase(std::unique(g.keys_.begin(), g.keys_.end()), g.keys_.end());

  g.points_.reserve(g.keys_.size());
  for (auto k : g.keys_) g.points_.push_back(spec.to_point(k, level));

  g.cells_.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) g.cells_[i] = *g.find(raw[i]);

  g.edges_.reserve(ncells * spec.base_edges.size());
  for (std::size_t c = 0; c < ncells; ++c) {
    for (auto [a, b] : spec.base_edges) {
      g.edges_.push_back({g.cells_[c * stride + a], g.cells_[c * stride + b], c});
    }
  }

  const std::size_t nv = g.keys_.size();
  std::vector<std::vector<int>> adj(nv);
  for (const auto& e : g.edges_) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  g.adjacency_offsets_.assign(nv + 1, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    std::sort(adj[v].begin(), adj[v].end());
    g.adjacency_offsets_[v + 1] = g.adjacency_offsets_[v] + adj[v].size();
  }
  g.adjacency_.reserve(g.adjacency_offsets_.back());
  for (auto& list : adj) g.adjacency_.insert(g.adjacency_.end(), list.begin(), list.end());

  std::vector<std::vector<std::size_t>> inc(nv);
  for (std::size_t c = 0; c < ncells; ++c) {
    for (std::size_t j = 0; j < stride; ++j) {
      auto& list = inc[g.cells_[c * stride + j]];
      if (list.empty() || list.back() != c) list.push_back(c);
    }
  }
  g.incidence_offsets_.assign(nv + 1, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    g.incidence_offsets_[v + 1] = g.incidence_offsets_[v] + inc[v].size();
  }
  g.incidence_.reserve(g.incidence_offsets_.back());
  for (auto& list : inc) g.incidence_.insert(g.incidence_.end(), list.begin(), list.end());
  return g;
}

std::vector<int> hop_distances(const LevelGraph& graph, int source, int max_hops) {
  std::vector<int> hops(graph.vertex_count(), -1);
  std::deque<int> queue{source};
  hops[source] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (max_hops >= 0 && hops[v] >= max_hops) continue;
    for (int w : graph.neighbors(v)) {
      if (hops[w] < 0) {
        hops[w] = hops[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return hops;
}

double geodesic_distance(const LevelGraph& graph, int u, int v) {
  if (u == v) return 0.0;
  return hop_distances(graph, u)[v] * graph.edge_length();
}

double DiscreteMeasure::prefix_mass(const Word& prefix) const {
  if (prefix.level() > level_) throw ContractError("prefix longer than measure level");
  const std::size_t block = spec_->cell_count(level_ - prefix.level());
  const std::size_t first = prefix.index(spec_->branch_count) * block;
  double mass = 0.0;
  for (std::size_t i = first; i < first + block; ++i) mass += weight_;
  return mass;
}

DiscreteMeasure build_measure(const IfsSpec& spec, int level) {
  const double estimate = std::pow(spec.branch_count, level);
  check_level(spec, level, spec.max_measure_level, "build_measure", estimate);

  DiscreteMeasure mu;
  mu.spec_ = &spec;
  mu.level_ = level;
  const std::size_t n = spec.cell_count(level);
  mu.weight_ = 1.0 / static_cast<double>(n);
  mu.atoms_.reserve(n);

  // Barycentre of the fixed-point images of each cell.
  LatticeKey bary{0, 0};
  for (auto q : spec.fixed_points) {
    bary.x += q.x;
    bary.y += q.y;
  }
  const double k = static_cast<double>(spec.fixed_points.size());
  for (std::size_t c = 0; c < n; ++c) {
    const Word w = Word::from_index(c, level, spec.branch_count);
    const LatticeKey off = word_offset(spec, w.digits);
    const Point base = spec.to_point(off, level);
    const Point b = spec.to_point(bary, level);
    mu.atoms_.push_back({base.x + b.x / k, base.y + b.y / k});
  }
  return mu;
}

// --------------------------------------------------------------------------
// Euclidean oracle

EuclideanOracle::EuclideanOracle(std::span<const Point> points, double bucket_size,
                                 NeighborSearch search)
    : points_(points.begin(), points.end()), search_(search), bucket_size_(bucket_size) {
  if (points_.empty() || search_ == NeighborSearch::BruteForce) return;
  double max_x = points_[0].x, max_y = points_[0].y;
  min_x_ = max_x;
  min_y_ = max_y;
  for (auto p : points_) {
    min_x_ = std::min(min_x_, p.x);
    min_y_ = std::min(min_y_, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  columns_ = static_cast<std::int64_t>((max_x - min_x_) / bucket_size_) + 1;
  rows_ = static_cast<std::int64_t>((max_y - min_y_) / bucket_size_) + 1;
  std::vector<std::size_t> bucket_of(points_.size());
  bucket_offsets_.assign(static_cast<std::size_t>(columns_ * rows_) + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto cx = static_cast<std::int64_t>((points_[i].x - min_x_) / bucket_size_);
    const auto cy = static_cast<std::int64_t>((points_[i].y - min_y_) / bucket_size_);
    bucket_of[i] = static_cast<std::size_t>(cy * columns_ + cx);
    ++bucket_offsets_[bucket_of[i] + 1];
  }
  std::partial_sum(bucket_offsets_.begin(), bucket_offsets_.end(), bucket_offsets_.begin());
  bucket_atoms_.resize(points_.size());
  std::vector<std::size_t> cursor(bucket_offsets_.begin(), bucket_offsets_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) bucket_atoms_[cursor[bucket_of[i]]++] = i;
}

double EuclideanOracle::distance(std::size_t i, std::size_t j) const {
  return euclidean_distance(points_[i], points_[j]);
}

void EuclideanOracle::scan_all(std::size_t i, double radius,
                               std::vector<Neighbor>& out) const {
  for (std::size_t j = 0; j < points_.size(); ++j) {
    const double d = euclidean_distance(points_[i], points_[j]);
    if (inside_ball(d, radius)) out.push_back({j, d});
  }
}

void EuclideanOracle::neighbors_within(std::size_t i, double radius,
                                       std::vector<Neighbor>& out) const {
  out.clear();
  if (search_ == NeighborSearch::BruteForce) {
    scan_all(i, radius, out);
    return;
  }
  const auto reach = static_cast<std::int64_t>(radius / bucket_size_) + 1;
  const double span = static_cast<double>(2 * reach + 1);
  if (span * span >= static_cast<double>(points_.size())) {
    scan_all(i, radius, out);
    return;
  }
  const auto cx = static_cast<std::int64_t>((points_[i].x - min_x_) / bucket_size_);
  const auto cy = static_cast<std::int64_t>((points_[i].y - min_y_) / bucket_size_);
  for (std::int64_t y = std::max<std::int64_t>(0, cy - reach);
       y <= std::min(rows_ - 1, cy + reach); ++y) {
    for (std::int64_t x = std::max<std::int64_t>(0, cx - reach);
         x <= std::min(columns_ - 1, cx + reach); ++x) {
      const auto b = static_cast<std::size_t>(y * columns_ + x);
      for (std::size_t k = bucket_offsets_[b]; k < bucket_offsets_[b + 1]; ++k) {
        const std::size_t j = bucket_atoms_[k];
        const double d = euclidean_distance(points_[i], points_[j]);
        if (inside_ball(d, radius)) out.push_back({j, d});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
}

// --------------------------------------------------------------------------
// Geodesic oracle

GeodesicOracle::GeodesicOracle(const DiscreteMeasure& measure)
    : graph_(build_level_graph(measure.spec(), measure.level())),
      atom_count_(measure.size()) {}

std::vector<int> GeodesicOracle::atom_hops(std::size_t i, int max_hops) const {
  const auto& spec = graph_.spec();
  std::vector<int> result(atom_count_, -1);
  if (spec.family == Family::Vicsek) {
    // Atom i sits on the centre vertex (fixed point 4) of cell i.
    const auto hops = hop_distances(graph_, graph_.cell_vertices(i)[4], max_hops);
    for (std::size_t j = 0; j < atom_count_; ++j) {
      result[j] = hops[graph_.cell_vertices(j)[4]];
    }
    return result;
  }
  // Multi-source BFS from the three corners of cell i.
  std::vector<int> hops(graph_.vertex_count(), -1);
  std::deque<int> queue;
  for (int v : graph_.cell_vertices(i)) {
    hops[v] = 0;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (max_hops >= 0 && hops[v] >= max_hops) continue;
    for (int w : graph_.neighbors(v)) {
      if (hops[w] < 0) {
        hops[w] = hops[v] + 1;
        queue.push_back(w);
      }
    }
  }
  for (std::size_t j = 0; j < atom_count_; ++j) {
    if (j == i) {
      result[j] = 0;
      continue;
    }
    int best = -1;
    for (int v : graph_.cell_vertices(j)) {
      if (hops[v] >= 0 && (best < 0 || hops[v] < best)) best = hops[v];
    }
    if (best >= 0) result[j] = best + 1;
  }
  return result;
}

double GeodesicOracle::distance(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  return atom_hops(i, -1)[j] * graph_.edge_length();
}

void GeodesicOracle::neighbors_within(std::size_t i, double radius,
                                      std::vector<Neighbor>& out) const {
  out.clear();
  const double len = graph_.edge_length();
  const int max_hops = static_cast<int>(std::ceil(radius / len)) + 1;
  const auto hops = atom_hops(i, max_hops);
  for (std::size_t j = 0; j < atom_count_; ++j) {
    if (hops[j] < 0) continue;
    const double d = hops[j] * len;
    if (inside_ball(d, radius)) out.push_back({j, d});
  }
}

std::unique_ptr<DistanceOracle> make_oracle(const DiscreteMeasure& measure,
                                            Metric metric, NeighborSearch search) {
  if (metric == Metric::Geodesic) return std::make_unique<GeodesicOracle>(measure);
  return std::make_unique<EuclideanOracle>(
      measure.atoms(), measure.spec().resolution_floor(measure.level()), search);
}

void require_resolved(const DiscreteMeasure& measure, double radius) {
  const double floor = measure.spec().resolution_floor(measure.level());
  if (radius < floor * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "radius " << radius << " is below the resolution floor " << floor
        << " of level " << measure.level();
    throw ContractError(msg.str());
  }
}

double ball_measure(const DiscreteMeasure& measure, const DistanceOracle& oracle,
                    std::size_t x, double radius) {
  require_resolved(measure, radius);
  std::vector<Neighbor> ball;
  oracle.neighbors_within(x, radius, ball);
  return static_cast<double>(ball.size()) * measure.weight();
}

Word sample_point(const IfsSpec& spec, int level, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> digit(0, spec.branch_count - 1);
  Word w;
  w.digits.resize(level);
  for (auto& d : w.digits) d = static_cast<std::uint8_t>(digit(rng));
  return w;
}

EpsNet build_eps_net(const DiscreteMeasure& measure, const DistanceOracle& oracle,
                     double epsilon) {
  require_resolved(measure, epsilon);
  EpsNet net;
  net.epsilon = epsilon;
  const std::size_t n = measure.size();
  constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
  net.assignment.assign(n, kUnassigned);
  std::vector<Neighbor> ball;
  for (std::size_t i = 0; i < n; ++i) {
    if (net.assignment[i] != kUnassigned) continue;
    // i is at distance >= eps from every earlier centre.
    const std::size_t pos = net.centers.size();
    net.centers.push_back(i);
    oracle.neighbors_within(i, epsilon, ball);
    for (const auto& nb : ball) {
      if (net.assignment[nb.index] == kUnassigned) net.assignment[nb.index] = pos;
    }
  }
  for (int k : {2, 5}) {
    std::vector<int> count(n, 0);
    for (auto c : net.centers) {
      oracle.neighbors_within(c, k * epsilon, ball);
      for (const auto& nb : ball) ++count[nb.index];
    }
    const int worst = n ? *std::max_element(count.begin(), count.end()) : 0;
    (k == 2 ? net.overlap_k2 : net.overlap_k5) = worst;
  }
  return net;
}

}  // namespace ksfrac
