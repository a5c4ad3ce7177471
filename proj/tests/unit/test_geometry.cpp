#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "ksfrac/error.hpp"
#include "ksfrac/geometry.hpp"

using namespace ksfrac;

namespace {

// Floyd-Warshall on edge lengths; independent of the BFS in the library.
std::vector<std::vector<double>> all_pairs(const LevelGraph& g) {
  const std::size_t n = g.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const Edge& e : g.edges()) {
    const double len = euclidean_distance(g.points()[e.u], g.points()[e.v]);
    d[e.u][e.v] = std::min(d[e.u][e.v], len);
    d[e.v][e.u] = std::min(d[e.v][e.u], len);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

int find_point(const LevelGraph& g, Point p) {
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (euclidean_distance(g.points()[v], p) < 1e-12) return static_cast<int>(v);
  }
  return -1;
}

}  // namespace

TEST_CASE("level graph sizes follow the recurrences") {
  const IfsSpec& v = IfsSpec::vicsek();
  const IfsSpec& g = IfsSpec::gasket();
  CHECK(build_level_graph(g, 0).vertex_count() == 3);
  CHECK(build_level_graph(g, 0).edge_count() == 3);
  std::size_t vertices = 5;  // |V_0| of the Vicsek set: corners plus centre
  for (int n = 0; n <= 4; ++n) {
    const LevelGraph lg = build_level_graph(v, n);
    CHECK(lg.vertex_count() == vertices);
    CHECK(lg.edge_count() == vertices - 1);  // a tree
    vertices = 5 * vertices - 4;
  }
  CHECK(build_level_graph(v, 2).vertex_count() == 101);
  for (int n = 0; n <= 6; ++n) {
    const LevelGraph lg = build_level_graph(g, n);
    const auto cells = static_cast<std::size_t>(std::pow(3, n + 1));
    CHECK(lg.vertex_count() == (cells + 3) / 2);
    CHECK(lg.edge_count() == cells);
  }
}

TEST_CASE("degrees and cell incidence") {
  const LevelGraph g = build_level_graph(IfsSpec::gasket(), 4);
  int corners = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto d = g.degree(static_cast<int>(v));
    CHECK((d == 2 || d == 4));
    if (d == 2) ++corners;
    CHECK(g.incident_cells(static_cast<int>(v)).size() == d / 2);
  }
  CHECK(corners == 3);
}

TEST_CASE("level 99 is a resource error") {
  CHECK_THROWS_AS(build_level_graph(IfsSpec::gasket(), 99), ResourceError);
  CHECK_THROWS_AS(build_measure(IfsSpec::vicsek(), 99), ResourceError);
}

TEST_CASE("geodesic distance matches all-pairs shortest paths") {
  for (const IfsSpec* spec : {&IfsSpec::vicsek(), &IfsSpec::gasket()}) {
    const LevelGraph g = build_level_graph(*spec, 2);
    const auto d = all_pairs(g);
    for (std::size_t u = 0; u < g.vertex_count(); u += 3) {
      for (std::size_t w = 0; w < g.vertex_count(); ++w) {
        CHECK(geodesic_distance(g, static_cast<int>(u), static_cast<int>(w)) ==
              doctest::Approx(d[u][w]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("hand-counted geodesics at level 1") {
  const LevelGraph g = build_level_graph(IfsSpec::gasket(), 1);
  const int q1 = find_point(g, {0.0, 0.0});
  const int q2 = find_point(g, {1.0, 0.0});
  CHECK(geodesic_distance(g, q1, q1) == 0.0);
  CHECK(geodesic_distance(g, q1, q2) == doctest::Approx(1.0));
  // Vicsek: centre to corner along the diagonal, three edges of length sqrt2/6.
  const LevelGraph v = build_level_graph(IfsSpec::vicsek(), 1);
  const int centre = find_point(v, {0.5, 0.5});
  const int corner = find_point(v, {0.0, 0.0});
  CHECK(geodesic_distance(v, centre, corner) == doctest::Approx(std::sqrt(2.0) / 2.0));
}

TEST_CASE("euclidean distance") {
  CHECK(euclidean_distance({0.3, 0.2}, {0.3, 0.2}) == 0.0);
  CHECK(euclidean_distance({0, 0}, {1, 0}) == 1.0);
  CHECK(euclidean_distance({0, 0}, {1, 1}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("measure atoms and prefix masses") {
  const DiscreteMeasure g1 = build_measure(IfsSpec::gasket(), 1);
  CHECK(g1.size() == 3);
  CHECK(g1.weight() == doctest::Approx(1.0 / 3.0));
  const DiscreteMeasure v3 = build_measure(IfsSpec::vicsek(), 3);
  CHECK(v3.size() == 125);
  CHECK(v3.weight() == doctest::Approx(1.0 / 125.0));
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(v3.prefix_mass(Word::from_index(i, 2, 5)) == doctest::Approx(1.0 / 25.0));
  }
}

TEST_CASE("word indices round-trip") {
  for (std::size_t i = 0; i < 125; ++i) {
    const Word w = Word::from_index(i, 3, 5);
    CHECK(w.level() == 3);
    CHECK(w.index(5) == i);
  }
}

TEST_CASE("euclidean neighbour search: buckets agree with brute force") {
  for (const IfsSpec* spec : {&IfsSpec::vicsek(), &IfsSpec::gasket()}) {
    const DiscreteMeasure mu = build_measure(*spec, 4);
    const auto fast = make_oracle(mu, Metric::Euclidean, NeighborSearch::Bucketed);
    const auto slow = make_oracle(mu, Metric::Euclidean, NeighborSearch::BruteForce);
    std::vector<Neighbor> a, b;
    for (std::size_t i = 0; i < mu.size(); i += 7) {
      for (double r : {0.05, 0.2, 0.7}) {
        fast->neighbors_within(i, r, a);
        slow->neighbors_within(i, r, b);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].index == b[k].index);
      }
    }
  }
}

TEST_CASE("geodesic oracle is a metric comparable to the euclidean one") {
  for (const IfsSpec* spec : {&IfsSpec::vicsek(), &IfsSpec::gasket()}) {
    const DiscreteMeasure mu = build_measure(*spec, 3);
    const auto geo = make_oracle(mu, Metric::Geodesic);
    const auto euc = make_oracle(mu, Metric::Euclidean);
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      CHECK(geo->distance(i, i) == 0.0);
      for (std::size_t j = i + 1; j < mu.size(); ++j) {
        CHECK(geo->distance(i, j) == doctest::Approx(geo->distance(j, i)));
        const double q = geo->distance(i, j) / euc->distance(i, j);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
    }
    CHECK(lo >= 0.99);  // a path is never shorter than the chord
    CHECK(hi < 10.0);
  }
}

TEST_CASE("ball measure") {
  const DiscreteMeasure mu = build_measure(IfsSpec::gasket(), 5);
  const auto oracle = make_oracle(mu, Metric::Euclidean);
  CHECK(ball_measure(mu, *oracle, 17, 1.01) == doctest::Approx(1.0));
  CHECK_THROWS_AS(ball_measure(mu, *oracle, 0, 1e-4), ContractError);
  double prev = 0.0;
  for (double r : {0.2, 0.4, 0.8}) {
    const double b = ball_measure(mu, *oracle, 40, r);
    CHECK(b >= prev);
    prev = b;
  }
}

TEST_CASE("sampling is uniform and reproducible") {
  const IfsSpec& spec = IfsSpec::vicsek();
  std::mt19937_64 rng(99);
  CHECK(sample_point(spec, 0, rng).level() == 0);
  std::vector<int> counts(5, 0);
  const int n = 100000;
  for (int i = 0; i < n / 4; ++i) {
    for (auto d : sample_point(spec, 4, rng).digits) ++counts[d];
  }
  const double sigma = std::sqrt(n * 0.2 * 0.8);
  for (int c : counts) CHECK(std::abs(c - 0.2 * n) <= 3.0 * sigma);
  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 50; ++i) CHECK(sample_point(spec, 6, a) == sample_point(spec, 6, b));
}

TEST_CASE("eps-nets cover, separate and have bounded overlap") {
  const DiscreteMeasure mu = build_measure(IfsSpec::gasket(), 5);
  const auto oracle = make_oracle(mu, Metric::Euclidean);
  CHECK(build_eps_net(mu, *oracle, 2.0).centers.size() == 1);
  const EpsNet net = build_eps_net(mu, *oracle, 0.2);
  for (std::size_t i = 0; i < net.centers.size(); ++i) {
    for (std::size_t j = i + 1; j < net.centers.size(); ++j) {
      CHECK(oracle->distance(net.centers[i], net.centers[j]) >= 0.2 * (1.0 - 1e-9));
    }
  }
  for (std::size_t x = 0; x < mu.size(); ++x) {
    CHECK(oracle->distance(x, net.centers[net.assignment[x]]) < 0.2);
  }
  CHECK(net.overlap_k2 >= 1);
  CHECK(net.overlap_k5 >= net.overlap_k2);
}
