#include <doctest.h>

#include <cmath>
#include <random>

#include "ksfrac/energy.hpp"
#include "ksfrac/error.hpp"
#include "ksfrac/functions.hpp"
#include "ksfrac/harmonic.hpp"

using namespace ksfrac;

TEST_CASE("cell solve: constants and the p = 2 example") {
  const CellSolve c = cell_solve({0.7, 0.7, 0.7}, 3.0);
  for (double b : c.interior) CHECK(b == 0.7);
  CHECK(c.raw_energy == 0.0);
  // Quadratic minimization solved by hand: 5 b_k = 2 a_i + 2 a_j + a_k.
  const CellSolve s = cell_solve({1.0, 0.0, 0.0}, 2.0);
  CHECK(s.interior[0] == doctest::Approx(0.2));
  CHECK(s.interior[1] == doctest::Approx(0.4));
  CHECK(s.interior[2] == doctest::Approx(0.4));
  CHECK(s.raw_energy == doctest::Approx(2.0 * 0.6));
  CHECK(triangle_energy({1.0, 0.0, 0.0}, 2.0) == 2.0);
  CHECK_THROWS_AS(cell_solve({1, 0, 0}, 1.0), Unsupported);
}

TEST_CASE("iterative cell solve reaches a minimum for p != 2") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double p : {1.5, 3.0, 4.0}) {
    for (int i = 0; i < 30; ++i) {
      const Triple a{u(rng), u(rng), u(rng)};
      const CellSolve s = cell_solve(a, p);
      const double best = cell_objective(a, s.interior, p);
      // Convexity: no nearby point does better.
      for (int k = 0; k < 3; ++k) {
        for (double h : {1e-4, -1e-4}) {
          Triple b = s.interior;
          b[k] += h;
          CHECK(cell_objective(a, b, p) >= best - 1e-14);
        }
      }
      // Maximum principle.
      const double lo = std::min({a[0], a[1], a[2]});
      const double hi = std::max({a[0], a[1], a[2]});
      for (double b : s.interior) CHECK((b >= lo - 1e-12 && b <= hi + 1e-12));
    }
  }
}

TEST_CASE("symmetric boundary data at p < 2") {
  const CellSolve s = cell_solve({1.0, 0.0, 0.0}, 1.5);
  CHECK(s.interior[1] == doctest::Approx(s.interior[2]).epsilon(1e-12));
  CHECK(s.interior[1] == doctest::Approx(2.0 * s.interior[0]).epsilon(1e-6));
  // Nearly symmetric data, the hard case for the stopping rule.
  const CellSolve t = cell_solve({1.0, 0.0, 1.3e-6}, 1.5);
  CHECK(t.gradient_norm < 1e-6);
}

TEST_CASE("gasket extension") {
  const IfsSpec& spec = IfsSpec::gasket();
  const LevelGraph g0 = build_level_graph(spec, 0);
  VertexFunction f{Family::Gasket, 0, {1.0, 0.0, 0.0}};
  const VertexFunction e = extend_gasket(f, 1, 2.0);
  const LevelGraph g1 = build_level_graph(spec, 1);
  REQUIRE(e.values.size() == 6);
  // Midpoint opposite corner k carries (2 a_i + 2 a_j + a_k)/5.
  auto at = [&](double x, double y) {
    for (std::size_t v = 0; v < g1.vertex_count(); ++v) {
      if (euclidean_distance(g1.points()[v], {x, y}) < 1e-12) return e.values[v];
    }
    FAIL("vertex not found");
    return 0.0;
  };
  const double h = std::sqrt(3.0) / 4.0;
  CHECK(at(0.5, 0.0) == doctest::Approx(0.4));
  CHECK(at(0.25, h) == doctest::Approx(0.4));
  CHECK(at(0.75, h) == doctest::Approx(0.2));
  CHECK(discrete_energy(e, g1, 2.0, 0.6) == doctest::Approx(discrete_energy(f, g0, 2.0, 0.6)));
  VertexFunction c{Family::Gasket, 0, {2.0, 2.0, 2.0}};
  for (double v : extend_gasket(c, 3, 3.0).values) CHECK(v == 2.0);
  CHECK_THROWS_AS(extend_gasket(f, 2, 1.0), Unsupported);
}

TEST_CASE("harmonic extensions keep the renormalized energy for every p") {
  const IfsSpec& spec = IfsSpec::gasket();
  const VertexFunction f{Family::Gasket, 0, {1.0, 0.3, -0.4}};
  for (double p : {1.5, 2.0, 3.0}) {
    const double rp = estimate_rp(p, 8).r_hat;
    const double e0 = discrete_energy(f, build_level_graph(spec, 0), p, rp);
    for (int m = 1; m <= 4; ++m) {
      const double em = discrete_energy(extend_gasket(f, m, p), build_level_graph(spec, m), p, rp);
      // Exact at p = 2; for other p, r_p is the limit of the energy ratios.
      CHECK(em == doctest::Approx(e0).epsilon(p == 2.0 ? 1e-12 : 0.05));
    }
  }
}

TEST_CASE("vicsek extension is linear along edges") {
  const IfsSpec& spec = IfsSpec::vicsek();
  const LevelGraph g0 = build_level_graph(spec, 0);
  VertexFunction f{Family::Vicsek, 0, std::vector<double>(g0.vertex_count(), 0.0)};
  // Corner (0,0) carries 1, the rest 0: the diagonal edge gets 2/3, 1/3.
  int corner = -1;
  for (std::size_t v = 0; v < g0.vertex_count(); ++v) {
    if (euclidean_distance(g0.points()[v], {0, 0}) < 1e-12) corner = static_cast<int>(v);
  }
  f.values[corner] = 1.0;
  const VertexFunction e = extend_vicsek(f, 1);
  const LevelGraph g1 = build_level_graph(spec, 1);
  for (std::size_t v = 0; v < g1.vertex_count(); ++v) {
    const Point p = g1.points()[v];
    if (std::abs(p.x - 1.0 / 3.0) < 1e-12 && std::abs(p.y - 1.0 / 3.0) < 1e-12) {
      CHECK(e.values[v] == doctest::Approx(1.0 / 3.0));
    }
    if (std::abs(p.x - 1.0 / 6.0) < 1e-12 && std::abs(p.y - 1.0 / 6.0) < 1e-12) {
      CHECK(e.values[v] == doctest::Approx(2.0 / 3.0));
    }
  }
  for (double v : extend_vicsek(VertexFunction{Family::Vicsek, 0, std::vector<double>(5, 1.5)}, 2).values) {
    CHECK(v == 1.5);
  }
}

TEST_CASE("renormalization constants") {
  const RpEstimate two = estimate_rp(2.0, 6);
  for (double r : two.ratios) CHECK(r == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(two.r_hat == doctest::Approx(0.6).epsilon(1e-12));
  for (double p : {1.5, 3.0, 4.0}) {
    const RpEstimate e = estimate_rp(p, 6);
    CHECK(e.r_hat >= rp_lower_bound(p));
    CHECK(e.r_hat < rp_upper_bound(p));
  }
  CHECK(rp_lower_bound(3.0) == 0.25);
  CHECK(rp_upper_bound(3.0) == 0.375);
  CHECK_THROWS_AS(estimate_rp(1.0, 4), Unsupported);
}

TEST_CASE("critical exponent formulas") {
  const double dh = std::log(5.0) / std::log(3.0);
  CHECK(critical_exponent(IfsSpec::vicsek(), 1.0) == doctest::Approx(dh));
  CHECK(critical_exponent(IfsSpec::vicsek(), 2.0) == doctest::Approx(1.0 + (dh - 1.0) / 2.0));
  CHECK(critical_exponent(IfsSpec::gasket(), 2.0, 0.6) ==
        doctest::Approx(std::log(5.0) / (2.0 * std::log(2.0))));
  // p alpha_p non-decreasing, alpha_p non-increasing.
  double prev_a = 1e9, prev_pa = 0.0;
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    const double a = critical_exponent(IfsSpec::vicsek(), p);
    CHECK(a <= prev_a);
    CHECK(p * a >= prev_pa);
    prev_a = a;
    prev_pa = p * a;
  }
}
