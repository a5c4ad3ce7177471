// Seeded randomized invariants across modules.

#include <doctest.h>

#include <cmath>
#include <random>

#include "ksfrac/analysis.hpp"
#include "ksfrac/energy.hpp"
#include "ksfrac/harmonic.hpp"
#include "ksfrac/heat.hpp"

using namespace ksfrac;

namespace {

std::vector<double> random_values(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("KS profile: homogeneity, shift invariance, truncation contraction") {
  std::mt19937_64 rng(2024);
  for (const IfsSpec* spec : {&IfsSpec::vicsek(), &IfsSpec::gasket()}) {
    const DiscreteMeasure mu = build_measure(*spec, 4);
    const auto oracle = make_oracle(mu, Metric::Euclidean);
    const auto radii = default_radii(*spec, 4);
    for (int trial = 0; trial < 5; ++trial) {
      CellFunction f{spec->family, 4, random_values(mu.size(), rng)};
      for (double p : {1.0, 1.5, 2.0, 3.0}) {
        const auto base = ks_profile(f, mu, *oracle, p, radii);
        CellFunction g = f;
        for (auto& v : g.values) v = -2.0 * v + 7.0;
        const auto scaled = ks_profile(g, mu, *oracle, p, radii);
        CellFunction t{spec->family, 4, truncate(f.values, -0.3, 0.8)};
        const auto trunc = ks_profile(t, mu, *oracle, p, radii);
        for (std::size_t k = 0; k < radii.size(); ++k) {
          CHECK(scaled[k] == doctest::Approx(std::pow(2.0, p) * base[k]).epsilon(1e-10));
          CHECK(trunc[k] <= base[k] * (1.0 + 1e-12));
        }
      }
    }
  }
}

TEST_CASE("discrete energies: homogeneity and Vicsek monotonicity under extension") {
  std::mt19937_64 rng(77);
  const IfsSpec& spec = IfsSpec::vicsek();
  const LevelGraph g1 = build_level_graph(spec, 1);
  const LevelGraph g3 = build_level_graph(spec, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const VertexFunction f{Family::Vicsek, 1, random_values(g1.vertex_count(), rng)};
    for (double p : {1.0, 2.0, 3.5}) {
      const double e = discrete_energy(f, g1, p);
      VertexFunction h = f;
      for (auto& v : h.values) v *= 3.0;
      CHECK(discrete_energy(h, g1, p) == doctest::Approx(std::pow(3.0, p) * e));
      CHECK(discrete_energy(extend_vicsek(f, 3), g3, p) == doctest::Approx(e).epsilon(1e-12));
    }
  }
}

TEST_CASE("cell solve is affine-equivariant and symmetric") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double p : {1.5, 2.0, 3.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Triple a{u(rng), u(rng), u(rng)};
      const Triple b = cell_solve(a, p).interior;
      const Triple shifted = cell_solve({3.0 * a[0] + 1.0, 3.0 * a[1] + 1.0, 3.0 * a[2] + 1.0}, p)
                                 .interior;
      const Triple rotated = cell_solve({a[1], a[2], a[0]}, p).interior;
      for (int k = 0; k < 3; ++k) {
        CHECK(shifted[k] == doctest::Approx(3.0 * b[k] + 1.0).epsilon(1e-9));
        CHECK(rotated[k] == doctest::Approx(b[(k + 1) % 3]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("heat semigroup contracts the quadratic difference integral in time") {
  std::mt19937_64 rng(9);
  const LevelGraph g = build_level_graph(IfsSpec::gasket(), 3);
  const WalkKernel walk(g);
  const VertexFunction f{Family::Gasket, 3, random_values(g.vertex_count(), rng)};
  double prev = 0.0;
  for (int k = 1; k <= 64; k *= 2) {
    const double v = heat_difference_integral_quadratic(f, walk, k);
    CHECK(v >= prev - 1e-12);  // 2<f, (I - P^k) f> grows with k for lazy P >= 0
    prev = v;
  }
}
