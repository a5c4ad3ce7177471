#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "ksfrac/energy.hpp"
#include "ksfrac/error.hpp"
#include "ksfrac/functions.hpp"
#include "ksfrac/geometry.hpp"

using namespace ksfrac;

namespace {

// Direct O(n^2) evaluation of G_p(f, r) from the definition.
double brute_profile(const CellFunction& f, const DiscreteMeasure& mu, double p, double r) {
  const auto atoms = mu.atoms();
  const double w = mu.weight();
  double total = 0.0;
  for (std::size_t x = 0; x < atoms.size(); ++x) {
    double ball = 0.0, sum = 0.0;
    for (std::size_t y = 0; y < atoms.size(); ++y) {
      if (!inside_ball(euclidean_distance(atoms[x], atoms[y]), r)) continue;
      ball += w;
      sum += w * std::pow(std::abs(f.values[y] - f.values[x]), p);
    }
    total += w * sum / ball;
  }
  return total;
}

CellFunction random_cells(const DiscreteMeasure& mu, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CellFunction f{mu.family(), mu.level(), std::vector<double>(mu.size())};
  for (auto& v : f.values) v = u(rng);
  return f;
}

}  // namespace

TEST_CASE("simple evaluations") {
  const LevelGraph g = build_level_graph(IfsSpec::gasket(), 0);
  const VertexFunction c = evaluate(fn::Constant{3.0}, g);
  for (double v : c.values) CHECK(v == 3.0);
  // Unit-side frame: corners (0,0), (1,0), (1/2, sqrt3/2).
  const VertexFunction x = evaluate(fn::Coordinate{0}, g);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    CHECK(x.values[v] == doctest::Approx(g.points()[v].x));
  }
  double sum = 0.0;
  for (double v : x.values) sum += v;
  CHECK(sum == doctest::Approx(1.5));
  const VertexFunction d = evaluate(fn::DistancePower{0, 1.0}, g);
  CHECK(d.values[0] == 0.0);
}

TEST_CASE("family-specific members are rejected on the other family") {
  const LevelGraph g = build_level_graph(IfsSpec::gasket(), 1);
  CHECK_THROWS_AS(evaluate(fn::PiecewiseAffineVicsek{0, {1, 0, 0, 0, 0}}, g), FamilyMismatch);
  const LevelGraph v = build_level_graph(IfsSpec::vicsek(), 1);
  CHECK_THROWS_AS(evaluate(fn::HarmonicExtensionGasket{}, v), FamilyMismatch);
}

TEST_CASE("function specs round-trip through json") {
  for (const IfsSpec* spec : {&IfsSpec::vicsek(), &IfsSpec::gasket()}) {
    for (const auto& member : corpus(*spec, 2.0)) {
      // FunctionSpec is a std::variant, so the converters are called directly.
      nlohmann::json j;
      to_json(j, member);
      FunctionSpec back;
      from_json(j, back);
      CHECK(label(back) == label(member));
    }
  }
}

TEST_CASE("restriction") {
  const DiscreteMeasure mu = build_measure(IfsSpec::vicsek(), 4);
  const CellFunction c = evaluate(fn::Constant{2.5}, mu);
  for (double v : restrict_to_vertices(c, 2).values) CHECK(v == 2.5);
  // Lipschitz members: restriction of the fine evaluation approaches the
  // vertex values at rate Lip * diam * rho^n.
  for (const IfsSpec* spec : {&IfsSpec::vicsek(), &IfsSpec::gasket()}) {
    const int fine = spec->family == Family::Vicsek ? 6 : 8;
    const DiscreteMeasure m = build_measure(*spec, fine);
    const CellFunction f = evaluate(fn::Coordinate{0}, m);
    for (int n = 2; n <= 4; ++n) {
      const LevelGraph g = build_level_graph(*spec, n);
      const VertexFunction exact = evaluate(fn::Coordinate{0}, g);
      const VertexFunction r = restrict_to_vertices(f, n);
      double err = 0.0;
      for (std::size_t v = 0; v < exact.values.size(); ++v) {
        err = std::max(err, std::abs(exact.values[v] - r.values[v]));
      }
      CHECK(err <= spec->euclidean_diameter * std::pow(spec->ratio(), n));
    }
  }
}

TEST_CASE("KS profile equals the brute-force double sum") {
  for (const IfsSpec* spec : {&IfsSpec::vicsek(), &IfsSpec::gasket()}) {
    const DiscreteMeasure mu = build_measure(*spec, 4);
    const auto oracle = make_oracle(mu, Metric::Euclidean);
    const CellFunction f = random_cells(mu, 4);
    const std::vector<double> radii = default_radii(*spec, 4);
    for (double p : {1.0, 2.0, 3.0}) {
      const auto prof = ks_profile(f, mu, *oracle, p, radii);
      const auto threaded = ks_profile(f, mu, *oracle, p, radii, 3);
      for (std::size_t k = 0; k < radii.size(); ++k) {
        CHECK(prof[k] == doctest::Approx(brute_profile(f, mu, p, radii[k])).epsilon(1e-12));
        CHECK(prof[k] == threaded[k]);  // bitwise
      }
    }
  }
}

TEST_CASE("energy report") {
  const IfsSpec& spec = IfsSpec::gasket();
  const DiscreteMeasure mu = build_measure(spec, 5);
  const auto oracle = make_oracle(mu, Metric::Euclidean);
  EnergyParams params{2.0, 1.16, default_radii(spec, 5), Metric::Euclidean};
  const EnergyReport zero = energy_report(evaluate(fn::Constant{1.0}, mu), mu, *oracle, params);
  for (double e : zero.energies) CHECK(e == 0.0);
  CHECK(zero.sup == 0.0);
  const CellFunction f = evaluate(fn::Coordinate{1}, mu);
  const EnergyReport rep = energy_report(f, mu, *oracle, params);
  for (std::size_t k = 0; k < rep.radii.size(); ++k) {
    CHECK(rep.energies[k] * std::pow(rep.radii[k], 2.0 * 1.16) ==
          doctest::Approx(rep.profile[k]));
    CHECK(ks_functional(f, mu, *oracle, 2.0, 1.16, rep.radii[k]) ==
          doctest::Approx(rep.energies[k]));
  }
  const auto n = rep.radii.size();
  CHECK(rep.liminf_proxy == std::min(rep.energies[n - 1], rep.energies[n - 2]));
  CHECK(rep.to_csv().rfind("r,E,G\n", 0) == 0);
  params.radii = {0.1, 0.2};
  CHECK_THROWS_AS(energy_report(f, mu, *oracle, params), ContractError);
  params.radii = {1e-4};
  CHECK_THROWS_AS(energy_report(f, mu, *oracle, params), ContractError);
}

TEST_CASE("discrete energies") {
  const IfsSpec& v = IfsSpec::vicsek();
  const LevelGraph g = build_level_graph(v, 2);
  const VertexFunction c = evaluate(fn::Constant{4.0}, g);
  CHECK(discrete_energy(c, g, 2.0) == 0.0);
  const VertexFunction x = evaluate(fn::Coordinate{0}, g);
  double raw = 0.0;
  for (const Edge& e : g.edges()) raw += std::pow(std::abs(x.values[e.u] - x.values[e.v]), 3.0);
  CHECK(raw_edge_energy(x, g, 3.0) == doctest::Approx(raw));
  CHECK(discrete_energy(x, g, 3.0) == doctest::Approx(std::pow(3.0, 2.0 * 2) * raw));
  const LevelGraph s = build_level_graph(IfsSpec::gasket(), 3);
  const VertexFunction y = evaluate(fn::Coordinate{1}, s);
  CHECK(discrete_energy(y, s, 2.0, 0.6) ==
        doctest::Approx(raw_edge_energy(y, s, 2.0) * std::pow(0.6, -3)));
}

TEST_CASE("convexity embedding at q = p is the triangle inequality for |.|") {
  const IfsSpec& spec = IfsSpec::vicsek();
  const DiscreteMeasure mu = build_measure(spec, 4);
  const auto oracle = make_oracle(mu, Metric::Euclidean);
  const auto radii = default_radii(spec, 4);
  const CellFunction f = random_cells(mu, 8);
  const ConvexityCheck c = convexity_embed_check(f, mu, *oracle, 2.0, 2.0, 1.2, radii);
  CHECK(c.pass);
  CHECK(c.constant <= 1.0 + 1e-12);
  const ConvexityCheck z =
      convexity_embed_check(evaluate(fn::Constant{1.0}, mu), mu, *oracle, 2.0, 1.5, 1.2, radii);
  CHECK(z.lhs == 0.0);
  CHECK(z.pass);
}

TEST_CASE("lp norm") {
  const std::vector<double> v{1.0, -2.0, 2.0, 0.0};
  CHECK(lp_norm(v, 0.25, 2.0) == doctest::Approx(1.5));
  CHECK(lp_norm(v, 0.25, 1.0) == doctest::Approx(1.25));
}
