#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ksfrac/error.hpp"
#include "ksfrac/functions.hpp"
#include "ksfrac/heat.hpp"

using namespace ksfrac;

namespace {

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace

TEST_CASE("walk kernel basics") {
  const WalkKernel walk(build_level_graph(IfsSpec::gasket(), 3));
  CHECK(walk.time_scale() == doctest::Approx(std::pow(5.0, -3)));
  CHECK_THROWS_AS(WalkKernel(build_level_graph(IfsSpec::gasket(), 1), 0.0), ContractError);
  CHECK_THROWS_AS(WalkKernel(build_level_graph(IfsSpec::gasket(), 1), 1.0), ContractError);
  const auto& pi = walk.stationary();
  CHECK(std::accumulate(pi.begin(), pi.end(), 0.0) == doctest::Approx(1.0));
  for (std::size_t x = 0; x < walk.size(); ++x) {
    double row = 0.0;
    for (std::size_t y = 0; y < walk.size(); ++y) {
      const double pxy = walk.transition(static_cast<int>(x), static_cast<int>(y));
      row += pxy;
      // Reversibility.
      CHECK(pi[x] * pxy ==
            doctest::Approx(pi[y] * walk.transition(static_cast<int>(y), static_cast<int>(x))));
    }
    CHECK(row == doctest::Approx(1.0));
  }
}

TEST_CASE("heat kernel rows") {
  const WalkKernel walk(build_level_graph(IfsSpec::vicsek(), 2));
  const auto zero = heat_kernel_row(walk, 0, 7);
  for (std::size_t y = 0; y < zero.size(); ++y) CHECK(zero[y] == (y == 7 ? 1.0 : 0.0));
  // Row of the dense matrix power.
  const Eigen::MatrixXd P = walk.dense();
  Eigen::MatrixXd Pk = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  for (int k = 0; k < 5; ++k) Pk = Pk * P;
  const auto five = heat_kernel_row(walk, 5, 7);
  for (std::size_t y = 0; y < five.size(); ++y) CHECK(five[y] == doctest::Approx(Pk(7, y)));
  // Mixing: total variation to pi decreases.
  double prev = 2.0;
  for (int k : {1, 10, 100, 1000, 10000}) {
    const double tv = total_variation(heat_kernel_row(walk, k, 7), walk.stationary());
    CHECK(tv < prev);
    prev = tv;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("difference integrals: quadratic route equals the dense route") {
  const LevelGraph g = build_level_graph(IfsSpec::gasket(), 3);
  const WalkKernel walk(g);
  const VertexFunction f = evaluate(fn::DistancePower{1, 0.5}, g);
  for (int k : {1, 3, 8, 20}) {
    CHECK(heat_difference_integral_quadratic(f, walk, k) ==
          doctest::Approx(heat_difference_integral(f, walk, 2.0, k)).epsilon(1e-10));
  }
}

TEST_CASE("heat Besov seminorm") {
  const LevelGraph g = build_level_graph(IfsSpec::gasket(), 4);
  const WalkKernel walk(g);
  const auto times = dyadic_times(walk);
  REQUIRE(!times.empty());
  CHECK(times.front() == walk.time_scale());
  CHECK(times.back() < 1.0);
  const HeatBesovReport zero =
      heat_besov_seminorm(evaluate(fn::Constant{2.0}, g), walk, 2.0, 0.5, times);
  for (double v : zero.values) CHECK(v == 0.0);
  const VertexFunction f = evaluate(fn::Coordinate{0}, g);
  const HeatBesovReport r3 = heat_besov_seminorm(f, walk, 3.0, 0.5, times);
  for (std::size_t i = 0; i < r3.times.size(); ++i) {
    const double direct = std::pow(r3.times[i], -0.5) *
                          std::cbrt(heat_difference_integral(f, walk, 3.0, r3.steps[i]));
    CHECK(r3.values[i] == doctest::Approx(direct));
  }
  CHECK(r3.to_csv().rfind("k,t,value\n", 0) == 0);
  const std::vector<double> tiny{0.1 * walk.time_scale()};
  CHECK_THROWS_AS(heat_besov_seminorm(f, walk, 2.0, 0.5, tiny), ContractError);
  const std::vector<double> late{2.0};
  CHECK_THROWS_AS(heat_besov_seminorm(f, walk, 2.0, 0.5, late), ContractError);
}

TEST_CASE("walk dimension estimate") {
  const WalkKernel walk(build_level_graph(IfsSpec::gasket(), 5));
  const auto steps = geometric_steps(4, 256, 2.0);
  CHECK(steps == std::vector<int>{4, 8, 16, 32, 64, 128, 256});
  const WalkDimensionFit fit = estimate_walk_dimension(walk, 10, steps);
  CHECK(fit.slope < 0.0);
  CHECK(fit.walk_dim == doctest::Approx(-IfsSpec::gasket().hausdorff_dim / fit.slope));
  const std::vector<int> saturated{10, 100000};
  CHECK_THROWS_AS(estimate_walk_dimension(walk, 10, saturated), Error);
}
