#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "ksfrac/functions.hpp"
#include "ksfrac/geometry.hpp"

namespace ksfrac {

// Lazy simple random walk P = l I + (1 - l) D^{-1} A on a level graph.
// One step corresponds to time tau_n = time_factor^{-n} (15^{-n} on the
// Vicsek set, 5^{-n} on the gasket).
class WalkKernel {
 public:
  explicit WalkKernel(LevelGraph graph, double laziness = 0.5);

  const LevelGraph& graph() const { return graph_; }
  double laziness() const { return laziness_; }
  double time_scale() const { return time_scale_; }
  std::size_t size() const { return graph_.vertex_count(); }

  double transition(int x, int y) const;
  // Degree-proportional, the reversible stationary law.
  const std::vector<double>& stationary() const { return stationary_; }
  // row * P
  std::vector<double> step(std::span<const double> row) const;
  // P * column
  std::vector<double> apply(std::span<const double> column) const;
  Eigen::MatrixXd dense() const;

 private:
  LevelGraph graph_;
  double laziness_;
  double time_scale_;
  std::vector<double> stationary_;
};

// x-th row of P^k.
std::vector<double> heat_kernel_row(const WalkKernel& walk, int steps, int x);

// sum_x pi_x sum_y P^k(x, y) |f(x) - f(y)|^p from the dense matrix power.
double heat_difference_integral(const VertexFunction& f, const WalkKernel& walk, double p,
                                int steps);
// Same quantity for p = 2 through 2 (<f, f>_pi - <f, P^k f>_pi).
double heat_difference_integral_quadratic(const VertexFunction& f, const WalkKernel& walk,
                                          int steps);

struct HeatBesovReport {
  double p = 2.0;
  double beta = 0.0;
  std::vector<double> times;
  std::vector<int> steps;
  std::vector<double> values;  // t^{-beta} (integral)^{1/p}
  double sup = 0.0;

  std::string to_csv() const;
};

void to_json(nlohmann::json& j, const HeatBesovReport& report);

// t_k = tau_n 2^k for k = 0, 1, ... while t < diam^{d_w}.
std::vector<double> dyadic_times(const WalkKernel& walk);

// Each t maps to round(t / tau_n) >= 1 steps; ContractError otherwise.
HeatBesovReport heat_besov_seminorm(const VertexFunction& f, const WalkKernel& walk,
                                    double p, double beta, std::span<const double> times);

struct WalkDimensionFit {
  double slope = 0.0;  // of log P^k(x, x) against log k, about -d_h/d_w
  double intercept = 0.0;
  double r_squared = 0.0;
  double walk_dim = 0.0;  // -d_h / slope
  std::vector<int> steps;
  std::vector<double> return_probability;
};

// Throws Error when the largest k has already mixed (P^k(x,x) < 2 pi_x).
WalkDimensionFit estimate_walk_dimension(const WalkKernel& walk, int x,
                                         std::span<const int> steps);

// Integer grid round(first * ratio^j) up to `last`, deduplicated.
std::vector<int> geometric_steps(int first, int last, double ratio);

}  // namespace ksfrac
