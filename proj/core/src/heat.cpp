#include "ksfrac/heat.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ksfrac/error.hpp"
#include "ksfrac/regression.hpp"

namespace ksfrac {

WalkKernel::WalkKernel(LevelGraph graph, double laziness)
    : graph_(std::move(graph)), laziness_(laziness) {
  if (!(laziness > 0.0 && laziness < 1.0)) {
    throw ContractError("WalkKernel: laziness must lie in (0, 1)");
  }
  time_scale_ = std::pow(graph_.spec().time_factor, -graph_.level());
  stationary_.resize(graph_.vertex_count());
  const double total = 2.0 * static_cast<double>(graph_.edge_count());
  for (std::size_t v = 0; v < stationary_.size(); ++v) {
    stationary_[v] = static_cast<double>(graph_.degree(static_cast<int>(v))) / total;
  }
}

double WalkKernel::transition(int x, int y) const {
  double p = (x == y) ? laziness_ : 0.0;
  const auto nb = graph_.neighbors(x);
  const double move = (1.0 - laziness_) / static_cast<double>(nb.size());
  for (int w : nb) {
    if (w == y) p += move;
  }
  return p;
}

std::vector<double> WalkKernel::step(std::span<const double> row) const {
  std::vector<double> next(row.size());
  for (std::size_t y = 0; y < row.size(); ++y) next[y] = laziness_ * row[y];
  for (std::size_t x = 0; x < row.size(); ++x) {
    if (row[x] == 0.0) continue;
    const auto nb = graph_.neighbors(static_cast<int>(x));
    const double share = (1.0 - laziness_) * row[x] / static_cast<double>(nb.size());
    for (int y : nb) next[y] += share;
  }
  return next;
}

std::vector<double> WalkKernel::apply(std::span<const double> column) const {
  std::vector<double> out(column.size());
  for (std::size_t x = 0; x < column.size(); ++x) {
    const auto nb = graph_.neighbors(static_cast<int>(x));
    double s = 0.0;
    for (int y : nb) s += column[y];
    out[x] = laziness_ * column[x] + (1.0 - laziness_) * s / static_cast<double>(nb.size());
  }
  return out;
}

Eigen::MatrixXd WalkKernel::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    P(x, x) = laziness_;
    const auto nb = graph_.neighbors(static_cast<int>(x));
    for (int y : nb) P(x, y) += (1.0 - laziness_) / static_cast<double>(nb.size());
  }
  return P;
}

std::vector<double> heat_kernel_row(const WalkKernel& walk, int steps, int x) {
  if (steps < 0) throw ContractError("heat_kernel_row: negative step count");
  std::vector<double> row(walk.size(), 0.0);
  row[x] = 1.0;
  for (int k = 0; k < steps; ++k) row = walk.step(row);
  return row;
}

namespace {

double pow_abs(double x, double p) {
  const double a = std::abs(x);
  return p == 2.0 ? a * a : std::pow(a, p);
}

// P^k for several k from cached dyadic powers.
class DensePowers {
 public:
  explicit DensePowers(const WalkKernel& walk) { dyadic_.push_back(walk.dense()); }

  Eigen::MatrixXd power(int k) {
    const auto n = dyadic_[0].rows();
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    for (int bit = 0; (k >> bit) != 0; ++bit) {
      while (static_cast<int>(dyadic_.size()) <= bit) {
        dyadic_.push_back(dyadic_.back() * dyadic_.back());
      }
      if ((k >> bit) & 1) result = result * dyadic_[bit];
    }
    return result;
  }

 private:
  std::vector<Eigen::MatrixXd> dyadic_;
};

double difference_integral(const VertexFunction& f, const WalkKernel& walk, double p,
                           const Eigen::MatrixXd& Pk) {
  const auto& pi = walk.stationary();
  double total = 0.0;
  for (Eigen::Index x = 0; x < Pk.rows(); ++x) {
    double row = 0.0;
    for (Eigen::Index y = 0; y < Pk.cols(); ++y) {
      row += Pk(x, y) * pow_abs(f.values[x] - f.values[y], p);
    }
    total += pi[x] * row;
  }
  return total;
}

void check_function(const VertexFunction& f, const WalkKernel& walk) {
  if (f.family != walk.graph().family() || f.level != walk.graph().level() ||
      f.values.size() != walk.size()) {
    throw ContractError("heat: function does not live on the walk's graph");
  }
}

}  // namespace

double heat_difference_integral(const VertexFunction& f, const WalkKernel& walk, double p,
                                int steps) {
  check_function(f, walk);
  DensePowers powers(walk);
  return difference_integral(f, walk, p, powers.power(steps));
}

double heat_difference_integral_quadratic(const VertexFunction& f, const WalkKernel& walk,
                                          int steps) {
  check_function(f, walk);
  std::vector<double> g = f.values;
  for (int k = 0; k < steps; ++k) g = walk.apply(g);
  const auto& pi = walk.stationary();
  double ff = 0.0, fg = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    ff += pi[x] * f.values[x] * f.values[x];
    fg += pi[x] * f.values[x] * g[x];
  }
  return std::max(0.0, 2.0 * (ff - fg));
}

std::vector<double> dyadic_times(const WalkKernel& walk) {
  const auto& spec = walk.graph().spec();
  const double horizon = std::pow(spec.euclidean_diameter, spec.walk_dim);
  std::vector<double> times;
  for (double t = walk.time_scale(); t < horizon; t *= 2.0) times.push_back(t);
  return times;
}

HeatBesovReport heat_besov_seminorm(const VertexFunction& f, const WalkKernel& walk,
                                    double p, double beta, std::span<const double> times) {
  check_function(f, walk);
  if (p < 1.0) throw ContractError("heat_besov_seminorm: p must be >= 1");
  const auto& spec = walk.graph().spec();
  const double horizon = std::pow(spec.euclidean_diameter, spec.walk_dim);
  HeatBesovReport rep;
  rep.p = p;
  rep.beta = beta;
  for (double t : times) {
    const long k = std::lround(t / walk.time_scale());
    if (!(t > 0.0) || k < 1) {
      std::ostringstream msg;
      msg << "heat_besov_seminorm: t = " << t << " is below one step (" << walk.time_scale()
          << ")";
      throw ContractError(msg.str());
    }
    if (t >= horizon) throw ContractError("heat_besov_seminorm: t beyond diam^{d_w}");
    rep.times.push_back(t);
    rep.steps.push_back(static_cast<int>(k));
  }
  std::optional<DensePowers> powers;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    double integral = 0.0;
    if (p == 2.0) {
      integral = heat_difference_integral_quadratic(f, walk, rep.steps[i]);
    } else {
      if (!powers) powers.emplace(walk);
      integral = difference_integral(f, walk, p, powers->power(rep.steps[i]));
    }
    rep.values.push_back(std::pow(rep.times[i], -beta) * std::pow(integral, 1.0 / p));
  }
  rep.sup = rep.values.empty() ? 0.0 : *std::max_element(rep.values.begin(), rep.values.end());
  return rep;
}

std::string HeatBesovReport::to_csv() const {
  std::ostringstream out;
  out.precision(9);
  out << "k,t,value\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << steps[i] << ',' << times[i] << ',' << values[i] << '\n';
  }
  return out.str();
}

void to_json(nlohmann::json& j, const HeatBesovReport& rep) {
  j = {{"p", rep.p},       {"beta", rep.beta},     {"times", rep.times},
       {"steps", rep.steps}, {"values", rep.values}, {"sup", rep.sup}};
}

std::vector<int> geometric_steps(int first, int last, double ratio) {
  std::vector<int> out;
  for (double k = first; k <= last + 0.5; k *= ratio) {
    const int v = static_cast<int>(std::lround(k));
    if (out.empty() || v != out.back()) out.push_back(v);
  }
  return out;
}

WalkDimensionFit estimate_walk_dimension(const WalkKernel& walk, int x,
                                         std::span<const int> steps) {
  if (steps.size() < 2) throw ContractError("estimate_walk_dimension: need >= 2 step counts");
  if (!std::is_sorted(steps.begin(), steps.end()) || steps.front() < 1) {
    throw ContractError("estimate_walk_dimension: steps must be ascending and >= 1");
  }
  WalkDimensionFit fit;
  std::vector<double> row(walk.size(), 0.0);
  row[x] = 1.0;
  int done = 0;
  for (int k : steps) {
    for (; done < k; ++done) row = walk.step(row);
    fit.steps.push_back(k);
    fit.return_probability.push_back(row[x]);
  }
  const double pi_x = walk.stationary()[x];
  if (fit.return_probability.back() < 2.0 * pi_x) {
    std::ostringstream msg;
    msg << "estimate_walk_dimension: grid saturated, P^" << steps.back() << "(x,x) = "
        << fit.return_probability.back() << " is within a factor 2 of pi(x) = " << pi_x;
    throw Error(msg.str());
  }
  std::vector<double> ks(fit.steps.begin(), fit.steps.end());
  const LinearFit line = fit_log_log(ks, fit.return_probability);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r_squared = line.r_squared;
  fit.walk_dim = -walk.graph().spec().hausdorff_dim / line.slope;
  return fit;
}

}  // namespace ksfrac
