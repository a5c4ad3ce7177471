#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ksfrac/energy.hpp"
#include "ksfrac/functions.hpp"
#include "ksfrac/geometry.hpp"

namespace ksfrac {

struct AnalysisOptions {
  Metric metric = Metric::Euclidean;
  int threads = 1;
  std::uint64_t seed = 1;
};

// ---------------------------------------------------------------- scanning

// diam * rho^{k / per_period}, k = 0, 1, ... down to the resolution floor.
std::vector<double> scan_radii(const IfsSpec& spec, int level, int per_period = 2);

struct MemberFit {
  std::string label;
  bool constant = false;
  // log G = a + s log r + c (r / diam)^gamma over the window; the last term
  // absorbs the coarse-scale transient, so s estimates the r -> 0 slope.
  double slope = 0.0;
  double alpha_hat = 0.0;  // slope / p
  double correction = 0.0;
  double r_squared = 0.0;
  // Plain two-parameter log-log fit over the same window, for reference.
  double raw_alpha_hat = 0.0;
  double raw_r_squared = 0.0;
  bool counted = false;  // nonconstant and r_squared >= 0.95
  std::string flag;
  std::vector<double> profile;  // G_p(f, r) on the full grid
};

// Fit of one profile. Radii may come in any order; the window drops the
// coarsest radius and the two finest.
MemberFit fit_profile(std::span<const double> radii, std::span<const double> profile,
                      double p, double diameter, double correction_exponent);

struct ExponentScan {
  Family family = Family::Gasket;
  double p = 2.0;
  int level = 0;
  Metric metric = Metric::Euclidean;
  std::vector<double> radii;
  double window_max = 0.0;
  double window_min = 0.0;
  double correction_exponent = 0.0;
  std::vector<MemberFit> members;
  double alpha_hat = 0.0;  // max over counted members
  std::string envelope_member;
  double alpha_formula = 0.0;
  bool all_fits_ok = true;  // every nonconstant member reached R^2 >= 0.95
};

void to_json(nlohmann::json& j, const ExponentScan& scan);

// Correction exponent d_w - d_h: 1 on the Vicsek set, log(5/3)/log 2 on the
// gasket.
double default_correction_exponent(const IfsSpec& spec);

ExponentScan scan_alpha(const IfsSpec& spec, double p, std::span<const FunctionSpec> corpus,
                        int level, const AnalysisOptions& options = {});

// Closed-form alpha_p; on the gasket r_p comes from estimate_rp(p, 8).
double alpha_formula(const IfsSpec& spec, double p);

// ---------------------------------------------------------------- verdicts

struct Verdict {
  std::string name;
  nlohmann::json params;
  double measured_constant = 0.0;
  std::vector<int> levels;
  bool pass = false;
  nlohmann::json details;
};

void to_json(nlohmann::json& j, const Verdict& verdict);

// max(a, b) / min(a, b); 1 when both vanish, infinity when exactly one does.
double level_ratio(double a, double b);

// ---------------------------------------------------------------- property P

struct WitnessLevel {
  int level = 0;
  std::vector<double> radii;
  std::vector<std::string> labels;     // nonconstant members
  std::vector<double> ratios;          // sup_r E / liminf proxy at alpha
  std::vector<double> finest_above;    // E_{p, alpha + 0.2}(f, r_min)
  double max_ratio = 0.0;
};

struct PWitness {
  double p = 2.0;
  double alpha = 0.0;
  double alpha_above = 0.0;
  std::vector<WitnessLevel> levels;
  std::string roughest_member;  // smallest alpha_hat at the finest level
  std::vector<double> ratio_stability;  // level_ratio of max_ratio, consecutive levels
  std::vector<double> growth;           // roughest member, consecutive levels
  bool stable = false;     // every ratio_stability <= 1.5
  bool diverges = false;   // every growth >= 1.5
};

void to_json(nlohmann::json& j, const PWitness& witness);

PWitness witness_P(const IfsSpec& spec, double p, double alpha,
                   std::span<const FunctionSpec> corpus, std::span<const int> levels,
                   const AnalysisOptions& options = {});

// ---------------------------------------------------------------- Morrey

struct MorreyQuotient {
  double holder = 0.0;      // max |f(x) - f(y)| / d(x, y)^lambda over sampled pairs
  double sup_energy = 0.0;  // sup_r E_{p, alpha}(f, r)^{1/p}
  double quotient = 0.0;    // holder / sup_energy (0 for constants)
};

// Samples `pairs` atom pairs with a seeded generator. Throws ContractError
// unless p * alpha > d_h.
MorreyQuotient morrey_quotient(const CellFunction& f, const DiscreteMeasure& measure,
                               const DistanceOracle& oracle, double p, double alpha,
                               std::span<const double> radii, std::uint64_t seed,
                               int pairs = 10000);

struct MorreyResult {
  std::string label;
  double lambda = 0.0;
  std::vector<int> levels;
  std::vector<MorreyQuotient> quotients;
  double stability = 0.0;  // max level_ratio of consecutive quotients
  bool pass = false;       // stability <= 2
};

MorreyResult morrey_check(const IfsSpec& spec, const FunctionSpec& f, double p, double alpha,
                          std::span<const int> levels, const AnalysisOptions& options = {});

// ---------------------------------------------------------------- GNS / Nash

struct GnsExponents {
  double p = 2.0;
  double alpha = 0.0;
  double Q = 0.0;
  double q = 0.0;  // pQ / (Q - alpha p); negative when alpha p > Q
  double r = 0.0;
  double s = 0.0;
  double theta = 0.0;
};

// theta from 1/r = theta/q + (1 - theta)/s. Throws ContractError when the
// relation has no solution in (0, 1].
GnsExponents gns_exponents(double Q, double p, double alpha, double r, double s);
// r = p, s = 1, theta = (p - 1)Q / (p(alpha + Q) - Q).
GnsExponents nash_exponents(double Q, double p, double alpha);
// (p - 1) d_h / (p - 1 + p d_h).
double vicsek_nash_theta(double p);

struct GnsLevel {
  int level = 0;
  std::vector<std::string> labels;
  std::vector<double> ratios;  // ||f||_r / ((||f||_p + Var_p f)^theta ||f||_s^{1-theta})
  double constant = 0.0;       // max over the corpus
};

struct GnsResult {
  GnsExponents exponents;
  std::vector<GnsLevel> levels;
  double stability = 0.0;
  bool pass = false;
};

void to_json(nlohmann::json& j, const GnsResult& result);

GnsResult gns_check(const IfsSpec& spec, std::span<const FunctionSpec> corpus,
                    const GnsExponents& exponents, std::span<const int> levels,
                    const AnalysisOptions& options = {});

// ---------------------------------------------------------------- quasi-seminorm

struct QuasiLevel {
  int level = 0;
  double triangle_constant = 0.0;  // max Var(f+g) / (Var f + Var g)
  double truncation_excess = 0.0;  // max over r of G(trunc f, r) - G(f, r), relative
  bool truncation_exact = false;
  double layer_cake_constant = 0.0;  // max (sum_k Var(f_k)^p)^{1/p} / Var f
};

struct QuasiResult {
  double p = 2.0;
  double alpha = 0.0;
  std::vector<QuasiLevel> levels;
  double triangle_stability = 0.0;
  double layer_cake_stability = 0.0;
  bool pass = false;
};

void to_json(nlohmann::json& j, const QuasiResult& result);

// (f - t)^+ ∧ s pointwise.
std::vector<double> truncate(std::span<const double> values, double t, double s);

QuasiResult quasi_seminorm_checks(const IfsSpec& spec, std::span<const FunctionSpec> corpus,
                                  double p, double alpha, std::span<const int> levels,
                                  const AnalysisOptions& options = {});

// ---------------------------------------------------------------- exponents in p

struct MonotonicityResult {
  std::vector<double> ps;
  std::vector<double> alpha_hat;
  bool p_alpha_nondecreasing = false;
  bool alpha_nonincreasing = false;
  bool below_chaining_bound = false;  // alpha_hat <= 1 + Q/p + 0.1
  bool at_least_one = false;          // alpha_hat >= 1 - 0.05
  bool pass = false;
};

void to_json(nlohmann::json& j, const MonotonicityResult& result);

// Scans sorted by p; monotonicity is checked with `tolerance` slack.
MonotonicityResult exponent_monotonicity(std::span<const ExponentScan> scans, double Q,
                                         double tolerance = 0.05);

struct ExponentBand {
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

// p <= 2: d_w/2 <= alpha <= (1 - 2/p)(d_w - d_h) + d_w/p; reversed for p >= 2.
ExponentBand walk_dimension_band(const IfsSpec& spec, double p, double alpha_hat,
                                 double slack = 0.1);

// ---------------------------------------------------------------- equivalences

struct BandResult {
  std::vector<int> levels;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> ratios;  // [level][member]
  double low = 0.0;
  double high = 0.0;
  double width = 0.0;  // high / low
  bool pass = false;   // width <= 10
};

void to_json(nlohmann::json& j, const BandResult& result);

// sup_r E_{p,alpha}(f, r)^{1/p} on the level-N measure against
// sup_{m <= N - 2} (E_p^m(f))^{1/p} on the level graphs.
BandResult discrete_equivalence_band(const IfsSpec& spec, std::span<const FunctionSpec> corpus,
                                     double p, double alpha, std::span<const int> levels,
                                     const AnalysisOptions& options = {});

// Heat-semigroup seminorm sup_t t^{-beta} (...)^{1/p} on the level-n graph
// against sup_r E_{p,alpha}(f, r)^{1/p} on the level-n measure.
BandResult heat_besov_band(const IfsSpec& spec, std::span<const FunctionSpec> corpus, double p,
                           double alpha, double beta, int level,
                           const AnalysisOptions& options = {});

}  // namespace ksfrac
