#include "ksfrac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "ksfrac/error.hpp"
#include "ksfrac/harmonic.hpp"
#include "ksfrac/heat.hpp"
#include "ksfrac/regression.hpp"

namespace ksfrac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Measure, oracle and grid for one discretization level.
struct LevelContext {
  DiscreteMeasure measure;
  std::unique_ptr<DistanceOracle> oracle;
  std::vector<double> radii;

  LevelContext(const IfsSpec& spec, int level, Metric metric, std::vector<double> grid)
      : measure(build_measure(spec, level)),
        oracle(make_oracle(measure, metric)),
        radii(std::move(grid)) {}
  LevelContext(const IfsSpec& spec, int level, Metric metric)
      : LevelContext(spec, level, metric, default_radii(spec, level)) {}

  std::vector<double> profile(const CellFunction& f, double p, int threads) const {
    return ks_profile(f, measure, *oracle, p, radii, threads);
  }
  CellFunction cells(std::span<const double> values) const {
    return {measure.family(), measure.level(), {values.begin(), values.end()}};
  }
  // Var_p(f): liminf proxy of E_{p, alpha} to the power 1/p.
  double var(std::span<const double> values, double p, double alpha, int threads) const {
    const auto g = profile(cells(values), p, threads);
    return std::pow(report_from_profile(p, alpha, radii, g).liminf_proxy, 1.0 / p);
  }
};

double max_of(std::span<const double> v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

double stability_of(std::span<const double> per_level) {
  double worst = 1.0;
  for (std::size_t i = 1; i < per_level.size(); ++i) {
    worst = std::max(worst, level_ratio(per_level[i - 1], per_level[i]));
  }
  return worst;
}

void require_levels(std::span<const int> levels, std::size_t at_least) {
  if (levels.size() < at_least) {
    std::ostringstream msg;
    msg << "at least " << at_least << " discretization level(s) required";
    throw ContractError(msg.str());
  }
}

}  // namespace

double level_ratio(double a, double b) {
  a = std::abs(a);
  b = std::abs(b);
  if (a == 0.0 && b == 0.0) return 1.0;
  if (a == 0.0 || b == 0.0) return kInf;
  return std::max(a, b) / std::min(a, b);
}

std::vector<double> scan_radii(const IfsSpec& spec, int level, int per_period) {
  if (per_period < 1) throw ContractError("scan_radii: per_period must be >= 1");
  const double floor = spec.resolution_floor(level);
  std::vector<double> radii;
  for (int k = 0;; ++k) {
    const double r =
        spec.euclidean_diameter * std::pow(spec.ratio(), static_cast<double>(k) / per_period);
    if (r < floor * (1.0 - 1e-12)) break;
    radii.push_back(r);
  }
  return radii;
}

double default_correction_exponent(const IfsSpec& spec) {
  return spec.walk_dim - spec.hausdorff_dim;
}

MemberFit fit_profile(std::span<const double> radii, std::span<const double> profile, double p,
                      double diameter, double correction_exponent) {
  if (radii.size() != profile.size()) throw ContractError("fit_profile: size mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < radii.size(); ++k) pts.emplace_back(radii[k], profile[k]);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  if (pts.size() < 7) {
    throw ContractError("fit_profile: fewer than 4 radii left in the fitting window");
  }
  MemberFit fit;
  for (const auto& pt : pts) fit.profile.push_back(pt.second);
  const std::size_t first = 1;
  const std::size_t last = pts.size() - 3;  // inclusive
  const auto n = static_cast<Eigen::Index>(last - first + 1);
  for (std::size_t k = first; k <= last; ++k) {
    if (!(pts[k].second > 0.0)) {
      fit.constant = true;
      fit.flag = "zero profile";
      return fit;
    }
  }
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd y(n);
  std::vector<double> xs, ys;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = pts[first + i].first;
    A(i, 0) = std::log(r);
    A(i, 1) = 1.0;
    A(i, 2) = std::pow(r / diameter, correction_exponent);
    y(i) = std::log(pts[first + i].second);
    xs.push_back(r);
    ys.push_back(pts[first + i].second);
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - A * c;
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  fit.slope = c(0);
  fit.correction = c(2);
  fit.alpha_hat = c(0) / p;
  fit.r_squared = sst > 0.0 ? 1.0 - resid.squaredNorm() / sst : 0.0;
  const LinearFit raw = fit_log_log(xs, ys);
  fit.raw_alpha_hat = raw.slope / p;
  fit.raw_r_squared = raw.r_squared;
  fit.counted = fit.r_squared >= 0.95;
  if (!fit.counted) fit.flag = "ill-conditioned fit (R^2 < 0.95)";
  return fit;
}

double alpha_formula(const IfsSpec& spec, double p) {
  if (spec.family == Family::Gasket && p > 1.0) {
    return critical_exponent(spec, p, estimate_rp(p, 8).r_hat);
  }
  return critical_exponent(spec, p);
}

ExponentScan scan_alpha(const IfsSpec& spec, double p, std::span<const FunctionSpec> corpus,
                        int level, const AnalysisOptions& options) {
  ExponentScan scan;
  scan.family = spec.family;
  scan.p = p;
  scan.level = level;
  scan.metric = options.metric;
  scan.correction_exponent = default_correction_exponent(spec);
  LevelContext ctx(spec, level, options.metric, scan_radii(spec, level, 2));
  scan.radii = ctx.radii;
  if (scan.radii.size() < 7) {
    throw ContractError("scan_alpha: level too coarse for a 4-radius fitting window");
  }
  scan.window_max = scan.radii[1];
  scan.window_min = scan.radii[scan.radii.size() - 3];
  scan.alpha_formula = alpha_formula(spec, p);
  scan.alpha_hat = 0.0;
  bool any = false;
  for (const auto& member : corpus) {
    const CellFunction f = evaluate(member, ctx.measure);
    MemberFit fit;
    if (is_constant(f.values)) {
      fit.constant = true;
      fit.flag = "constant (excluded)";
      fit.profile.assign(scan.radii.size(), 0.0);
    } else {
      fit = fit_profile(scan.radii, ctx.profile(f, p, options.threads), p,
                        spec.euclidean_diameter, scan.correction_exponent);
      if (!fit.counted) scan.all_fits_ok = false;
      if (fit.counted && (!any || fit.alpha_hat > scan.alpha_hat)) {
        scan.alpha_hat = fit.alpha_hat;
        scan.envelope_member = label(member);
        any = true;
      }
    }
    fit.label = label(member);
    scan.members.push_back(std::move(fit));
  }
  if (!any) {
    scan.alpha_hat = std::numeric_limits<double>::quiet_NaN();
    scan.all_fits_ok = false;
  }
  return scan;
}

void to_json(nlohmann::json& j, const ExponentScan& scan) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : scan.members) {
    members.push_back({{"label", m.label},
                       {"constant", m.constant},
                       {"alpha_hat", m.alpha_hat},
                       {"slope", m.slope},
                       {"correction", m.correction},
                       {"r_squared", m.r_squared},
                       {"raw_alpha_hat", m.raw_alpha_hat},
                       {"raw_r_squared", m.raw_r_squared},
                       {"counted", m.counted},
                       {"flag", m.flag},
                       {"profile", m.profile}});
  }
  j = {{"family", std::string(to_string(scan.family))},
       {"p", scan.p},
       {"level", scan.level},
       {"metric", std::string(to_string(scan.metric))},
       {"radii", scan.radii},
       {"window", {scan.window_max, scan.window_min}},
       {"correction_exponent", scan.correction_exponent},
       {"alpha_hat", scan.alpha_hat},
       {"envelope_member", scan.envelope_member},
       {"alpha_formula", scan.alpha_formula},
       {"all_fits_ok", scan.all_fits_ok},
       {"members", members}};
}

void to_json(nlohmann::json& j, const Verdict& v) {
  j = {{"name", v.name},
       {"params", v.params},
       {"measured_constant", v.measured_constant},
       {"levels", v.levels},
       {"pass", v.pass},
       {"details", v.details}};
}

// ---------------------------------------------------------------- property P

PWitness witness_P(const IfsSpec& spec, double p, double alpha,
                   std::span<const FunctionSpec> corpus, std::span<const int> levels,
                   const AnalysisOptions& options) {
  require_levels(levels, 2);
  PWitness w;
  w.p = p;
  w.alpha = alpha;
  w.alpha_above = alpha + 0.2;
  for (int level : levels) {
    LevelContext ctx(spec, level, options.metric);
    WitnessLevel wl;
    wl.level = level;
    wl.radii = ctx.radii;
    for (const auto& member : corpus) {
      const CellFunction f = evaluate(member, ctx.measure);
      if (is_constant(f.values)) continue;
      const auto g = ctx.profile(f, p, options.threads);
      const auto at = report_from_profile(p, alpha, ctx.radii, g);
      const auto above = report_from_profile(p, w.alpha_above, ctx.radii, g);
      wl.labels.push_back(label(member));
      wl.ratios.push_back(at.sup / at.liminf_proxy);
      wl.finest_above.push_back(above.energies.back());
    }
    wl.max_ratio = max_of(wl.ratios);
    w.levels.push_back(std::move(wl));
  }
  const ExponentScan scan = scan_alpha(spec, p, corpus, levels.back(), options);
  double smallest = kInf;
  for (const auto& m : scan.members) {
    if (m.counted && m.alpha_hat < smallest) {
      smallest = m.alpha_hat;
      w.roughest_member = m.label;
    }
  }
  w.stable = true;
  w.diverges = !w.roughest_member.empty();
  for (std::size_t i = 1; i < w.levels.size(); ++i) {
    const double s = level_ratio(w.levels[i - 1].max_ratio, w.levels[i].max_ratio);
    w.ratio_stability.push_back(s);
    w.stable = w.stable && s <= 1.5;
    const auto& labels = w.levels[i].labels;
    const auto it = std::find(labels.begin(), labels.end(), w.roughest_member);
    if (it == labels.end()) continue;
    const auto m = static_cast<std::size_t>(it - labels.begin());
    const double growth = w.levels[i].finest_above[m] / w.levels[i - 1].finest_above[m];
    w.growth.push_back(growth);
    w.diverges = w.diverges && growth >= 1.5;
  }
  return w;
}

void to_json(nlohmann::json& j, const PWitness& w) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : w.levels) {
    levels.push_back({{"level", l.level},
                      {"radii", l.radii},
                      {"labels", l.labels},
                      {"ratios", l.ratios},
                      {"finest_above", l.finest_above},
                      {"max_ratio", l.max_ratio}});
  }
  j = {{"p", w.p},
       {"alpha", w.alpha},
       {"alpha_above", w.alpha_above},
       {"levels", levels},
       {"roughest_member", w.roughest_member},
       {"ratio_stability", w.ratio_stability},
       {"growth", w.growth},
       {"stable", w.stable},
       {"diverges", w.diverges}};
}

// ---------------------------------------------------------------- Morrey

MorreyQuotient morrey_quotient(const CellFunction& f, const DiscreteMeasure& measure,
                               const DistanceOracle& oracle, double p, double alpha,
                               std::span<const double> radii, std::uint64_t seed, int pairs) {
  const double Q = measure.spec().hausdorff_dim;
  if (!(p * alpha > Q)) {
    std::ostringstream msg;
    msg << "morrey: p * alpha = " << p * alpha << " is not above Q = " << Q;
    throw ContractError(msg.str());
  }
  MorreyQuotient out;
  if (is_constant(f.values)) return out;
  const double lambda = alpha - Q / p;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, measure.size() - 1);
  for (int k = 0; k < pairs; ++k) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    if (i == j) j = (j + 1) % measure.size();
    const double d = oracle.distance(i, j);
    out.holder = std::max(out.holder, std::abs(f.values[i] - f.values[j]) / std::pow(d, lambda));
  }
  const auto g = ks_profile(f, measure, oracle, p, radii);
  out.sup_energy = std::pow(report_from_profile(p, alpha, radii, g).sup, 1.0 / p);
  out.quotient = out.holder / out.sup_energy;
  return out;
}

MorreyResult morrey_check(const IfsSpec& spec, const FunctionSpec& f, double p, double alpha,
                          std::span<const int> levels, const AnalysisOptions& options) {
  require_levels(levels, 2);
  MorreyResult out;
  out.label = label(f);
  out.lambda = alpha - spec.hausdorff_dim / p;
  std::vector<double> q;
  for (int level : levels) {
    LevelContext ctx(spec, level, options.metric);
    out.levels.push_back(level);
    out.quotients.push_back(morrey_quotient(evaluate(f, ctx.measure), ctx.measure, *ctx.oracle,
                                            p, alpha, ctx.radii, options.seed));
    q.push_back(out.quotients.back().quotient);
  }
  out.stability = stability_of(q);
  out.pass = out.stability <= 2.0;
  return out;
}

// ---------------------------------------------------------------- GNS / Nash

GnsExponents gns_exponents(double Q, double p, double alpha, double r, double s) {
  if (!(p >= 1.0 && r >= 1.0 && s >= 1.0 && Q > 0.0)) {
    throw ContractError("gns: exponents p, r, s must be >= 1");
  }
  GnsExponents e;
  e.Q = Q;
  e.p = p;
  e.alpha = alpha;
  e.r = r;
  e.s = s;
  const double inv_q = (Q - alpha * p) / (p * Q);
  e.q = inv_q == 0.0 ? kInf : 1.0 / inv_q;
  const double denom = inv_q - 1.0 / s;
  e.theta = (1.0 / r - 1.0 / s) / denom;
  if (!(std::isfinite(e.theta) && e.theta > 0.0 && e.theta <= 1.0)) {
    std::ostringstream msg;
    msg << "gns: 1/r = theta/q + (1-theta)/s has no theta in (0, 1] for r = " << r
        << ", s = " << s << ", q = " << e.q;
    throw ContractError(msg.str());
  }
  return e;
}

GnsExponents nash_exponents(double Q, double p, double alpha) {
  GnsExponents e = gns_exponents(Q, p, alpha, p, 1.0);
  e.theta = (p - 1.0) * Q / (p * (alpha + Q) - Q);
  return e;
}

double vicsek_nash_theta(double p) {
  const double dh = IfsSpec::vicsek().hausdorff_dim;
  return (p - 1.0) * dh / (p - 1.0 + p * dh);
}

GnsResult gns_check(const IfsSpec& spec, std::span<const FunctionSpec> corpus,
                    const GnsExponents& e, std::span<const int> levels,
                    const AnalysisOptions& options) {
  require_levels(levels, 2);
  GnsResult out;
  out.exponents = e;
  std::vector<double> constants;
  for (int level : levels) {
    LevelContext ctx(spec, level, options.metric);
    GnsLevel gl;
    gl.level = level;
    const double w = ctx.measure.weight();
    for (const auto& member : corpus) {
      const CellFunction f = evaluate(member, ctx.measure);
      const double nr = lp_norm(f.values, w, e.r);
      if (nr == 0.0) continue;
      const double np = lp_norm(f.values, w, e.p);
      const double ns = lp_norm(f.values, w, e.s);
      const double var = is_constant(f.values) ? 0.0 : ctx.var(f.values, e.p, e.alpha, options.threads);
      gl.labels.push_back(label(member));
      gl.ratios.push_back(nr / (std::pow(np + var, e.theta) * std::pow(ns, 1.0 - e.theta)));
    }
    gl.constant = max_of(gl.ratios);
    constants.push_back(gl.constant);
    out.levels.push_back(std::move(gl));
  }
  out.stability = stability_of(constants);
  out.pass = out.stability <= 2.0;
  return out;
}

void to_json(nlohmann::json& j, const GnsResult& g) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : g.levels) {
    levels.push_back({{"level", l.level},
                      {"labels", l.labels},
                      {"ratios", l.ratios},
                      {"constant", l.constant}});
  }
  const auto& e = g.exponents;
  j = {{"p", e.p},       {"alpha", e.alpha}, {"Q", e.Q},
       {"q", std::isfinite(e.q) ? nlohmann::json(e.q) : nlohmann::json("inf")},
       {"r", e.r},       {"s", e.s},         {"theta", e.theta},
       {"levels", levels}, {"stability", g.stability}, {"pass", g.pass}};
}

// ---------------------------------------------------------------- quasi-seminorm

std::vector<double> truncate(std::span<const double> values, double t, double s) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::min(std::max(values[i] - t, 0.0), s);
  }
  return out;
}

QuasiResult quasi_seminorm_checks(const IfsSpec& spec, std::span<const FunctionSpec> corpus,
                                  double p, double alpha, std::span<const int> levels,
                                  const AnalysisOptions& options) {
  require_levels(levels, 2);
  QuasiResult out;
  out.p = p;
  out.alpha = alpha;
  std::vector<double> triangle, cake;
  bool exact = true;
  for (int level : levels) {
    LevelContext ctx(spec, level, options.metric);
    QuasiLevel ql;
    ql.level = level;
    ql.truncation_exact = true;
    std::vector<std::vector<double>> fs;
    std::vector<double> vars;
    for (const auto& member : corpus) {
      CellFunction f = evaluate(member, ctx.measure);
      if (is_constant(f.values)) continue;
      vars.push_back(ctx.var(f.values, p, alpha, options.threads));
      fs.push_back(std::move(f.values));
    }
    // (i) quasi-triangle over all pairs.
    for (std::size_t a = 0; a < fs.size(); ++a) {
      for (std::size_t b = a + 1; b < fs.size(); ++b) {
        std::vector<double> sum(fs[a].size());
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = fs[a][i] + fs[b][i];
        const double denom = vars[a] + vars[b];
        if (denom > 0.0) {
          ql.triangle_constant = std::max(
              ql.triangle_constant, ctx.var(sum, p, alpha, options.threads) / denom);
        }
      }
    }
    // (ii) truncation, per radius, against the untruncated profile.
    for (const auto& values : fs) {
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      const double range = *hi - *lo;
      const auto base = ctx.profile(ctx.cells(values), p, options.threads);
      for (double tq : {0.0, 0.25, 0.5}) {
        for (double sq : {0.25, 0.5, 1.0}) {
          const auto g = ctx.profile(
              ctx.cells(truncate(values, *lo + tq * range, sq * range)), p, options.threads);
          for (std::size_t k = 0; k < g.size(); ++k) {
            const double excess = base[k] > 0.0 ? (g[k] - base[k]) / base[k] : g[k];
            ql.truncation_excess = std::max(ql.truncation_excess, excess);
            if (g[k] > base[k] * (1.0 + 1e-12)) ql.truncation_exact = false;
          }
        }
      }
    }
    // (iii) layer cake with rho = 2 on the nonnegative members.
    for (std::size_t m = 0; m < fs.size(); ++m) {
      const auto& values = fs[m];
      if (*std::min_element(values.begin(), values.end()) < 0.0 || vars[m] == 0.0) continue;
      const double top = *std::max_element(values.begin(), values.end());
      const int kmax = static_cast<int>(std::ceil(std::log2(top)));
      double sum = 0.0;
      for (int k = kmax; k >= kmax - 24; --k) {
        const double level_value = std::ldexp(1.0, k);
        const auto layer = truncate(values, level_value, level_value);
        if (is_constant(layer)) continue;
        sum += std::pow(ctx.var(layer, p, alpha, options.threads), p);
      }
      ql.layer_cake_constant = std::max(ql.layer_cake_constant, std::pow(sum, 1.0 / p) / vars[m]);
    }
    exact = exact && ql.truncation_exact;
    triangle.push_back(ql.triangle_constant);
    cake.push_back(ql.layer_cake_constant);
    out.levels.push_back(ql);
  }
  out.triangle_stability = stability_of(triangle);
  out.layer_cake_stability = stability_of(cake);
  const bool finite = std::all_of(triangle.begin(), triangle.end(),
                                  [](double c) { return std::isfinite(c) && c > 0.0; }) &&
                      std::all_of(cake.begin(), cake.end(),
                                  [](double c) { return std::isfinite(c) && c > 0.0; });
  out.pass = exact && finite && out.triangle_stability <= 2.0 && out.layer_cake_stability <= 2.0;
  return out;
}

void to_json(nlohmann::json& j, const QuasiResult& q) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : q.levels) {
    levels.push_back({{"level", l.level},
                      {"triangle_constant", l.triangle_constant},
                      {"truncation_excess", l.truncation_excess},
                      {"truncation_exact", l.truncation_exact},
                      {"layer_cake_constant", l.layer_cake_constant}});
  }
  j = {{"p", q.p},
       {"alpha", q.alpha},
       {"levels", levels},
       {"triangle_stability", q.triangle_stability},
       {"layer_cake_stability", q.layer_cake_stability},
       {"pass", q.pass}};
}

// ---------------------------------------------------------------- exponents in p

MonotonicityResult exponent_monotonicity(std::span<const ExponentScan> scans, double Q,
                                         double tolerance) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : scans) pts.emplace_back(s.p, s.alpha_hat);
  std::sort(pts.begin(), pts.end());
  MonotonicityResult out;
  out.p_alpha_nondecreasing = true;
  out.alpha_nonincreasing = true;
  out.below_chaining_bound = true;
  out.at_least_one = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [p, a] = pts[i];
    out.ps.push_back(p);
    out.alpha_hat.push_back(a);
    if (!(a <= 1.0 + Q / p + 0.1)) out.below_chaining_bound = false;
    if (!(a >= 1.0 - 0.05)) out.at_least_one = false;
    if (i == 0) continue;
    const auto [p0, a0] = pts[i - 1];
    if (!(p * a >= p0 * a0 - tolerance * p)) out.p_alpha_nondecreasing = false;
    if (!(a <= a0 + tolerance)) out.alpha_nonincreasing = false;
  }
  out.pass = out.p_alpha_nondecreasing && out.alpha_nonincreasing && out.below_chaining_bound &&
             out.at_least_one;
  return out;
}

void to_json(nlohmann::json& j, const MonotonicityResult& m) {
  j = {{"p", m.ps},
       {"alpha_hat", m.alpha_hat},
       {"p_alpha_nondecreasing", m.p_alpha_nondecreasing},
       {"alpha_nonincreasing", m.alpha_nonincreasing},
       {"below_chaining_bound", m.below_chaining_bound},
       {"at_least_one", m.at_least_one},
       {"pass", m.pass}};
}

ExponentBand walk_dimension_band(const IfsSpec& spec, double p, double alpha_hat, double slack) {
  const double dw = spec.walk_dim;
  const double dh = spec.hausdorff_dim;
  const double b = (1.0 - 2.0 / p) * (dw - dh) + dw / p;
  ExponentBand out;
  out.lower = p <= 2.0 ? dw / 2.0 : b;
  out.upper = p <= 2.0 ? b : dw / 2.0;
  out.pass = out.lower <= alpha_hat + slack && alpha_hat <= out.upper + slack;
  return out;
}

// ---------------------------------------------------------------- equivalences

namespace {

BandResult finish_band(BandResult out) {
  out.low = kInf;
  out.high = 0.0;
  for (const auto& row : out.ratios) {
    for (double r : row) {
      out.low = std::min(out.low, r);
      out.high = std::max(out.high, r);
    }
  }
  out.width = out.high / out.low;
  out.pass = std::isfinite(out.width) && out.width <= 10.0;
  return out;
}

std::optional<double> rp_for(const IfsSpec& spec, double p) {
  if (spec.family == Family::Gasket && p > 1.0) return estimate_rp(p, 8).r_hat;
  return std::nullopt;
}

}  // namespace

BandResult discrete_equivalence_band(const IfsSpec& spec, std::span<const FunctionSpec> corpus,
                                     double p, double alpha, std::span<const int> levels,
                                     const AnalysisOptions& options) {
  require_levels(levels, 1);
  BandResult out;
  const auto rp = rp_for(spec, p);
  for (int level : levels) {
    if (level < 2) throw ContractError("discrete_equivalence_band: level must be >= 2");
    LevelContext ctx(spec, level, options.metric);
    std::vector<LevelGraph> graphs;
    for (int m = 0; m <= level - 2; ++m) graphs.push_back(build_level_graph(spec, m));
    std::vector<double> row;
    std::vector<std::string> labels;
    for (const auto& member : corpus) {
      const CellFunction f = evaluate(member, ctx.measure);
      if (is_constant(f.values)) continue;
      const auto g = ctx.profile(f, p, options.threads);
      const double ks = std::pow(report_from_profile(p, alpha, ctx.radii, g).sup, 1.0 / p);
      double discrete = 0.0;
      for (const auto& graph : graphs) {
        discrete = std::max(discrete, discrete_energy(evaluate(member, graph), graph, p, rp));
      }
      labels.push_back(label(member));
      row.push_back(ks / std::pow(discrete, 1.0 / p));
    }
    out.levels.push_back(level);
    out.labels = labels;
    out.ratios.push_back(std::move(row));
  }
  return finish_band(std::move(out));
}

BandResult heat_besov_band(const IfsSpec& spec, std::span<const FunctionSpec> corpus, double p,
                           double alpha, double beta, int level,
                           const AnalysisOptions& options) {
  BandResult out;
  const WalkKernel walk(build_level_graph(spec, level));
  const auto times = dyadic_times(walk);
  LevelContext ctx(spec, level, options.metric);
  std::vector<double> row;
  for (const auto& member : corpus) {
    const CellFunction f = evaluate(member, ctx.measure);
    if (is_constant(f.values)) continue;
    const auto g = ctx.profile(f, p, options.threads);
    const double ks = std::pow(report_from_profile(p, alpha, ctx.radii, g).sup, 1.0 / p);
    const auto heat = heat_besov_seminorm(evaluate(member, walk.graph()), walk, p, beta, times);
    out.labels.push_back(label(member));
    row.push_back(heat.sup / ks);
  }
  out.levels.push_back(level);
  out.ratios.push_back(std::move(row));
  return finish_band(std::move(out));
}

void to_json(nlohmann::json& j, const BandResult& b) {
  j = {{"levels", b.levels}, {"labels", b.labels}, {"ratios", b.ratios}, {"low", b.low},
       {"high", b.high},     {"width", b.width},   {"pass", b.pass}};
}

}  // namespace ksfrac
