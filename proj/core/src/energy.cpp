#include "ksfrac/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "ksfrac/error.hpp"

namespace ksfrac {

namespace {

// |x|^p with exact fast paths for the exponents used most.
struct AbsPower {
  double p;
  double operator()(double x) const {
    const double a = std::abs(x);
    if (p == 1.0) return a;
    if (p == 2.0) return a * a;
    if (p == 3.0) return a * a * a;
    if (p == 4.0) return (a * a) * (a * a);
    return std::pow(a, p);
  }
};

std::string format9(double x) {
  std::ostringstream out;
  out.precision(9);
  out << x;
  return out.str();
}

}  // namespace

std::vector<double> default_radii(const IfsSpec& spec, int level) {
  return geometric_radii(spec, level, 1);
}

std::vector<double> geometric_radii(const IfsSpec& spec, int level, int per_period,
                                    int first) {
  if (per_period < 1) throw ContractError("geometric_radii: per_period must be >= 1");
  std::vector<double> radii;
  for (int k = first; k <= (level - 2) * per_period; ++k) {
    radii.push_back(spec.euclidean_diameter *
                    std::pow(spec.ratio(), static_cast<double>(k) / per_period));
  }
  return radii;
}

void validate_radii(std::span<const double> radii, const DiscreteMeasure& measure) {
  if (radii.empty()) throw ContractError("empty radius grid");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    require_resolved(measure, radii[k]);
    if (k > 0 && !(radii[k] < radii[k - 1])) {
      throw ContractError("radius grid must be strictly decreasing");
    }
  }
}

std::vector<double> ks_profile(const CellFunction& f, const DiscreteMeasure& measure,
                               const DistanceOracle& oracle, double p,
                               std::span<const double> radii, int threads) {
  if (p < 1.0) throw ContractError("ks_profile: p must be >= 1");
  if (f.family != measure.family() || f.level != measure.level() ||
      f.values.size() != measure.size()) {
    throw ContractError("ks_profile: function and measure levels differ");
  }
  validate_radii(radii, measure);
  const std::size_t n = measure.size();
  const std::size_t nr = radii.size();
  const AbsPower power{p};

  // terms[x * nr + k] = w_x * sum_{y in B(x, r_k)} |f(y) - f(x)|^p / #B(x, r_k)
  std::vector<double> terms(n * nr, 0.0);
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<Neighbor> ball;
    std::vector<double> bin_sum(nr);
    std::vector<std::size_t> bin_count(nr);
    for (std::size_t x = begin; x < end; ++x) {
      std::fill(bin_sum.begin(), bin_sum.end(), 0.0);
      std::fill(bin_count.begin(), bin_count.end(), 0);
      oracle.neighbors_within(x, radii[0], ball);
      for (const auto& nb : ball) {
        // Finest radius still containing y.
        std::size_t k = 0;
        while (k + 1 < nr && inside_ball(nb.distance, radii[k + 1])) ++k;
        bin_sum[k] += power(f.values[nb.index] - f.values[x]);
        ++bin_count[k];
      }
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t k = nr; k-- > 0;) {
        sum += bin_sum[k];
        count += bin_count[k];
        terms[x * nr + k] = measure.weight() * sum / static_cast<double>(count);
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n));
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  std::vector<double> profile(nr, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t k = 0; k < nr; ++k) profile[k] += terms[x * nr + k];
  }
  return profile;
}

double ks_functional(const CellFunction& f, const DiscreteMeasure& measure,
                     const DistanceOracle& oracle, double p, double alpha, double radius) {
  const double r[] = {radius};
  return ks_profile(f, measure, oracle, p, r)[0] / std::pow(radius, p * alpha);
}

EnergyReport report_from_profile(double p, double alpha, std::span<const double> radii,
                                 std::span<const double> profile) {
  EnergyReport rep;
  rep.p = p;
  rep.alpha = alpha;
  rep.radii.assign(radii.begin(), radii.end());
  rep.profile.assign(profile.begin(), profile.end());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    rep.energies.push_back(profile[k] / std::pow(radii[k], p * alpha));
  }
  rep.sup = *std::max_element(rep.energies.begin(), rep.energies.end());
  const std::size_t n = rep.energies.size();
  const double a = rep.energies[n - 1];
  const double b = n >= 2 ? rep.energies[n - 2] : a;
  rep.liminf_proxy = std::min(a, b);
  const double top = std::max(a, b);
  rep.fine_scale_oscillation = top > 0.0 ? (top - rep.liminf_proxy) / top : 0.0;
  return rep;
}

EnergyReport energy_report(const CellFunction& f, const DiscreteMeasure& measure,
                           const DistanceOracle& oracle, const EnergyParams& params,
                           int threads) {
  if (params.alpha < 0.0) throw ContractError("energy_report: alpha must be >= 0");
  if (oracle.metric() != params.metric) {
    throw ContractError("energy_report: oracle metric differs from the parameters");
  }
  const auto profile = ks_profile(f, measure, oracle, params.p, params.radii, threads);
  return report_from_profile(params.p, params.alpha, params.radii, profile);
}

std::string EnergyReport::to_csv() const {
  std::ostringstream out;
  out << "r,E,G\n";
  for (std::size_t k = 0; k < radii.size(); ++k) {
    out << format9(radii[k]) << ',' << format9(energies[k]) << ',' << format9(profile[k])
        << '\n';
  }
  return out.str();
}

void to_json(nlohmann::json& j, const EnergyReport& rep) {
  j = {{"p", rep.p},
       {"alpha", rep.alpha},
       {"radii", rep.radii},
       {"energies", rep.energies},
       {"profile", rep.profile},
       {"sup", rep.sup},
       {"liminf_proxy", rep.liminf_proxy},
       {"fine_scale_oscillation", rep.fine_scale_oscillation}};
}

double raw_edge_energy(const VertexFunction& f, const LevelGraph& graph, double p) {
  if (f.family != graph.family() || f.level != graph.level() ||
      f.values.size() != graph.vertex_count()) {
    throw ContractError("raw_edge_energy: function and graph levels differ");
  }
  const AbsPower power{p};
  double sum = 0.0;
  for (const auto& e : graph.edges()) sum += power(f.values[e.u] - f.values[e.v]);
  return sum;
}

double discrete_energy(const VertexFunction& f, const LevelGraph& graph, double p,
                       std::optional<double> rp) {
  if (p < 1.0) throw ContractError("discrete_energy: p must be >= 1");
  const double raw = raw_edge_energy(f, graph, p);
  const int m = graph.level();
  if (graph.family() == Family::Vicsek) return std::pow(3.0, (p - 1.0) * m) * raw;
  if (p == 1.0) return raw;
  if (!rp) throw ContractError("discrete_energy: the gasket weight needs r_p");
  return std::pow(*rp, -m) * raw;
}

double doubling_ratio(const DiscreteMeasure& measure, const DistanceOracle& oracle,
                      double radius) {
  require_resolved(measure, radius);
  std::vector<Neighbor> small, large;
  double worst = 1.0;
  for (std::size_t x = 0; x < measure.size(); ++x) {
    oracle.neighbors_within(x, radius, small);
    oracle.neighbors_within(x, 2.0 * radius, large);
    worst = std::max(worst, static_cast<double>(large.size()) / small.size());
  }
  return worst;
}

double lp_norm(std::span<const double> values, double weight, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  const AbsPower power{p};
  double sum = 0.0;
  for (double v : values) sum += weight * power(v);
  return std::pow(sum, 1.0 / p);
}

ConvexityCheck convexity_embed_check(const CellFunction& f, const DiscreteMeasure& measure,
                                     const DistanceOracle& oracle, double p, double q,
                                     double alpha, std::span<const double> radii) {
  if (!(q >= 1.0 && q <= p)) throw ContractError("convexity_embed_check needs 1 <= q <= p");
  CellFunction g = f;
  for (auto& v : g.values) v = std::pow(std::abs(v), p / q);
  const auto lhs_rep =
      report_from_profile(q, alpha, radii, ks_profile(g, measure, oracle, q, radii));
  const auto rhs_rep =
      report_from_profile(p, alpha, radii, ks_profile(f, measure, oracle, p, radii));
  ConvexityCheck out;
  out.lhs = lhs_rep.sup;
  out.rhs = std::pow(lp_norm(f.values, measure.weight(), p), p - q) *
            std::pow(rhs_rep.sup, q / p);
  if (out.lhs == 0.0) {
    out.constant = 0.0;
  } else if (out.rhs == 0.0) {
    out.constant = std::numeric_limits<double>::infinity();
  } else {
    out.constant = out.lhs / out.rhs;
  }
  out.pass = std::isfinite(out.constant);
  return out;
}

}  // namespace ksfrac
