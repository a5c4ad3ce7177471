#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ksfrac/functions.hpp"
#include "ksfrac/geometry.hpp"

namespace ksfrac {

struct EnergyParams {
  double p = 2.0;
  double alpha = 0.0;
  std::vector<double> radii;  // strictly decreasing
  Metric metric = Metric::Euclidean;
};

// {diam * rho^k : k = 0 .. N-2}.
std::vector<double> default_radii(const IfsSpec& spec, int level);
// diam * rho^{k / per_period} for k = first .. (N-2) * per_period: a finer
// geometric grid with the same end points as default_radii when first = 0.
std::vector<double> geometric_radii(const IfsSpec& spec, int level, int per_period,
                                    int first = 0);

// Throws ContractError unless the grid is non-empty, strictly decreasing and
// above the resolution floor of `measure`.
void validate_radii(std::span<const double> radii, const DiscreteMeasure& measure);

// G_p(f, r) = sum_x w_x / mu(B(x,r)) sum_{y in B(x,r)} w_y |f(y) - f(x)|^p
// for every r of the grid. Atoms are split across `threads` workers; the
// per-atom terms are reduced in index order, so the result does not depend
// on the worker count or on the neighbour-search strategy.
std::vector<double> ks_profile(const CellFunction& f, const DiscreteMeasure& measure,
                               const DistanceOracle& oracle, double p,
                               std::span<const double> radii, int threads = 1);

// E_{p,alpha}(f, r) = G_p(f, r) / r^{p alpha}.
double ks_functional(const CellFunction& f, const DiscreteMeasure& measure,
                     const DistanceOracle& oracle, double p, double alpha, double radius);

struct EnergyReport {
  double p = 2.0;
  double alpha = 0.0;
  std::vector<double> radii;
  std::vector<double> energies;  // E_{p,alpha}(f, r)
  std::vector<double> profile;   // G_p(f, r) = r^{p alpha} E
  double sup = 0.0;
  // min of E over the two finest radii, the stand-in for liminf_{r -> 0}.
  double liminf_proxy = 0.0;
  // (max - min) / max of E over the two finest radii.
  double fine_scale_oscillation = 0.0;

  std::string to_csv() const;
};

void to_json(nlohmann::json& j, const EnergyReport& report);

EnergyReport energy_report(const CellFunction& f, const DiscreteMeasure& measure,
                           const DistanceOracle& oracle, const EnergyParams& params,
                           int threads = 1);
// Same report computed from an existing profile (the alpha rescaling only).
EnergyReport report_from_profile(double p, double alpha, std::span<const double> radii,
                                 std::span<const double> profile);

// sum over unordered edges of |f(u) - f(v)|^p.
double raw_edge_energy(const VertexFunction& f, const LevelGraph& graph, double p);

// Renormalized discrete p-energy: 3^{(p-1)m} * raw on the Vicsek set,
// r_p^{-m} * raw on the gasket (raw when p = 1 on the gasket).
double discrete_energy(const VertexFunction& f, const LevelGraph& graph, double p,
                       std::optional<double> rp = std::nullopt);

// max over atoms of mu(B(x, 2r)) / mu(B(x, r)).
double doubling_ratio(const DiscreteMeasure& measure, const DistanceOracle& oracle,
                      double radius);

double lp_norm(std::span<const double> values, double weight, double p);

struct ConvexityCheck {
  double lhs = 0.0;       // sup_r E_{q,alpha}(|f|^{p/q}, r)
  double rhs = 0.0;       // ||f||_p^{p-q} sup_r E_{p,alpha}(f, r)^{q/p}
  double constant = 0.0;  // lhs / rhs (0 when both vanish)
  bool pass = false;
};

ConvexityCheck convexity_embed_check(const CellFunction& f, const DiscreteMeasure& measure,
                                     const DistanceOracle& oracle, double p, double q,
                                     double alpha, std::span<const double> radii);

}  // namespace ksfrac
