#pragma once

#include <array>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ksfrac/functions.hpp"
#include "ksfrac/geometry.hpp"

namespace ksfrac {

using Triple = std::array<double, 3>;

// F_p(a) = |a1-a2|^p + |a2-a3|^p + |a3-a1|^p.
double triangle_energy(const Triple& a, double p);

// One-step energy of a cell split in three. `interior[k]` is the value at the
// midpoint opposite corner k, so the three sub-cells carry
// (a1, b2, b3), (b1, a2, b3), (b1, b2, a3).
double cell_objective(const Triple& boundary, const Triple& interior, double p);
Triple cell_gradient(const Triple& boundary, const Triple& interior, double p);

struct CellSolve {
  Triple boundary{};
  Triple interior{};
  double p = 2.0;
  double raw_energy = 0.0;     // cell_objective at the minimizer
  double gradient_norm = 0.0;  // Euclidean norm of the gradient there
  int sweeps = 0;              // iterations used (0 for closed form)
};

// b_k = (2 a_i + 2 a_j + a_k) / 5: the p = 2 minimizer.
Triple closed_form_interior(const Triple& boundary);

// Minimizer of cell_objective. Uses the closed form at p = 2; otherwise
// Newton directions with exact line search, each followed by a coordinate
// sweep. Requires p > 1.
CellSolve cell_solve(const Triple& boundary, double p);

// Always iterates, whatever p is. Stops once the gradient norm is below
// `tolerance`, or below its own rounding floor when that is larger (for
// p < 2 near coinciding values), or when no step improves anything. Throws
// ConvergenceError (carrying the gradient norm) after `max_sweeps`.
CellSolve cell_solve_iterative(const Triple& boundary, double p,
                               double tolerance = 1e-12, int max_sweeps = 10000);

// Corner values per cell, in word order.
using GasketCells = std::vector<Triple>;
using VicsekCells = std::vector<std::array<double, 5>>;

// One level of p-harmonic refinement: child (w, i) of cell w gets
// corner i = a_i and its other corners from the solved midpoints.
GasketCells refine_gasket_cells(const GasketCells& cells, double p);
// One level of piecewise-affine refinement along the cross of each cell.
VicsekCells refine_vicsek_cells(const VicsekCells& cells);

GasketCells gasket_cells(const VertexFunction& f, const LevelGraph& graph);
VicsekCells vicsek_cells(const VertexFunction& f, const LevelGraph& graph);

// H_p(f_n) on V_target. Throws Unsupported for p <= 1.
VertexFunction extend_gasket(const VertexFunction& f, int target, double p);
// Piecewise-affine extension of f_n to V_target.
VertexFunction extend_vicsek(const VertexFunction& f, int target);

struct RpEstimate {
  double p = 2.0;
  std::vector<double> energies;  // raw edge energy at levels 0..depth
  std::vector<double> ratios;    // energies[k+1] / energies[k]
  double r_hat = 0.0;
  double stability = 0.0;  // max |ratio_k - ratio_{k-1}| over the final three
};

void to_json(nlohmann::json& j, const RpEstimate& estimate);

// Energy-ratio estimate of r_p from the harmonic extension of (1, 0, 0).
RpEstimate estimate_rp(double p, int depth);

// 2^{1-p} <= r_p < 3 * 2^{-p}.
double rp_lower_bound(double p);
double rp_upper_bound(double p);
// 2^{p-1} (1 + sqrt(1 + 2^{3 - 1/(p-1)}))^{1-p}, the sharper upper bound.
double rp_sharp_upper_bound(double p);

// Vicsek: 1 + (d_h - 1)/p. Gasket: (log 3 - log r_p) / (p log 2); needs r_hat.
double critical_exponent(const IfsSpec& spec, double p,
                         std::optional<double> r_hat = std::nullopt);

}  // namespace ksfrac
