#include "ksfrac/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ksfrac/error.hpp"

namespace ksfrac {

namespace {

double pow_abs(double x, double p) {
  const double a = std::abs(x);
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

// d/dt |t - c|^p / p
double signed_pow(double x, double q) {
  return x >= 0.0 ? std::pow(x, q) : -std::pow(-x, q);
}

// The four values coupled to b_k: a_i, a_j, b_i, b_j with {i, j, k} = {0, 1, 2}.
std::array<double, 4> partners(const Triple& a, const Triple& b, int k) {
  const int i = (k + 1) % 3;
  const int j = (k + 2) % 3;
  return {a[i], a[j], b[i], b[j]};
}

// Root of sum_c sign(t - c)|t - c|^{p-1}, strictly increasing in t for p > 1.
// Derivative bisection on [min c - 1, max c + 1] with Newton acceleration.
double solve_coordinate(const std::array<double, 4>& c, double p) {
  const double q = p - 1.0;
  auto g = [&](double t) {
    double s = 0.0;
    for (double v : c) s += signed_pow(t - v, q);
    return s;
  };
  auto dg = [&](double t) {
    double s = 0.0;
    for (double v : c) s += q * std::pow(std::abs(t - v), q - 1.0);
    return s;
  };
  double lo = *std::min_element(c.begin(), c.end()) - 1.0;
  double hi = *std::max_element(c.begin(), c.end()) + 1.0;
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gt = g(t);
    if (gt == 0.0) return t;
    if (gt > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    if (hi - lo <= 1e-16 * std::max(1.0, std::abs(t))) break;
    const double slope = dg(t);
    double next = std::isfinite(slope) && slope > 0.0 ? t - gt / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

double norm3(const Triple& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

// Hessian of cell_objective in the interior values (normalized data).
// Differences are floored at 1e-12: for p < 2 the true Hessian is infinite
// where two values coincide, which happens at the minimizer whenever the
// boundary data has a symmetry.
Eigen::Matrix3d cell_hessian(const Triple& a, const Triple& b, double p) {
  const double c = p * (p - 1.0);
  auto w = [&](double d) { return c * std::pow(std::max(std::abs(d), 1e-12), p - 2.0); };
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3;
    const int j = (k + 2) % 3;
    h(k, k) = w(b[k] - a[i]) + w(b[k] - a[j]) + w(b[k] - b[i]) + w(b[k] - b[j]);
    h(k, i) = -w(b[k] - b[i]);
    h(k, j) = -w(b[k] - b[j]);
  }
  return h;
}

// Rounding floor of cell_gradient on data in [0, 1]: each difference is only
// known to a few ulps, and for p < 2 |d|^{p-1} amplifies that near d = 0.
double gradient_noise(const Triple& a, const Triple& b, double p) {
  const double delta = 4.0 * std::numeric_limits<double>::epsilon();
  double sq = 0.0;
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (double c : partners(a, b, k)) {
      const double d = std::abs(b[k] - c);
      s += 0.5 * (std::pow(d + delta, p - 1.0) - std::pow(std::max(d - delta, 0.0), p - 1.0));
    }
    sq += (p * s) * (p * s);
  }
  return std::sqrt(sq);
}

struct Progress {
  Triple b;
  bool moved;
};

// Exact minimization of the convex objective along b - t * dir, t >= 0, by
// bisection on the directional derivative.
Triple line_minimum(const Triple& a, const Triple& b, const Eigen::Vector3d& dir, double p) {
  auto at = [&](double t) {
    return Triple{b[0] - t * dir[0], b[1] - t * dir[1], b[2] - t * dir[2]};
  };
  auto slope = [&](double t) {
    const Triple g = cell_gradient(a, at(t), p);
    return -(g[0] * dir[0] + g[1] * dir[1] + g[2] * dir[2]);
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60 && slope(hi) < 0.0; ++i) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-17 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

// A Newton direction with exact line search, then a sweep of exact
// coordinate minimizations. For p < 2 plain Newton steps oscillate across
// coincident values (on |d|^p it maps d to -d(2 - p)/(p - 1)); the line
// search removes that. Near such coincidences the gradient cannot be
// resolved below rounding, so `moved` reports whether anything improved.
Progress newton_and_sweep(const Triple& a, const Triple& b, double p, double residual) {
  const double value = cell_objective(a, b, p);
  const Triple g = cell_gradient(a, b, p);
  const Eigen::Vector3d dir =
      cell_hessian(a, b, p).ldlt().solve(Eigen::Vector3d(g[0], g[1], g[2]));
  const Triple step = dir.allFinite() ? line_minimum(a, b, dir, p) : b;
  // Coordinate moves can jam on a kink of |d|^{p-1} and undo the Newton step.
  Triple out = step;
  for (int k = 0; k < 3; ++k) out[k] = solve_coordinate(partners(a, out, k), p);
  if (cell_objective(a, out, p) > cell_objective(a, step, p)) out = step;
  const bool better =
      norm3(cell_gradient(a, out, p)) < residual || cell_objective(a, out, p) < value;
  return better ? Progress{out, true} : Progress{b, false};
}

}  // namespace

double triangle_energy(const Triple& a, double p) {
  return pow_abs(a[0] - a[1], p) + pow_abs(a[1] - a[2], p) + pow_abs(a[2] - a[0], p);
}

double cell_objective(const Triple& a, const Triple& b, double p) {
  return triangle_energy({a[0], b[1], b[2]}, p) + triangle_energy({b[0], a[1], b[2]}, p) +
         triangle_energy({b[0], b[1], a[2]}, p);
}

Triple cell_gradient(const Triple& a, const Triple& b, double p) {
  Triple grad{};
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (double c : partners(a, b, k)) s += signed_pow(b[k] - c, p - 1.0);
    grad[k] = p * s;
  }
  return grad;
}

Triple closed_form_interior(const Triple& a) {
  Triple b{};
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3;
    const int j = (k + 2) % 3;
    b[k] = (2.0 * a[i] + 2.0 * a[j] + a[k]) / 5.0;
  }
  return b;
}

CellSolve cell_solve_iterative(const Triple& a, double p, double tolerance, int max_sweeps) {
  if (!(p > 1.0)) throw Unsupported("cell_solve requires p > 1");
  CellSolve out;
  out.boundary = a;
  out.p = p;
  const auto [lo_it, hi_it] = std::minmax_element(a.begin(), a.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (range == 0.0) {
    out.interior = a;
    return out;
  }
  // Solve for (a - lo) / range; the objective depends on differences only
  // and is p-homogeneous, so the minimizer maps back affinely.
  Triple an{};
  for (int k = 0; k < 3; ++k) an[k] = (a[k] - lo) / range;
  Triple b = closed_form_interior(an);
  double residual = norm3(cell_gradient(an, b, p));
  int sweep = 0;
  while (residual > std::max(tolerance, gradient_noise(an, b, p))) {
    if (sweep == max_sweeps) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "cell_solve did not converge for p = " << p << ", boundary (" << a[0] << ", "
          << a[1] << ", " << a[2] << ") after " << max_sweeps << " sweeps (gradient norm "
          << residual << ", noise " << gradient_noise(an, b, p) << ")";
      throw ConvergenceError(msg.str(), residual);
    }
    const Progress next = newton_and_sweep(an, b, p, residual);
    ++sweep;
    if (!next.moved) break;  // converged to rounding
    b = next.b;
    residual = norm3(cell_gradient(an, b, p));
  }
  out.sweeps = sweep;
  out.gradient_norm = residual * std::pow(range, p - 1.0);
  for (int k = 0; k < 3; ++k) out.interior[k] = lo + range * b[k];
  out.raw_energy = cell_objective(a, out.interior, p);
  return out;
}

CellSolve cell_solve(const Triple& a, double p) {
  if (!(p > 1.0)) throw Unsupported("cell_solve requires p > 1");
  if (p != 2.0) return cell_solve_iterative(a, p);
  CellSolve out;
  out.boundary = a;
  out.p = p;
  out.interior = closed_form_interior(a);
  out.raw_energy = cell_objective(a, out.interior, p);
  out.gradient_norm = norm3(cell_gradient(a, out.interior, p));
  return out;
}

GasketCells refine_gasket_cells(const GasketCells& cells, double p) {
  GasketCells out(cells.size() * 3);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Triple& a = cells[c];
    const Triple b = cell_solve(a, p).interior;
    for (int i = 0; i < 3; ++i) {
      Triple& child = out[c * 3 + i];
      for (int j = 0; j < 3; ++j) {
        // Corner j of child i is the midpoint of edge (i, j), opposite the
        // third index.
        child[j] = (i == j) ? a[i] : b[3 - i - j];
      }
    }
  }
  return out;
}

VicsekCells refine_vicsek_cells(const VicsekCells& cells) {
  // Fixed points 0..3 are the corners, 4 the centre; corner k is opposite k^2.
  VicsekCells out(cells.size() * 5);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& v = cells[c];
    const double centre = v[4];
    for (int i = 0; i < 4; ++i) {
      const double third = v[i] + (centre - v[i]) / 3.0;
      const double two_thirds = v[i] + 2.0 * (centre - v[i]) / 3.0;
      auto& child = out[c * 5 + i];
      child[i] = v[i];
      child[4] = third;
      child[i ^ 2] = two_thirds;
      // Branches off the diagonal keep the value at their attachment point.
      child[i ^ 1] = third;
      child[i ^ 3] = third;
      out[c * 5 + 4][i] = two_thirds;
    }
    out[c * 5 + 4][4] = centre;
  }
  return out;
}

GasketCells gasket_cells(const VertexFunction& f, const LevelGraph& graph) {
  GasketCells cells(graph.cell_count());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto ids = graph.cell_vertices(c);
    for (int j = 0; j < 3; ++j) cells[c][j] = f.values[ids[j]];
  }
  return cells;
}

VicsekCells vicsek_cells(const VertexFunction& f, const LevelGraph& graph) {
  VicsekCells cells(graph.cell_count());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto ids = graph.cell_vertices(c);
    for (int j = 0; j < 5; ++j) cells[c][j] = f.values[ids[j]];
  }
  return cells;
}

namespace {

template <class Cells>
VertexFunction scatter(const Cells& cells, const LevelGraph& graph, Family family) {
  VertexFunction out{family, graph.level(), std::vector<double>(graph.vertex_count())};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto ids = graph.cell_vertices(c);
    for (std::size_t j = 0; j < ids.size(); ++j) out.values[ids[j]] = cells[c][j];
  }
  return out;
}

void check_extension(const VertexFunction& f, Family family, int target) {
  if (f.family != family) throw FamilyMismatch("extension called on the wrong family");
  if (target < f.level) throw ContractError("extension target below the source level");
  const IfsSpec& spec = IfsSpec::of(family);
  const std::size_t expected = build_level_graph(spec, f.level).vertex_count();
  if (f.values.size() != expected) throw ContractError("vertex function has wrong size");
}

}  // namespace

VertexFunction extend_gasket(const VertexFunction& f, int target, double p) {
  if (!(p > 1.0)) throw Unsupported("p-harmonic extension on the gasket requires p > 1");
  check_extension(f, Family::Gasket, target);
  const IfsSpec& spec = IfsSpec::gasket();
  GasketCells cells = gasket_cells(f, build_level_graph(spec, f.level));
  for (int l = f.level; l < target; ++l) cells = refine_gasket_cells(cells, p);
  return scatter(cells, build_level_graph(spec, target), Family::Gasket);
}

VertexFunction extend_vicsek(const VertexFunction& f, int target) {
  check_extension(f, Family::Vicsek, target);
  const IfsSpec& spec = IfsSpec::vicsek();
  VicsekCells cells = vicsek_cells(f, build_level_graph(spec, f.level));
  for (int l = f.level; l < target; ++l) cells = refine_vicsek_cells(cells);
  return scatter(cells, build_level_graph(spec, target), Family::Vicsek);
}

void to_json(nlohmann::json& j, const RpEstimate& e) {
  j = {{"p", e.p},
       {"depth", static_cast<int>(e.energies.size()) - 1},
       {"energies", e.energies},
       {"ratios", e.ratios},
       {"r_hat", e.r_hat},
       {"stability", e.stability},
       {"lower_bound", rp_lower_bound(e.p)},
       {"upper_bound", rp_upper_bound(e.p)}};
}

RpEstimate estimate_rp(double p, int depth) {
  if (!(p > 1.0)) throw Unsupported("r_p is estimated for p > 1 only");
  if (depth < 1 || depth > 8) throw ContractError("estimate_rp: depth must be in [1, 8]");
  RpEstimate out;
  out.p = p;
  GasketCells cells{{1.0, 0.0, 0.0}};
  auto energy = [&] {
    double e = 0.0;
    for (const auto& c : cells) e += triangle_energy(c, p);
    return e;
  };
  out.energies.push_back(energy());
  for (int k = 0; k < depth; ++k) {
    cells = refine_gasket_cells(cells, p);
    out.energies.push_back(energy());
    out.ratios.push_back(out.energies[k + 1] / out.energies[k]);
  }
  out.r_hat = out.ratios.back();
  const std::size_t n = out.ratios.size();
  for (std::size_t k = n >= 3 ? n - 2 : 1; k < n; ++k) {
    out.stability = std::max(out.stability, std::abs(out.ratios[k] - out.ratios[k - 1]));
  }
  return out;
}

double rp_lower_bound(double p) { return std::pow(2.0, 1.0 - p); }

double rp_upper_bound(double p) { return 3.0 * std::pow(2.0, -p); }

double rp_sharp_upper_bound(double p) {
  return std::pow(2.0, p - 1.0) *
         std::pow(1.0 + std::sqrt(1.0 + std::pow(2.0, 3.0 - 1.0 / (p - 1.0))), 1.0 - p);
}

double critical_exponent(const IfsSpec& spec, double p, std::optional<double> r_hat) {
  if (p < 1.0) throw ContractError("critical_exponent: p must be >= 1");
  if (spec.family == Family::Vicsek) return 1.0 + (spec.hausdorff_dim - 1.0) / p;
  if (p == 1.0) return spec.hausdorff_dim;
  if (!r_hat) throw ContractError("critical_exponent: the gasket needs an r_p estimate");
  return (std::log(3.0) - std::log(*r_hat)) / (p * std::log(2.0));
}

}  // namespace ksfrac
