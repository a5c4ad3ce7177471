#pragma once

#include <array>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ksfrac/geometry.hpp"

namespace ksfrac {

// Values on the vertices V_n of a LevelGraph, indexed by vertex id.
struct VertexFunction {
  Family family = Family::Gasket;
  int level = 0;
  std::vector<double> values;
};

// Values on the atoms of a level-N DiscreteMeasure, indexed by word.
struct CellFunction {
  Family family = Family::Gasket;
  int level = 0;
  std::vector<double> values;
};

namespace fn {

struct Constant {
  double value = 0.0;
};

// Physical coordinate, axis 0 = x, 1 = y.
struct Coordinate {
  int axis = 0;
};

// |x - q_corner|^gamma in the Euclidean metric.
struct DistancePower {
  int corner = 0;
  double gamma = 1.0;
};

// Affine along the cable system of V_level, constant on every branch that
// appears at finer levels. `values` are indexed by the vertex ids of the
// level graph.
struct PiecewiseAffineVicsek {
  int level = 0;
  std::vector<double> values;
};

// p-harmonic extension of corner data (q_1, q_2, q_3) on the gasket.
struct HarmonicExtensionGasket {
  double p = 2.0;
  std::array<double, 3> boundary{1.0, 0.0, 0.0};
};

// Metric ramp: 1 on the ball of radius diam(K_w)/2 around the barycentre of
// K_w, decreasing linearly to 0 over `smoothing`.
struct IndicatorCell {
  Word word;
  double smoothing = 0.25;
};

}  // namespace fn

using FunctionSpec =
    std::variant<fn::Constant, fn::Coordinate, fn::DistancePower,
                 fn::PiecewiseAffineVicsek, fn::HarmonicExtensionGasket,
                 fn::IndicatorCell>;

// Short stable label, e.g. "distance_power(q1,0.5)".
std::string label(const FunctionSpec& spec);

void to_json(nlohmann::json& j, const FunctionSpec& spec);
void from_json(const nlohmann::json& j, FunctionSpec& spec);

// Throws FamilyMismatch when the variant does not exist on the family.
VertexFunction evaluate(const FunctionSpec& spec, const LevelGraph& graph);
CellFunction evaluate(const FunctionSpec& spec, const DiscreteMeasure& measure);

// f_hat_n(v): mean of f over the union of the level-(n+1) cells containing v.
VertexFunction restrict_to_vertices(const CellFunction& f, int level);

// Deterministic test corpus: a constant, both coordinates, three distance
// powers, the family's finite-energy member and a smoothed indicator.
std::vector<FunctionSpec> corpus(const IfsSpec& spec, double p);

bool is_constant(std::span<const double> values, double tolerance = 1e-12);

}  // namespace ksfrac
