#include "ksfrac/functions.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ksfrac/error.hpp"
#include "ksfrac/harmonic.hpp"

namespace ksfrac {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_number(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

Point cell_barycentre(const IfsSpec& spec, const Word& w) {
  Point c{0.0, 0.0};
  for (int j = 0; j < spec.corner_count(); ++j) {
    const Point p = spec.to_point(cell_vertex_key(spec, w, j), w.level());
    c.x += p.x;
    c.y += p.y;
  }
  c.x /= spec.corner_count();
  c.y /= spec.corner_count();
  return c;
}

// Closed-form members evaluated at a point; nullopt for the recursive ones.
std::optional<double> pointwise(const FunctionSpec& spec, const IfsSpec& ifs, Point x) {
  return std::visit(
      overloaded{
          [](const fn::Constant& c) -> std::optional<double> { return c.value; },
          [&](const fn::Coordinate& c) -> std::optional<double> {
            return c.axis == 0 ? x.x : x.y;
          },
          [&](const fn::DistancePower& d) -> std::optional<double> {
            return std::pow(euclidean_distance(x, ifs.fixed_point(d.corner)), d.gamma);
          },
          [&](const fn::IndicatorCell& ind) -> std::optional<double> {
            const Point c = cell_barycentre(ifs, ind.word);
            const double inner =
                0.5 * ifs.euclidean_diameter * std::pow(ifs.ratio(), ind.word.level());
            const double t = (inner + ind.smoothing - euclidean_distance(x, c)) / ind.smoothing;
            return std::clamp(t, 0.0, 1.0);
          },
          [](const auto&) -> std::optional<double> { return std::nullopt; },
      },
      spec);
}

void check_spec(const FunctionSpec& spec, const IfsSpec& ifs) {
  std::visit(
      overloaded{
          [&](const fn::Coordinate& c) {
            if (c.axis != 0 && c.axis != 1) throw ContractError("coordinate axis must be 0 or 1");
          },
          [&](const fn::DistancePower& d) {
            if (d.corner < 0 || d.corner >= ifs.corner_count())
              throw ContractError("distance_power corner out of range");
            if (!(d.gamma > 0.0)) throw ContractError("distance_power gamma must be > 0");
          },
          [&](const fn::PiecewiseAffineVicsek&) {
            if (ifs.family != Family::Vicsek)
              throw FamilyMismatch("piecewise affine functions live on the Vicsek set");
          },
          [&](const fn::HarmonicExtensionGasket&) {
            if (ifs.family != Family::Gasket)
              throw FamilyMismatch("harmonic extensions live on the gasket");
          },
          [&](const fn::IndicatorCell& ind) {
            for (auto d : ind.word.digits) {
              if (d >= ifs.branch_count) throw ContractError("indicator word digit out of range");
            }
            if (!(ind.smoothing > 0.0)) throw ContractError("indicator smoothing must be > 0");
          },
          [](const fn::Constant&) {},
      },
      spec);
}

VertexFunction base_piecewise_affine(const fn::PiecewiseAffineVicsek& pa,
                                     const LevelGraph& base) {
  if (pa.values.size() != base.vertex_count()) {
    throw ContractError("piecewise affine values do not match |V_level|");
  }
  return {Family::Vicsek, pa.level, pa.values};
}

VertexFunction base_harmonic(const fn::HarmonicExtensionGasket& h, const LevelGraph& base) {
  VertexFunction f{Family::Gasket, 0, std::vector<double>(base.vertex_count())};
  const auto corners = base.cell_vertices(0);
  for (int j = 0; j < 3; ++j) f.values[corners[j]] = h.boundary[j];
  return f;
}

}  // namespace

bool is_constant(std::span<const double> values, double tolerance) {
  if (values.empty()) return true;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo <= tolerance * std::max(1.0, std::abs(*hi));
}

std::string label(const FunctionSpec& spec) {
  return std::visit(
      overloaded{
          [](const fn::Constant& c) { return "constant(" + fmt_number(c.value) + ")"; },
          [](const fn::Coordinate& c) {
            return std::string("coordinate(") + (c.axis == 0 ? "x" : "y") + ")";
          },
          [](const fn::DistancePower& d) {
            return "distance_power(q" + std::to_string(d.corner + 1) + "," +
                   fmt_number(d.gamma) + ")";
          },
          [](const fn::PiecewiseAffineVicsek& pa) {
            return "piecewise_affine(level" + std::to_string(pa.level) + ")";
          },
          [](const fn::HarmonicExtensionGasket& h) {
            return "harmonic(p" + fmt_number(h.p) + ",(" + fmt_number(h.boundary[0]) + "," +
                   fmt_number(h.boundary[1]) + "," + fmt_number(h.boundary[2]) + "))";
          },
          [](const fn::IndicatorCell& ind) {
            std::string w;
            for (auto d : ind.word.digits) w += std::to_string(d);
            return "indicator(w" + w + "," + fmt_number(ind.smoothing) + ")";
          },
      },
      spec);
}

void to_json(nlohmann::json& j, const FunctionSpec& spec) {
  std::visit(
      overloaded{
          [&](const fn::Constant& c) { j = {{"kind", "constant"}, {"value", c.value}}; },
          [&](const fn::Coordinate& c) { j = {{"kind", "coordinate"}, {"axis", c.axis}}; },
          [&](const fn::DistancePower& d) {
            j = {{"kind", "distance_power"}, {"corner", d.corner}, {"gamma", d.gamma}};
          },
          [&](const fn::PiecewiseAffineVicsek& pa) {
            j = {{"kind", "piecewise_affine_vicsek"}, {"level", pa.level}, {"values", pa.values}};
          },
          [&](const fn::HarmonicExtensionGasket& h) {
            j = {{"kind", "harmonic_extension_gasket"}, {"p", h.p}, {"boundary", h.boundary}};
          },
          [&](const fn::IndicatorCell& ind) {
            j = {{"kind", "indicator_cell"},
                 {"word", ind.word.digits},
                 {"smoothing", ind.smoothing}};
          },
      },
      spec);
}

void from_json(const nlohmann::json& j, FunctionSpec& spec) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    spec = fn::Constant{j.at("value").get<double>()};
  } else if (kind == "coordinate") {
    spec = fn::Coordinate{j.at("axis").get<int>()};
  } else if (kind == "distance_power") {
    spec = fn::DistancePower{j.at("corner").get<int>(), j.at("gamma").get<double>()};
  } else if (kind == "piecewise_affine_vicsek") {
    spec = fn::PiecewiseAffineVicsek{j.at("level").get<int>(),
                                     j.at("values").get<std::vector<double>>()};
  } else if (kind == "harmonic_extension_gasket") {
    spec = fn::HarmonicExtensionGasket{j.at("p").get<double>(),
                                       j.at("boundary").get<std::array<double, 3>>()};
  } else if (kind == "indicator_cell") {
    spec = fn::IndicatorCell{Word{j.at("word").get<std::vector<std::uint8_t>>()},
                             j.at("smoothing").get<double>()};
  } else {
    throw ContractError("unknown function kind '" + kind + "'");
  }
}

VertexFunction evaluate(const FunctionSpec& spec, const LevelGraph& graph) {
  const IfsSpec& ifs = graph.spec();
  check_spec(spec, ifs);
  VertexFunction f{ifs.family, graph.level(), {}};

  if (const auto* pa = std::get_if<fn::PiecewiseAffineVicsek>(&spec)) {
    const LevelGraph base = build_level_graph(ifs, pa->level);
    VertexFunction coarse = base_piecewise_affine(*pa, base);
    if (graph.level() >= pa->level) return extend_vicsek(coarse, graph.level());
    f.values.reserve(graph.vertex_count());
    for (auto key : graph.keys()) {
      f.values.push_back(
          coarse.values[*base.find(ifs.refine(key, graph.level(), pa->level))]);
    }
    return f;
  }
  if (const auto* h = std::get_if<fn::HarmonicExtensionGasket>(&spec)) {
    const LevelGraph base = build_level_graph(ifs, 0);
    VertexFunction coarse = base_harmonic(*h, base);
    if (graph.level() == 0) return coarse;
    return extend_gasket(coarse, graph.level(), h->p);
  }
  f.values.reserve(graph.vertex_count());
  for (auto x : graph.points()) f.values.push_back(*pointwise(spec, ifs, x));
  return f;
}

CellFunction evaluate(const FunctionSpec& spec, const DiscreteMeasure& measure) {
  const IfsSpec& ifs = measure.spec();
  check_spec(spec, ifs);
  CellFunction f{ifs.family, measure.level(), {}};
  f.values.reserve(measure.size());

  if (const auto* pa = std::get_if<fn::PiecewiseAffineVicsek>(&spec)) {
    // The atom of a Vicsek cell is its centre vertex.
    const LevelGraph base = build_level_graph(ifs, pa->level);
    const VertexFunction coarse = base_piecewise_affine(*pa, base);
    if (measure.level() >= pa->level) {
      VicsekCells cells = vicsek_cells(coarse, base);
      for (int l = pa->level; l < measure.level(); ++l) cells = refine_vicsek_cells(cells);
      for (const auto& c : cells) f.values.push_back(c[4]);
    } else {
      for (std::size_t i = 0; i < measure.size(); ++i) {
        const Word w = Word::from_index(i, measure.level(), ifs.branch_count);
        const LatticeKey key =
            ifs.refine(cell_vertex_key(ifs, w, 4), measure.level(), pa->level);
        f.values.push_back(coarse.values[*base.find(key)]);
      }
    }
    return f;
  }
  if (const auto* h = std::get_if<fn::HarmonicExtensionGasket>(&spec)) {
    // Barycentre value approximated by the mean of the three corner values.
    GasketCells cells{h->boundary};
    for (int l = 0; l < measure.level(); ++l) cells = refine_gasket_cells(cells, h->p);
    for (const auto& c : cells) f.values.push_back((c[0] + c[1] + c[2]) / 3.0);
    return f;
  }
  for (auto x : measure.atoms()) f.values.push_back(*pointwise(spec, ifs, x));
  return f;
}

VertexFunction restrict_to_vertices(const CellFunction& f, int level) {
  if (level < 0 || level + 1 > f.level) {
    throw ContractError("restrict_to_vertices: need level + 1 <= " + std::to_string(f.level));
  }
  const IfsSpec& ifs = IfsSpec::of(f.family);
  if (f.values.size() != ifs.cell_count(f.level)) {
    throw ContractError("restrict_to_vertices: value count does not match level");
  }
  const LevelGraph coarse = build_level_graph(ifs, level);
  const LevelGraph fine = build_level_graph(ifs, level + 1);
  const std::size_t block = ifs.cell_count(f.level - level - 1);

  VertexFunction out{f.family, level, std::vector<double>(coarse.vertex_count())};
  for (std::size_t v = 0; v < coarse.vertex_count(); ++v) {
    const int vf = *fine.find(ifs.refine(coarse.keys()[v], level, level + 1));
    const auto cells = fine.incident_cells(vf);
    double sum = 0.0;
    for (auto c : cells) {
      for (std::size_t a = c * block; a < (c + 1) * block; ++a) sum += f.values[a];
    }
    out.values[v] = sum / static_cast<double>(cells.size() * block);
  }
  return out;
}

std::vector<FunctionSpec> corpus(const IfsSpec& spec, double p) {
  if (p < 1.0) throw ContractError("corpus: p must be >= 1");
  std::vector<FunctionSpec> out;
  out.push_back(fn::Constant{1.0});
  out.push_back(fn::Coordinate{0});
  out.push_back(fn::Coordinate{1});
  for (double gamma : {0.5, 1.0, 2.0}) out.push_back(fn::DistancePower{0, gamma});
  if (spec.family == Family::Vicsek) {
    // Level-0 vertex ids are sorted lattice keys:
    // (0,0)=q1, (0,2)=q4, (1,1)=q5, (2,0)=q2, (2,2)=q3.
    // Affine along the diagonal q1 -> q3, zero on the other diagonal.
    out.push_back(fn::PiecewiseAffineVicsek{0, {1.0, 0.0, 0.0, 0.0, -1.0}});
  } else {
    // p = 1 extensions are not unique; the p = 2 one stands in.
    out.push_back(fn::HarmonicExtensionGasket{p > 1.0 ? p : 2.0, {1.0, 0.0, 0.0}});
  }
  out.push_back(fn::IndicatorCell{Word{{0}}, 0.25});
  return out;
}

}  // namespace ksfrac
