#include "ksfrac/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ksfrac/error.hpp"

namespace ksfrac {

std::string format9(double x) {
  std::ostringstream out;
  out.precision(9);
  out << x;
  return out.str();
}

nlohmann::json round9(nlohmann::json j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    return std::isfinite(x) ? nlohmann::json(std::stod(format9(x))) : j;
  }
  if (j.is_array() || j.is_object()) {
    for (auto& item : j) item = round9(item);
  }
  return j;
}

nlohmann::json graph_to_json(const LevelGraph& graph) {
  nlohmann::json vertices = nlohmann::json::array();
  for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
    const Point pt = graph.points()[v];
    vertices.push_back({pt.x, pt.y});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : graph.edges()) edges.push_back({e.u, e.v});
  return {{"family", std::string(to_string(graph.family()))},
          {"level", graph.level()},
          {"vertex_count", graph.vertex_count()},
          {"edge_count", graph.edge_count()},
          {"cell_count", graph.cell_count()},
          {"vertices", vertices},
          {"edges", edges}};
}

std::string vertices_csv(const LevelGraph& graph) {
  std::ostringstream out;
  out << "id,x,y,degree\n";
  for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
    const Point pt = graph.points()[v];
    out << v << ',' << format9(pt.x) << ',' << format9(pt.y) << ','
        << graph.degree(static_cast<int>(v)) << '\n';
  }
  return out.str();
}

std::string edges_csv(const LevelGraph& graph) {
  std::ostringstream out;
  out << "u,v,cell\n";
  for (const auto& e : graph.edges()) out << e.u << ',' << e.v << ',' << e.cell << '\n';
  return out.str();
}

std::string atoms_csv(const DiscreteMeasure& measure) {
  std::ostringstream out;
  out << "index,x,y,weight\n";
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const Point pt = measure.atoms()[i];
    out << i << ',' << format9(pt.x) << ',' << format9(pt.y) << ',' << format9(measure.weight())
        << '\n';
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path + " for writing");
  file << content;
  if (!file) throw Error("failed writing " + path);
}

}  // namespace ksfrac
