#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ksfrac/geometry.hpp"

namespace ksfrac {

// Nine significant digits, the precision of every number the tools print.
std::string format9(double x);
// Rounds every floating-point number in `j` to nine significant digits, so
// that dump() prints at most nine.
nlohmann::json round9(nlohmann::json j);

nlohmann::json graph_to_json(const LevelGraph& graph);
std::string vertices_csv(const LevelGraph& graph);  // id,x,y,degree
std::string edges_csv(const LevelGraph& graph);     // u,v,cell
std::string atoms_csv(const DiscreteMeasure& measure);  // index,x,y,weight

// Throws Error when the file cannot be written.
void write_text(const std::string& path, const std::string& content);

}  // namespace ksfrac
