#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>

#include "ibfilm/multigrid.hpp"
#include "ibfilm/springs.hpp"

namespace ibfilm {

struct RunSummary;
struct Scenario;

/// Alive springs attached to each node.
std::vector<int> alive_degree(const Biofilm& b);

/// Node table rows `step,time,node,x,y[,z],alive_springs`.
void write_nodes_header(std::ostream& out, int dim);
void write_nodes(std::ostream& out, long step, double t, const Biofilm& b);

/// Rows `i,j[,k],v0[,v1...]`.
void write_field_csv(const std::string& path, const Field& f);

/// Binary layout, little-endian: char[4] "IBFD", int32 dim, int32
/// components, int32 points[3], float64 h, float64 extent[3], then the
/// components one after another with x varying fastest.
void write_field_binary(const std::string& path, const Field& f);
Field read_field_binary(const std::string& path);

nlohmann::json to_json(const SolveStats& s, bool history = false);
nlohmann::json to_json(const RunSummary& s);
nlohmann::json scenario_json(const Scenario& s);

void write_json(const std::string& path, const nlohmann::json& j);

/// Creates the directory (and parents) if needed.
void ensure_directory(const std::string& path);

}  // namespace ibfilm
