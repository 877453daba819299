// Graph exchange formats: JSON ({"vertices", "edges", "labels"}), DOT for
// visualization, CSV distance dumps.

#ifndef DRILL_GRAPH_IO_HPP_
#define DRILL_GRAPH_IO_HPP_

#include <sstream>
#include <string>

#include <json.hpp>

#include "drill/graph.hpp"

namespace drill {

inline nlohmann::ordered_json graph_to_json(const Graph& g) {
  nlohmann::ordered_json j;
  j["vertices"] = g.num_vertices();
  auto edges = nlohmann::ordered_json::array();
  for (auto [u, v] : g.edges()) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  if (g.has_labels()) {
    auto labels = nlohmann::ordered_json::object();
    for (Vertex v = 0; v < g.num_vertices(); ++v)
      if (!g.label(v).empty()) labels[std::to_string(v)] = g.label(v);
    j["labels"] = std::move(labels);
  }
  return j;
}

inline Graph graph_from_json(const nlohmann::ordered_json& j) {
  Graph g(j.at("vertices").get<int>());
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw std::invalid_argument("graph json: malformed edge");
    g.add_edge(e[0].get<int>(), e[1].get<int>());
  }
  if (j.contains("labels"))
    for (auto& [k, v] : j.at("labels").items()) g.set_label(std::stoi(k), v.get<std::string>());
  return g;
}

inline std::string graph_to_dot(const Graph& g, const std::string& name = "G") {
  std::ostringstream os;
  os << "graph " << name << " {\n";
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    os << "  " << v;
    if (g.has_labels() && !g.label(v).empty()) os << " [label=\"" << g.label(v) << "\"]";
    os << ";\n";
  }
  for (auto [u, v] : g.edges()) os << "  " << u << " -- " << v << ";\n";
  os << "}\n";
  return os.str();
}

inline std::string distances_to_csv(const DistanceField& d) {
  std::ostringstream os;
  os << "vertex,distance\n";
  for (Vertex v = 0; v < static_cast<int>(d.size()); ++v) {
    os << v << ',';
    if (d.reachable(v))
      os << d.at(v);
    else
      os << "inf";
    os << '\n';
  }
  return os.str();
}

}  // namespace drill

#endif  // DRILL_GRAPH_IO_HPP_
