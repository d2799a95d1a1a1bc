#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "pngdyn/error.hpp"
#include "pngdyn/game.hpp"

namespace pngdyn {

// Game definition files are JSON documents:
//   {
//     "name": "PD",
//     "populations": [ {"id": 1, "actions": ["C", "D"]}, ... ],
//     "edges": [ {"i": 1, "j": 2,
//                 "matrix_ij": [6, 2, 8, 2],      row-major, |S_i| x |S_j|
//                 "matrix_ji": [6, 2, 8, 2]} ]    row-major, |S_j| x |S_i|
//   }
// Population ids are 1-based and must be contiguous.

inline nlohmann::json game_to_json(const NetworkGame& game) {
  nlohmann::json doc;
  doc["name"] = game.name();
  doc["populations"] = nlohmann::json::array();
  for (std::size_t i = 0; i < game.num_populations(); ++i) {
    doc["populations"].push_back(
        {{"id", i + 1}, {"actions", game.actions(static_cast<int>(i)).labels}});
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : game.edges()) {
    doc["edges"].push_back({{"i", e.i + 1},
                            {"j", e.j + 1},
                            {"matrix_ij", e.payoff_ij.data()},
                            {"matrix_ji", e.payoff_ji.data()}});
  }
  return doc;
}

inline NetworkGame game_from_json(const nlohmann::json& doc) {
  if (!doc.contains("populations") || !doc.contains("edges"))
    throw InputError("game file: 'populations' and 'edges' are required");
  const auto& pops = doc.at("populations");
  std::vector<ActionSpace> spaces(pops.size());
  for (const auto& p : pops) {
    const std::size_t id = p.at("id").get<std::size_t>();
    if (id < 1 || id > pops.size())
      throw InputError("game file: population ids must be 1.." + std::to_string(pops.size()));
    spaces[id - 1].labels = p.at("actions").get<std::vector<std::string>>();
  }
  std::vector<Edge> edges;
  for (const auto& je : doc.at("edges")) {
    Edge e;
    e.i = je.at("i").get<int>() - 1;
    e.j = je.at("j").get<int>() - 1;
    if (e.i < 0 || e.j < 0 || e.i >= static_cast<int>(spaces.size()) ||
        e.j >= static_cast<int>(spaces.size()))
      throw InputError("game file: edge endpoint out of range");
    const std::size_t si = spaces[e.i].size(), sj = spaces[e.j].size();
    auto mij = je.at("matrix_ij").get<std::vector<double>>();
    auto mji = je.at("matrix_ji").get<std::vector<double>>();
    if (mij.size() != si * sj || mji.size() != sj * si)
      throw ShapeError("game file: matrix length does not match action spaces");
    e.payoff_ij = Matrix(si, sj, std::move(mij));
    e.payoff_ji = Matrix(sj, si, std::move(mji));
    edges.push_back(std::move(e));
  }
  return NetworkGame(doc.value("name", std::string("custom")), std::move(spaces),
                     std::move(edges));
}

inline NetworkGame load_game_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open game file: " + path);
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("game file " + path + ": " + e.what());
  }
  return game_from_json(doc);
}

inline void save_game_file(const std::string& path, const NetworkGame& game) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open game file for writing: " + path);
  f << game_to_json(game).dump(2) << "\n";
}

}  // namespace pngdyn
