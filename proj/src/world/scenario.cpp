#include "langmpc/world/scenario.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>

namespace langmpc::world {
namespace {

using nlohmann::json;

Vec2 vec2_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) {
    throw InvalidWorld(fmt::format("'{}' must be a 2-element array", what));
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json vec2_to(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

std::vector<HalfSpace> Scenario::half_spaces() const {
  std::vector<HalfSpace> out;
  for (const auto& set : corridors) {
    out.insert(out.end(), set.faces.begin(), set.faces.end());
  }
  return out;
}

void Scenario::validate() const {
  if (!(robot_radius > 0.0) || !(human_radius > 0.0)) {
    throw InvalidWorld("radii must be positive");
  }
  const Vec2 p = robot_start.position();
  for (const auto& set : corridors) {
    for (const auto& face : set.faces) {
      if (face.normal.dot(p) - face.offset + robot_radius >= 0.0) {
        throw InvalidWorld(fmt::format("robot start violates corridor '{}'", set.name));
      }
    }
  }
  const double r = robot_radius + human_radius;
  for (std::size_t i = 0; i < humans_init.size(); ++i) {
    if ((humans_init[i].position - p).norm() <= r) {
      throw InvalidWorld(fmt::format("robot start overlaps human {}", i));
    }
  }
  if (!bounds.contains(goal)) {
    throw InvalidWorld("goal lies outside the workspace");
  }
}

Scenario scenario_from_json(const json& doc) {
  Scenario sc;
  try {
    sc.name = doc.at("name").get<std::string>();
    const auto& start = doc.at("robot_start");
    sc.robot_start = RobotState{start.at("x").get<double>(), start.at("y").get<double>(),
                                start.value("theta", 0.0), start.value("v", 0.0)};
    sc.robot_radius = doc.value("robot_radius", kDefaultRobotRadius);
    sc.human_radius = doc.value("human_radius", kDefaultHumanRadius);
    sc.goal = vec2_from(doc.at("goal"), "goal");

    std::vector<Vec2> waypoints;
    for (const auto& w : doc.at("reference_path")) {
      waypoints.push_back(vec2_from(w, "reference_path[]"));
    }
    sc.reference_path = ReferencePath(std::move(waypoints));

    for (const auto& h : doc.value("humans_init", json::array())) {
      sc.humans_init.push_back(HumanSpawn{vec2_from(h.at("position"), "humans_init[].position"),
                                          vec2_from(h.at("goal"), "humans_init[].goal"),
                                          h.value("desired_speed", 1.3)});
    }
    for (const auto& c : doc.value("corridors", json::array())) {
      CorridorSet set;
      set.name = c.value("name", "");
      for (const auto& f : c.at("halfspaces")) {
        const Vec2 n = vec2_from(f.at("normal"), "halfspaces[].normal");
        if (!(n.norm() > 0.0)) {
          throw InvalidWorld("half-space normal must be nonzero");
        }
        // stored normalized; offset rescaled so the half-space is unchanged
        set.faces.push_back(HalfSpace{n.normalized(), f.at("offset").get<double>() / n.norm()});
      }
      sc.corridors.push_back(std::move(set));
    }
    const auto& b = doc.at("bounds");
    sc.bounds = Workspace{b.at("x_min").get<double>(), b.at("x_max").get<double>(),
                          b.at("y_min").get<double>(), b.at("y_max").get<double>()};
  } catch (const json::exception& e) {
    throw InvalidWorld(fmt::format("malformed scenario document: {}", e.what()));
  }
  sc.validate();
  return sc;
}

json scenario_to_json(const Scenario& sc) {
  json doc;
  doc["name"] = sc.name;
  doc["robot_start"] = {{"x", sc.robot_start.x},
                        {"y", sc.robot_start.y},
                        {"theta", sc.robot_start.theta},
                        {"v", sc.robot_start.v}};
  doc["robot_radius"] = sc.robot_radius;
  doc["human_radius"] = sc.human_radius;
  doc["goal"] = vec2_to(sc.goal);
  doc["reference_path"] = json::array();
  for (const auto& w : sc.reference_path.waypoints()) {
    doc["reference_path"].push_back(vec2_to(w));
  }
  doc["humans_init"] = json::array();
  for (const auto& h : sc.humans_init) {
    doc["humans_init"].push_back(
        {{"position", vec2_to(h.position)}, {"goal", vec2_to(h.goal)}, {"desired_speed", h.desired_speed}});
  }
  doc["corridors"] = json::array();
  for (const auto& set : sc.corridors) {
    json faces = json::array();
    for (const auto& f : set.faces) {
      faces.push_back({{"normal", vec2_to(f.normal)}, {"offset", f.offset}});
    }
    doc["corridors"].push_back({{"name", set.name}, {"halfspaces", faces}});
  }
  doc["bounds"] = {{"x_min", sc.bounds.x_min},
                   {"x_max", sc.bounds.x_max},
                   {"y_min", sc.bounds.y_min},
                   {"y_max", sc.bounds.y_max}};
  return doc;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw InvalidWorld(fmt::format("cannot open scenario file '{}'", file.string()));
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidWorld(fmt::format("'{}' is not valid JSON: {}", file.string(), e.what()));
  }
  return scenario_from_json(doc);
}

}  // namespace langmpc::world
