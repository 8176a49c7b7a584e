#include "messages.hpp"

#include <fmt/format.h>

#include <cstdlib>

namespace langmpc::assistants::detail {
namespace {

/// Collapses blank lines so a body never ends its section early.
std::string body(std::string_view text) {
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    const std::string_view line = text.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      out.append(line);
      out.push_back('\n');
    }
    start = end + 1;
  }
  return out.empty() ? "(none)\n" : out;
}

void append(std::string& message, std::string_view label, std::string_view text) {
  message += fmt::format("{}:\n{}\n", label, body(text));
}

std::string parameter_lines(const dsl::CostSpec& spec, bool tunable_only) {
  std::string out;
  for (const auto& [name, p] : spec.params.entries()) {
    if (!tunable_only || p.tunable) {
      out += fmt::format("PARAM {}={}{}{}\n", name, p.value, p.unit.empty() ? "" : " ", p.unit);
    }
  }
  return out;
}

std::string geometry_text(const Geometry& g) {
  return fmt::format(
      "robot_radius={} m\nhuman_radius={} m\npx, py and oh_x, oh_y are centre positions; a clearance c between the "
      "robot and a human is a centre distance of c + {} m.",
      g.robot_radius, g.human_radius, g.robot_radius + g.human_radius);
}

}  // namespace

std::string capability_message(std::string_view query, const dsl::CostSpec& spec) {
  std::string m;
  append(m, kQuery, query);
  append(m, kCostFunction, spec.describe());
  return m;
}

std::string cost_generation_message(std::string_view query, const dsl::CostSpec& spec, const Geometry& geometry) {
  std::string m;
  append(m, kQuery, query);
  append(m, kCostFunction, spec.describe());
  append(m, kParameters, parameter_lines(spec, false));
  append(m, kGeometry, geometry_text(geometry));
  return m;
}

std::string camera_message(std::string_view scene) {
  std::string m;
  append(m, kScene, scene);
  return m;
}

std::string weight_message(std::string_view instruction, const dsl::CostSpec& spec,
                           const ImportanceRatings& ratings, const Geometry& geometry) {
  std::string rating_lines;
  for (const auto& [name, z] : ratings) {
    rating_lines += fmt::format("RATING {}={}\n", name, z);
  }
  std::string m;
  append(m, kInstruction, instruction);
  append(m, kCostFunction, spec.describe());
  append(m, kRatings, rating_lines);
  append(m, kParameters, parameter_lines(spec, true));
  append(m, kGeometry, geometry_text(geometry));
  return m;
}

std::string repair_message(std::string_view error) {
  std::string m;
  append(m, kError, fmt::format("Your previous answer could not be used: {}", error));
  m += "Answer again in the required format.\n";
  return m;
}

Geometry parse_geometry(std::string_view message) {
  Geometry g;
  const std::string text = section(message, kGeometry);
  const auto read = [&](std::string_view key, double& out) {
    const auto pos = text.find(fmt::format("{}=", key));
    if (pos != std::string::npos) {
      out = std::strtod(text.c_str() + pos + key.size() + 1, nullptr);
    }
  };
  read("robot_radius", g.robot_radius);
  read("human_radius", g.human_radius);
  return g;
}

std::string section(std::string_view message, std::string_view label) {
  const std::string header = fmt::format("{}:\n", label);
  std::size_t pos = message.rfind(header, 0) == 0 ? 0 : message.find("\n" + header);
  if (pos == std::string_view::npos) {
    return {};
  }
  pos += (pos == 0 && message.rfind(header, 0) == 0) ? header.size() : header.size() + 1;
  const std::size_t end = message.find("\n\n", pos);
  std::string out(message.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
  return out == "(none)" ? std::string{} : out;
}

}  // namespace langmpc::assistants::detail
