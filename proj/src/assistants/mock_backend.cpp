#include "langmpc/assistants/backends.hpp"
#include "langmpc/assistants/reference_costs.hpp"
#include "langmpc/assistants/response.hpp"
#include "langmpc/dsl/cost_spec.hpp"
#include "messages.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <initializer_list>
#include <map>
#include <optional>
#include <regex>

namespace langmpc::assistants {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool any_of(const std::string& text, std::initializer_list<std::string_view> needles) {
  return std::any_of(needles.begin(), needles.end(),
                     [&](std::string_view n) { return text.find(n) != std::string::npos; });
}

/// What a query asks the cost function to express.
struct Needs {
  bool path{false};
  bool goal{false};
  bool follow_human{false};
  bool avoid_human{false};
  bool safe_distance{false};

  bool any() const { return path || goal || follow_human || avoid_human || safe_distance; }
};

Needs needs_of(const std::string& q) {
  const bool human = any_of(q, {"human", "person", "people", "pedestrian"});
  Needs n;
  n.path = q.find("path") != std::string::npos;
  n.goal = any_of(q, {"goal", "reach"});
  n.avoid_human = human && any_of(q, {"maximize the distance", "maximise the distance", "away from"});
  n.follow_human = human && !n.avoid_human &&
                   any_of(q, {"follow the closest", "follow the nearest", "follow the human", "follow the person",
                              "follow a human", "follow a person", "follow the pedestrian", "minimize the distance",
                              "minimise the distance"});
  n.safe_distance =
      human && any_of(q, {"safe distance", "at least", "keep a distance", "keep distance", "keep your distance"});
  return n;
}

/// "name: source" lines of a described cost function.
std::vector<std::pair<std::string, std::string>> cost_lines(std::string_view described) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t start = 0;
  while (start < described.size()) {
    const std::size_t end = std::min(described.find('\n', start), described.size());
    const std::string_view line = described.substr(start, end - start);
    if (const auto colon = line.find(": "); colon != std::string_view::npos) {
      out.emplace_back(std::string(line.substr(0, colon)), std::string(line.substr(colon + 2)));
    }
    start = end + 1;
  }
  return out;
}

bool refers_to_human(const std::string& source) { return source.find("oh_x") != std::string::npos; }

Needs capabilities_of(std::string_view described) {
  Needs has;
  for (const auto& [name, source] : cost_lines(described)) {
    has.path |= source.find("e_c") != std::string::npos || source.find("e_l") != std::string::npos;
    has.goal |= source.find("goal_x") != std::string::npos;
    has.safe_distance |= source.find("d_safe") != std::string::npos;
    if (refers_to_human(source) && source.find("d_safe") == std::string::npos) {
      const bool inverse = source.find('/') != std::string::npos;
      has.avoid_human |= inverse;
      has.follow_human |= !inverse && source.find("if_else") == std::string::npos;
    }
  }
  return has;
}

/// Distance in metres mentioned in the text ("1.5m", "2 m").
std::optional<double> mentioned_distance(const std::string& text) {
  static const std::regex pattern(R"((\d+(?:\.\d+)?)\s*(?:m|meters?|metres?)\b)");
  std::smatch match;
  if (std::regex_search(text, match, pattern)) {
    return std::stod(match[1].str());
  }
  return std::nullopt;
}

std::string answer_route(std::string_view user) {
  const std::string q = lower(detail::section(user, detail::kQuery));
  const std::string described = detail::section(user, detail::kCostFunction);
  if (any_of(q, {"adapt to the environment", "adapt to your surroundings", "adapt to the surroundings",
                 "look around"})) {
    return "```\nDECISION: ADAPT_TO_ENVIRONMENT\nREASON: The query asks to adapt to what the robot sees.\n```\n";
  }
  const Needs need = needs_of(q);
  const Needs has = capabilities_of(described);
  const bool missing = (need.path && !has.path) || (need.goal && !has.goal) ||
                       (need.follow_human && !has.follow_human) || (need.avoid_human && !has.avoid_human) ||
                       (need.safe_distance && !has.safe_distance);
  if (missing) {
    return "```\nDECISION: GENERATE_NEW_COST\nREASON: The current cost function lacks a term the query needs.\n```\n";
  }
  return "```\nDECISION: UPDATE_PARAMETERS\nREASON: The current terms cover the query.\n```\n";
}

std::string answer_cost(const std::vector<ChatMessage>& conversation, std::string_view user) {
  // A repair request carries no query of its own; answer the original one.
  const std::string_view original = conversation.empty() ? user : std::string_view(conversation.front().content);
  const std::string raw_query = detail::section(original, detail::kQuery);
  const std::string q = lower(raw_query);
  const Needs need = needs_of(q);

  std::string out = "```\n";
  if (need.path) {
    out += "TERM: contour\nTERM: lag\n";
  }
  if (need.goal) {
    out += "TERM: goal\n";
  }
  if (need.avoid_human) {
    out += fmt::format("TERM: human_max = {}\n", kHumanMaxSource);
  } else if (need.follow_human) {
    out += fmt::format("TERM: human_follow = {}\n", kHumanFollowSource);
  }
  if (need.safe_distance) {
    out += fmt::format("TERM: safe_distance = {}\n", kSafeDistanceSource);
    // Stated distances are gaps between bodies; the term measures centres.
    const auto g = detail::parse_geometry(original);
    out += fmt::format("PARAM d_safe = {} m\n", mentioned_distance(q).value_or(1.0) + g.robot_radius + g.human_radius);
  }
  if (!need.any()) {
    // Nothing recognizable: keep the current task terms.
    for (const auto& [name, source] : cost_lines(detail::section(original, detail::kCostFunction))) {
      const bool mandatory = std::find(dsl::kMandatoryTerms.begin(), dsl::kMandatoryTerms.end(), name) !=
                             dsl::kMandatoryTerms.end();
      if (mandatory) {
        continue;
      }
      out += dsl::is_builtin(name) ? fmt::format("TERM: {}\n", name) : fmt::format("TERM: {} = {}\n", name, source);
    }
  }
  out += "TERM: velocity\nTERM: accel\nTERM: omega\n";
  out += "REASON: Terms chosen for the requested behavior.\n```\n";
  return out;
}

std::string answer_camera(std::string_view user) {
  const std::string scene = lower(detail::section(user, detail::kScene));
  if (any_of(scene, {"no people", "no pedestrians", "no humans", "empty"})) {
    return "```\n- The corridor is clear, so follow the reference path closely.\n"
           "- Keep a steady cruising speed.\n- Moderate acceleration and turning are acceptable.\n```\n";
  }
  if (any_of(scene, {"congested", "several pedestrians", "pedestrians approaching", "busy"})) {
    return "```\n- The corridor is congested, so slow down and give way to pedestrians.\n"
           "- Stay close to the reference path.\n- Accelerate gently.\n```\n";
  }
  if (any_of(scene, {"crowd", "open space"})) {
    return "```\n- Dense crowd in open space, so leave the path when needed to avoid people.\n"
           "- Keep smooth motion and avoid sudden turns.\n- Keep a moderate speed.\n```\n";
  }
  return "```\n- Proceed normally with the current task.\n```\n";
}

// Final importance of contour, lag, velocity, accel, omega per camera scene.
constexpr std::array<std::array<int, 5>, 3> kSceneRatings = {{{8, 8, 6, 6, 7}, {8, 8, 4, 7, 6}, {6, 6, 4, 7, 7}}};
constexpr std::array<const char*, 5> kSceneTerms = {"contour", "lag", "velocity", "accel", "omega"};

std::string answer_weights(std::string_view user) {
  const std::string instruction = lower(detail::section(user, detail::kInstruction));
  const auto current = parse_ratings(detail::section(user, detail::kRatings));
  std::map<std::string, long> z = current ? current->ratings : std::map<std::string, long>{};
  std::map<std::string, double> params;
  std::map<std::string, std::string> units;
  for (const auto& p : parse_params(detail::section(user, detail::kParameters))) {
    params[p.name] = p.value;
    units[p.name] = p.unit;
  }
  std::vector<std::string> human_terms;
  for (const auto& [name, source] : cost_lines(detail::section(user, detail::kCostFunction))) {
    if (refers_to_human(source)) {
      human_terms.push_back(name);
    }
  }
  const auto bump = [&](const std::string& term, long delta) {
    if (auto it = z.find(term); it != z.end()) {
      it->second = std::clamp<long>(it->second + delta, 0, 10);
    }
  };

  std::optional<std::size_t> scene;
  if (instruction.find("corridor is clear") != std::string::npos) {
    scene = 0;
  } else if (instruction.find("corridor is congested") != std::string::npos) {
    scene = 1;
  } else if (instruction.find("dense crowd") != std::string::npos) {
    scene = 2;
  }
  if (scene) {
    for (std::size_t i = 0; i < kSceneTerms.size(); ++i) {
      if (auto it = z.find(kSceneTerms[i]); it != z.end()) {
        it->second = kSceneRatings[*scene][i];
      }
    }
  }

  const bool faster = any_of(instruction, {"faster", "quickly", "quick", "hurry", "factory"});
  const bool slower = any_of(instruction, {"slower", "slowly", "carefully", "careful", "hospital"});
  if (faster && !slower) {
    bump("velocity", 2);
    if (params.count("v_ref") != 0) {
      params["v_ref"] += 0.5;
    }
  }
  if (slower && !faster) {
    bump("accel", 2);
    bump("omega", 2);
    if (params.count("v_ref") != 0) {
      params["v_ref"] = std::round(params["v_ref"] * 60.0) / 100.0;
    }
  }
  if (any_of(instruction, {"stick to the path", "stay on the path", "follow the path closely"})) {
    bump("contour", 3);
    bump("lag", 3);
  }
  if (any_of(instruction, {"smoother", "smoothly", "more smooth"})) {
    bump("accel", 2);
    bump("omega", 2);
  }
  if (any_of(instruction, {"rotate more", "rotation capabilit", "turn more", "turn faster"})) {
    bump("omega", -2);
  }
  const bool more_distance =
      any_of(instruction, {"more distance", "further from", "farther from", "keep away", "distance of at least"});
  if (more_distance) {
    for (const auto& term : human_terms) {
      bump(term, 2);
    }
    if (params.count("d_safe") != 0) {
      const auto stated = mentioned_distance(instruction);
      const auto g = detail::parse_geometry(user);
      params["d_safe"] = stated ? std::max(*stated + g.robot_radius + g.human_radius, params["d_safe"])
                                : params["d_safe"] + 0.5;
    }
  }

  std::string out = "```\n";
  for (const auto& [name, value] : z) {
    out += fmt::format("RATING {}={}\n", name, value);
  }
  for (const auto& [name, value] : params) {
    out += fmt::format("PARAM {}={}{}{}\n", name, value, units[name].empty() ? "" : " ", units[name]);
  }
  out += "REASON: Ratings adjusted to the instruction.\n```\n";
  return out;
}

}  // namespace

std::string MockBackend::send(std::string_view system, const std::vector<ChatMessage>& conversation,
                              std::string_view user) {
  if (system.find("Capability Assistant") != std::string_view::npos) {
    return answer_route(user);
  }
  if (system.find("Cost Generation Assistant") != std::string_view::npos) {
    return answer_cost(conversation, user);
  }
  if (system.find("Camera Assistant") != std::string_view::npos) {
    return answer_camera(user);
  }
  if (system.find("Weight Retrieval Assistant") != std::string_view::npos) {
    return answer_weights(user);
  }
  throw TransportError("mock backend: unrecognized system prompt");
}

}  // namespace langmpc::assistants
