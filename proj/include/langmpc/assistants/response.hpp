#ifndef LANGMPC_ASSISTANTS_RESPONSE_HPP_
#define LANGMPC_ASSISTANTS_RESPONSE_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace langmpc::assistants {

enum class Route { kGenerateNewCost, kAdaptToEnvironment, kUpdateParameters };
std::string_view to_string(Route route);

struct RouteDecision {
  Route route{Route::kUpdateParameters};
  std::string rationale;

  bool operator==(const RouteDecision&) const = default;
};

struct TermLine {
  std::string name;
  std::optional<std::string> source;  // absent: library term named `name`
};

struct ParamLine {
  std::string name;
  double value{0.0};
  std::string unit;
};

struct CostManifest {
  std::vector<TermLine> terms;
  std::vector<ParamLine> params;
  std::string reason;
};

struct RatingsReply {
  std::map<std::string, long> ratings;  // raw, not yet clamped
  std::vector<ParamLine> params;
  std::vector<std::string> malformed;  // lines that looked like answers but did not parse
  std::string reason;
};

// Parsers accept the answer with or without code fences; keys are
// case-insensitive. An empty optional means nothing usable was found.
std::optional<RouteDecision> parse_route(std::string_view text);
std::optional<CostManifest> parse_cost_manifest(std::string_view text);
std::optional<RatingsReply> parse_ratings(std::string_view text);
/// Every well-formed PARAM line.
std::vector<ParamLine> parse_params(std::string_view text);
/// Bullet lines ("- ..." or "* ..."); empty when there are none.
std::vector<std::string> parse_bullets(std::string_view text);

}  // namespace langmpc::assistants

#endif  // LANGMPC_ASSISTANTS_RESPONSE_HPP_
