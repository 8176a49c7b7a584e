#include "langmpc/assistants/response.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace langmpc::assistants {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

/// Trimmed lines without code fences.
std::vector<std::string_view> content_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    const std::string_view line = trim(text.substr(start, end - start));
    if (!line.empty() && line.substr(0, 3) != "```") {
      lines.push_back(line);
    }
    start = end + 1;
  }
  return lines;
}

/// Rest of the line after `key` followed by ':' or whitespace, or nullopt.
std::optional<std::string_view> after_key(std::string_view line, std::string_view key) {
  if (line.size() < key.size() || upper(line.substr(0, key.size())) != key) {
    return std::nullopt;
  }
  std::string_view rest = line.substr(key.size());
  if (rest.empty()) {
    return rest;
  }
  if (rest.front() != ':' && !std::isspace(static_cast<unsigned char>(rest.front()))) {
    return std::nullopt;
  }
  if (rest.front() == ':') {
    rest.remove_prefix(1);
  }
  return trim(rest);
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s.front())) || s.front() == '_')) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

std::optional<double> to_double(std::string_view s) {
  const std::string copy(s);
  char* end = nullptr;
  const double value = std::strtod(copy.c_str(), &end);
  if (end == copy.c_str() || *end != '\0' || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

/// "name = value [unit]" or "name=value".
std::optional<ParamLine> parse_param(std::string_view rest) {
  const auto eq = rest.find('=');
  if (eq == std::string_view::npos) {
    return std::nullopt;
  }
  const std::string_view name = trim(rest.substr(0, eq));
  const std::string_view rhs = trim(rest.substr(eq + 1));
  const auto space = rhs.find_first_of(" \t");
  const std::string_view number = rhs.substr(0, space);
  const std::string_view unit = space == std::string_view::npos ? std::string_view{} : trim(rhs.substr(space));
  const auto value = to_double(number);
  if (!is_identifier(name) || !value) {
    return std::nullopt;
  }
  return ParamLine{std::string(name), *value, std::string(unit)};
}

}  // namespace

std::string_view to_string(Route route) {
  switch (route) {
    case Route::kGenerateNewCost:
      return "GENERATE_NEW_COST";
    case Route::kAdaptToEnvironment:
      return "ADAPT_TO_ENVIRONMENT";
    case Route::kUpdateParameters:
      return "UPDATE_PARAMETERS";
  }
  return "?";
}

std::optional<RouteDecision> parse_route(std::string_view text) {
  std::optional<RouteDecision> decision;
  std::string reason;
  for (const auto line : content_lines(text)) {
    if (const auto rest = after_key(line, "DECISION")) {
      const std::string value = upper(*rest);
      for (const Route r : {Route::kGenerateNewCost, Route::kAdaptToEnvironment, Route::kUpdateParameters}) {
        if (value == to_string(r)) {
          decision = RouteDecision{r, {}};
        }
      }
    } else if (const auto why = after_key(line, "REASON")) {
      reason = std::string(*why);
    }
  }
  if (decision) {
    decision->rationale = reason;
  }
  return decision;
}

std::optional<CostManifest> parse_cost_manifest(std::string_view text) {
  CostManifest manifest;
  for (const auto line : content_lines(text)) {
    if (const auto rest = after_key(line, "TERM")) {
      const auto eq = rest->find('=');
      TermLine term;
      term.name = std::string(trim(rest->substr(0, eq)));
      if (eq != std::string_view::npos) {
        term.source = std::string(trim(rest->substr(eq + 1)));
      }
      if (!is_identifier(term.name) || (term.source && term.source->empty())) {
        return std::nullopt;
      }
      manifest.terms.push_back(std::move(term));
    } else if (const auto param = after_key(line, "PARAM")) {
      auto parsed = parse_param(*param);
      if (!parsed) {
        return std::nullopt;
      }
      manifest.params.push_back(std::move(*parsed));
    } else if (const auto why = after_key(line, "REASON")) {
      manifest.reason = std::string(*why);
    }
  }
  if (manifest.terms.empty()) {
    return std::nullopt;
  }
  return manifest;
}

std::optional<RatingsReply> parse_ratings(std::string_view text) {
  RatingsReply reply;
  for (const auto line : content_lines(text)) {
    if (const auto rest = after_key(line, "RATING")) {
      const auto eq = rest->find('=');
      const std::string_view name = trim(rest->substr(0, eq));
      const std::string_view number =
          eq == std::string_view::npos ? std::string_view{} : trim(rest->substr(eq + 1));
      long value = 0;
      const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
      if (eq == std::string_view::npos || !is_identifier(name) || ec != std::errc{} ||
          ptr != number.data() + number.size()) {
        reply.malformed.emplace_back(line);
        continue;
      }
      reply.ratings[std::string(name)] = value;
    } else if (const auto param = after_key(line, "PARAM")) {
      if (auto parsed = parse_param(*param)) {
        reply.params.push_back(std::move(*parsed));
      } else {
        reply.malformed.emplace_back(line);
      }
    } else if (const auto why = after_key(line, "REASON")) {
      reply.reason = std::string(*why);
    }
  }
  if (reply.ratings.empty()) {
    return std::nullopt;
  }
  return reply;
}

std::vector<ParamLine> parse_params(std::string_view text) {
  std::vector<ParamLine> params;
  for (const auto line : content_lines(text)) {
    if (const auto rest = after_key(line, "PARAM")) {
      if (auto parsed = parse_param(*rest)) {
        params.push_back(std::move(*parsed));
      }
    }
  }
  return params;
}

std::vector<std::string> parse_bullets(std::string_view text) {
  std::vector<std::string> bullets;
  for (const auto line : content_lines(text)) {
    if (line.size() > 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ') {
      bullets.emplace_back(trim(line.substr(2)));
    }
  }
  return bullets;
}

}  // namespace langmpc::assistants
