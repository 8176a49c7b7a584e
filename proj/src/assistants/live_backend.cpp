#include "langmpc/assistants/backends.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <regex>
#include <stdexcept>

namespace langmpc::assistants {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path before /chat/completions
};

Endpoint split_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch match;
  if (!std::regex_match(url, match, pattern)) {
    throw std::invalid_argument(fmt::format("malformed LLM base URL '{}'", url));
  }
  std::string prefix = match[2].str();
  while (!prefix.empty() && prefix.back() == '/') {
    prefix.pop_back();
  }
  return {match[1].str(), prefix};
}

}  // namespace

LiveConfig LiveConfig::from_environment(std::string model) {
  LiveConfig config;
  config.model = std::move(model);
  if (const char* url = std::getenv("LLM_BASE_URL"); url != nullptr && *url != '\0') {
    config.base_url = url;
  }
  const char* key = std::getenv("LLM_API_KEY");
  if (key == nullptr || *key == '\0') {
    throw std::invalid_argument("LLM_API_KEY is not set");
  }
  config.api_key = key;
  return config;
}

LiveBackend::LiveBackend(LiveConfig config) : config_(std::move(config)) { split_url(config_.base_url); }

std::string LiveBackend::send(std::string_view system, const std::vector<ChatMessage>& conversation,
                              std::string_view user) {
  nlohmann::json messages = nlohmann::json::array();
  messages.push_back({{"role", "system"}, {"content", system}});
  for (const auto& m : conversation) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  messages.push_back({{"role", "user"}, {"content", user}});
  const nlohmann::json body = {
      {"model", config_.model}, {"messages", messages}, {"temperature", config_.temperature}};

  const Endpoint endpoint = split_url(config_.base_url);
  httplib::Client client(endpoint.origin);
  const auto seconds = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(seconds, 0);
  client.set_read_timeout(seconds, 0);
  client.set_bearer_token_auth(config_.api_key);
  const auto response = client.Post(endpoint.prefix + "/chat/completions", body.dump(), "application/json");
  if (!response) {
    throw TransportError(fmt::format("request failed: {}", httplib::to_string(response.error())));
  }
  if (response->status != 200) {
    throw TransportError(fmt::format("HTTP {}: {}", response->status, response->body.substr(0, 200)));
  }
  try {
    const auto doc = nlohmann::json::parse(response->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(fmt::format("malformed completion: {}", e.what()));
  }
}

}  // namespace langmpc::assistants
