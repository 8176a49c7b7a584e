#include "langmpc/assistants/llm_client.hpp"

#include "langmpc/common/digest.hpp"

#include <nlohmann/json.hpp>

namespace langmpc::assistants {

std::string request_digest(std::string_view system, const std::vector<ChatMessage>& conversation,
                           std::string_view user) {
  nlohmann::json messages = nlohmann::json::array();
  messages.push_back({{"role", "system"}, {"content", system}});
  for (const auto& m : conversation) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  messages.push_back({{"role", "user"}, {"content", user}});
  return sha256_hex(messages.dump());
}

}  // namespace langmpc::assistants
