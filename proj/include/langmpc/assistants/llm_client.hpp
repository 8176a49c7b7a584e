#ifndef LANGMPC_ASSISTANTS_LLM_CLIENT_HPP_
#define LANGMPC_ASSISTANTS_LLM_CLIENT_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace langmpc::assistants {

/// The model could not be reached or answered with an unusable envelope.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChatMessage {
  std::string role;  // "user" or "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;

  /// One completion for `user` after the prior `conversation`. Throws
  /// TransportError.
  virtual std::string send(std::string_view system, const std::vector<ChatMessage>& conversation,
                           std::string_view user) = 0;

  /// Drops any state the client keeps between calls.
  virtual void reset() {}
};

/// SHA-256 over the canonical JSON of a request; keys replay fixtures.
std::string request_digest(std::string_view system, const std::vector<ChatMessage>& conversation,
                           std::string_view user);

}  // namespace langmpc::assistants

#endif  // LANGMPC_ASSISTANTS_LLM_CLIENT_HPP_
