#ifndef LANGMPC_ASSISTANTS_BACKENDS_HPP_
#define LANGMPC_ASSISTANTS_BACKENDS_HPP_

#include "langmpc/assistants/llm_client.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>

namespace langmpc::assistants {

/**
 * Deterministic keyword rules standing in for a language model. The
 * assistant is recognized from the system prompt; answers use the same line
 * format a live model is asked for.
 */
class MockBackend : public LlmClient {
 public:
  std::string send(std::string_view system, const std::vector<ChatMessage>& conversation,
                   std::string_view user) override;
};

/// Answers from `<dir>/<request digest>.txt`; a missing fixture is a
/// TransportError.
class ReplayBackend : public LlmClient {
 public:
  explicit ReplayBackend(std::filesystem::path dir);

  std::string send(std::string_view system, const std::vector<ChatMessage>& conversation,
                   std::string_view user) override;

 private:
  std::filesystem::path dir_;
};

/// Forwards to `inner` and stores every answer as a replay fixture.
class RecordingClient : public LlmClient {
 public:
  RecordingClient(std::shared_ptr<LlmClient> inner, std::filesystem::path dir);

  std::string send(std::string_view system, const std::vector<ChatMessage>& conversation,
                   std::string_view user) override;
  void reset() override { inner_->reset(); }

 private:
  std::shared_ptr<LlmClient> inner_;
  std::filesystem::path dir_;
};

struct LiveConfig {
  std::string base_url{"https://api.openai.com/v1"};
  std::string api_key;
  std::string model{"gpt-4o-mini"};
  double temperature{0.0};
  std::chrono::seconds timeout{60};

  /// Base URL and key from LLM_BASE_URL / LLM_API_KEY. Throws
  /// std::invalid_argument when no key is set.
  static LiveConfig from_environment(std::string model = "gpt-4o-mini");
};

/// Chat-completions over HTTP(S).
class LiveBackend : public LlmClient {
 public:
  explicit LiveBackend(LiveConfig config);

  std::string send(std::string_view system, const std::vector<ChatMessage>& conversation,
                   std::string_view user) override;

 private:
  LiveConfig config_;
};

}  // namespace langmpc::assistants

#endif  // LANGMPC_ASSISTANTS_BACKENDS_HPP_
