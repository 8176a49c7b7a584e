#include "langmpc/assistants/backends.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace langmpc::assistants {
namespace {

std::filesystem::path fixture_path(const std::filesystem::path& dir, std::string_view system,
                                   const std::vector<ChatMessage>& conversation, std::string_view user) {
  return dir / (request_digest(system, conversation, user) + ".txt");
}

}  // namespace

ReplayBackend::ReplayBackend(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ReplayBackend::send(std::string_view system, const std::vector<ChatMessage>& conversation,
                                std::string_view user) {
  const auto path = fixture_path(dir_, system, conversation, user);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TransportError(fmt::format("no replay fixture {}", path.string()));
  }
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

RecordingClient::RecordingClient(std::shared_ptr<LlmClient> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string RecordingClient::send(std::string_view system, const std::vector<ChatMessage>& conversation,
                                  std::string_view user) {
  std::string answer = inner_->send(system, conversation, user);
  const auto path = fixture_path(dir_, system, conversation, user);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << answer;
  if (!out) {
    throw TransportError(fmt::format("cannot write replay fixture {}", path.string()));
  }
  return answer;
}

}  // namespace langmpc::assistants
