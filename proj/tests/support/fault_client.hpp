#ifndef LANGMPC_TESTS_SUPPORT_FAULT_CLIENT_HPP_
#define LANGMPC_TESTS_SUPPORT_FAULT_CLIENT_HPP_

#include "langmpc/assistants/backends.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace langmpc::testing {

enum class Fault {
  kTransport,     // throws TransportError
  kGarbage,       // unparseable prose
  kSyntaxError,   // cost term that does not parse
  kUnguarded,     // cost term dividing by an unguarded expression
  kOutOfRange,    // ratings outside 0..10 and an unknown term
  kAllZero,       // every rating zero
  kVrefTooHigh,   // reference speed above the bound
};

inline constexpr Fault kAllFaults[] = {Fault::kTransport, Fault::kGarbage,    Fault::kSyntaxError, Fault::kUnguarded,
                                       Fault::kOutOfRange, Fault::kAllZero, Fault::kVrefTooHigh};

/// Mock answers, except that call number `at` (0-based) and, when `sticky`,
/// every later call is replaced by `fault`.
class FaultInjectingClient : public assistants::LlmClient {
 public:
  FaultInjectingClient(int at, Fault fault, bool sticky) : at_(at), fault_(fault), sticky_(sticky) {}

  std::string send(std::string_view system, const std::vector<assistants::ChatMessage>& conversation,
                   std::string_view user) override {
    const int call = calls_++;
    std::string answer = mock_.send(system, conversation, user);
    if (call != at_ && !(sticky_ && call > at_)) {
      return answer;
    }
    const bool weights = system.find("Weight Retrieval") != std::string_view::npos;
    switch (fault_) {
      case Fault::kTransport:
        throw assistants::TransportError("injected transport failure");
      case Fault::kGarbage:
        return "I am not sure what you mean.";
      case Fault::kSyntaxError:
        return "TERM: broken = (px - \nTERM: velocity\n";
      case Fault::kUnguarded:
        return "TERM: inverse = 1 / (px - oh_x)\nTERM: velocity\n";
      case Fault::kOutOfRange:
        return weights ? "RATING velocity=14\nRATING accel=-3\nRATING ghost=5\n" : answer;
      case Fault::kAllZero:
        if (weights) {
          std::string zeros;
          for (const char* t : {"contour", "lag", "goal", "velocity", "accel", "omega", "human_follow",
                                "human_max", "safe_distance"}) {
            zeros += std::string("RATING ") + t + "=0\n";
          }
          return zeros;
        }
        return answer;
      case Fault::kVrefTooHigh:
        return weights ? answer + "\nPARAM v_ref=9.5 m/s\n" : answer;
    }
    return answer;
  }

  int calls() const { return calls_; }

 private:
  assistants::MockBackend mock_;
  int at_;
  Fault fault_;
  bool sticky_;
  int calls_{0};
};

/// Returns scripted answers in order, then repeats the last one.
class ScriptedClient : public assistants::LlmClient {
 public:
  explicit ScriptedClient(std::vector<std::string> answers) : answers_(std::move(answers)) {}

  std::string send(std::string_view, const std::vector<assistants::ChatMessage>& conversation,
                   std::string_view user) override {
    conversations.push_back(conversation);
    users.emplace_back(user);
    const std::size_t i = std::min(users.size() - 1, answers_.size() - 1);
    return answers_[i];
  }

  std::vector<std::vector<assistants::ChatMessage>> conversations;
  std::vector<std::string> users;

 private:
  std::vector<std::string> answers_;
};

}  // namespace langmpc::testing

#endif  // LANGMPC_TESTS_SUPPORT_FAULT_CLIENT_HPP_
