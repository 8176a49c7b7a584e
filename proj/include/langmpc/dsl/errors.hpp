#ifndef LANGMPC_DSL_ERRORS_HPP_
#define LANGMPC_DSL_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace langmpc::dsl {

class DslError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public DslError {
 public:
  SyntaxError(const std::string& message, std::size_t offset)
      : DslError(message + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifier : public DslError {
 public:
  using DslError::DslError;
};

class ArityError : public DslError {
 public:
  using DslError::DslError;
};

class UnboundName : public DslError {
 public:
  using DslError::DslError;
};

class NonFiniteResult : public DslError {
 public:
  using DslError::DslError;
};

/// A CostSpec that fails composition or validation.
class InvalidCostSpec : public DslError {
 public:
  using DslError::DslError;
};

}  // namespace langmpc::dsl

#endif  // LANGMPC_DSL_ERRORS_HPP_
