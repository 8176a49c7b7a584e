#ifndef LANGMPC_DSL_EVAL_HPP_
#define LANGMPC_DSL_EVAL_HPP_

#include "langmpc/dsl/ast.hpp"
#include "langmpc/dsl/tape.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace langmpc::dsl {

/// Name -> value environment covering both variables and parameters.
class Bindings {
 public:
  Bindings() = default;
  Bindings(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}

  Bindings& set(std::string name, double value) {
    values_[std::move(name)] = value;
    return *this;
  }
  const double* find(std::string_view name) const {
    const auto it = values_.find(name);
    return it == values_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, double, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, double, std::less<>> values_;
};

/// Throws UnboundName for free names and NonFiniteResult for inf/nan results.
double eval(const Expr& expr, const Bindings& bindings, const EvalOptions& options = {});

/**
 * Forward-mode gradient with respect to the named inputs, in order. At an
 * if_else switching point the derivative of the active branch is returned.
 */
std::vector<double> grad(const Expr& expr, const Bindings& bindings, const std::vector<std::string>& wrt,
                         const EvalOptions& options = {});

}  // namespace langmpc::dsl

#endif  // LANGMPC_DSL_EVAL_HPP_
