#include "langmpc/dsl/eval.hpp"

#include "langmpc/dsl/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace langmpc::dsl {
namespace {

constexpr int kLanes = 8;
using GradDual = Dual<kLanes>;

std::string leaf_name(const Node& leaf) {
  if (const auto* v = std::get_if<VarRef>(&leaf.value)) {
    return std::string(variable_name(v->var));
  }
  return std::get<ParamRef>(leaf.value).name;
}

}  // namespace

double eval(const Expr& expr, const Bindings& bindings, const EvalOptions& options) {
  const Tape tape = Tape::compile(expr, [&](const Node& leaf) {
    const std::string name = leaf_name(leaf);
    const double* value = bindings.find(name);
    if (value == nullptr) {
      throw UnboundName(fmt::format("'{}' is not bound", name));
    }
    return LeafBinding::fixed(*value);
  });
  const double result = tape.run<double>({}, options);
  if (!std::isfinite(result)) {
    throw NonFiniteResult(fmt::format("expression '{}' evaluated to {}", to_source(expr), result));
  }
  return result;
}

std::vector<double> grad(const Expr& expr, const Bindings& bindings, const std::vector<std::string>& wrt,
                         const EvalOptions& options) {
  std::vector<double> slot_values;
  slot_values.reserve(wrt.size());
  for (const auto& name : wrt) {
    const double* value = bindings.find(name);
    if (value == nullptr) {
      throw UnboundName(fmt::format("'{}' is not bound", name));
    }
    slot_values.push_back(*value);
  }

  const Tape tape = Tape::compile(expr, [&](const Node& leaf) {
    const std::string name = leaf_name(leaf);
    const auto it = std::find(wrt.begin(), wrt.end(), name);
    if (it != wrt.end()) {
      return LeafBinding::input(static_cast<int>(std::distance(wrt.begin(), it)));
    }
    const double* value = bindings.find(name);
    if (value == nullptr) {
      throw UnboundName(fmt::format("'{}' is not bound", name));
    }
    return LeafBinding::fixed(*value);
  });

  std::vector<double> out(wrt.size(), 0.0);
  std::vector<GradDual> slots(wrt.size());
  // kLanes derivatives per pass
  for (std::size_t begin = 0; begin < std::max<std::size_t>(wrt.size(), 1); begin += kLanes) {
    for (std::size_t i = 0; i < wrt.size(); ++i) {
      const bool seeded = i >= begin && i < begin + kLanes;
      slots[i] = seeded ? GradDual::seeded(slot_values[i], static_cast<int>(i - begin))
                        : GradDual::constant(slot_values[i]);
    }
    const GradDual r = tape.run<GradDual>(slots, options);
    if (!std::isfinite(r.v)) {
      throw NonFiniteResult(fmt::format("expression '{}' evaluated to {}", to_source(expr), r.v));
    }
    for (std::size_t i = begin; i < std::min(wrt.size(), begin + kLanes); ++i) {
      out[i] = r.d[i - begin];
      if (!std::isfinite(out[i])) {
        throw NonFiniteResult(fmt::format("derivative of '{}' with respect to '{}' is not finite",
                                          to_source(expr), wrt[i]));
      }
    }
  }
  return out;
}

}  // namespace langmpc::dsl
