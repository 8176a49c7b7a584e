#ifndef LANGMPC_DSL_TAPE_HPP_
#define LANGMPC_DSL_TAPE_HPP_

#include "langmpc/dsl/ast.hpp"
#include "langmpc/dsl/dual.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace langmpc::dsl {

/// abs_smooth(x) = sqrt(x^2 + delta^2).
inline constexpr double kAbsSmoothDelta = 1e-3;

struct EvalOptions {
  /// When set, if_else blends branches with sigmoid(cond / tau) instead of
  /// selecting one exactly.
  bool sigmoid_if_else{false};
  double if_else_tau{0.05};
};

/// A leaf binding: either an input slot or a folded constant.
struct LeafBinding {
  int slot{-1};
  double value{0.0};

  static LeafBinding input(int slot) { return {slot, 0.0}; }
  static LeafBinding fixed(double value) { return {-1, value}; }
};

/// Postfix program compiled from an expression tree. Leaves are resolved once
/// at compile time; evaluation is a flat loop over a value stack.
class Tape {
 public:
  /// Called for every VarRef / ParamRef leaf. Throws UnboundName to reject.
  using Resolver = std::function<LeafBinding(const Node& leaf)>;

  Tape() = default;
  static Tape compile(const Expr& expr, const Resolver& resolve);

  /// Weighted sum  sum_i weights[i] * exprs[i]  as one program.
  static Tape compile_weighted_sum(const std::vector<Expr>& exprs, const std::vector<double>& weights,
                                   const Resolver& resolve);

  template <class T>
  T run(std::span<const T> slots, const EvalOptions& options = {}) const;

  std::size_t size() const { return code_.size(); }
  int slot_count() const { return slot_count_; }

 private:
  enum class Op : std::uint8_t {
    kConst, kSlot, kNeg, kSqrt, kAbsSmooth, kAdd, kSub, kMul, kDiv, kMin, kMax, kPow, kIfElse,
  };
  struct Instr {
    Op op;
    int arg;
    double value;
  };

  void emit(const Expr& expr, const Resolver& resolve, int& depth);

  std::vector<Instr> code_;
  int max_depth_{0};
  int slot_count_{0};
};

template <class T>
T Tape::run(std::span<const T> slots, const EvalOptions& options) const {
  constexpr int kInlineDepth = 32;
  std::array<T, kInlineDepth> inline_stack{};
  std::vector<T> heap_stack;
  T* stack = inline_stack.data();
  if (max_depth_ >= kInlineDepth) {
    heap_stack.resize(static_cast<std::size_t>(max_depth_) + 1);
    stack = heap_stack.data();
  }
  std::size_t top = 0;  // next free
  for (const Instr& ins : code_) {
    switch (ins.op) {
      case Op::kConst:
        stack[top++] = lift<T>(ins.value);
        break;
      case Op::kSlot:
        stack[top++] = slots[static_cast<std::size_t>(ins.arg)];
        break;
      case Op::kNeg:
        stack[top - 1] = -stack[top - 1];
        break;
      case Op::kSqrt: {
        using std::sqrt;
        stack[top - 1] = sqrt(stack[top - 1]);
        break;
      }
      case Op::kAbsSmooth: {
        using std::sqrt;
        const T& x = stack[top - 1];
        stack[top - 1] = sqrt(x * x + lift<T>(kAbsSmoothDelta * kAbsSmoothDelta));
        break;
      }
      case Op::kPow:
        stack[top - 1] = powi(stack[top - 1], ins.arg);
        break;
      case Op::kAdd:
        --top;
        stack[top - 1] = stack[top - 1] + stack[top];
        break;
      case Op::kSub:
        --top;
        stack[top - 1] = stack[top - 1] - stack[top];
        break;
      case Op::kMul:
        --top;
        stack[top - 1] = stack[top - 1] * stack[top];
        break;
      case Op::kDiv:
        --top;
        stack[top - 1] = stack[top - 1] / stack[top];
        break;
      case Op::kMin:
        --top;
        if (value_of(stack[top]) < value_of(stack[top - 1])) stack[top - 1] = stack[top];
        break;
      case Op::kMax:
        --top;
        if (value_of(stack[top]) > value_of(stack[top - 1])) stack[top - 1] = stack[top];
        break;
      case Op::kIfElse: {
        top -= 2;
        const T& cond = stack[top - 1];
        const T& then_v = stack[top];
        const T& else_v = stack[top + 1];
        if (options.sigmoid_if_else) {
          using std::exp;
          const T one = lift<T>(1.0);
          const T s = one / (one + exp(-cond / lift<T>(options.if_else_tau)));
          stack[top - 1] = s * then_v + (one - s) * else_v;
        } else {
          stack[top - 1] = value_of(cond) >= 0.0 ? then_v : else_v;
        }
        break;
      }
    }
  }
  return stack[0];
}

}  // namespace langmpc::dsl

#endif  // LANGMPC_DSL_TAPE_HPP_
