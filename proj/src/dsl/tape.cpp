#include "langmpc/dsl/tape.hpp"

#include <algorithm>

namespace langmpc::dsl {

Tape Tape::compile(const Expr& expr, const Resolver& resolve) {
  Tape tape;
  int depth = 0;
  tape.emit(expr, resolve, depth);
  return tape;
}

Tape Tape::compile_weighted_sum(const std::vector<Expr>& exprs, const std::vector<double>& weights,
                                const Resolver& resolve) {
  Tape tape;
  int depth = 0;
  if (exprs.empty()) {
    tape.code_.push_back({Op::kConst, 0, 0.0});
    tape.max_depth_ = 1;
    return tape;
  }
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    tape.code_.push_back({Op::kConst, 0, weights.at(i)});
    ++depth;
    tape.max_depth_ = std::max(tape.max_depth_, depth);
    tape.emit(exprs[i], resolve, depth);
    tape.code_.push_back({Op::kMul, 0, 0.0});
    --depth;
    if (i > 0) {
      tape.code_.push_back({Op::kAdd, 0, 0.0});
      --depth;
    }
  }
  return tape;
}

void Tape::emit(const Expr& expr, const Resolver& resolve, int& depth) {
  const auto push = [&](Instr ins) {
    code_.push_back(ins);
    ++depth;
    max_depth_ = std::max(max_depth_, depth);
  };
  const Node& node = expr.node();
  if (const auto* c = std::get_if<Constant>(&node.value)) {
    push({Op::kConst, 0, c->value});
  } else if (std::holds_alternative<VarRef>(node.value) || std::holds_alternative<ParamRef>(node.value)) {
    const LeafBinding b = resolve(node);
    if (b.slot >= 0) {
      slot_count_ = std::max(slot_count_, b.slot + 1);
      push({Op::kSlot, b.slot, 0.0});
    } else {
      push({Op::kConst, 0, b.value});
    }
  } else if (const auto* u = std::get_if<Unary>(&node.value)) {
    emit(u->operand, resolve, depth);
    const Op op = u->op == UnaryOp::kNeg ? Op::kNeg : u->op == UnaryOp::kSqrt ? Op::kSqrt : Op::kAbsSmooth;
    code_.push_back({op, 0, 0.0});
  } else if (const auto* p = std::get_if<Power>(&node.value)) {
    emit(p->base, resolve, depth);
    code_.push_back({Op::kPow, p->exponent, 0.0});
  } else if (const auto* b = std::get_if<Binary>(&node.value)) {
    emit(b->lhs, resolve, depth);
    emit(b->rhs, resolve, depth);
    Op op = Op::kAdd;
    switch (b->op) {
      case BinaryOp::kAdd: op = Op::kAdd; break;
      case BinaryOp::kSub: op = Op::kSub; break;
      case BinaryOp::kMul: op = Op::kMul; break;
      case BinaryOp::kDiv: op = Op::kDiv; break;
      case BinaryOp::kMin: op = Op::kMin; break;
      case BinaryOp::kMax: op = Op::kMax; break;
    }
    code_.push_back({op, 0, 0.0});
    --depth;
  } else if (const auto* i = std::get_if<IfElse>(&node.value)) {
    emit(i->cond, resolve, depth);
    emit(i->then_branch, resolve, depth);
    emit(i->else_branch, resolve, depth);
    code_.push_back({Op::kIfElse, 0, 0.0});
    depth -= 2;
  }
}

}  // namespace langmpc::dsl
