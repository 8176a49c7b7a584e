#include "langmpc/dsl/ast.hpp"

#include <fmt/format.h>

#include <cmath>

namespace langmpc::dsl {
namespace {

constexpr std::array<std::string_view, kVariableCount> kVariableNames = {
    "px", "py", "theta", "v", "a", "omega", "oh_x", "oh_y", "e_c", "e_l"};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Expr make(Node node) { return Expr(std::make_shared<const Node>(std::move(node))); }

// Printing precedence: 1 additive, 2 multiplicative, 3 negation, 4 power, 5 atom.
int precedence(const Expr& e) {
  return std::visit(Overloaded{
                        [](const Binary& b) {
                          return (b.op == BinaryOp::kAdd || b.op == BinaryOp::kSub) ? 1
                                 : (b.op == BinaryOp::kMul || b.op == BinaryOp::kDiv) ? 2
                                                                                      : 5;
                        },
                        [](const Unary& u) { return u.op == UnaryOp::kNeg ? 3 : 5; },
                        [](const Power&) { return 4; },
                        [](const auto&) { return 5; },
                    },
                    e.node().value);
}

std::string print(const Expr& e, int min_prec);

std::string print_raw(const Expr& e) {
  return std::visit(
      Overloaded{
          [](const Constant& c) {
            return std::signbit(c.value) ? fmt::format("({})", c.value) : fmt::format("{}", c.value);
          },
          [](const VarRef& v) { return std::string(variable_name(v.var)); },
          [](const ParamRef& p) { return p.name; },
          [](const Unary& u) {
            switch (u.op) {
              case UnaryOp::kNeg: {
                const bool is_const = std::holds_alternative<Constant>(u.operand.node().value);
                return is_const ? "-(" + print(u.operand, 0) + ")" : "-" + print(u.operand, 4);
              }
              case UnaryOp::kSqrt:
                return "sqrt(" + print(u.operand, 0) + ")";
              case UnaryOp::kAbsSmooth:
                return "abs_smooth(" + print(u.operand, 0) + ")";
            }
            return std::string{};
          },
          [](const Binary& b) {
            switch (b.op) {
              case BinaryOp::kAdd:
                return print(b.lhs, 1) + " + " + print(b.rhs, 2);
              case BinaryOp::kSub:
                return print(b.lhs, 1) + " - " + print(b.rhs, 2);
              case BinaryOp::kMul:
                return print(b.lhs, 2) + " * " + print(b.rhs, 3);
              case BinaryOp::kDiv:
                return print(b.lhs, 2) + " / " + print(b.rhs, 3);
              case BinaryOp::kMin:
                return "min(" + print(b.lhs, 0) + ", " + print(b.rhs, 0) + ")";
              case BinaryOp::kMax:
                return "max(" + print(b.lhs, 0) + ", " + print(b.rhs, 0) + ")";
            }
            return std::string{};
          },
          [](const Power& p) { return print(p.base, 5) + "^" + std::to_string(p.exponent); },
          [](const IfElse& i) {
            return "if_else(" + print(i.cond, 0) + ", " + print(i.then_branch, 0) + ", " +
                   print(i.else_branch, 0) + ")";
          },
      },
      e.node().value);
}

std::string print(const Expr& e, int min_prec) {
  std::string s = print_raw(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

template <class Fn>
void walk(const Expr& e, Fn&& fn) {
  fn(e);
  std::visit(Overloaded{
                 [&](const Unary& u) { walk(u.operand, fn); },
                 [&](const Binary& b) {
                   walk(b.lhs, fn);
                   walk(b.rhs, fn);
                 },
                 [&](const Power& p) { walk(p.base, fn); },
                 [&](const IfElse& i) {
                   walk(i.cond, fn);
                   walk(i.then_branch, fn);
                   walk(i.else_branch, fn);
                 },
                 [](const auto&) {},
             },
             e.node().value);
}

}  // namespace

std::string_view variable_name(Variable var) { return kVariableNames[static_cast<std::size_t>(var)]; }

std::optional<Variable> variable_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kVariableCount; ++i) {
    if (kVariableNames[i] == name) {
      return static_cast<Variable>(i);
    }
  }
  return std::nullopt;
}

Expr Expr::constant(double value) { return make(Node{Constant{value}}); }
Expr Expr::variable(Variable var) { return make(Node{VarRef{var}}); }
Expr Expr::parameter(std::string name) { return make(Node{ParamRef{std::move(name)}}); }
Expr Expr::unary(UnaryOp op, Expr operand) { return make(Node{Unary{op, std::move(operand)}}); }
Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  return make(Node{Binary{op, std::move(lhs), std::move(rhs)}});
}
Expr Expr::power(Expr base, int exponent) { return make(Node{Power{std::move(base), exponent}}); }
Expr Expr::if_else(Expr cond, Expr then_branch, Expr else_branch) {
  return make(Node{IfElse{std::move(cond), std::move(then_branch), std::move(else_branch)}});
}

bool operator==(const Expr& lhs, const Expr& rhs) {
  if (&lhs.node() == &rhs.node()) {
    return true;
  }
  const auto& a = lhs.node().value;
  const auto& b = rhs.node().value;
  if (a.index() != b.index()) {
    return false;
  }
  return std::visit(
      Overloaded{
          [&](const Constant& x) {
            const auto& y = std::get<Constant>(b);
            return x.value == y.value && std::signbit(x.value) == std::signbit(y.value);
          },
          [&](const VarRef& x) { return x.var == std::get<VarRef>(b).var; },
          [&](const ParamRef& x) { return x.name == std::get<ParamRef>(b).name; },
          [&](const Unary& x) {
            const auto& y = std::get<Unary>(b);
            return x.op == y.op && x.operand == y.operand;
          },
          [&](const Binary& x) {
            const auto& y = std::get<Binary>(b);
            return x.op == y.op && x.lhs == y.lhs && x.rhs == y.rhs;
          },
          [&](const Power& x) {
            const auto& y = std::get<Power>(b);
            return x.exponent == y.exponent && x.base == y.base;
          },
          [&](const IfElse& x) {
            const auto& y = std::get<IfElse>(b);
            return x.cond == y.cond && x.then_branch == y.then_branch &&
                   x.else_branch == y.else_branch;
          },
      },
      a);
}

Expr operator+(Expr lhs, Expr rhs) { return Expr::binary(BinaryOp::kAdd, std::move(lhs), std::move(rhs)); }
Expr operator-(Expr lhs, Expr rhs) { return Expr::binary(BinaryOp::kSub, std::move(lhs), std::move(rhs)); }
Expr operator*(Expr lhs, Expr rhs) { return Expr::binary(BinaryOp::kMul, std::move(lhs), std::move(rhs)); }
Expr operator/(Expr lhs, Expr rhs) { return Expr::binary(BinaryOp::kDiv, std::move(lhs), std::move(rhs)); }
Expr operator-(Expr operand) { return Expr::unary(UnaryOp::kNeg, std::move(operand)); }
Expr pow(Expr base, int exponent) { return Expr::power(std::move(base), exponent); }

std::set<std::string> referenced_parameters(const Expr& expr) {
  std::set<std::string> out;
  walk(expr, [&](const Expr& e) {
    if (const auto* p = std::get_if<ParamRef>(&e.node().value)) {
      out.insert(p->name);
    }
  });
  return out;
}

std::set<Variable> referenced_variables(const Expr& expr) {
  std::set<Variable> out;
  walk(expr, [&](const Expr& e) {
    if (const auto* v = std::get_if<VarRef>(&e.node().value)) {
      out.insert(v->var);
    }
  });
  return out;
}

bool contains_if_else(const Expr& expr) {
  bool found = false;
  walk(expr, [&](const Expr& e) { found = found || std::holds_alternative<IfElse>(e.node().value); });
  return found;
}

std::size_t node_count(const Expr& expr) {
  std::size_t n = 0;
  walk(expr, [&](const Expr&) { ++n; });
  return n;
}

std::string to_source(const Expr& expr) { return print(expr, 0); }

}  // namespace langmpc::dsl
