#ifndef LANGMPC_DSL_AST_HPP_
#define LANGMPC_DSL_AST_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>

namespace langmpc::dsl {

/// Per-stage quantities a cost expression may read.
enum class Variable : std::uint8_t {
  kPx,
  kPy,
  kTheta,
  kV,
  kA,
  kOmega,
  kOhX,  // closest human at this stage
  kOhY,
  kContourError,
  kLagError,
};
inline constexpr std::size_t kVariableCount = 10;

std::string_view variable_name(Variable var);
std::optional<Variable> variable_from_name(std::string_view name);

enum class UnaryOp : std::uint8_t { kNeg, kSqrt, kAbsSmooth };
enum class BinaryOp : std::uint8_t { kAdd, kSub, kMul, kDiv, kMin, kMax };

struct Node;

/// Immutable, shareable handle to an expression tree.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static Expr constant(double value);
  static Expr variable(Variable var);
  static Expr parameter(std::string name);
  static Expr unary(UnaryOp op, Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr power(Expr base, int exponent);
  static Expr if_else(Expr cond, Expr then_branch, Expr else_branch);

  const Node& node() const { return *node_; }
  bool empty() const { return node_ == nullptr; }

 private:
  std::shared_ptr<const Node> node_;
};

struct Constant {
  double value;
};
struct VarRef {
  Variable var;
};
struct ParamRef {
  std::string name;
};
struct Unary {
  UnaryOp op;
  Expr operand;
};
struct Binary {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};
struct Power {
  Expr base;
  int exponent;
};
/// cond >= 0 selects then_branch.
struct IfElse {
  Expr cond;
  Expr then_branch;
  Expr else_branch;
};

struct Node {
  std::variant<Constant, VarRef, ParamRef, Unary, Binary, Power, IfElse> value;
};

/// Structural equality.
bool operator==(const Expr& lhs, const Expr& rhs);

Expr operator+(Expr lhs, Expr rhs);
Expr operator-(Expr lhs, Expr rhs);
Expr operator*(Expr lhs, Expr rhs);
Expr operator/(Expr lhs, Expr rhs);
Expr operator-(Expr operand);
Expr pow(Expr base, int exponent);

std::set<std::string> referenced_parameters(const Expr& expr);
std::set<Variable> referenced_variables(const Expr& expr);
bool contains_if_else(const Expr& expr);
std::size_t node_count(const Expr& expr);

/// Canonical concrete syntax; parse_expr(to_source(e)) == e.
std::string to_source(const Expr& expr);

}  // namespace langmpc::dsl

#endif  // LANGMPC_DSL_AST_HPP_
