#include "langmpc/dsl/cost_spec.hpp"

#include "langmpc/common/digest.hpp"
#include "langmpc/dsl/errors.hpp"
#include "langmpc/dsl/parser.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace langmpc::dsl {
namespace {

using nlohmann::json;

enum class Sign { kPositive, kNonNegative, kUnknown };

Sign combine_add(Sign a, Sign b) {
  if (a == Sign::kUnknown || b == Sign::kUnknown) return Sign::kUnknown;
  if (a == Sign::kPositive || b == Sign::kPositive) return Sign::kPositive;
  return Sign::kNonNegative;
}

Sign weaker(Sign a, Sign b) {
  if (a == Sign::kUnknown || b == Sign::kUnknown) return Sign::kUnknown;
  if (a == Sign::kNonNegative || b == Sign::kNonNegative) return Sign::kNonNegative;
  return Sign::kPositive;
}

Sign stronger(Sign a, Sign b) {
  if (a == Sign::kPositive || b == Sign::kPositive) return Sign::kPositive;
  if (a == Sign::kNonNegative || b == Sign::kNonNegative) return Sign::kNonNegative;
  return Sign::kUnknown;
}

Sign sign_of(const Expr& e, const ParameterSet& params) {
  const Node& n = e.node();
  if (const auto* c = std::get_if<Constant>(&n.value)) {
    return c->value > 0.0 ? Sign::kPositive : c->value == 0.0 ? Sign::kNonNegative : Sign::kUnknown;
  }
  if (const auto* p = std::get_if<ParamRef>(&n.value)) {
    const auto v = params.find(p->name);
    if (!v) return Sign::kUnknown;
    return *v > 0.0 ? Sign::kPositive : *v == 0.0 ? Sign::kNonNegative : Sign::kUnknown;
  }
  if (const auto* v = std::get_if<VarRef>(&n.value)) {
    return v->var == Variable::kV ? Sign::kNonNegative : Sign::kUnknown;  // speed is bounded below by 0
  }
  if (const auto* u = std::get_if<Unary>(&n.value)) {
    switch (u->op) {
      case UnaryOp::kNeg:
        return Sign::kUnknown;
      case UnaryOp::kSqrt:
        return sign_of(u->operand, params) == Sign::kPositive ? Sign::kPositive : Sign::kNonNegative;
      case UnaryOp::kAbsSmooth:
        return Sign::kPositive;
    }
  }
  if (const auto* p = std::get_if<Power>(&n.value)) {
    if (p->exponent == 0) return Sign::kPositive;
    const Sign base = sign_of(p->base, params);
    if (p->exponent % 2 == 0) {
      return base == Sign::kPositive ? Sign::kPositive : (p->exponent > 0 ? Sign::kNonNegative : Sign::kUnknown);
    }
    return (p->exponent > 0 || base == Sign::kPositive) ? base : Sign::kUnknown;
  }
  if (const auto* b = std::get_if<Binary>(&n.value)) {
    const Sign l = sign_of(b->lhs, params);
    const Sign r = sign_of(b->rhs, params);
    switch (b->op) {
      case BinaryOp::kAdd:
        return combine_add(l, r);
      case BinaryOp::kSub:
        return Sign::kUnknown;
      case BinaryOp::kMul:
        return weaker(l, r);
      case BinaryOp::kDiv:
        return r == Sign::kPositive ? l : Sign::kUnknown;
      case BinaryOp::kMin:
        return weaker(l, r);
      case BinaryOp::kMax:
        return stronger(l, r);
    }
  }
  if (const auto* i = std::get_if<IfElse>(&n.value)) {
    return weaker(sign_of(i->then_branch, params), sign_of(i->else_branch, params));
  }
  return Sign::kUnknown;
}

void check_divisions(const Expr& e, const ParameterSet& params, const std::string& term) {
  const Node& n = e.node();
  if (const auto* b = std::get_if<Binary>(&n.value)) {
    if (b->op == BinaryOp::kDiv && sign_of(b->rhs, params) != Sign::kPositive) {
      throw InvalidCostSpec(fmt::format(
          "term '{}': denominator '{}' is not guarded away from zero (add a positive epsilon parameter)", term,
          to_source(b->rhs)));
    }
    check_divisions(b->lhs, params, term);
    check_divisions(b->rhs, params, term);
  } else if (const auto* u = std::get_if<Unary>(&n.value)) {
    check_divisions(u->operand, params, term);
  } else if (const auto* p = std::get_if<Power>(&n.value)) {
    if (p->exponent < 0 && sign_of(p->base, params) != Sign::kPositive) {
      throw InvalidCostSpec(fmt::format("term '{}': negative power of '{}' is not guarded away from zero", term,
                                        to_source(p->base)));
    }
    check_divisions(p->base, params, term);
  } else if (const auto* i = std::get_if<IfElse>(&n.value)) {
    check_divisions(i->cond, params, term);
    check_divisions(i->then_branch, params, term);
    check_divisions(i->else_branch, params, term);
  }
}

Expr var(Variable v) { return Expr::variable(v); }
Expr param(const char* name) { return Expr::parameter(name); }

}  // namespace

bool is_builtin(std::string_view identifier) {
  return std::any_of(kBuiltinTerms.begin(), kBuiltinTerms.end(), [&](const char* b) { return identifier == b; });
}

Expr builtin(std::string_view identifier) {
  if (identifier == "contour") return pow(var(Variable::kContourError), 2);
  if (identifier == "lag") return pow(var(Variable::kLagError), 2);
  if (identifier == "accel") return pow(var(Variable::kA), 2);
  if (identifier == "omega") return pow(var(Variable::kOmega), 2);
  if (identifier == "velocity") return pow(var(Variable::kV) - param("v_ref"), 2);
  if (identifier == "goal") {
    return pow(param("goal_x") - var(Variable::kPx), 2) + pow(param("goal_y") - var(Variable::kPy), 2);
  }
  throw UnknownIdentifier(fmt::format("'{}' is not a library cost term", identifier));
}

void ParameterSet::update(const std::string& name, double value) {
  const auto it = params_.find(name);
  if (it == params_.end()) {
    throw InvalidCostSpec(fmt::format("unknown parameter '{}'", name));
  }
  it->second.value = value;
}

double ParameterSet::value(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) {
    throw InvalidCostSpec(fmt::format("unknown parameter '{}'", name));
  }
  return it->second.value;
}

std::optional<double> ParameterSet::find(const std::string& name) const {
  const auto it = params_.find(name);
  return it == params_.end() ? std::nullopt : std::optional<double>(it->second.value);
}

std::set<std::string> ParameterSet::names() const {
  std::set<std::string> out;
  for (const auto& [name, _] : params_) out.insert(name);
  return out;
}

void ParameterSet::validate(double v_max) const {
  for (const auto& [name, p] : params_) {
    if (!std::isfinite(p.value)) {
      throw InvalidCostSpec(fmt::format("parameter '{}' is not finite", name));
    }
  }
  if (const auto v_ref = find("v_ref"); v_ref && (*v_ref < 0.0 || *v_ref > v_max)) {
    throw InvalidCostSpec(fmt::format("v_ref = {} outside [0, {}]", *v_ref, v_max));
  }
}

ParameterSet default_parameters(double v_ref, const world::Vec2& goal) {
  ParameterSet p;
  p.set("v_ref", {v_ref, "m/s", true});
  p.set("eps", {kDefaultEpsilon, "m^2", false});
  p.set("goal_x", {goal.x(), "m", false});
  p.set("goal_y", {goal.y(), "m", false});
  return p;
}

CostTerm CostTerm::from_builtin(std::string name, std::string_view identifier) {
  return CostTerm{std::move(name), TermKind::kBuiltin, std::string(identifier), builtin(identifier)};
}

CostTerm CostTerm::from_source(std::string name, std::string source) {
  Expr expr = parse_expr(source);
  return CostTerm{std::move(name), TermKind::kExpression, std::move(source), std::move(expr)};
}

const CostTerm* CostSpec::find_term(std::string_view name) const {
  const auto it = std::find_if(terms.begin(), terms.end(), [&](const CostTerm& t) { return t.name == name; });
  return it == terms.end() ? nullptr : &*it;
}

std::vector<std::string> CostSpec::term_names() const {
  std::vector<std::string> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(t.name);
  return out;
}

void CostSpec::validate(double v_max) const {
  std::set<std::string> names;
  for (const auto& t : terms) {
    if (t.name.empty()) {
      throw InvalidCostSpec("cost term with empty name");
    }
    if (!names.insert(t.name).second) {
      throw InvalidCostSpec(fmt::format("duplicate cost term '{}'", t.name));
    }
    if (t.expr.empty()) {
      throw InvalidCostSpec(fmt::format("cost term '{}' has no expression", t.name));
    }
    for (const auto& p : referenced_parameters(t.expr)) {
      if (!params.contains(p)) {
        throw InvalidCostSpec(fmt::format("term '{}' references undeclared parameter '{}'", t.name, p));
      }
    }
    check_divisions(t.expr, params, t.name);
  }
  for (const char* m : kMandatoryTerms) {
    if (names.count(m) == 0) {
      throw InvalidCostSpec(fmt::format("mandatory term '{}' missing", m));
    }
  }
  if (weights.size() != names.size()) {
    throw InvalidCostSpec("weight keys do not match term names");
  }
  for (const auto& [name, w] : weights) {
    if (names.count(name) == 0) {
      throw InvalidCostSpec(fmt::format("weight '{}' has no matching term", name));
    }
    if (!std::isfinite(w) || w < 0.0) {
      throw InvalidCostSpec(fmt::format("weight '{}' = {} must be finite and >= 0", name, w));
    }
  }
  params.validate(v_max);
}

std::string CostSpec::describe() const {
  std::string out;
  for (const auto& t : terms) {
    out += fmt::format("{}: {}\n", t.name, t.kind == TermKind::kBuiltin ? to_source(t.expr) : t.source);
  }
  return out;
}

CostSpec compose_cost(std::vector<CostTerm> terms, const std::map<std::string, double>& weights, ParameterSet params,
                      std::string provenance, double default_weight) {
  CostSpec spec;
  spec.terms = std::move(terms);
  for (const char* m : kMandatoryTerms) {
    if (!spec.has_term(m)) {
      spec.terms.push_back(CostTerm::from_builtin(m));
    }
  }
  for (const auto& [name, w] : weights) {
    if (!spec.has_term(name)) {
      throw InvalidCostSpec(fmt::format("weight '{}' has no matching term", name));
    }
  }
  for (const auto& t : spec.terms) {
    const auto it = weights.find(t.name);
    spec.weights[t.name] = it == weights.end() ? default_weight : it->second;
  }
  spec.params = std::move(params);
  spec.provenance = std::move(provenance);
  spec.validate();
  return spec;
}

bool is_strictly_positive(const Expr& expr, const ParameterSet& params) {
  return sign_of(expr, params) == Sign::kPositive;
}

json to_json(const CostSpec& spec) {
  json doc;
  doc["terms"] = json::array();
  for (const auto& t : spec.terms) {
    doc["terms"].push_back(
        {{"name", t.name}, {"kind", t.kind == TermKind::kBuiltin ? "builtin" : "expr"}, {"source", t.source}});
  }
  doc["weights"] = json::object();
  for (const auto& [name, w] : spec.weights) doc["weights"][name] = w;
  doc["params"] = json::object();
  for (const auto& [name, p] : spec.params.entries()) {
    doc["params"][name] = {{"value", p.value}, {"unit", p.unit}, {"tunable", p.tunable}};
  }
  doc["provenance"] = spec.provenance;
  return doc;
}

CostSpec cost_spec_from_json(const json& doc) {
  CostSpec spec;
  try {
    for (const auto& t : doc.at("terms")) {
      const auto kind = t.at("kind").get<std::string>();
      const auto name = t.at("name").get<std::string>();
      const auto source = t.at("source").get<std::string>();
      if (kind == "builtin") {
        spec.terms.push_back(CostTerm::from_builtin(name, source));
      } else if (kind == "expr") {
        spec.terms.push_back(CostTerm::from_source(name, source));
      } else {
        throw InvalidCostSpec(fmt::format("term '{}' has unknown kind '{}'", name, kind));
      }
    }
    for (const auto& [name, w] : doc.at("weights").items()) {
      spec.weights[name] = w.get<double>();
    }
    for (const auto& [name, p] : doc.at("params").items()) {
      if (p.is_number()) {
        spec.params.set(name, {p.get<double>(), "", true});
      } else {
        spec.params.set(name, {p.at("value").get<double>(), p.value("unit", ""), p.value("tunable", true)});
      }
    }
    spec.provenance = doc.value("provenance", "");
  } catch (const json::exception& e) {
    throw InvalidCostSpec(fmt::format("malformed cost spec document: {}", e.what()));
  }
  spec.validate();
  return spec;
}

std::string digest(const CostSpec& spec) { return sha256_hex(to_json(spec).dump()); }

world::Vec2 closest_human_binding(const world::Vec2& robot, const std::vector<world::Human>& humans) {
  world::Vec2 best(kNoHumanSentinel, kNoHumanSentinel);
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_id = std::numeric_limits<int>::max();
  for (const auto& h : humans) {
    const double d2 = (h.position - robot).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && h.id < best_id)) {
      best = h.position;
      best_d2 = d2;
      best_id = h.id;
    }
  }
  return best;
}

world::Vec2 closest_human_binding(const world::Vec2& robot, const std::vector<world::HumanPrediction>& predictions,
                                  std::size_t stage) {
  world::Vec2 best(kNoHumanSentinel, kNoHumanSentinel);
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_id = std::numeric_limits<int>::max();
  for (const auto& p : predictions) {
    const auto& pos = p.positions.at(std::min(stage, p.positions.size() - 1));
    const double d2 = (pos - robot).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && p.id < best_id)) {
      best = pos;
      best_d2 = d2;
      best_id = p.id;
    }
  }
  return best;
}

Tape compile_stage_cost(const CostSpec& spec) {
  std::vector<Expr> exprs;
  std::vector<double> weights;
  for (const auto& t : spec.terms) {
    exprs.push_back(t.expr);
    weights.push_back(spec.weights.at(t.name));
  }
  return Tape::compile_weighted_sum(exprs, weights, [&](const Node& leaf) {
    if (const auto* v = std::get_if<VarRef>(&leaf.value)) {
      return LeafBinding::input(static_cast<int>(v->var));
    }
    const auto& name = std::get<ParamRef>(leaf.value).name;
    const auto value = spec.params.find(name);
    if (!value) {
      throw UnboundName(fmt::format("parameter '{}' is not declared", name));
    }
    return LeafBinding::fixed(*value);
  });
}

}  // namespace langmpc::dsl
