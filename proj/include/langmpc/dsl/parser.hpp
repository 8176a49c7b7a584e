#ifndef LANGMPC_DSL_PARSER_HPP_
#define LANGMPC_DSL_PARSER_HPP_

#include "langmpc/dsl/ast.hpp"

#include <set>
#include <string>
#include <string_view>

namespace langmpc::dsl {

/**
 * Parses the cost-expression language:
 *
 *   expr   := term (('+' | '-') term)*
 *   term   := factor (('*' | '/') factor)*
 *   factor := ['-'] atom ['^' int]
 *   atom   := number | ident | ident '(' args ')' | '(' expr ')'
 *
 * Functions: if_else/3, min/2, max/2, sqrt/1, abs_smooth/1. Identifiers that
 * are not variables are parameters; when `known_parameters` is given, any
 * other identifier is rejected with UnknownIdentifier.
 *
 * Throws SyntaxError (with byte offset), UnknownIdentifier or ArityError.
 */
Expr parse_expr(std::string_view source, const std::set<std::string>* known_parameters = nullptr);

}  // namespace langmpc::dsl

#endif  // LANGMPC_DSL_PARSER_HPP_
