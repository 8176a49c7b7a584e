#include "langmpc/dsl/parser.hpp"

#include "langmpc/dsl/errors.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace langmpc::dsl {
namespace {

enum class Tok { kNumber, kIdent, kPlus, kMinus, kStar, kSlash, kCaret, kLParen, kRParen, kComma, kEnd };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t offset;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  const auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && is_digit(src[j])) {
          i = j;
          while (i < src.size() && is_digit(src[i])) ++i;
        }
      }
      out.push_back({Tok::kNumber, src.substr(start, i - start), start});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({Tok::kIdent, src.substr(start, i - start), start});
      continue;
    }
    Tok kind;
    switch (c) {
      case '+': kind = Tok::kPlus; break;
      case '-': kind = Tok::kMinus; break;
      case '*': kind = Tok::kStar; break;
      case '/': kind = Tok::kSlash; break;
      case '^': kind = Tok::kCaret; break;
      case '(': kind = Tok::kLParen; break;
      case ')': kind = Tok::kRParen; break;
      case ',': kind = Tok::kComma; break;
      default:
        throw SyntaxError(fmt::format("unexpected character '{}'", c), start);
    }
    ++i;
    out.push_back({kind, src.substr(start, 1), start});
  }
  out.push_back({Tok::kEnd, {}, src.size()});
  return out;
}

double to_number(const Token& t) {
  double value = 0.0;
  const char* end = t.text.data() + t.text.size();
  const auto [ptr, ec] = std::from_chars(t.text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw SyntaxError(fmt::format("malformed number '{}'", t.text), t.offset);
  }
  return value;
}

class Parser {
 public:
  Parser(std::string_view src, const std::set<std::string>* known)
      : tokens_(tokenize(src)), known_(known) {}

  Expr parse() {
    Expr e = expr();
    if (peek().kind != Tok::kEnd) {
      throw SyntaxError(fmt::format("unexpected '{}'", peek().text), peek().offset);
    }
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      const auto& t = peek();
      throw SyntaxError(fmt::format("expected {}, found '{}'", what, t.kind == Tok::kEnd ? "end of input" : t.text),
                        t.offset);
    }
    return next();
  }

  Expr expr() {
    Expr lhs = term();
    while (peek().kind == Tok::kPlus || peek().kind == Tok::kMinus) {
      const bool add = next().kind == Tok::kPlus;
      Expr rhs = term();
      lhs = Expr::binary(add ? BinaryOp::kAdd : BinaryOp::kSub, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = factor();
    while (peek().kind == Tok::kStar || peek().kind == Tok::kSlash) {
      const bool mul = next().kind == Tok::kStar;
      Expr rhs = factor();
      lhs = Expr::binary(mul ? BinaryOp::kMul : BinaryOp::kDiv, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr factor() {
    if (peek().kind == Tok::kMinus) {
      next();
      // a negated literal without exponent folds into a negative constant
      if (peek().kind == Tok::kNumber && tokens_[pos_ + 1].kind != Tok::kCaret) {
        return Expr::constant(-to_number(next()));
      }
      return Expr::unary(UnaryOp::kNeg, powered());
    }
    return powered();
  }

  Expr powered() {
    Expr base = atom();
    if (peek().kind != Tok::kCaret) {
      return base;
    }
    next();
    bool negative = false;
    if (peek().kind == Tok::kMinus) {
      next();
      negative = true;
    }
    const Token& t = expect(Tok::kNumber, "integer exponent");
    int exponent = 0;
    const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), exponent);
    if (ec != std::errc{} || ptr != t.text.data() + t.text.size()) {
      throw SyntaxError(fmt::format("exponent '{}' is not an integer", t.text), t.offset);
    }
    return Expr::power(std::move(base), negative ? -exponent : exponent);
  }

  Expr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kNumber:
        next();
        return Expr::constant(to_number(t));
      case Tok::kLParen: {
        next();
        Expr inner = expr();
        expect(Tok::kRParen, "')'");
        return inner;
      }
      case Tok::kIdent: {
        next();
        if (peek().kind == Tok::kLParen) {
          return call(t);
        }
        if (auto var = variable_from_name(t.text)) {
          return Expr::variable(*var);
        }
        std::string name(t.text);
        if (known_ != nullptr && known_->count(name) == 0) {
          throw UnknownIdentifier(fmt::format("unknown identifier '{}' at byte {}", name, t.offset));
        }
        return Expr::parameter(std::move(name));
      }
      default:
        throw SyntaxError(
            fmt::format("expected operand, found '{}'", t.kind == Tok::kEnd ? "end of input" : t.text),
            t.offset);
    }
  }

  Expr call(const Token& name) {
    expect(Tok::kLParen, "'('");
    std::vector<Expr> args;
    if (peek().kind != Tok::kRParen) {
      args.push_back(expr());
      while (peek().kind == Tok::kComma) {
        next();
        args.push_back(expr());
      }
    }
    expect(Tok::kRParen, "')'");

    const auto want = [&](std::size_t n) {
      if (args.size() != n) {
        throw ArityError(fmt::format("'{}' takes {} argument(s), got {} at byte {}", name.text, n,
                                     args.size(), name.offset));
      }
    };
    if (name.text == "if_else") {
      want(3);
      return Expr::if_else(args[0], args[1], args[2]);
    }
    if (name.text == "min" || name.text == "max") {
      want(2);
      return Expr::binary(name.text == "min" ? BinaryOp::kMin : BinaryOp::kMax, args[0], args[1]);
    }
    if (name.text == "sqrt") {
      want(1);
      return Expr::unary(UnaryOp::kSqrt, args[0]);
    }
    if (name.text == "abs_smooth") {
      want(1);
      return Expr::unary(UnaryOp::kAbsSmooth, args[0]);
    }
    throw UnknownIdentifier(fmt::format("unknown function '{}' at byte {}", name.text, name.offset));
  }

  std::vector<Token> tokens_;
  std::size_t pos_{0};
  const std::set<std::string>* known_;
};

}  // namespace

Expr parse_expr(std::string_view source, const std::set<std::string>* known_parameters) {
  return Parser(source, known_parameters).parse();
}

}  // namespace langmpc::dsl
