#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fminimal/ambient.hpp"
#include "fminimal/errors.hpp"

namespace fminimal {

/// A scalar expression in the variables x1..x{dim}, parsed once and
/// evaluated many times.
///
/// Grammar (usual precedence, '^' right-associative and binding tighter
/// than unary minus, so -x1^2 == -(x1^2)):
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?
///   primary := number | variable | func '(' expr ')' | '(' expr ')'
///   func    := sin | cos | exp
class Expression {
 public:
  static Expression parse(std::string_view source, int dim) {
    Parser p{source, dim};
    Expression e;
    e.dim_ = dim;
    e.source_ = std::string(source);
    e.root_ = p.parse_all();
    return e;
  }

  double operator()(const Vector& x) const {
    if (x.size() != dim_) throw ContractViolation("expression evaluated at a point of the wrong dimension");
    return eval(*root_, x);
  }

  int dim() const noexcept { return dim_; }
  const std::string& source() const noexcept { return source_; }

 private:
  enum class Op { constant, variable, add, sub, mul, div, pow, neg, sin, cos, exp };

  struct Node {
    Op op;
    double value = 0.0;
    int index = 0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  static NodePtr leaf(Op op, double value, int index = 0) {
    return std::make_shared<const Node>(Node{op, value, index, nullptr, nullptr});
  }
  static NodePtr unary(Op op, NodePtr a) { return std::make_shared<const Node>(Node{op, 0.0, 0, std::move(a), nullptr}); }
  static NodePtr binary(Op op, NodePtr a, NodePtr b) {
    return std::make_shared<const Node>(Node{op, 0.0, 0, std::move(a), std::move(b)});
  }

  static double eval(const Node& n, const Vector& x) {
    switch (n.op) {
      case Op::constant: return n.value;
      case Op::variable: return x[n.index];
      case Op::add: return eval(*n.lhs, x) + eval(*n.rhs, x);
      case Op::sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
      case Op::mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
      case Op::div: return eval(*n.lhs, x) / eval(*n.rhs, x);
      case Op::pow: return std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
      case Op::neg: return -eval(*n.lhs, x);
      case Op::sin: return std::sin(eval(*n.lhs, x));
      case Op::cos: return std::cos(eval(*n.lhs, x));
      case Op::exp: return std::exp(eval(*n.lhs, x));
    }
    return 0.0;
  }

  struct Parser {
    std::string_view s;
    int dim;
    std::size_t pos = 0;

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos);
    }

    NodePtr parse_all() {
      NodePtr e = expr();
      skip();
      if (pos != s.size()) throw ParseError("unexpected trailing input", pos);
      return e;
    }

    NodePtr expr() {
      NodePtr lhs = term();
      for (;;) {
        if (accept('+')) lhs = binary(Op::add, lhs, term());
        else if (accept('-')) lhs = binary(Op::sub, lhs, term());
        else return lhs;
      }
    }

    NodePtr term() {
      NodePtr lhs = unary_expr();
      for (;;) {
        if (accept('*')) lhs = binary(Op::mul, lhs, unary_expr());
        else if (accept('/')) lhs = binary(Op::div, lhs, unary_expr());
        else return lhs;
      }
    }

    NodePtr unary_expr() {
      if (accept('-')) return unary(Op::neg, unary_expr());
      if (accept('+')) return unary_expr();
      return power();
    }

    NodePtr power() {
      NodePtr base = primary();
      if (accept('^')) return binary(Op::pow, base, unary_expr());
      return base;
    }

    NodePtr primary() {
      skip();
      if (pos >= s.size()) throw ParseError("unexpected end of expression", pos);
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        NodePtr e = expr();
        expect(')');
        return e;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
      throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }

    NodePtr number() {
      const std::string tail(s.substr(pos));
      char* end = nullptr;
      const double v = std::strtod(tail.c_str(), &end);
      if (end == tail.c_str()) throw ParseError("malformed number", pos);
      pos += static_cast<std::size_t>(end - tail.c_str());
      return leaf(Op::constant, v);
    }

    NodePtr identifier() {
      const std::size_t start = pos;
      while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
      const std::string_view id = s.substr(start, pos - start);
      if (id == "sin" || id == "cos" || id == "exp") {
        expect('(');
        NodePtr arg = expr();
        expect(')');
        const Op op = id == "sin" ? Op::sin : id == "cos" ? Op::cos : Op::exp;
        return unary(op, arg);
      }
      if (id.size() >= 2 && id[0] == 'x') {
        int k = 0;
        for (std::size_t i = 1; i < id.size(); ++i) {
          if (!std::isdigit(static_cast<unsigned char>(id[i]))) throw ParseError("unknown identifier", start);
          k = 10 * k + (id[i] - '0');
        }
        if (k < 1 || k > dim) throw ParseError("variable index out of range", start);
        return leaf(Op::variable, 0.0, k - 1);
      }
      throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    }
  };

  int dim_ = 0;
  std::string source_;
  NodePtr root_;
};

/// Ambient weight from an expression string; derivatives by finite differences.
inline WeightedAmbient expression_weight(std::string_view source, int dim) {
  auto e = std::make_shared<const Expression>(Expression::parse(source, dim));
  return sampled_weight(dim, "custom:" + std::string(source), [e](const Vector& x) { return (*e)(x); });
}

}  // namespace fminimal
