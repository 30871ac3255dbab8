#pragma once

// Minimal closed-form expression grammar for initial conditions:
// numbers, the spatial coordinates x and y, pi, unary minus, + - * / ^,
// and the functions sin, cos, exp, pow. Nothing else on purpose.

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace catalyx {

class Expression {
public:
  static Expression parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.parse_expr();
    p.expect_end();
    return e;
  }

  double eval(double x, double y = 0.0) const { return root_->eval(x, y); }

private:
  struct Node {
    virtual ~Node() = default;
    virtual double eval(double x, double y) const = 0;
  };
  using NodePtr = std::unique_ptr<Node>;

  struct Number final : Node {
    double value;
    explicit Number(double v) : value(v) {}
    double eval(double, double) const override { return value; }
  };
  struct Coord final : Node {
    int axis;
    explicit Coord(int a) : axis(a) {}
    double eval(double x, double y) const override { return axis == 0 ? x : y; }
  };
  struct Unary final : Node {
    NodePtr arg;
    explicit Unary(NodePtr a) : arg(std::move(a)) {}
    double eval(double x, double y) const override { return -arg->eval(x, y); }
  };
  struct Binary final : Node {
    char op;
    NodePtr lhs, rhs;
    Binary(char o, NodePtr l, NodePtr r) : op(o), lhs(std::move(l)), rhs(std::move(r)) {}
    double eval(double x, double y) const override {
      const double a = lhs->eval(x, y), b = rhs->eval(x, y);
      switch (op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: return std::pow(a, b);
      }
    }
  };
  struct Call final : Node {
    int fn;  // 0 sin, 1 cos, 2 exp, 3 pow
    NodePtr a, b;
    Call(int f, NodePtr x, NodePtr y) : fn(f), a(std::move(x)), b(std::move(y)) {}
    double eval(double x, double y) const override {
      const double u = a->eval(x, y);
      switch (fn) {
        case 0: return std::sin(u);
        case 1: return std::cos(u);
        case 2: return std::exp(u);
        default: return std::pow(u, b->eval(x, y));
      }
    }
  };

  class Parser {
  public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse_expr() {
      NodePtr lhs = parse_term();
      while (true) {
        skip_ws();
        if (peek() == '+' || peek() == '-') {
          const char op = get();
          lhs = std::make_unique<Binary>(op, std::move(lhs), parse_term());
        } else {
          return lhs;
        }
      }
    }

    void expect_end() {
      skip_ws();
      if (pos_ != s_.size()) fail("unexpected trailing input");
    }

  private:
    NodePtr parse_term() {
      NodePtr lhs = parse_unary();
      while (true) {
        skip_ws();
        if (peek() == '*' || peek() == '/') {
          const char op = get();
          lhs = std::make_unique<Binary>(op, std::move(lhs), parse_unary());
        } else {
          return lhs;
        }
      }
    }

    NodePtr parse_unary() {
      skip_ws();
      if (peek() == '-') {
        get();
        return std::make_unique<Unary>(parse_unary());
      }
      return parse_power();
    }

    NodePtr parse_power() {
      NodePtr base = parse_primary();
      skip_ws();
      if (peek() == '^') {
        get();
        return std::make_unique<Binary>('^', std::move(base), parse_unary());
      }
      return base;
    }

    NodePtr parse_primary() {
      skip_ws();
      const char c = peek();
      if (c == '(') {
        get();
        NodePtr e = parse_expr();
        skip_ws();
        if (get() != ')') fail("expected ')'");
        return e;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
      fail("expected a number, identifier or '('");
      return nullptr;
    }

    NodePtr parse_number() {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      return std::make_unique<Number>(v);
    }

    NodePtr parse_ident() {
      std::string name;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_])))
        name += s_[pos_++];
      if (name == "x") return std::make_unique<Coord>(0);
      if (name == "y") return std::make_unique<Coord>(1);
      if (name == "pi") return std::make_unique<Number>(std::numbers::pi);
      int fn = -1;
      if (name == "sin") fn = 0;
      else if (name == "cos") fn = 1;
      else if (name == "exp") fn = 2;
      else if (name == "pow") fn = 3;
      if (fn < 0) fail("unknown identifier '" + name + "'");
      skip_ws();
      if (get() != '(') fail("expected '(' after function name");
      NodePtr a = parse_expr();
      NodePtr b;
      if (fn == 3) {
        skip_ws();
        if (get() != ',') fail("pow takes two arguments");
        b = parse_expr();
      }
      skip_ws();
      if (get() != ')') fail("expected ')'");
      return std::make_unique<Call>(fn, std::move(a), std::move(b));
    }

    void skip_ws() {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    char get() { return pos_ < s_.size() ? s_[pos_++] : '\0'; }
    [[noreturn]] void fail(const std::string& why) const {
      throw std::invalid_argument("expression error at position " + std::to_string(pos_) + ": " +
                                  why + " in \"" + s_ + "\"");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
  };

  NodePtr root_;
};

}  // namespace catalyx
