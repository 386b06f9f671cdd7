#include "slope/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace slope {

namespace {

using ast::Func;
using ast::Node;
using ast::NodePtr;
using ast::Op;

NodePtr make_node(Node::Kind kind, std::size_t offset) {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  n->offset = offset;
  return n;
}

/// expression := term { (+|-) term }
/// term       := unary { (*|/) unary }
/// unary      := - unary | power
/// power      := primary [ ^ unary ]          (right associative)
/// primary    := number | pi | x<digits> | func ( expression ) | ( expression )
class Parser {
 public:
  explicit Parser(const std::string& src) : src_(src) {}

  NodePtr run() {
    NodePtr e = expression();
    skip_ws();
    if (pos_ != src_.size()) throw ExprSyntaxError("unexpected trailing input", pos_);
    return e;
  }

 private:
  const std::string& src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  bool consume(char ch) {
    if (peek() == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      const std::size_t at = pos_;
      if (consume('+'))
        lhs = binary(Op::Add, std::move(lhs), term(), at);
      else if (consume('-'))
        lhs = binary(Op::Sub, std::move(lhs), term(), at);
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      const std::size_t at = pos_;
      if (consume('*'))
        lhs = binary(Op::Mul, std::move(lhs), unary(), at);
      else if (consume('/'))
        lhs = binary(Op::Div, std::move(lhs), unary(), at);
      else
        return lhs;
    }
  }

  NodePtr unary() {
    const std::size_t at = pos_;
    if (consume('-')) {
      NodePtr n = make_node(Node::Kind::Negate, at);
      n->lhs = unary();
      return n;
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    const std::size_t at = pos_;
    if (consume('^')) return binary(Op::Pow, std::move(base), unary(), at);
    return base;
  }

  NodePtr binary(Op op, NodePtr lhs, NodePtr rhs, std::size_t at) {
    NodePtr n = make_node(Node::Kind::Binary, at);
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  NodePtr primary() {
    const char ch = peek();
    const std::size_t at = pos_;
    if (ch == '(') {
      ++pos_;
      NodePtr e = expression();
      if (!consume(')')) throw ExprSyntaxError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') return identifier();
    throw ExprSyntaxError("expected number, identifier or '('", pos_);
    (void)at;
  }

  NodePtr number() {
    skip_ws();
    const std::size_t at = pos_;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(src_.substr(pos_), &used);
    } catch (const std::exception&) {
      throw ExprSyntaxError("malformed number", at);
    }
    pos_ += used;
    NodePtr n = make_node(Node::Kind::Constant, at);
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    skip_ws();
    const std::size_t at = pos_;
    std::string name;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      name.push_back(src_[pos_++]);

    if (name == "pi") {
      NodePtr n = make_node(Node::Kind::Constant, at);
      n->value = M_PI;
      return n;
    }
    if (name.size() >= 2 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      const int idx = std::stoi(name.substr(1));
      if (idx < 1) throw ExprSyntaxError("variable index must be >= 1", at);
      NodePtr n = make_node(Node::Kind::Variable, at);
      n->var_index = idx - 1;
      return n;
    }

    static const std::pair<const char*, Func> kFuncs[] = {
        {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp},
        {"log", Func::Log}, {"abs", Func::Abs}};
    for (const auto& [fname, func] : kFuncs) {
      if (name == fname) {
        if (!consume('(')) throw ExprSyntaxError("expected '(' after function name", pos_);
        NodePtr n = make_node(Node::Kind::Call, at);
        n->func = func;
        n->lhs = expression();
        if (!consume(')')) throw ExprSyntaxError("expected ')'", pos_);
        return n;
      }
    }
    throw ExprSyntaxError("unknown identifier '" + name + "'", at);
  }
};

double eval_node(const Node& n, std::span<const double> coords, std::size_t grid_index) {
  switch (n.kind) {
    case Node::Kind::Constant:
      return n.value;
    case Node::Kind::Variable:
      if (n.var_index >= static_cast<int>(coords.size()))
        throw ExprEvalError("variable x" + std::to_string(n.var_index + 1) +
                                " exceeds grid dimension " + std::to_string(coords.size()),
                            n.offset, grid_index);
      return coords[static_cast<std::size_t>(n.var_index)];
    case Node::Kind::Negate:
      return -eval_node(*n.lhs, coords, grid_index);
    case Node::Kind::Call: {
      const double a = eval_node(*n.lhs, coords, grid_index);
      switch (n.func) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Exp: return std::exp(a);
        case Func::Abs: return std::abs(a);
        case Func::Log:
          if (!(a > 0.0)) throw ExprEvalError("log of nonpositive value", n.offset, grid_index);
          return std::log(a);
      }
      return 0.0;
    }
    case Node::Kind::Binary: {
      const double a = eval_node(*n.lhs, coords, grid_index);
      const double b = eval_node(*n.rhs, coords, grid_index);
      switch (n.op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div:
          if (b == 0.0) throw ExprEvalError("division by zero", n.offset, grid_index);
          return a / b;
        case Op::Pow: return std::pow(a, b);
      }
      return 0.0;
    }
  }
  return 0.0;
}

int max_var_node(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Constant: return 0;
    case Node::Kind::Variable: return n.var_index + 1;
    case Node::Kind::Negate:
    case Node::Kind::Call: return max_var_node(*n.lhs);
    case Node::Kind::Binary: return std::max(max_var_node(*n.lhs), max_var_node(*n.rhs));
  }
  return 0;
}

void print_node(const Node& n, std::ostringstream& out) {
  switch (n.kind) {
    case Node::Kind::Constant: {
      out.precision(17);
      out << n.value;
      return;
    }
    case Node::Kind::Variable:
      out << 'x' << (n.var_index + 1);
      return;
    case Node::Kind::Negate:
      out << "(-";
      print_node(*n.lhs, out);
      out << ')';
      return;
    case Node::Kind::Call: {
      static const char* kNames[] = {"sin", "cos", "exp", "log", "abs"};
      out << kNames[static_cast<int>(n.func)] << '(';
      print_node(*n.lhs, out);
      out << ')';
      return;
    }
    case Node::Kind::Binary: {
      static const char* kOps[] = {"+", "-", "*", "/", "^"};
      out << '(';
      print_node(*n.lhs, out);
      out << kOps[static_cast<int>(n.op)];
      print_node(*n.rhs, out);
      out << ')';
      return;
    }
  }
}

}  // namespace

ExprAst ExprAst::parse(const std::string& src) {
  Parser p(src);
  return ExprAst(p.run());
}

double ExprAst::eval(std::span<const double> coords, std::size_t grid_index) const {
  return eval_node(*root_, coords, grid_index);
}

int ExprAst::max_variable() const { return max_var_node(*root_); }

std::string ExprAst::to_string() const {
  std::ostringstream out;
  print_node(*root_, out);
  return out.str();
}

}  // namespace slope
