#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "slope/errors.hpp"

namespace slope {

/// Parse failure with the byte offset into the source text.
class ExprSyntaxError : public std::runtime_error {
 public:
  ExprSyntaxError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation failure (log of nonpositive, division by zero) carrying the
/// offending node's source offset and, when evaluating on a grid, the node index.
class ExprEvalError : public std::runtime_error {
 public:
  ExprEvalError(const std::string& what, std::size_t source_offset, std::size_t grid_index)
      : std::runtime_error(what + " (expression byte " + std::to_string(source_offset) +
                           ", grid node " + std::to_string(grid_index) + ")"),
        source_offset_(source_offset),
        grid_index_(grid_index) {}
  std::size_t source_offset() const { return source_offset_; }
  std::size_t grid_index() const { return grid_index_; }

 private:
  std::size_t source_offset_;
  std::size_t grid_index_;
};

namespace ast {

enum class Op { Add, Sub, Mul, Div, Pow };
enum class Func { Sin, Cos, Exp, Log, Abs };

struct Node;
using NodePtr = std::unique_ptr<Node>;

struct Node {
  enum class Kind { Constant, Variable, Binary, Negate, Call } kind;
  std::size_t offset = 0;  // byte offset in the source, for error reports

  double value = 0.0;  // Constant
  int var_index = 0;   // Variable: x1 -> 0
  Op op = Op::Add;     // Binary
  Func func = Func::Sin;
  NodePtr lhs, rhs;  // Binary: both; Negate/Call: lhs only
};

}  // namespace ast

/// Arithmetic expressions over x1..xn in [0,1): +, -, *, /, ^ (right
/// associative, binds tighter than unary minus), sin/cos/exp/log/abs, pi.
class ExprAst {
 public:
  /// Recursive-descent parse; throws ExprSyntaxError with a byte offset, or
  /// for an unknown identifier an error naming it.
  static ExprAst parse(const std::string& src);

  /// Value at a point; coords.size() bounds the usable variable indices.
  /// Division by zero and log of a nonpositive value raise ExprEvalError;
  /// grid_index is echoed into the error for grid evaluation.
  double eval(std::span<const double> coords, std::size_t grid_index = 0) const;

  /// Largest variable index used (1-based); 0 when none.
  int max_variable() const;

  /// Canonical fully-parenthesized form; parse(print(ast)) reproduces it.
  std::string to_string() const;

  const ast::Node& root() const { return *root_; }

 private:
  explicit ExprAst(ast::NodePtr root) : root_(std::move(root)) {}
  std::shared_ptr<const ast::Node> root_;
};

}  // namespace slope
