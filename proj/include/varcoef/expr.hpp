#pragma once

// Scalar expression trees used for model right-hand sides.
//
// Expressions are immutable and share structure; copying an Expression is a
// reference-count increment. All free functions here are pure.

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varcoef/error.hpp"

namespace varcoef {

enum class NodeKind { constant, variable, unary, binary };

enum class UnaryOp { neg, sin, cos, tan, exp, ln, abs, sqrt };

enum class BinaryOp { add, sub, mul, div, pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind;
  double value = 0.0;       // constant
  std::string name;         // variable
  UnaryOp unary_op = UnaryOp::neg;
  BinaryOp binary_op = BinaryOp::add;
  NodePtr lhs;              // unary operand or left operand
  NodePtr rhs;              // right operand
};

/// Name bindings used by evaluate().
using Environment = std::map<std::string, double, std::less<>>;

class Expression {
 public:
  /// The constant 0.
  Expression();

  static Expression constant(double value);
  static Expression variable(std::string name);
  static Expression unary(UnaryOp op, const Expression& operand);
  static Expression binary(BinaryOp op, const Expression& lhs,
                           const Expression& rhs);
  static Expression from_node(NodePtr root);

  NodeKind kind() const noexcept { return root_->kind; }
  double value() const noexcept { return root_->value; }
  const std::string& name() const noexcept { return root_->name; }
  UnaryOp unary_op() const noexcept { return root_->unary_op; }
  BinaryOp binary_op() const noexcept { return root_->binary_op; }
  /// Operand of a unary node, left operand of a binary node.
  Expression lhs() const;
  Expression rhs() const;

  const Node& node() const noexcept { return *root_; }
  const NodePtr& root() const noexcept { return root_; }

  bool is_constant() const noexcept { return kind() == NodeKind::constant; }
  bool is_constant(double v) const noexcept {
    return is_constant() && value() == v;
  }

  /// True when this tree came out of differentiating an abs() node; such a
  /// derivative is sign-valued and undefined on the zero set of kinks().
  bool is_nonsmooth() const noexcept { return !kinks_.empty(); }
  /// Arguments of the abs() nodes whose derivative produced this tree.
  const std::vector<Expression>& kinks() const noexcept { return kinks_; }
  Expression with_kinks(std::vector<Expression> kinks) const;

  std::set<std::string> variables() const;
  bool depends_on(std::string_view name) const;
  std::size_t size() const;

  /// Source text that parses back into the same tree.
  std::string to_string() const;

  bool structurally_equal(const Expression& other) const;

 private:
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  NodePtr root_;
  std::vector<Expression> kinks_;
};

bool is_function_name(std::string_view name);
bool is_valid_identifier(std::string_view name);

/// Parses `text` with the usual precedence: `^` binds tighter than unary
/// minus, which binds tighter than `*` and `/`, then `+` and `-`. Binary
/// operators of equal precedence associate left; `^` associates right and
/// requires a constant exponent.
Expression parse_expression(std::string_view text);

double evaluate(const Expression& expr, const Environment& env);

Expression differentiate(const Expression& expr, std::string_view var);

/// Constant folding and the identities 0*x, x+0, x*1, x/1, x^1, x^0, --x.
Expression simplify(const Expression& expr);

/// Replaces variables by constants.
Expression substitute(const Expression& expr,
                      const std::map<std::string, double, std::less<>>& values);

/// Replaces the variable `name` by `replacement`.
Expression substitute(const Expression& expr, std::string_view name,
                      const Expression& replacement);

/// An expression compiled against a fixed ordered symbol list, evaluated from
/// a slot vector. Uses exactly the same arithmetic as evaluate(), so both
/// routes agree bit for bit.
class BoundExpression {
 public:
  BoundExpression() = default;
  /// Throws ValidationError if the expression references a name that is not
  /// in `symbols`.
  BoundExpression(const Expression& expr, std::span<const std::string> symbols);

  double operator()(std::span<const double> slots) const;

  const Expression& expression() const noexcept { return expr_; }

 private:
  struct Instruction {
    NodeKind kind;
    UnaryOp unary_op;
    BinaryOp binary_op;
    double value;
    std::size_t slot;
    const Node* source;
  };

  Expression expr_;
  std::vector<Instruction> program_;
  std::size_t max_stack_ = 0;
};

namespace detail {
double apply_unary(UnaryOp op, double x, const Node& where);
double apply_binary(BinaryOp op, double a, double b, const Node& where);
}  // namespace detail

}  // namespace varcoef
