#include "varcoef/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

#include "varcoef/csv.hpp"

namespace varcoef {

namespace {

struct FunctionEntry {
  std::string_view name;
  UnaryOp op;
};

constexpr std::array<FunctionEntry, 7> kFunctions{{
    {"sin", UnaryOp::sin},
    {"cos", UnaryOp::cos},
    {"tan", UnaryOp::tan},
    {"exp", UnaryOp::exp},
    {"ln", UnaryOp::ln},
    {"abs", UnaryOp::abs},
    {"sqrt", UnaryOp::sqrt},
}};

std::string_view function_name(UnaryOp op) {
  for (const auto& f : kFunctions)
    if (f.op == op) return f.name;
  return "-";
}

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::constant;
  n->value = v;
  return n;
}

NodePtr make_variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::variable;
  n->name = std::move(name);
  return n;
}

NodePtr make_unary(UnaryOp op, NodePtr operand) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::unary;
  n->unary_op = op;
  n->lhs = std::move(operand);
  return n;
}

NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::binary;
  n->binary_op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

// ---------------------------------------------------------------------------
// Printing

enum Precedence : int {
  kAdditive = 1,
  kMultiplicative = 2,
  kUnary = 3,
  kPower = 4,
  kAtom = 5,
};

int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::constant:
      return (n.value < 0 || std::signbit(n.value)) ? kUnary : kAtom;
    case NodeKind::variable:
      return kAtom;
    case NodeKind::unary:
      return n.unary_op == UnaryOp::neg ? kUnary : kAtom;
    case NodeKind::binary:
      switch (n.binary_op) {
        case BinaryOp::add:
        case BinaryOp::sub:
          return kAdditive;
        case BinaryOp::mul:
        case BinaryOp::div:
          return kMultiplicative;
        case BinaryOp::pow:
          return kPower;
      }
  }
  return kAtom;
}

void print(const Node& n, std::string& out);

void print_child(const Node& child, bool parenthesize, std::string& out) {
  if (parenthesize) out += '(';
  print(child, out);
  if (parenthesize) out += ')';
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::constant:
      out += csv::format_number(n.value);
      return;
    case NodeKind::variable:
      out += n.name;
      return;
    case NodeKind::unary:
      if (n.unary_op == UnaryOp::neg) {
        out += '-';
        print_child(*n.lhs, precedence(*n.lhs) < kUnary, out);
      } else {
        out += function_name(n.unary_op);
        out += '(';
        print(*n.lhs, out);
        out += ')';
      }
      return;
    case NodeKind::binary: {
      const int own = precedence(n);
      if (n.binary_op == BinaryOp::pow) {
        print_child(*n.lhs, precedence(*n.lhs) <= kPower, out);
        out += '^';
        print_child(*n.rhs, false, out);
        return;
      }
      print_child(*n.lhs, precedence(*n.lhs) < own, out);
      switch (n.binary_op) {
        case BinaryOp::add: out += " + "; break;
        case BinaryOp::sub: out += " - "; break;
        case BinaryOp::mul: out += '*'; break;
        case BinaryOp::div: out += '/'; break;
        case BinaryOp::pow: break;
      }
      print_child(*n.rhs, precedence(*n.rhs) <= own, out);
      return;
    }
  }
}

std::string node_text(const Node& n) {
  std::string out;
  print(n, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    skip_space();
    if (pos_ >= text_.size()) {
      throw ParseError("empty expression", pos_, {"number", "name", "(", "-"});
    }
    NodePtr result = parse_sum();
    skip_space();
    if (pos_ < text_.size()) {
      throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'",
                       pos_, {"+", "-", "*", "/", "^", "end of input"});
    }
    return result;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    while (true) {
      if (accept('+')) {
        lhs = make_binary(BinaryOp::add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = make_binary(BinaryOp::sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    while (true) {
      if (accept('*')) {
        lhs = make_binary(BinaryOp::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make_binary(BinaryOp::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_unary(UnaryOp::neg, parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    skip_space();
    const std::size_t caret = pos_;
    if (!accept('^')) return base;
    skip_space();
    const std::size_t exponent_pos = pos_;
    NodePtr exponent = parse_unary();
    Expression e = Expression::from_node(exponent);
    if (!e.variables().empty()) {
      throw ParseError("non-constant exponent '" + e.to_string() + "'",
                       exponent_pos, {"number", "constant expression"});
    }
    double value = 0.0;
    try {
      value = evaluate(e, {});
    } catch (const EvaluationError& err) {
      throw ParseError(std::string("invalid exponent: ") + err.what(), caret);
    }
    return make_binary(BinaryOp::pow, base, make_constant(value));
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) {
      throw ParseError("unexpected end of input", pos_,
                       {"number", "name", "(", "-"});
    }
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      if (!accept(')')) {
        throw ParseError("unbalanced parenthesis", pos_, {")"});
      }
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      skip_space();
      const bool call = pos_ < text_.size() && text_[pos_] == '(';
      if (call) {
        for (const auto& f : kFunctions) {
          if (f.name == name) {
            ++pos_;
            NodePtr arg = parse_sum();
            if (!accept(')')) {
              throw ParseError("unbalanced parenthesis in call to " + name,
                               pos_, {")"});
            }
            return make_unary(f.op, arg);
          }
        }
        std::vector<std::string> known;
        for (const auto& f : kFunctions) known.emplace_back(f.name);
        throw ParseError("unknown function '" + name + "'", start, known);
      }
      if (is_function_name(name)) {
        throw ParseError("function '" + name + "' requires an argument", pos_,
                         {"("});
      }
      return make_variable(std::move(name));
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_,
                     {"number", "name", "(", "-"});
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t probe = pos_ + 1;
      if (probe < text_.size() && (text_[probe] == '+' || text_[probe] == '-'))
        ++probe;
      if (probe < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[probe]))) {
        pos_ = probe;
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      }
    }
    const auto literal = text_.substr(start, pos_ - start);
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(literal.data(), literal.data() + literal.size(), value);
    if (ec != std::errc{} || ptr != literal.data() + literal.size()) {
      throw ParseError("malformed number '" + std::string(literal) + "'", start,
                       {"number"});
    }
    return make_constant(value);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation

[[noreturn]] void domain_error(const std::string& what, const Node& where) {
  throw EvaluationError(EvaluationError::Kind::domain, what, node_text(where));
}

double checked(double result, const Node& where) {
  if (!std::isfinite(result)) domain_error("non-finite result", where);
  return result;
}

double eval_node(const Node& n, const Environment& env) {
  switch (n.kind) {
    case NodeKind::constant:
      return n.value;
    case NodeKind::variable: {
      auto it = env.find(n.name);
      if (it == env.end()) {
        throw EvaluationError(EvaluationError::Kind::unbound_variable,
                              "unbound variable '" + n.name + "'", n.name);
      }
      return it->second;
    }
    case NodeKind::unary:
      return detail::apply_unary(n.unary_op, eval_node(*n.lhs, env), n);
    case NodeKind::binary: {
      const double a = eval_node(*n.lhs, env);
      const double b = eval_node(*n.rhs, env);
      return detail::apply_binary(n.binary_op, a, b, n);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Differentiation

struct Derivative {
  NodePtr node;
  std::vector<Expression> kinks;
};

NodePtr zero() { return make_constant(0.0); }
NodePtr one() { return make_constant(1.0); }

NodePtr derive(const NodePtr& n, std::string_view var,
               std::vector<Expression>& kinks) {
  switch (n->kind) {
    case NodeKind::constant:
      return zero();
    case NodeKind::variable:
      return n->name == var ? one() : zero();
    case NodeKind::unary: {
      const NodePtr& u = n->lhs;
      NodePtr du = derive(u, var, kinks);
      switch (n->unary_op) {
        case UnaryOp::neg:
          return make_unary(UnaryOp::neg, du);
        case UnaryOp::sin:
          return make_binary(BinaryOp::mul, make_unary(UnaryOp::cos, u), du);
        case UnaryOp::cos:
          return make_binary(BinaryOp::mul,
                             make_unary(UnaryOp::neg, make_unary(UnaryOp::sin, u)),
                             du);
        case UnaryOp::tan:
          return make_binary(
              BinaryOp::div, du,
              make_binary(BinaryOp::pow, make_unary(UnaryOp::cos, u),
                          make_constant(2.0)));
        case UnaryOp::exp:
          return make_binary(BinaryOp::mul, n, du);
        case UnaryOp::ln:
          return make_binary(BinaryOp::div, du, u);
        case UnaryOp::sqrt:
          return make_binary(
              BinaryOp::div, du,
              make_binary(BinaryOp::mul, make_constant(2.0), n));
        case UnaryOp::abs:
          if (Expression::from_node(u).depends_on(var)) {
            kinks.push_back(Expression::from_node(u));
          }
          // sign(u) written as u/abs(u); undefined on the kink itself.
          return make_binary(BinaryOp::mul, make_binary(BinaryOp::div, u, n),
                             du);
      }
      return zero();
    }
    case NodeKind::binary: {
      const NodePtr& a = n->lhs;
      const NodePtr& b = n->rhs;
      switch (n->binary_op) {
        case BinaryOp::add:
          return make_binary(BinaryOp::add, derive(a, var, kinks),
                             derive(b, var, kinks));
        case BinaryOp::sub:
          return make_binary(BinaryOp::sub, derive(a, var, kinks),
                             derive(b, var, kinks));
        case BinaryOp::mul:
          return make_binary(
              BinaryOp::add,
              make_binary(BinaryOp::mul, derive(a, var, kinks), b),
              make_binary(BinaryOp::mul, a, derive(b, var, kinks)));
        case BinaryOp::div:
          return make_binary(
              BinaryOp::div,
              make_binary(BinaryOp::sub,
                          make_binary(BinaryOp::mul, derive(a, var, kinks), b),
                          make_binary(BinaryOp::mul, a, derive(b, var, kinks))),
              make_binary(BinaryOp::pow, b, make_constant(2.0)));
        case BinaryOp::pow: {
          const double c = b->value;
          if (c == 0.0) return zero();
          return make_binary(
              BinaryOp::mul,
              make_binary(BinaryOp::mul, make_constant(c),
                          make_binary(BinaryOp::pow, a, make_constant(c - 1.0))),
              derive(a, var, kinks));
        }
      }
      return zero();
    }
  }
  return zero();
}

// ---------------------------------------------------------------------------
// Simplification

bool is_const(const NodePtr& n) { return n->kind == NodeKind::constant; }
bool is_const(const NodePtr& n, double v) {
  return is_const(n) && n->value == v;
}

NodePtr simplify_node(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::constant:
    case NodeKind::variable:
      return n;
    case NodeKind::unary: {
      NodePtr u = simplify_node(n->lhs);
      if (n->unary_op == UnaryOp::neg) {
        if (u->kind == NodeKind::unary && u->unary_op == UnaryOp::neg)
          return u->lhs;
      }
      if (is_const(u)) {
        try {
          return make_constant(detail::apply_unary(n->unary_op, u->value, *n));
        } catch (const EvaluationError&) {
          // Leave the domain violation in place for evaluation to report.
        }
      }
      return u == n->lhs ? n : make_unary(n->unary_op, u);
    }
    case NodeKind::binary: {
      NodePtr a = simplify_node(n->lhs);
      NodePtr b = simplify_node(n->rhs);
      if (is_const(a) && is_const(b)) {
        try {
          return make_constant(
              detail::apply_binary(n->binary_op, a->value, b->value, *n));
        } catch (const EvaluationError&) {
        }
      }
      switch (n->binary_op) {
        case BinaryOp::add:
          if (is_const(a, 0.0)) return b;
          if (is_const(b, 0.0)) return a;
          break;
        case BinaryOp::sub:
          if (is_const(b, 0.0)) return a;
          if (is_const(a, 0.0)) return simplify_node(make_unary(UnaryOp::neg, b));
          break;
        case BinaryOp::mul:
          if (is_const(a, 0.0) || is_const(b, 0.0)) return zero();
          if (is_const(a, 1.0)) return b;
          if (is_const(b, 1.0)) return a;
          break;
        case BinaryOp::div:
          if (is_const(b, 1.0)) return a;
          if (is_const(a, 0.0) && !is_const(b, 0.0)) return zero();
          break;
        case BinaryOp::pow:
          if (is_const(b, 1.0)) return a;
          if (is_const(b, 0.0)) return one();
          break;
      }
      if (a == n->lhs && b == n->rhs) return n;
      return make_binary(n->binary_op, a, b);
    }
  }
  return n;
}

NodePtr substitute_node(const NodePtr& n, std::string_view name,
                        const NodePtr& replacement) {
  switch (n->kind) {
    case NodeKind::constant:
      return n;
    case NodeKind::variable:
      return n->name == name ? replacement : n;
    case NodeKind::unary: {
      NodePtr u = substitute_node(n->lhs, name, replacement);
      return u == n->lhs ? n : make_unary(n->unary_op, u);
    }
    case NodeKind::binary: {
      NodePtr a = substitute_node(n->lhs, name, replacement);
      NodePtr b = substitute_node(n->rhs, name, replacement);
      if (a == n->lhs && b == n->rhs) return n;
      return make_binary(n->binary_op, a, b);
    }
  }
  return n;
}

void collect_variables(const Node& n, std::set<std::string>& out) {
  switch (n.kind) {
    case NodeKind::constant:
      return;
    case NodeKind::variable:
      out.insert(n.name);
      return;
    case NodeKind::unary:
      collect_variables(*n.lhs, out);
      return;
    case NodeKind::binary:
      collect_variables(*n.lhs, out);
      collect_variables(*n.rhs, out);
      return;
  }
}

bool node_depends_on(const Node& n, std::string_view name) {
  switch (n.kind) {
    case NodeKind::constant:
      return false;
    case NodeKind::variable:
      return n.name == name;
    case NodeKind::unary:
      return node_depends_on(*n.lhs, name);
    case NodeKind::binary:
      return node_depends_on(*n.lhs, name) || node_depends_on(*n.rhs, name);
  }
  return false;
}

std::size_t node_size(const Node& n) {
  switch (n.kind) {
    case NodeKind::unary:
      return 1 + node_size(*n.lhs);
    case NodeKind::binary:
      return 1 + node_size(*n.lhs) + node_size(*n.rhs);
    default:
      return 1;
  }
}

bool node_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::constant:
      return a.value == b.value;
    case NodeKind::variable:
      return a.name == b.name;
    case NodeKind::unary:
      return a.unary_op == b.unary_op && node_equal(*a.lhs, *b.lhs);
    case NodeKind::binary:
      return a.binary_op == b.binary_op && node_equal(*a.lhs, *b.lhs) &&
             node_equal(*a.rhs, *b.rhs);
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------

namespace detail {

double apply_unary(UnaryOp op, double x, const Node& where) {
  switch (op) {
    case UnaryOp::neg:
      return -x;
    case UnaryOp::sin:
      return checked(std::sin(x), where);
    case UnaryOp::cos:
      return checked(std::cos(x), where);
    case UnaryOp::tan:
      return checked(std::tan(x), where);
    case UnaryOp::exp:
      return checked(std::exp(x), where);
    case UnaryOp::ln:
      if (!(x > 0.0)) domain_error("logarithm of a non-positive value", where);
      return std::log(x);
    case UnaryOp::abs:
      return std::fabs(x);
    case UnaryOp::sqrt:
      if (x < 0.0) domain_error("square root of a negative value", where);
      return std::sqrt(x);
  }
  return 0.0;
}

double apply_binary(BinaryOp op, double a, double b, const Node& where) {
  switch (op) {
    case BinaryOp::add:
      return checked(a + b, where);
    case BinaryOp::sub:
      return checked(a - b, where);
    case BinaryOp::mul:
      return checked(a * b, where);
    case BinaryOp::div:
      if (b == 0.0) domain_error("division by zero", where);
      return checked(a / b, where);
    case BinaryOp::pow:
      if (a < 0.0 && std::trunc(b) != b)
        domain_error("negative base with non-integer exponent", where);
      if (a == 0.0 && b < 0.0) domain_error("zero to a negative power", where);
      return checked(std::pow(a, b), where);
  }
  return 0.0;
}

}  // namespace detail

Expression::Expression() : root_(make_constant(0.0)) {}

Expression Expression::constant(double value) {
  return Expression(make_constant(value));
}

Expression Expression::variable(std::string name) {
  return Expression(make_variable(std::move(name)));
}

Expression Expression::unary(UnaryOp op, const Expression& operand) {
  return Expression(make_unary(op, operand.root_));
}

Expression Expression::binary(BinaryOp op, const Expression& lhs,
                              const Expression& rhs) {
  if (op == BinaryOp::pow && !rhs.is_constant()) {
    throw ValidationError("exponent must be a constant, got '" +
                          rhs.to_string() + "'");
  }
  return Expression(make_binary(op, lhs.root_, rhs.root_));
}

Expression Expression::from_node(NodePtr root) {
  if (!root) throw ValidationError("null expression node");
  return Expression(std::move(root));
}

Expression Expression::lhs() const { return Expression(root_->lhs); }
Expression Expression::rhs() const { return Expression(root_->rhs); }

Expression Expression::with_kinks(std::vector<Expression> kinks) const {
  Expression copy = *this;
  copy.kinks_ = std::move(kinks);
  return copy;
}

std::set<std::string> Expression::variables() const {
  std::set<std::string> out;
  collect_variables(*root_, out);
  return out;
}

bool Expression::depends_on(std::string_view name) const {
  return node_depends_on(*root_, name);
}

std::size_t Expression::size() const { return node_size(*root_); }

std::string Expression::to_string() const { return node_text(*root_); }

bool Expression::structurally_equal(const Expression& other) const {
  return node_equal(*root_, *other.root_);
}

bool is_function_name(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return true;
  return false;
}

bool is_valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name.front())) ||
        name.front() == '_'))
    return false;
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return !is_function_name(name);
}

Expression parse_expression(std::string_view text) {
  return Expression::from_node(Parser(text).parse());
}

double evaluate(const Expression& expr, const Environment& env) {
  return eval_node(expr.node(), env);
}

Expression differentiate(const Expression& expr, std::string_view var) {
  std::vector<Expression> kinks = expr.kinks();
  NodePtr d = derive(expr.root(), var, kinks);
  return Expression::from_node(std::move(d)).with_kinks(std::move(kinks));
}

Expression simplify(const Expression& expr) {
  std::vector<Expression> kinks;
  kinks.reserve(expr.kinks().size());
  for (const auto& k : expr.kinks())
    kinks.push_back(Expression::from_node(simplify_node(k.root())));
  return Expression::from_node(simplify_node(expr.root()))
      .with_kinks(std::move(kinks));
}

Expression substitute(const Expression& expr,
                      const std::map<std::string, double, std::less<>>& values) {
  NodePtr root = expr.root();
  for (const auto& [name, value] : values) {
    root = substitute_node(root, name, make_constant(value));
  }
  return Expression::from_node(std::move(root)).with_kinks(expr.kinks());
}

Expression substitute(const Expression& expr, std::string_view name,
                      const Expression& replacement) {
  return Expression::from_node(
             substitute_node(expr.root(), name, replacement.root()))
      .with_kinks(expr.kinks());
}

// ---------------------------------------------------------------------------

BoundExpression::BoundExpression(const Expression& expr,
                                 std::span<const std::string> symbols)
    : expr_(expr) {
  std::size_t depth = 0;
  auto emit = [&](auto&& self, const Node& n) -> void {
    Instruction ins{n.kind, n.unary_op, n.binary_op, n.value, 0, &n};
    switch (n.kind) {
      case NodeKind::constant:
        ++depth;
        break;
      case NodeKind::variable: {
        std::size_t slot = symbols.size();
        for (std::size_t i = 0; i < symbols.size(); ++i) {
          if (symbols[i] == n.name) {
            slot = i;
            break;
          }
        }
        if (slot == symbols.size()) {
          throw ValidationError("undeclared variable '" + n.name + "' in '" +
                                expr_.to_string() + "'");
        }
        ins.slot = slot;
        ++depth;
        break;
      }
      case NodeKind::unary:
        self(self, *n.lhs);
        break;
      case NodeKind::binary:
        self(self, *n.lhs);
        self(self, *n.rhs);
        --depth;
        break;
    }
    max_stack_ = std::max(max_stack_, depth);
    program_.push_back(ins);
  };
  emit(emit, expr_.node());
}

double BoundExpression::operator()(std::span<const double> slots) const {
  constexpr std::size_t kInline = 64;
  std::array<double, kInline> inline_stack;
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (max_stack_ > kInline) {
    heap_stack.resize(max_stack_);
    stack = heap_stack.data();
  }
  std::size_t top = 0;
  for (const auto& ins : program_) {
    switch (ins.kind) {
      case NodeKind::constant:
        stack[top++] = ins.value;
        break;
      case NodeKind::variable:
        stack[top++] = slots[ins.slot];
        break;
      case NodeKind::unary:
        stack[top - 1] = detail::apply_unary(ins.unary_op, stack[top - 1],
                                             *ins.source);
        break;
      case NodeKind::binary: {
        const double b = stack[--top];
        stack[top - 1] =
            detail::apply_binary(ins.binary_op, stack[top - 1], b, *ins.source);
        break;
      }
    }
  }
  return top ? stack[0] : 0.0;
}

}  // namespace varcoef
