#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "varcoef/error.hpp"
#include "varcoef/expr.hpp"

using namespace varcoef;

namespace {

Expression v(const char* name) { return Expression::variable(name); }
Expression c(double x) { return Expression::constant(x); }
Expression bin(BinaryOp op, const Expression& a, const Expression& b) {
  return Expression::binary(op, a, b);
}
Expression un(UnaryOp op, const Expression& a) { return Expression::unary(op, a); }

double eval(const char* text, const Environment& env = {}) {
  return evaluate(parse_expression(text), env);
}

// Random trees over x and y. Constants include 0 and 1 so that simplify
// has identities to apply.
class RandomExpressions {
 public:
  explicit RandomExpressions(std::uint64_t seed) : rng_(seed) {}

  Expression make(int depth) {
    std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 3);
    switch (kind(rng_)) {
      case 0:
        return pick(0, 1) ? v("x") : v("y");
      case 1: {
        static constexpr double kConstants[] = {0.0, 1.0, 2.0, 0.5, 3.0, 1.25};
        return c(kConstants[pick(0, 5)]);
      }
      case 2: {
        static constexpr UnaryOp kOps[] = {UnaryOp::neg, UnaryOp::sin,  UnaryOp::cos,
                                           UnaryOp::tan, UnaryOp::exp,  UnaryOp::ln,
                                           UnaryOp::abs, UnaryOp::sqrt};
        return un(kOps[pick(0, 7)], make(depth - 1));
      }
      default: {
        const int op = pick(0, 4);
        if (op == 4) {
          static constexpr double kExponents[] = {2.0, 3.0, -1.0, 0.5, 0.0, 1.0};
          return bin(BinaryOp::pow, make(depth - 1), c(kExponents[pick(0, 5)]));
        }
        static constexpr BinaryOp kOps[] = {BinaryOp::add, BinaryOp::sub,
                                            BinaryOp::mul, BinaryOp::div};
        return bin(kOps[op], make(depth - 1), make(depth - 1));
      }
    }
  }

  Environment env() {
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    return {{"x", d(rng_)}, {"y", d(rng_)}};
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::mt19937_64 rng_;
};

bool try_eval(const Expression& e, const Environment& env, double& out) {
  try {
    out = evaluate(e, env);
    return true;
  } catch (const EvaluationError&) {
    return false;
  }
}

}  // namespace

TEST_CASE("parse_expression builds the expected trees") {
  CHECK(parse_expression("y1^2 + sin(u1)")
            .structurally_equal(bin(BinaryOp::add, bin(BinaryOp::pow, v("y1"), c(2)),
                                    un(UnaryOp::sin, v("u1")))));
  CHECK(parse_expression("y1").structurally_equal(v("y1")));
  CHECK(parse_expression("-(y1*y2)/3")
            .structurally_equal(bin(BinaryOp::div,
                                    un(UnaryOp::neg, bin(BinaryOp::mul, v("y1"), v("y2"))),
                                    c(3))));
}

TEST_CASE("precedence and associativity") {
  CHECK(parse_expression("-y^2").structurally_equal(
      un(UnaryOp::neg, bin(BinaryOp::pow, v("y"), c(2)))));
  CHECK(parse_expression("a-b-c").structurally_equal(
      bin(BinaryOp::sub, bin(BinaryOp::sub, v("a"), v("b")), v("c"))));
  CHECK(parse_expression("a/b*c").structurally_equal(
      bin(BinaryOp::mul, bin(BinaryOp::div, v("a"), v("b")), v("c"))));
  CHECK(parse_expression("y^-1").structurally_equal(bin(BinaryOp::pow, v("y"), c(-1))));
  CHECK(eval("2^3^2") == 512.0);
}

TEST_CASE("parse errors carry position and expectations") {
  try {
    parse_expression("1 + * 2");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
    CHECK_FALSE(e.expected().empty());
  }
  try {
    parse_expression("foo(y)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("foo") != std::string::npos);
    CHECK(e.position() == 0);
    CHECK(std::find(e.expected().begin(), e.expected().end(), "sin") !=
          e.expected().end());
  }
  CHECK_THROWS_AS(parse_expression(""), ParseError);
  CHECK_THROWS_AS(parse_expression("(y"), ParseError);
  CHECK_THROWS_AS(parse_expression("y) "), ParseError);
  CHECK_THROWS_AS(parse_expression("y^x"), ParseError);
  CHECK_THROWS_AS(parse_expression("sin"), ParseError);
  CHECK_THROWS_AS(parse_expression("1..2"), ParseError);
}

TEST_CASE("evaluate examples") {
  CHECK(eval("y1^2 + sin(u1)", {{"y1", 2}, {"u1", 0}}) == 4.0);
  CHECK(eval("y1", {{"y1", 7.5}}) == 7.5);
  try {
    eval("1/y1", {{"y1", 0}});
    FAIL("expected a domain error");
  } catch (const EvaluationError& e) {
    CHECK(e.kind() == EvaluationError::Kind::domain);
    CHECK(e.subexpression() == "1/y1");
  }
  try {
    eval("y1 + q");
    FAIL("expected an unbound variable");
  } catch (const EvaluationError& e) {
    CHECK(e.kind() == EvaluationError::Kind::unbound_variable);
  }
  CHECK_THROWS_AS(eval("ln(0)"), EvaluationError);
  CHECK_THROWS_AS(eval("sqrt(-1)"), EvaluationError);
  CHECK_THROWS_AS(eval("(-8)^0.5"), EvaluationError);
  CHECK_THROWS_AS(eval("0^-1"), EvaluationError);
  CHECK_THROWS_AS(eval("exp(1000)"), EvaluationError);
}

TEST_CASE("evaluation corpus with hand-computed values") {
  const Environment env{{"x", 2.0}, {"y", 3.0}, {"z", 0.25}};
  const std::pair<const char*, double> corpus[] = {
      {"1+2*3", 7.0},          {"(1+2)*3", 9.0},       {"2^3^2", 512.0},
      {"-2^2", -4.0},          {"(-2)^2", 4.0},        {"10-4-3", 3.0},
      {"24/4/2", 3.0},         {"x*y", 6.0},           {"x^2 + y^2", 13.0},
      {"sqrt(x*8)", 4.0},      {"abs(1-y)", 2.0},      {"exp(0)", 1.0},
      {"ln(exp(2))", 2.0},     {"sin(0) + cos(0)", 1.0}, {"tan(0)", 0.0},
      {"x^-1", 0.5},           {"z^0.5", 0.5},         {"-(x*y)/3", -2.0},
      {"2*-x", -4.0},          {"1.5e1 - x", 13.0},
  };
  for (const auto& [text, expected] : corpus) {
    INFO(text);
    CHECK(eval(text, env) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("differentiate examples") {
  CHECK(simplify(differentiate(parse_expression("y1^3"), "y1")).to_string() == "3*y1^2");
  CHECK(simplify(differentiate(parse_expression("y2"), "y1")).to_string() == "0");

  const Expression f = parse_expression("sin(y1)*y2");
  const Expression df = differentiate(f, "y1");
  CHECK(evaluate(df, {{"y1", 0}, {"y2", 2}}) == doctest::Approx(2.0).epsilon(1e-15));
  const double h = 1e-6;
  const double fd = (evaluate(f, {{"y1", h}, {"y2", 2}}) -
                     evaluate(f, {{"y1", -h}, {"y2", 2}})) / (2 * h);
  CHECK(std::abs(fd - 2.0) <= 1e-8);
}

TEST_CASE("abs derivative is flagged nonsmooth") {
  const Expression d = differentiate(parse_expression("abs(y - 1)"), "y");
  CHECK(d.is_nonsmooth());
  REQUIRE(d.kinks().size() == 1);
  CHECK(evaluate(d.kinks()[0], {{"y", 1.0}}) == 0.0);
  CHECK(evaluate(d, {{"y", 3.0}}) == 1.0);
  CHECK(evaluate(d, {{"y", -3.0}}) == -1.0);
  CHECK(simplify(d).is_nonsmooth());
  CHECK_FALSE(differentiate(parse_expression("y^2"), "y").is_nonsmooth());
}

TEST_CASE("simplify examples") {
  CHECK(simplify(parse_expression("0*y1 + y2*1")).to_string() == "y2");
  CHECK(simplify(parse_expression("2+3")).to_string() == "5");
  const Expression d = differentiate(parse_expression("y1^2"), "y1");
  CHECK(evaluate(d, {{"y1", 4}}) == 8.0);
  CHECK(evaluate(simplify(d), {{"y1", 4}}) == 8.0);
  CHECK(simplify(parse_expression("y^1 + y^0 - 0")).to_string() == "y + 1");
  CHECK(simplify(parse_expression("--y")).to_string() == "y");
  // A folding that would fail is left in place.
  CHECK(simplify(parse_expression("1/0")).to_string() == "1/0");
}

TEST_CASE("substitute and variables") {
  const Expression e = parse_expression("mu*(1 - y1^2)*y2 - y1");
  CHECK(e.variables() == std::set<std::string>{"mu", "y1", "y2"});
  const Expression s = substitute(e, {{"mu", 1.0}});
  CHECK_FALSE(s.depends_on("mu"));
  CHECK(evaluate(s, {{"y1", 1}, {"y2", 1}}) == -1.0);
  const Expression r = substitute(parse_expression("y^2"), "y", parse_expression("2*sin(t)"));
  CHECK(evaluate(r, {{"t", std::numbers::pi / 2}}) == doctest::Approx(4.0));
}

TEST_CASE("identifier rules") {
  CHECK(is_valid_identifier("y_1"));
  CHECK(is_valid_identifier("_a"));
  CHECK_FALSE(is_valid_identifier("1y"));
  CHECK_FALSE(is_valid_identifier("sin"));
  CHECK_FALSE(is_valid_identifier(""));
  CHECK(is_function_name("sqrt"));
}

TEST_CASE("to_string round-trips random trees") {
  RandomExpressions gen(11);
  for (int n = 0; n < 300; ++n) {
    const Expression e = gen.make(5);
    const std::string text = e.to_string();
    INFO(text);
    const Expression back = parse_expression(text);
    CHECK(back.to_string() == text);
    const Environment env = gen.env();
    double a = 0.0, b = 0.0;
    const bool ok_a = try_eval(e, env, a);
    const bool ok_b = try_eval(back, env, b);
    CHECK(ok_a == ok_b);
    if (ok_a && ok_b) CHECK(a == b);
  }
}

TEST_CASE("bound expressions agree bit for bit with evaluate") {
  RandomExpressions gen(23);
  const std::vector<std::string> symbols{"x", "y"};
  for (int n = 0; n < 300; ++n) {
    const Expression e = gen.make(5);
    const BoundExpression bound(e, symbols);
    const Environment env = gen.env();
    const double slots[] = {env.at("x"), env.at("y")};
    double a = 0.0;
    if (!try_eval(e, env, a)) {
      CHECK_THROWS_AS(bound(slots), EvaluationError);
      continue;
    }
    CHECK(bound(slots) == a);
  }
  CHECK_THROWS_AS(BoundExpression(parse_expression("x + z"), symbols), ValidationError);
}

TEST_CASE("symbolic derivatives match central differences on random trees") {
  RandomExpressions gen(2024);
  const double h = 1e-6;
  int checked = 0;
  int attempts = 0;
  while (checked < 100 && attempts < 100000) {
    ++attempts;
    const Expression e = gen.make(5);
    if (!e.depends_on("x")) continue;
    const Environment env = gen.env();
    const Expression d = differentiate(e, "x");
    double f0 = 0.0, fp = 0.0, fm = 0.0, dv = 0.0;
    Environment plus = env, minus = env;
    plus["x"] += h;
    minus["x"] -= h;
    if (!try_eval(e, env, f0) || !try_eval(e, plus, fp) || !try_eval(e, minus, fm) ||
        !try_eval(d, env, dv))
      continue;
    // Stay away from kinks and from values too large for a 1e-6 difference.
    bool near_kink = false;
    for (const auto& k : d.kinks()) {
      double kv = 0.0;
      if (!try_eval(k, env, kv) || std::abs(kv) < 1e-3) near_kink = true;
    }
    if (near_kink || std::abs(f0) > 1e4) continue;
    const double fd = (fp - fm) / (2 * h);
    INFO(e.to_string());
    CHECK(std::abs(dv - fd) <= 1e-5 * std::max(1.0, std::abs(dv)));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("simplify preserves evaluation on random trees") {
  RandomExpressions gen(77);
  int checked = 0;
  for (int n = 0; n < 2000; ++n) {
    const Expression e = gen.make(5);
    const Expression s = simplify(e);
    CHECK(s.size() <= e.size());
    const Environment env = gen.env();
    double a = 0.0, b = 0.0;
    if (!try_eval(e, env, a)) continue;
    REQUIRE(try_eval(s, env, b));
    INFO(e.to_string(), " -> ", s.to_string());
    CHECK(std::abs(a - b) <= 1e-14 * std::max(std::abs(a), std::abs(b)));
    ++checked;
  }
  CHECK(checked > 500);
}
