#include "varcoef/error.hpp"

#include <utility>

namespace varcoef {

namespace {

std::string with_expected(const std::string& message,
                          const std::vector<std::string>& expected) {
  if (expected.empty()) return message;
  std::string out = message + " (expected one of:";
  for (const auto& e : expected) out += " " + e;
  out += ")";
  return out;
}

}  // namespace

ParseError::ParseError(std::string message, std::size_t position,
                       std::vector<std::string> expected)
    : ValidationError("parse error at position " + std::to_string(position) +
                      ": " + with_expected(message, expected)),
      position_(position),
      expected_(std::move(expected)) {}

EvaluationError::EvaluationError(Kind kind, std::string message,
                                 std::string subexpression)
    : Error(message + " in '" + subexpression + "'"),
      kind_(kind),
      subexpression_(std::move(subexpression)) {}

SingularityError::SingularityError(std::string message, std::size_t equation,
                                   std::vector<double> point, double time)
    : Error(std::move(message)),
      equation_(equation),
      point_(std::move(point)),
      time_(time) {}

}  // namespace varcoef
