#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace varcoef {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad documents, mismatched dimensions, violated
/// preconditions. The CLI maps these to exit status 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Expression source that does not match the grammar.
class ParseError : public ValidationError {
 public:
  ParseError(std::string message, std::size_t position,
             std::vector<std::string> expected = {});

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

/// Failure to evaluate an expression: unbound variable or an arithmetic
/// domain violation (division by zero, ln of a non-positive value, ...).
class EvaluationError : public Error {
 public:
  enum class Kind { unbound_variable, domain };

  EvaluationError(Kind kind, std::string message, std::string subexpression);

  Kind kind() const noexcept { return kind_; }
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  Kind kind_;
  std::string subexpression_;
};

/// A factorization denominator vanished where a gain was requested.
/// Carries the equation index and the offending point (states then inputs).
class SingularityError : public Error {
 public:
  SingularityError(std::string message, std::size_t equation,
                   std::vector<double> point, double time);

  std::size_t equation() const noexcept { return equation_; }
  const std::vector<double>& point() const noexcept { return point_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t equation_;
  std::vector<double> point_;
  double time_;
};

/// A sampled trajectory point whose denominator is numerically zero.
class SingularSampleError : public SingularityError {
 public:
  SingularSampleError(std::string message, std::size_t equation,
                      std::size_t sample, std::vector<double> point, double time)
      : SingularityError(std::move(message), equation, std::move(point), time),
        sample_(sample) {}

  std::size_t sample() const noexcept { return sample_; }

 private:
  std::size_t sample_;
};

/// No admissible parametrization could be established (search exhausted or
/// a supplied one fails verification). Exit status 3 in the CLI.
class ParametrizationError : public Error {
 public:
  using Error::Error;
};

}  // namespace varcoef
