#pragma once

// Generalized nonlinear system dy/dt = f(y, u, t) with a domain box.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "varcoef/expr.hpp"

namespace varcoef {

/// Name of the time symbol an rhs or input signal may reference.
inline constexpr std::string_view kTimeSymbol = "t";

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double width() const noexcept { return hi - lo; }
  double midpoint() const noexcept { return 0.5 * (lo + hi); }
};

using Parameters = std::map<std::string, double, std::less<>>;

/// U(t): one expression of t per input.
class InputSignal {
 public:
  InputSignal() = default;
  explicit InputSignal(std::vector<Expression> components);

  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<Expression>& components() const noexcept {
    return components_;
  }
  Eigen::VectorXd operator()(double t) const;

  /// Signal of a fixed vector.
  static InputSignal constant(const Eigen::VectorXd& value);

 private:
  std::vector<Expression> components_;
  std::vector<BoundExpression> bound_;
};

class NonlinearModel {
 public:
  struct Declaration {
    std::string name;
    std::vector<std::string> state_names;
    std::vector<std::string> input_names;
    /// Right-hand sides in state order, parameters already substituted.
    std::vector<Expression> rhs;
    std::vector<Interval> state_domain;
    std::vector<Interval> input_domain;
    Parameters params;
    std::optional<InputSignal> input_signal;
  };

  /// Validates names, dimensions, domains and rhs symbols. Throws
  /// ValidationError.
  explicit NonlinearModel(Declaration decl);

  const std::string& name() const noexcept { return decl_.name; }
  std::size_t state_count() const noexcept { return decl_.state_names.size(); }
  std::size_t input_count() const noexcept { return decl_.input_names.size(); }
  const std::vector<std::string>& state_names() const noexcept {
    return decl_.state_names;
  }
  const std::vector<std::string>& input_names() const noexcept {
    return decl_.input_names;
  }
  const std::vector<Expression>& rhs() const noexcept { return decl_.rhs; }
  const std::vector<Interval>& state_domain() const noexcept {
    return decl_.state_domain;
  }
  const std::vector<Interval>& input_domain() const noexcept {
    return decl_.input_domain;
  }
  const Parameters& params() const noexcept { return decl_.params; }
  const std::optional<InputSignal>& input_signal() const noexcept {
    return decl_.input_signal;
  }

  /// Evaluation slot layout: states, then inputs, then t.
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }

  /// f(y, u, t). Throws ValidationError on size mismatch and EvaluationError
  /// on arithmetic domain violations.
  Eigen::VectorXd eval_rhs(const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                           double t) const;
  double eval_component(std::size_t i, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& u, double t) const;

  bool in_domain(const Eigen::VectorXd& y, const Eigen::VectorXd& u) const;
  bool state_in_domain(const Eigen::VectorXd& y) const;
  bool input_in_domain(const Eigen::VectorXd& u) const;

  /// Copy with a different domain box.
  NonlinearModel with_domain(std::vector<Interval> state_domain,
                             std::vector<Interval> input_domain) const;
  NonlinearModel with_domain(std::vector<Interval> state_domain) const;

  std::size_t state_index(std::string_view name) const;
  std::size_t input_index(std::string_view name) const;

  void check_sizes(const Eigen::VectorXd& y, const Eigen::VectorXd& u) const;

 private:
  std::vector<double> slots(const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                            double t) const;

  Declaration decl_;
  std::vector<std::string> symbols_;
  std::vector<BoundExpression> bound_rhs_;
};

/// Parses the sectioned model text (`[states]`, `[inputs]`, `[params]`,
/// `[rhs]`, `[input_signal]`). Throws ValidationError with a line number.
NonlinearModel load_model(std::string_view document, std::string name = {});

NonlinearModel load_model_file(const std::string& path);

}  // namespace varcoef
