#pragma once

// Linearization about an operating point and the exact Taylor remainder.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varcoef/model.hpp"

namespace varcoef {

struct OperatingPoint {
  Eigen::VectorXd y_star;
  Eigen::VectorXd u_star;
  double t = 0.0;
};

/// A matrix of partial derivatives plus warnings raised while evaluating it
/// (a nonsmooth entry evaluated on its kink falls back to a central
/// difference and is reported here).
struct Jacobian {
  Eigen::MatrixXd matrix;
  std::vector<std::string> warnings;
};

/// Symbolic partials of every rhs component, built once per model.
class SymbolicJacobian {
 public:
  explicit SymbolicJacobian(const NonlinearModel& model);

  /// Expression for d f_i / d y_k.
  const Expression& state_entry(std::size_t i, std::size_t k) const;
  /// Expression for d f_i / d u_j.
  const Expression& input_entry(std::size_t i, std::size_t j) const;

  Jacobian state(const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                 double t) const;
  Jacobian input(const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                 double t) const;

 private:
  Jacobian evaluate(const std::vector<Expression>& entries,
                    const std::vector<BoundExpression>& bound, std::size_t cols,
                    bool wrt_state, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& u, double t) const;

  NonlinearModel model_;
  std::vector<Expression> state_entries_;  // row-major n x n
  std::vector<Expression> input_entries_;  // row-major n x l
  std::vector<BoundExpression> bound_state_;
  std::vector<BoundExpression> bound_input_;
};

/// B = df/dy at the operating point. Throws ValidationError if the point is
/// outside the domain box.
Jacobian jacobian_state(const NonlinearModel& model, const OperatingPoint& point);

/// m = df/du at the operating point.
Jacobian jacobian_input(const NonlinearModel& model, const OperatingPoint& point);

struct LinearModel {
  Eigen::MatrixXd B;
  Eigen::MatrixXd m;
  OperatingPoint point;
  std::vector<std::string> warnings;
};

LinearModel linearize_taylor(const NonlinearModel& model,
                             const OperatingPoint& point);

/// g = f(y,u,t) - B (y - y*) - m (u - u*) - f(y*, u*, t): the exact
/// remainder, so that the linear part plus g reproduces f.
Eigen::VectorXd residual_g(const NonlinearModel& model, const LinearModel& linear,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                           double t);

}  // namespace varcoef
