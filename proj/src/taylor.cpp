#include "varcoef/taylor.hpp"

#include <algorithm>
#include <cmath>

#include "varcoef/csv.hpp"

namespace varcoef {

namespace {

constexpr double kKinkTolerance = 1e-12;
constexpr double kFallbackStep = 1e-6;

void require_in_domain(const NonlinearModel& model, const OperatingPoint& p) {
  model.check_sizes(p.y_star, p.u_star);
  if (!model.in_domain(p.y_star, p.u_star)) {
    throw ValidationError("operating point lies outside the domain box of '" +
                          model.name() + "'");
  }
}

}  // namespace

SymbolicJacobian::SymbolicJacobian(const NonlinearModel& model) : model_(model) {
  const std::size_t n = model.state_count();
  const std::size_t l = model.input_count();
  state_entries_.reserve(n * n);
  input_entries_.reserve(n * l);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k)
      state_entries_.push_back(
          simplify(differentiate(model.rhs()[i], model.state_names()[k])));
    for (std::size_t j = 0; j < l; ++j)
      input_entries_.push_back(
          simplify(differentiate(model.rhs()[i], model.input_names()[j])));
  }
  for (const auto& e : state_entries_) bound_state_.emplace_back(e, model.symbols());
  for (const auto& e : input_entries_) bound_input_.emplace_back(e, model.symbols());
}

const Expression& SymbolicJacobian::state_entry(std::size_t i,
                                                std::size_t k) const {
  return state_entries_.at(i * model_.state_count() + k);
}

const Expression& SymbolicJacobian::input_entry(std::size_t i,
                                                std::size_t j) const {
  return input_entries_.at(i * model_.input_count() + j);
}

Jacobian SymbolicJacobian::state(const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& u, double t) const {
  return evaluate(state_entries_, bound_state_, model_.state_count(), true, y, u,
                  t);
}

Jacobian SymbolicJacobian::input(const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& u, double t) const {
  return evaluate(input_entries_, bound_input_, model_.input_count(), false, y,
                  u, t);
}

Jacobian SymbolicJacobian::evaluate(const std::vector<Expression>& entries,
                                    const std::vector<BoundExpression>& bound,
                                    std::size_t cols, bool wrt_state,
                                    const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& u, double t) const {
  model_.check_sizes(y, u);
  const std::size_t n = model_.state_count();
  Jacobian out;
  out.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));

  std::vector<double> slots(model_.symbols().size());
  std::copy(y.data(), y.data() + y.size(), slots.begin());
  std::copy(u.data(), u.data() + u.size(), slots.begin() + y.size());
  slots.back() = t;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      const std::size_t idx = i * cols + k;
      const Expression& entry = entries[idx];
      bool at_kink = false;
      if (entry.is_nonsmooth()) {
        for (const auto& kink : entry.kinks()) {
          const BoundExpression arg(kink, model_.symbols());
          if (std::fabs(arg(slots)) <= kKinkTolerance) at_kink = true;
        }
      }
      double value = 0.0;
      if (!at_kink) {
        value = bound[idx](slots);
      } else {
        // Symmetric difference quotient: the mean of the one-sided slopes.
        Eigen::VectorXd yp = y, ym = y, up = u, um = u;
        const double x = wrt_state ? y[static_cast<Eigen::Index>(k)]
                                   : u[static_cast<Eigen::Index>(k)];
        const double h = kFallbackStep * std::max(1.0, std::fabs(x));
        if (wrt_state) {
          yp[static_cast<Eigen::Index>(k)] += h;
          ym[static_cast<Eigen::Index>(k)] -= h;
        } else {
          up[static_cast<Eigen::Index>(k)] += h;
          um[static_cast<Eigen::Index>(k)] -= h;
        }
        value = (model_.eval_component(i, yp, up, t) -
                 model_.eval_component(i, ym, um, t)) /
                (2.0 * h);
        const auto& var = wrt_state ? model_.state_names()[k]
                                    : model_.input_names()[k];
        out.warnings.push_back("d f" + std::to_string(i + 1) + "/d " + var +
                               " evaluated at a nonsmooth kink; using the "
                               "symmetric difference quotient " +
                               csv::format_number(value));
      }
      out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          value;
    }
  }
  return out;
}

Jacobian jacobian_state(const NonlinearModel& model,
                        const OperatingPoint& point) {
  require_in_domain(model, point);
  return SymbolicJacobian(model).state(point.y_star, point.u_star, point.t);
}

Jacobian jacobian_input(const NonlinearModel& model,
                        const OperatingPoint& point) {
  require_in_domain(model, point);
  return SymbolicJacobian(model).input(point.y_star, point.u_star, point.t);
}

LinearModel linearize_taylor(const NonlinearModel& model,
                             const OperatingPoint& point) {
  require_in_domain(model, point);
  const SymbolicJacobian jac(model);
  Jacobian b = jac.state(point.y_star, point.u_star, point.t);
  Jacobian m = jac.input(point.y_star, point.u_star, point.t);
  LinearModel out{std::move(b.matrix), std::move(m.matrix), point, {}};
  out.warnings = std::move(b.warnings);
  out.warnings.insert(out.warnings.end(), m.warnings.begin(), m.warnings.end());
  return out;
}

Eigen::VectorXd residual_g(const NonlinearModel& model, const LinearModel& linear,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                           double t) {
  model.check_sizes(y, u);
  if (linear.B.rows() != static_cast<Eigen::Index>(model.state_count()) ||
      linear.B.cols() != static_cast<Eigen::Index>(model.state_count()) ||
      linear.m.cols() != static_cast<Eigen::Index>(model.input_count())) {
    throw ValidationError("linear model dimensions do not match the model");
  }
  const Eigen::VectorXd f = model.eval_rhs(y, u, t);
  const Eigen::VectorXd f_star =
      model.eval_rhs(linear.point.y_star, linear.point.u_star, t);
  Eigen::VectorXd g = f - f_star;
  g -= linear.B * (y - linear.point.y_star);
  if (model.input_count() > 0) g -= linear.m * (u - linear.point.u_star);
  return g;
}

}  // namespace varcoef
