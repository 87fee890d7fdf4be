#include "varcoef/harmonic.hpp"

#include <cmath>
#include <numbers>

namespace varcoef {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kZeroHarmonicDenominator = 1e-12;

// Signed additive terms of an expression (top-level +, - and unary -).
void collect_terms(const Expression& e, bool negate, std::vector<Expression>& out) {
  if (e.kind() == NodeKind::binary &&
      (e.binary_op() == BinaryOp::add || e.binary_op() == BinaryOp::sub)) {
    collect_terms(e.lhs(), negate, out);
    collect_terms(e.rhs(), e.binary_op() == BinaryOp::sub ? !negate : negate, out);
    return;
  }
  if (e.kind() == NodeKind::unary && e.unary_op() == UnaryOp::neg) {
    collect_terms(e.lhs(), !negate, out);
    return;
  }
  out.push_back(negate ? Expression::unary(UnaryOp::neg, e) : e);
}

}  // namespace

void HarmonicProbe::validate() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw ValidationError("harmonic probe amplitude must be positive");
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw ValidationError("harmonic probe frequency must be positive");
  if (panels < 8 || panels % 2 != 0)
    throw ValidationError("harmonic probe panel count must be even and >= 8");
}

HarmonicCoefficients describing_coefficients(const Expression& f,
                                             std::string_view variable,
                                             const HarmonicProbe& probe) {
  probe.validate();
  for (const auto& v : f.variables()) {
    if (v != variable && v != kTimeSymbol) {
      throw ValidationError("describing function of '" + f.to_string() +
                            "' references '" + v + "' besides the probed '" +
                            std::string(variable) + "'");
    }
  }
  const std::vector<std::string> symbols{std::string(variable),
                                         std::string(kTimeSymbol)};
  const BoundExpression fn(f, symbols);

  const int n = probe.panels;
  const double h = kTwoPi / n;
  double q = 0.0;
  double qp = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double theta = k * h;
    const double weight = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double s = std::sin(theta);
    const double slots[2] = {probe.amplitude * s, theta / probe.omega};
    const double value = fn(slots);
    q += weight * value * s;
    qp += weight * value * std::cos(theta);
  }
  HarmonicCoefficients out;
  out.q = q * h / 3.0;
  out.q_prime = qp * h / 3.0;
  out.normalized_q = out.q / (std::numbers::pi * probe.amplitude);
  out.normalized_q_prime = out.q_prime / (std::numbers::pi * probe.amplitude);
  return out;
}

HarmonicCoefficients describing_coefficients(const Expression& f,
                                             const HarmonicProbe& probe) {
  std::string variable;
  for (const auto& v : f.variables()) {
    if (v == kTimeSymbol) continue;
    if (!variable.empty()) {
      throw ValidationError("describing function needs a single-variable "
                            "expression, '" + f.to_string() +
                            "' references both '" + variable + "' and '" + v +
                            "'");
    }
    variable = v;
  }
  if (variable.empty()) variable = "_probe";
  return describing_coefficients(f, variable, probe);
}

Eigen::VectorXd HarmonicSystem::rhs(const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& u) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(equations.size()));
  for (std::size_t i = 0; i < equations.size(); ++i) {
    const auto& eq = equations[i];
    if (eq.state_gains.size() != y.size() || eq.input_gains.size() != u.size())
      throw ValidationError("vector sizes do not match the transformed system");
    out[static_cast<Eigen::Index>(i)] =
        (eq.state_gains.dot(y) + eq.input_gains.dot(u)) / eq.denominator;
  }
  return out;
}

Eigen::MatrixXd HarmonicSystem::state_gain_matrix() const {
  if (equations.empty()) return {};
  Eigen::MatrixXd g(static_cast<Eigen::Index>(equations.size()),
                    equations.front().state_gains.size());
  for (std::size_t i = 0; i < equations.size(); ++i)
    g.row(static_cast<Eigen::Index>(i)) =
        equations[i].state_gains.transpose() / equations[i].denominator;
  return g;
}

Eigen::MatrixXd HarmonicSystem::input_gain_matrix() const {
  if (equations.empty()) return {};
  Eigen::MatrixXd g(static_cast<Eigen::Index>(equations.size()),
                    equations.front().input_gains.size());
  for (std::size_t i = 0; i < equations.size(); ++i)
    g.row(static_cast<Eigen::Index>(i)) =
        equations[i].input_gains.transpose() / equations[i].denominator;
  return g;
}

HarmonicSystem harmonic_transform(
    const NonlinearModel& model,
    const std::map<std::string, HarmonicProbe, std::less<>>& probes) {
  const std::size_t n = model.state_count();
  const std::size_t l = model.input_count();
  HarmonicSystem out;
  out.equations.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const std::string eq_name = model.state_names()[i] + "'";
    std::vector<Expression> terms;
    collect_terms(model.rhs()[i], false, terms);

    // Group terms by the single state/input they depend on.
    std::map<std::string, Expression> grouped;
    std::vector<std::string> order;
    for (const auto& term : terms) {
      std::string variable;
      for (const auto& v : term.variables()) {
        if (v == kTimeSymbol) continue;
        if (!variable.empty()) {
          throw ValidationError("rhs of " + eq_name + " is not a sum of "
                                "single-variable terms: '" + term.to_string() +
                                "'");
        }
        variable = v;
      }
      if (variable.empty()) {
        if (term.depends_on(kTimeSymbol)) {
          throw ValidationError("rhs of " + eq_name + " has a purely "
                                "time-dependent term '" + term.to_string() +
                                "' with no state or input gain");
        }
        continue;  // constant: no first-harmonic content
      }
      auto it = grouped.find(variable);
      if (it == grouped.end()) {
        grouped.emplace(variable, term);
        order.push_back(variable);
      } else {
        it->second = Expression::binary(BinaryOp::add, it->second, term);
      }
    }

    HarmonicEquation eq;
    eq.state_gains = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    eq.input_gains = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l));
    double q_prime_sum = 0.0;
    for (const auto& variable : order) {
      auto probe = probes.find(variable);
      if (probe == probes.end()) {
        throw ValidationError("no harmonic probe given for '" + variable + "'");
      }
      HarmonicTerm term{variable, grouped.at(variable), {}};
      term.coefficients =
          describing_coefficients(term.term, variable, probe->second);
      q_prime_sum += term.coefficients.normalized_q_prime;
      bool placed = false;
      for (std::size_t k = 0; k < n && !placed; ++k) {
        if (model.state_names()[k] == variable) {
          eq.state_gains[static_cast<Eigen::Index>(k)] =
              term.coefficients.normalized_q;
          placed = true;
        }
      }
      for (std::size_t j = 0; j < l && !placed; ++j) {
        if (model.input_names()[j] == variable) {
          eq.input_gains[static_cast<Eigen::Index>(j)] =
              term.coefficients.normalized_q;
          placed = true;
        }
      }
      eq.terms.push_back(std::move(term));
    }
    eq.denominator = 1.0 + q_prime_sum;
    if (std::fabs(eq.denominator) <= kZeroHarmonicDenominator) {
      throw ValidationError("harmonic denominator of " + eq_name +
                            " vanishes (normalized q' sums to -1)");
    }
    out.equations.push_back(std::move(eq));
  }
  return out;
}

}  // namespace varcoef
