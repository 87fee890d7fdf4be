#pragma once

// Harmonic linearization (describing function) of static nonlinearities.
//
// For a probe y = A sin(theta), theta = omega_c t, the in-phase and quadrature
// first-harmonic integrals are
//
//   q  = int_0^{2 pi} f(A sin theta, theta) sin theta dtheta
//   q' = int_0^{2 pi} f(A sin theta, theta) cos theta dtheta
//
// computed by composite Simpson quadrature. The classical describing-function
// gains are the same integrals divided by pi A.

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varcoef/model.hpp"

namespace varcoef {

struct HarmonicProbe {
  double amplitude = 1.0;
  double omega = 1.0;
  int panels = 1024;

  /// Throws ValidationError unless amplitude > 0, omega > 0 and panels is an
  /// even integer >= 8.
  void validate() const;
};

struct HarmonicCoefficients {
  double q = 0.0;
  double q_prime = 0.0;
  double normalized_q = 0.0;
  double normalized_q_prime = 0.0;
};

/// `f` must reference at most one variable besides t; that variable is
/// replaced by A sin(theta) and t by theta / omega.
HarmonicCoefficients describing_coefficients(const Expression& f,
                                             const HarmonicProbe& probe);

/// Same, with the probed variable named explicitly. Any other variable
/// (apart from t) is an error.
HarmonicCoefficients describing_coefficients(const Expression& f,
                                             std::string_view variable,
                                             const HarmonicProbe& probe);

/// Label attached to every transformed system: the assembled right-hand side
/// is a per-equation linear combination with scalar describing gains over a
/// shared denominator 1 + sum of that equation's normalized q'.
inline constexpr std::string_view kHarmonicInterpretation =
    "per-equation-scalar-gains/shared-denominator-1-plus-sum-normalized-q-prime";

struct HarmonicTerm {
  std::string variable;
  Expression term;
  HarmonicCoefficients coefficients;
};

struct HarmonicEquation {
  std::vector<HarmonicTerm> terms;
  Eigen::VectorXd state_gains;  // n: normalized q per state
  Eigen::VectorXd input_gains;  // l: normalized q per input
  double denominator = 1.0;     // 1 + sum of normalized q'
};

struct HarmonicSystem {
  std::vector<HarmonicEquation> equations;
  std::string interpretation{kHarmonicInterpretation};

  /// (state_gains . y + input_gains . u) / denominator per equation.
  Eigen::VectorXd rhs(const Eigen::VectorXd& y, const Eigen::VectorXd& u) const;
  Eigen::MatrixXd state_gain_matrix() const;
  Eigen::MatrixXd input_gain_matrix() const;
};

/// `probes` is keyed by state or input name and must cover every variable
/// that appears in a right-hand side. Each rhs must be a sum of terms that
/// each depend on a single state or input (t may appear alongside it);
/// constant terms carry no first harmonic and are dropped.
HarmonicSystem harmonic_transform(const NonlinearModel& model,
                                  const std::map<std::string, HarmonicProbe,
                                                 std::less<>>& probes);

}  // namespace varcoef
