#pragma once

// Fixed-step integration of the original and factorized systems, trajectory
// comparison and frozen-coefficient spectra.

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varcoef/model.hpp"
#include "varcoef/sdc.hpp"

namespace varcoef {

/// A vector field y' = F(y, u, t) with an optional certified box.
struct OdeSystem {
  using Field = std::function<Eigen::VectorXd(
      const Eigen::VectorXd& y, const Eigen::VectorXd& u, double t)>;

  std::size_t state_count = 0;
  std::size_t input_count = 0;
  Field field;
  std::optional<std::vector<Interval>> state_domain;
  std::optional<std::vector<Interval>> input_domain;
};

/// `ignore` drops the box: integration then stops only on singular
/// denominators, evaluation errors or non-finite states.
enum class DomainPolicy { enforce, ignore };

OdeSystem original_system(const NonlinearModel& model,
                          DomainPolicy policy = DomainPolicy::enforce);
OdeSystem factorized_system(const VarCoeffSystem& sys,
                            DomainPolicy policy = DomainPolicy::enforce);

enum class SourceTag { original, factorized, external };
std::string_view to_string(SourceTag tag);

enum class HaltReason { completed, domain_exit, singularity, non_finite, evaluation };
std::string_view to_string(HaltReason reason);

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  SourceTag source = SourceTag::external;
  HaltReason halt = HaltReason::completed;
  /// Diagnostic for an early halt, including the time of the failed step.
  std::string halt_message;

  std::size_t size() const noexcept { return times.size(); }
  double step() const;
};

/// Classical four-stage Runge-Kutta with fixed step h on t0 + k h. Stops at
/// the last accepted sample when the state leaves the box, a singularity is
/// raised or the state becomes non-finite. Throws ValidationError for bad
/// arguments ((t1 - t0) / h must be an integer within 1e-9, y0 in the box).
Trajectory integrate_rk4(const OdeSystem& system, const Eigen::VectorXd& y0,
                         const InputSignal& signal, double t0, double t1,
                         double h, SourceTag tag = SourceTag::external);

struct ComparisonReport {
  Eigen::VectorXd max_abs_error;
  /// max over samples of |a - b| / max(|a|, |b|), 0 where both vanish.
  Eigen::VectorXd max_rel_error;
  /// Time of each state's max_abs_error.
  Eigen::VectorXd time_of_max;
  Eigen::VectorXd rms_error;
};

/// Throws ValidationError unless both share one time grid and dimension.
ComparisonReport compare_trajectories(const Trajectory& a, const Trajectory& b);

/// Coefficients of det(lambda I - M), highest power first (leading 1).
std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& matrix);

/// All complex roots of a real polynomial (highest power first).
std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& coeffs);

/// Eigenvalues of a square matrix with n <= 6 via its characteristic
/// polynomial, sorted by real then imaginary part.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& matrix);

struct EigenSample {
  double t = 0.0;
  std::vector<std::complex<double>> values;
};

/// Spectrum of [b_ik(y(t), u(t), t)] at every trajectory sample.
std::vector<EigenSample> frozen_eigenvalues(const VarCoeffSystem& sys,
                                            const Trajectory& traj,
                                            const InputSignal& signal);

/// `t, <names...>` with a comment line.
std::string format_trajectory(const Trajectory& traj,
                              const std::vector<std::string>& state_names,
                              const std::string& comment = {});
Trajectory parse_trajectory(std::string_view text,
                            std::vector<std::string>* state_names = nullptr);

}  // namespace varcoef
