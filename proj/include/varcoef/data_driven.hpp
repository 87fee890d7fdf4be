#pragma once

// Coefficients recovered from sampled trajectories, for systems whose
// right-hand side has no usable closed form: the measured derivative
// replaces f_i in K_i = (dy_i/dt) / d_i.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varcoef/sdc.hpp"

namespace varcoef {

struct TrajectorySamples {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
  std::optional<std::vector<Eigen::VectorXd>> derivs;

  std::size_t size() const noexcept { return times.size(); }
  /// Throws ValidationError unless all arrays share one length >= 3 and the
  /// time grid is strictly increasing.
  void validate() const;
};

/// Three-point differences: central in the interior, one-sided second order
/// at both ends (both exact for quadratics, also on non-uniform grids).
TrajectorySamples estimate_derivatives(const TrajectorySamples& samples);

/// Near-zero threshold used to flag singular samples:
/// 1e-9 * max|row coefficient| * max(|y|, |u|) over the trajectory.
double singular_threshold(const TrajectorySamples& samples,
                          const SdcParametrization& param, std::size_t equation);

/// derivs[k][i] / d_i(sample k). Throws SingularSampleError carrying k when
/// |d_i| is at or below singular_threshold().
double empirical_gain_K(const TrajectorySamples& samples,
                        const SdcParametrization& param, std::size_t equation,
                        std::size_t sample);

struct EmpiricalCoefficients {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> K;  // NaN where flagged
  std::vector<Eigen::MatrixXd> b;
  std::vector<Eigen::MatrixXd> m;
  /// Bit i set when equation i was singular at that sample.
  std::vector<unsigned> flags;
};

/// Estimates derivatives first when absent. Throws ValidationError when every
/// sample is singular for some equation.
EmpiricalCoefficients empirical_coefficients(const TrajectorySamples& samples,
                                             const SdcParametrization& param);

/// Trajectory CSV `t, y1..yn[, u1..ul][, dy1..dyn]`.
TrajectorySamples parse_samples(std::string_view text, std::size_t state_count,
                                std::size_t input_count);

/// Output CSV `t, K_1..K_n, b_11..b_nn, m_11..m_nl, flags`.
std::string format_coefficients(const EmpiricalCoefficients& coeffs);

}  // namespace varcoef
