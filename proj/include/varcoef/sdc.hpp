#pragma once

// Exact state-dependent-coefficient factorization.
//
// Each right-hand side is multiplied and divided by an affine form
//
//   d_i(y, u) = sum_k a_ik y_k + sum_j c_ij u_j
//
// which gives the gain K_i = f_i / d_i and the coefficients
// b_ik = a_ik K_i, m_ij = c_ij K_i, so that
//
//   dy_i/dt = sum_k b_ik(y,u,t) y_k + sum_j m_ij(y,u,t) u_j
//
// reproduces f_i wherever d_i does not vanish.

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varcoef/model.hpp"

namespace varcoef {

/// |d_i| at or below this is treated as a zero of the denominator.
inline constexpr double kZeroDenominator = 1e-12;

class SdcParametrization {
 public:
  /// `a` is n x n, `c` is n x l. Rejects all-zero rows of (a | c) and
  /// non-finite entries.
  SdcParametrization(Eigen::MatrixXd a, Eigen::MatrixXd c);

  std::size_t state_count() const noexcept {
    return static_cast<std::size_t>(a_.rows());
  }
  std::size_t input_count() const noexcept {
    return static_cast<std::size_t>(c_.cols());
  }
  const Eigen::MatrixXd& a() const noexcept { return a_; }
  const Eigen::MatrixXd& c() const noexcept { return c_; }

  /// Copy with row i of (a | c) multiplied by `factor` (non-zero).
  SdcParametrization with_row_scaled(std::size_t i, double factor) const;

  /// Throws ValidationError if dimensions do not match the model.
  void check_against(const NonlinearModel& model) const;

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd c_;
};

/// Parametrization file: CSV, n rows of n + l numbers, '#' comment lines.
SdcParametrization parse_parametrization(std::string_view text,
                                         std::size_t state_count,
                                         std::size_t input_count);
std::string format_parametrization(const SdcParametrization& param);

double denominator(const SdcParametrization& param, std::size_t i,
                   const Eigen::VectorXd& y, const Eigen::VectorXd& u);

/// K_i = f_i / d_i. Throws SingularityError when |d_i| <= kZeroDenominator.
double gain_K(const NonlinearModel& model, const SdcParametrization& param,
              std::size_t i, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
              double t);

struct FrozenCoefficients {
  Eigen::VectorXd K;  // n
  Eigen::MatrixXd b;  // n x n
  Eigen::MatrixXd m;  // n x l
};

class VarCoeffSystem {
 public:
  VarCoeffSystem(std::shared_ptr<const NonlinearModel> model,
                 SdcParametrization param);

  const NonlinearModel& model() const noexcept { return *model_; }
  const std::shared_ptr<const NonlinearModel>& model_ptr() const noexcept {
    return model_;
  }
  const SdcParametrization& parametrization() const noexcept { return param_; }
  std::size_t state_count() const noexcept { return model_->state_count(); }
  std::size_t input_count() const noexcept { return model_->input_count(); }

  double gain(std::size_t i, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
              double t) const;
  Eigen::VectorXd gains(const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                        double t) const;
  /// b_ik(y,u,t), n x n.
  Eigen::MatrixXd b(const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                    double t) const;
  /// m_ij(y,u,t), n x l.
  Eigen::MatrixXd m(const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                    double t) const;
  FrozenCoefficients coefficients(const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& u, double t) const;

  /// sum_k b_ik y_k + sum_j m_ij u_j. Throws SingularityError naming the
  /// equation when a denominator vanishes.
  Eigen::VectorXd reconstruct_rhs(const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& u, double t) const;

 private:
  std::shared_ptr<const NonlinearModel> model_;
  SdcParametrization param_;
};

VarCoeffSystem factorize(std::shared_ptr<const NonlinearModel> model,
                         SdcParametrization param);
VarCoeffSystem factorize(const NonlinearModel& model, SdcParametrization param);

Eigen::VectorXd reconstruct_rhs(const VarCoeffSystem& sys,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& u, double t);

enum class Verdict { pass, fail };

struct DenominatorReport {
  Verdict verdict = Verdict::pass;
  double min_abs_value = 0.0;
  /// Point (states then inputs) of the minimum, or of the first zero or
  /// sign change found, on failure.
  std::vector<double> witness;
  std::size_t witness_equation = 0;
  std::size_t samples_checked = 0;
  /// Per-axis grid count actually used (capped for high dimensions).
  std::size_t resolution = 0;
  Verdict grid_verdict = Verdict::pass;
  Verdict corner_verdict = Verdict::pass;
  /// False when n + l > 20 and corners were not enumerated.
  bool corners_checked = false;
  double corner_min_abs_value = 0.0;
  std::string reason;

  bool passed() const noexcept { return verdict == Verdict::pass; }
};

/// Checks every equation's denominator on a uniform grid over the domain box
/// (states x inputs) for zeros and sign changes between grid neighbours, and
/// separately on all box corners (exact for an affine form). Never throws for
/// a failing verdict.
DenominatorReport verify_denominator(const NonlinearModel& model,
                                     const SdcParametrization& param,
                                     std::size_t resolution);

/// Same, for a single equation's row.
DenominatorReport verify_denominator_row(const NonlinearModel& model,
                                         const SdcParametrization& param,
                                         std::size_t equation,
                                         std::size_t resolution);

/// Per equation, the first passing row among: one-hot a_ii = 1; the other
/// one-hot rows a_ik = 1; all ones; all ones signed by the domain box; then,
/// when every input interval is sign-definite, input-only rows c signed by
/// the input box and the earlier state rows combined with those. Throws
/// ParametrizationError when some equation has no passing candidate.
SdcParametrization default_parametrization(const NonlinearModel& model,
                                           std::size_t resolution);

}  // namespace varcoef
