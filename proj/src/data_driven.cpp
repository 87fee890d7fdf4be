#include "varcoef/data_driven.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "varcoef/csv.hpp"

namespace varcoef {

namespace {

constexpr double kRelativeSingular = 1e-9;

// Derivative at t[at] of the quadratic through (t[i], y[i]) for i in nodes.
Eigen::VectorXd three_point(const TrajectorySamples& s, std::size_t n0,
                            std::size_t n1, std::size_t n2, std::size_t at) {
  const double x0 = s.times[n0], x1 = s.times[n1], x2 = s.times[n2];
  const double x = s.times[at];
  const double w0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
  const double w1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
  const double w2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
  return w0 * s.states[n0] + w1 * s.states[n1] + w2 * s.states[n2];
}

double sample_denominator(const TrajectorySamples& s,
                          const SdcParametrization& param, std::size_t i,
                          std::size_t k) {
  return denominator(param, i, s.states[k], s.inputs[k]);
}

}  // namespace

void TrajectorySamples::validate() const {
  const std::size_t n = times.size();
  if (n < 3) throw ValidationError("trajectory needs at least 3 samples");
  if (states.size() != n || inputs.size() != n ||
      (derivs && derivs->size() != n)) {
    throw ValidationError("trajectory arrays must share one length");
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (!(times[k] > times[k - 1]))
      throw ValidationError("trajectory times must be strictly increasing");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (states[k].size() != states[0].size() || inputs[k].size() != inputs[0].size())
      throw ValidationError("trajectory vectors must share one dimension");
    if (derivs && (*derivs)[k].size() != states[0].size())
      throw ValidationError("derivative vectors must match the state dimension");
  }
}

TrajectorySamples estimate_derivatives(const TrajectorySamples& samples) {
  samples.validate();
  TrajectorySamples out = samples;
  const std::size_t n = samples.size();
  std::vector<Eigen::VectorXd> d(n);
  d[0] = three_point(samples, 0, 1, 2, 0);
  for (std::size_t k = 1; k + 1 < n; ++k)
    d[k] = three_point(samples, k - 1, k, k + 1, k);
  d[n - 1] = three_point(samples, n - 3, n - 2, n - 1, n - 1);
  out.derivs = std::move(d);
  return out;
}

double singular_threshold(const TrajectorySamples& samples,
                          const SdcParametrization& param, std::size_t equation) {
  const auto r = static_cast<Eigen::Index>(equation);
  double coeff = param.a().row(r).cwiseAbs().maxCoeff();
  if (param.c().cols() > 0)
    coeff = std::max(coeff, param.c().row(r).cwiseAbs().maxCoeff());
  double magnitude = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples.states[k].size() > 0)
      magnitude = std::max(magnitude, samples.states[k].cwiseAbs().maxCoeff());
    if (samples.inputs[k].size() > 0)
      magnitude = std::max(magnitude, samples.inputs[k].cwiseAbs().maxCoeff());
  }
  return kRelativeSingular * coeff * magnitude;
}

double empirical_gain_K(const TrajectorySamples& samples,
                        const SdcParametrization& param, std::size_t equation,
                        std::size_t sample) {
  samples.validate();
  if (!samples.derivs) throw ValidationError("samples carry no derivatives");
  if (sample >= samples.size()) throw ValidationError("sample index out of range");
  const double d = sample_denominator(samples, param, equation, sample);
  if (std::fabs(d) <= singular_threshold(samples, param, equation)) {
    std::vector<double> point(samples.states[sample].data(),
                              samples.states[sample].data() +
                                  samples.states[sample].size());
    point.insert(point.end(), samples.inputs[sample].data(),
                 samples.inputs[sample].data() + samples.inputs[sample].size());
    throw SingularSampleError(
        "denominator of equation " + std::to_string(equation + 1) +
            " vanishes at sample " + std::to_string(sample) + " (t = " +
            csv::format_number(samples.times[sample]) + ")",
        equation, sample, std::move(point), samples.times[sample]);
  }
  return (*samples.derivs)[sample][static_cast<Eigen::Index>(equation)] / d;
}

EmpiricalCoefficients empirical_coefficients(const TrajectorySamples& input,
                                             const SdcParametrization& param) {
  input.validate();
  const TrajectorySamples samples =
      input.derivs ? input : estimate_derivatives(input);
  const std::size_t count = samples.size();
  const auto n = static_cast<Eigen::Index>(param.state_count());
  const auto l = static_cast<Eigen::Index>(param.input_count());
  if (samples.states[0].size() != n || samples.inputs[0].size() != l)
    throw ValidationError("trajectory dimensions do not match the parametrization");

  std::vector<double> thresholds(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    thresholds[static_cast<std::size_t>(i)] =
        singular_threshold(samples, param, static_cast<std::size_t>(i));

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  EmpiricalCoefficients out;
  out.times = samples.times;
  out.K.resize(count);
  out.b.resize(count);
  out.m.resize(count);
  out.flags.assign(count, 0u);
  std::vector<std::size_t> kept(static_cast<std::size_t>(n), 0);

  for (std::size_t k = 0; k < count; ++k) {
    Eigen::VectorXd K(n);
    Eigen::MatrixXd b(n, n), m(n, l);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto eq = static_cast<std::size_t>(i);
      const double d = sample_denominator(samples, param, eq, k);
      if (std::fabs(d) <= thresholds[eq]) {
        out.flags[k] |= 1u << i;
        K[i] = kNaN;
        b.row(i).setConstant(kNaN);
        m.row(i).setConstant(kNaN);
        continue;
      }
      K[i] = (*samples.derivs)[k][i] / d;
      b.row(i) = param.a().row(i) * K[i];
      m.row(i) = param.c().row(i) * K[i];
      ++kept[eq];
    }
    out.K[k] = std::move(K);
    out.b[k] = std::move(b);
    out.m[k] = std::move(m);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (kept[static_cast<std::size_t>(i)] == 0) {
      throw ValidationError("every sample is singular for equation " +
                            std::to_string(i + 1));
    }
  }
  return out;
}

TrajectorySamples parse_samples(std::string_view text, std::size_t state_count,
                                std::size_t input_count) {
  const auto table = csv::parse_table(text, true);
  const std::size_t plain = 1 + state_count + input_count;
  const std::size_t with_derivs = plain + state_count;
  const std::size_t width = table.header.size();
  if (width != plain && width != with_derivs) {
    throw ValidationError("trajectory CSV has " + std::to_string(width) +
                          " columns; expected " + std::to_string(plain) + " or " +
                          std::to_string(with_derivs));
  }
  TrajectorySamples s;
  const auto n = static_cast<Eigen::Index>(state_count);
  const auto l = static_cast<Eigen::Index>(input_count);
  std::vector<Eigen::VectorXd> derivs;
  for (const auto& row : table.rows) {
    s.times.push_back(row[0]);
    Eigen::VectorXd y(n), u(l);
    for (Eigen::Index k = 0; k < n; ++k) y[k] = row[static_cast<std::size_t>(1 + k)];
    for (Eigen::Index j = 0; j < l; ++j)
      u[j] = row[static_cast<std::size_t>(1 + n + j)];
    s.states.push_back(std::move(y));
    s.inputs.push_back(std::move(u));
    if (width == with_derivs) {
      Eigen::VectorXd dy(n);
      for (Eigen::Index k = 0; k < n; ++k)
        dy[k] = row[static_cast<std::size_t>(1 + n + l + k)];
      derivs.push_back(std::move(dy));
    }
  }
  if (width == with_derivs) s.derivs = std::move(derivs);
  s.validate();
  return s;
}

std::string format_coefficients(const EmpiricalCoefficients& coeffs) {
  if (coeffs.times.empty()) return {};
  const Eigen::Index n = coeffs.K.front().size();
  const Eigen::Index l = coeffs.m.front().cols();
  std::vector<std::string> header{"t"};
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("K_" + std::to_string(i + 1));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      header.push_back("b_" + std::to_string(i + 1) + std::to_string(k + 1));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < l; ++j)
      header.push_back("m_" + std::to_string(i + 1) + std::to_string(j + 1));
  header.push_back("flags");
  std::string out = csv::join(header) + "\n";
  for (std::size_t s = 0; s < coeffs.times.size(); ++s) {
    std::vector<std::string> f{csv::format_number(coeffs.times[s])};
    for (Eigen::Index i = 0; i < n; ++i) f.push_back(csv::format_number(coeffs.K[s][i]));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k)
        f.push_back(csv::format_number(coeffs.b[s](i, k)));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < l; ++j)
        f.push_back(csv::format_number(coeffs.m[s](i, j)));
    f.push_back(std::to_string(coeffs.flags[s]));
    out += csv::join(f) + "\n";
  }
  return out;
}

}  // namespace varcoef
