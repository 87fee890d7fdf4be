#include "varcoef/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "varcoef/csv.hpp"

namespace varcoef {

namespace {

bool in_box(const Eigen::VectorXd& v, const std::vector<Interval>& box) {
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (!box[static_cast<std::size_t>(k)].contains(v[k])) return false;
  return true;
}

}  // namespace

OdeSystem original_system(const NonlinearModel& model, DomainPolicy policy) {
  auto shared = std::make_shared<const NonlinearModel>(model);
  OdeSystem sys;
  sys.state_count = model.state_count();
  sys.input_count = model.input_count();
  sys.field = [shared](const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                       double t) { return shared->eval_rhs(y, u, t); };
  if (policy == DomainPolicy::enforce) {
    sys.state_domain = model.state_domain();
    sys.input_domain = model.input_domain();
  }
  return sys;
}

OdeSystem factorized_system(const VarCoeffSystem& vc, DomainPolicy policy) {
  auto shared = std::make_shared<const VarCoeffSystem>(vc);
  OdeSystem sys;
  sys.state_count = vc.state_count();
  sys.input_count = vc.input_count();
  sys.field = [shared](const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                       double t) { return shared->reconstruct_rhs(y, u, t); };
  if (policy == DomainPolicy::enforce) {
    sys.state_domain = vc.model().state_domain();
    sys.input_domain = vc.model().input_domain();
  }
  return sys;
}

std::string_view to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::original: return "original";
    case SourceTag::factorized: return "factorized";
    case SourceTag::external: return "external";
  }
  return "external";
}

std::string_view to_string(HaltReason reason) {
  switch (reason) {
    case HaltReason::completed: return "completed";
    case HaltReason::domain_exit: return "domain_exit";
    case HaltReason::singularity: return "singularity";
    case HaltReason::non_finite: return "non_finite";
    case HaltReason::evaluation: return "evaluation_error";
  }
  return "completed";
}

double Trajectory::step() const {
  return times.size() < 2 ? 0.0 : times[1] - times[0];
}

Trajectory integrate_rk4(const OdeSystem& system, const Eigen::VectorXd& y0,
                         const InputSignal& signal, double t0, double t1,
                         double h, SourceTag tag) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("step h must be positive");
  if (!(t1 > t0)) throw ValidationError("t1 must exceed t0");
  if (static_cast<std::size_t>(y0.size()) != system.state_count)
    throw ValidationError("initial state has the wrong dimension");
  if (signal.size() != system.input_count) {
    throw ValidationError("input signal has " + std::to_string(signal.size()) +
                          " components, system needs " +
                          std::to_string(system.input_count));
  }
  const double span = (t1 - t0) / h;
  const double rounded = std::round(span);
  if (std::fabs(span - rounded) > 1e-9 * std::max(1.0, rounded)) {
    throw ValidationError("(t1 - t0) / h must be an integer number of steps");
  }
  const auto steps = static_cast<std::size_t>(rounded);
  if (system.state_domain && !in_box(y0, *system.state_domain))
    throw ValidationError("initial state lies outside the domain box");
  if (system.input_domain && !in_box(signal(t0), *system.input_domain))
    throw ValidationError("input at t0 lies outside the input domain");

  Trajectory traj;
  traj.source = tag;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(t0);
  traj.states.push_back(y0);

  Eigen::VectorXd y = y0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    const double t_next = t0 + static_cast<double>(k + 1) * h;
    const double t_mid = t + 0.5 * h;
    Eigen::VectorXd next;
    try {
      const Eigen::VectorXd u0 = signal(t);
      const Eigen::VectorXd um = signal(t_mid);
      const Eigen::VectorXd u1 = signal(t_next);
      const Eigen::VectorXd k1 = system.field(y, u0, t);
      const Eigen::VectorXd k2 = system.field(y + 0.5 * h * k1, um, t_mid);
      const Eigen::VectorXd k3 = system.field(y + 0.5 * h * k2, um, t_mid);
      const Eigen::VectorXd k4 = system.field(y + h * k3, u1, t_next);
      next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!next.allFinite()) {
        traj.halt = HaltReason::non_finite;
        traj.halt_message = "state became non-finite at t = " + csv::format_number(t_next);
        return traj;
      }
      if ((system.state_domain && !in_box(next, *system.state_domain)) ||
          (system.input_domain && !in_box(u1, *system.input_domain))) {
        traj.halt = HaltReason::domain_exit;
        traj.halt_message = "left the domain box at t = " + csv::format_number(t_next);
        return traj;
      }
    } catch (const SingularityError& e) {
      traj.halt = HaltReason::singularity;
      traj.halt_message = std::string(e.what()) + " during the step from t = " +
                          csv::format_number(t);
      return traj;
    } catch (const EvaluationError& e) {
      traj.halt = HaltReason::evaluation;
      traj.halt_message = std::string(e.what()) + " during the step from t = " +
                          csv::format_number(t);
      return traj;
    }
    y = std::move(next);
    traj.times.push_back(t_next);
    traj.states.push_back(y);
  }
  return traj;
}

ComparisonReport compare_trajectories(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size() || a.size() == 0)
    throw ValidationError("trajectories have different lengths");
  const Eigen::Index n = a.states.front().size();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.states[k].size() != n || b.states[k].size() != n)
      throw ValidationError("trajectories have different dimensions");
    const double scale = std::max({1.0, std::fabs(a.times[k]), std::fabs(b.times[k])});
    if (std::fabs(a.times[k] - b.times[k]) > 1e-12 * scale)
      throw ValidationError("trajectories are sampled on different time grids");
  }
  ComparisonReport r;
  r.max_abs_error = Eigen::VectorXd::Zero(n);
  r.max_rel_error = Eigen::VectorXd::Zero(n);
  r.time_of_max = Eigen::VectorXd::Constant(n, a.times.front());
  r.rms_error = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = a.states[k][i];
      const double z = b.states[k][i];
      const double err = std::fabs(x - z);
      if (err > r.max_abs_error[i]) {
        r.max_abs_error[i] = err;
        r.time_of_max[i] = a.times[k];
      }
      const double mag = std::max(std::fabs(x), std::fabs(z));
      if (mag > 0.0) r.max_rel_error[i] = std::max(r.max_rel_error[i], err / mag);
      r.rms_error[i] += err * err;
    }
  }
  r.rms_error = (r.rms_error / static_cast<double>(a.size())).cwiseSqrt();
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols())
    throw ValidationError("characteristic polynomial needs a square matrix");
  const Eigen::Index n = matrix.rows();
  // Faddeev-LeVerrier recursion.
  std::vector<double> coeffs(static_cast<std::size_t>(n) + 1, 0.0);
  coeffs[0] = 1.0;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    M = matrix * M + coeffs[static_cast<std::size_t>(k - 1)] * I;
    coeffs[static_cast<std::size_t>(k)] =
        -(matrix * M).trace() / static_cast<double>(k);
  }
  return coeffs;
}

namespace {

using Complex = std::complex<double>;

Complex horner(const std::vector<double>& p, Complex z) {
  Complex v = p[0];
  for (std::size_t i = 1; i < p.size(); ++i) v = v * z + p[i];
  return v;
}

Complex horner_derivative(const std::vector<double>& p, Complex z) {
  const std::size_t deg = p.size() - 1;
  Complex v = 0.0;
  for (std::size_t i = 0; i < deg; ++i)
    v = v * z + p[i] * static_cast<double>(deg - i);
  return v;
}

}  // namespace

std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& input) {
  std::vector<double> p = input;
  while (!p.empty() && p.front() == 0.0) p.erase(p.begin());
  if (p.empty()) throw ValidationError("zero polynomial has no defined roots");
  std::vector<Complex> roots;
  // Exact zero roots.
  while (p.size() > 1 && p.back() == 0.0) {
    roots.emplace_back(0.0, 0.0);
    p.pop_back();
  }
  const double lead = p.front();
  for (auto& c : p) c /= lead;
  const std::size_t deg = p.size() - 1;

  if (deg == 1) {
    roots.emplace_back(-p[1], 0.0);
  } else if (deg == 2) {
    const double b = p[1], c = p[2];
    const double disc = 0.25 * b * b - c;
    if (disc >= 0.0) {
      const double r1 = -0.5 * b - std::copysign(std::sqrt(disc), b);
      roots.emplace_back(r1, 0.0);
      roots.emplace_back(r1 != 0.0 ? c / r1 : 0.0, 0.0);
    } else {
      const double im = std::sqrt(-disc);
      roots.emplace_back(-0.5 * b, im);
      roots.emplace_back(-0.5 * b, -im);
    }
  } else if (deg > 2) {
    // Durand-Kerner from points on a circle bounding all roots.
    double bound = 0.0;
    for (std::size_t i = 1; i <= deg; ++i) bound = std::max(bound, std::fabs(p[i]));
    const double radius = 1.0 + bound;
    std::vector<Complex> z(deg);
    for (std::size_t i = 0; i < deg; ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) /
                               static_cast<double>(deg) + 0.4;
      z[i] = std::polar(radius, angle);
    }
    for (int iter = 0; iter < 2000; ++iter) {
      double change = 0.0;
      for (std::size_t i = 0; i < deg; ++i) {
        Complex denom = 1.0;
        for (std::size_t j = 0; j < deg; ++j)
          if (j != i) denom *= (z[i] - z[j]);
        if (std::abs(denom) == 0.0) denom = 1e-300;
        const Complex delta = horner(p, z[i]) / denom;
        z[i] -= delta;
        change = std::max(change, std::abs(delta) / std::max(1.0, std::abs(z[i])));
      }
      if (change < 1e-15) break;
    }
    // Newton polishing on the polynomial itself.
    for (auto& r : z) {
      for (int iter = 0; iter < 8; ++iter) {
        const Complex d = horner_derivative(p, r);
        if (std::abs(d) == 0.0) break;
        const Complex step = horner(p, r) / d;
        const Complex next = r - step;
        if (std::abs(horner(p, next)) > std::abs(horner(p, r))) break;
        r = next;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(r))) break;
      }
      if (std::fabs(r.imag()) <= 1e-12 * std::max(1.0, std::abs(r)) &&
          std::abs(horner(p, Complex(r.real(), 0.0))) <= std::abs(horner(p, r)) * 10.0) {
        r = Complex(r.real(), 0.0);
      }
    }
    roots.insert(roots.end(), z.begin(), z.end());
  }
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols())
    throw ValidationError("eigenvalues need a square matrix");
  if (matrix.rows() > 6)
    throw ValidationError("frozen eigenvalues support n <= 6");
  if (!matrix.allFinite()) throw ValidationError("matrix has non-finite entries");
  return polynomial_roots(characteristic_polynomial(matrix));
}

std::vector<EigenSample> frozen_eigenvalues(const VarCoeffSystem& sys,
                                            const Trajectory& traj,
                                            const InputSignal& signal) {
  if (sys.state_count() > 6)
    throw ValidationError("frozen eigenvalues support n <= 6");
  if (signal.size() != sys.input_count())
    throw ValidationError("input signal does not match the system inputs");
  std::vector<EigenSample> out;
  out.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    const Eigen::MatrixXd B = sys.b(traj.states[k], signal(t), t);
    out.push_back({t, eigenvalues(B)});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string format_trajectory(const Trajectory& traj,
                              const std::vector<std::string>& state_names,
                              const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  std::vector<std::string> header{"t"};
  header.insert(header.end(), state_names.begin(), state_names.end());
  out += csv::join(header) + "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<std::string> f{csv::format_number(traj.times[k])};
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i)
      f.push_back(csv::format_number(traj.states[k][i]));
    out += csv::join(f) + "\n";
  }
  return out;
}

Trajectory parse_trajectory(std::string_view text,
                            std::vector<std::string>* state_names) {
  const auto table = csv::parse_table(text, true);
  if (table.header.size() < 2 || table.header.front() != "t")
    throw ValidationError("trajectory CSV header must be 't, y1, ...'");
  Trajectory traj;
  const auto n = static_cast<Eigen::Index>(table.header.size() - 1);
  for (const auto& row : table.rows) {
    traj.times.push_back(row[0]);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = row[static_cast<std::size_t>(1 + i)];
    traj.states.push_back(std::move(y));
  }
  if (state_names)
    state_names->assign(table.header.begin() + 1, table.header.end());
  return traj;
}

}  // namespace varcoef
