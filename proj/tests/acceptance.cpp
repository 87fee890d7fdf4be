// Acceptance checks: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "varcoef/data_driven.hpp"
#include "varcoef/error.hpp"
#include "varcoef/harmonic.hpp"
#include "varcoef/sdc.hpp"
#include "varcoef/sim.hpp"
#include "varcoef/taylor.hpp"

using namespace varcoef;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

NonlinearModel corpus(const std::string& name) {
  return load_model_file(std::string(VARCOEF_MODELS_DIR) + "/" + name + ".model");
}

const char* const kCorpus[] = {"vdp", "pendulum", "lorenz", "chua"};

Eigen::VectorXd sample(const std::vector<Interval>& box, std::mt19937_64& rng,
                       double margin = 0.0) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i) {
    const double pad = margin * box[i].width();
    v[static_cast<Eigen::Index>(i)] =
        std::uniform_real_distribution<double>(box[i].lo + pad, box[i].hi - pad)(rng);
  }
  return v;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

constexpr std::size_t kGrid = 64;

// Exactness models.
std::vector<NonlinearModel> exactness_models() {
  return {corpus("vdp").with_domain({{0.5, 2.5}, {0.5, 2.5}}),
          corpus("pendulum").with_domain({{0.2, 1.2}, {0.2, 1.2}}, {{0.5, 1.5}}),
          corpus("chua").with_domain({{0.5, 1.5}, {0.5, 1.5}, {0.5, 1.5}})};
}

Outcome exactness() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (const NonlinearModel& model : exactness_models()) {
    const SdcParametrization p = default_parametrization(model, kGrid);
    if (!verify_denominator(model, p, kGrid).passed()) {
      o.pass = false;
      o.detail += model.name() + ": parametrization fails verification; ";
      continue;
    }
    const VarCoeffSystem sys = factorize(model, p);
    for (int k = 0; k < 10000; ++k) {
      const Eigen::VectorXd y = sample(model.state_domain(), rng);
      const Eigen::VectorXd u = sample(model.input_domain(), rng);
      const Eigen::VectorXd f = model.eval_rhs(y, u, 0.0);
      const Eigen::VectorXd r = sys.reconstruct_rhs(y, u, 0.0);
      for (Eigen::Index i = 0; i < f.size(); ++i)
        worst = std::max(worst, std::abs(r[i] - f[i]) / (1 + std::abs(f[i])));
    }
  }
  const double elapsed = seconds_since(start);
  o.pass = o.pass && worst <= 1e-12 && elapsed <= 5.0;
  o.detail += "max |r-f|/(1+|f|) = " + fmt(worst) + " (<= 1e-12), " + fmt(elapsed) + " s (<= 5)";
  return o;
}

Outcome trajectory_identity() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  for (const char* name : kCorpus) {
    const NonlinearModel model = corpus(name);
    const SdcParametrization p = default_parametrization(model, kGrid);
    const VarCoeffSystem sys = factorize(model, p);
    const InputSignal signal = model.input_signal().value_or(InputSignal{});
    const Eigen::VectorXd y0 = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(model.state_count()));
    const Trajectory a = integrate_rk4(original_system(model, DomainPolicy::ignore), y0, signal,
                                       0.0, 10.0, 1e-3, SourceTag::original);
    const Trajectory b = integrate_rk4(factorized_system(sys, DomainPolicy::ignore), y0, signal,
                                       0.0, 10.0, 1e-3, SourceTag::factorized);
    if (a.halt != HaltReason::completed || b.halt != HaltReason::completed) {
      o.pass = false;
      o.detail += std::string(name) + ": halted (" + a.halt_message + b.halt_message + "); ";
      continue;
    }
    const double rel = compare_trajectories(a, b).max_rel_error.maxCoeff();
    o.pass = o.pass && rel <= 1e-9;
    o.detail += std::string(name) + " " + fmt(rel) + ", ";
  }
  const double elapsed = seconds_since(start);
  o.pass = o.pass && elapsed <= 10.0;
  o.detail += "max rel error per model (<= 1e-9), " + fmt(elapsed) + " s (<= 10)";
  return o;
}

Outcome jacobians() {
  Outcome o;
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (const char* name : kCorpus) {
    const NonlinearModel model = corpus(name);
    const auto n = static_cast<Eigen::Index>(model.state_count());
    const auto l = static_cast<Eigen::Index>(model.input_count());
    for (int p = 0; p < 50; ++p) {
      const Eigen::VectorXd y = sample(model.state_domain(), rng, 0.01);
      const Eigen::VectorXd u = sample(model.input_domain(), rng, 0.01);
      const OperatingPoint op{y, u, 0.0};
      const Eigen::MatrixXd B = jacobian_state(model, op).matrix;
      const Eigen::MatrixXd M = jacobian_input(model, op).matrix;
      for (Eigen::Index k = 0; k < n + l; ++k) {
        Eigen::VectorXd yp = y, ym = y, up = u, um = u;
        const double x = k < n ? y[k] : u[k - n];
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        (k < n ? yp[k] : up[k - n]) += h;
        (k < n ? ym[k] : um[k - n]) -= h;
        const Eigen::VectorXd fd = (model.eval_rhs(yp, up, 0.0) - model.eval_rhs(ym, um, 0.0)) / (2 * h);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double exact = k < n ? B(i, k) : M(i, k - n);
          worst = std::max(worst, std::abs(exact - fd[i]) / std::max(1.0, std::abs(exact)));
        }
      }
    }
  }
  o.pass = worst <= 1e-5;
  o.detail = "max relative FD mismatch = " + fmt(worst) + " (<= 1e-5)";
  return o;
}

Outcome taylor_residual() {
  Outcome o;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  double worst_origin = 0.0, lo = INFINITY, hi = 0.0;
  for (const char* name : kCorpus) {
    const NonlinearModel model = corpus(name);
    const auto n = static_cast<Eigen::Index>(model.state_count());
    const auto l = static_cast<Eigen::Index>(model.input_count());
    const Eigen::VectorXd ys = sample(model.state_domain(), rng, 0.1);
    const Eigen::VectorXd us = sample(model.input_domain(), rng, 0.1);
    const LinearModel lin = linearize_taylor(model, {ys, us, 0.0});
    worst_origin = std::max(worst_origin, residual_g(model, lin, ys, us, 0.0).cwiseAbs().maxCoeff());
    for (int r = 0; r < 10; ++r) {
      Eigen::VectorXd d(n + l);
      for (Eigen::Index k = 0; k < n + l; ++k) d[k] = normal(rng);
      d.normalize();
      auto g = [&](double eps) {
        return residual_g(model, lin, ys + eps * d.head(n), us + eps * d.tail(l), 0.0).norm();
      };
      const double ratio = g(1e-2) / g(1e-3);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  o.pass = worst_origin <= 1e-14 && lo >= 50.0 && hi <= 200.0;
  o.detail = "|g(y*)| = " + fmt(worst_origin) + " (<= 1e-14), ratio g(1e-2)/g(1e-3) in [" +
             fmt(lo) + ", " + fmt(hi) + "] (within [50, 200])";
  return o;
}

Outcome describing_function() {
  Outcome o;
  const Expression cubic = parse_expression("y^3");
  double q_err = 0.0, qp = 0.0, n_err = 0.0;
  for (double A : {0.5, 1.0, 2.0, 4.0}) {
    const HarmonicCoefficients c = describing_coefficients(cubic, HarmonicProbe{A, 1.0, 1024});
    const double exact = 0.75 * std::numbers::pi * A * A * A;
    q_err = std::max(q_err, std::abs(c.q - exact) / exact);
    qp = std::max(qp, std::abs(c.q_prime));
    n_err = std::max(n_err, std::abs(c.normalized_q - 0.75 * A * A) / (0.75 * A * A));
  }
  o.pass = q_err <= 1e-8 && qp <= 1e-10 && n_err <= 1e-8;
  o.detail = "rel q error = " + fmt(q_err) + " (<= 1e-8), |q'| = " + fmt(qp) +
             " (<= 1e-10), rel normalized error = " + fmt(n_err) + " (<= 1e-8)";
  return o;
}

TrajectorySamples samples_of(const NonlinearModel& model, const Eigen::VectorXd& y0, double t1,
                             std::size_t every, bool exact) {
  const InputSignal signal = model.input_signal().value_or(InputSignal{});
  const Trajectory tr =
      integrate_rk4(original_system(model, DomainPolicy::ignore), y0, signal, 0.0, t1, 1e-3);
  if (tr.halt != HaltReason::completed) throw Error("sample trajectory halted: " + tr.halt_message);
  TrajectorySamples s;
  if (exact) s.derivs.emplace();
  for (std::size_t k = 0; k < tr.size(); k += every) {
    const Eigen::VectorXd u = model.input_count() ? signal(tr.times[k]) : Eigen::VectorXd(0);
    s.times.push_back(tr.times[k]);
    s.states.push_back(tr.states[k]);
    s.inputs.push_back(u);
    if (exact) s.derivs->push_back(model.eval_rhs(tr.states[k], u, tr.times[k]));
  }
  return s;
}

Outcome data_driven() {
  Outcome o;
  double worst = 0.0;
  for (const char* name : kCorpus) {
    const NonlinearModel model = corpus(name);
    const SdcParametrization p = default_parametrization(model, kGrid);
    const TrajectorySamples s = samples_of(
        model, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(model.state_count())), 10.0, 10, true);
    const EmpiricalCoefficients c = empirical_coefficients(s, p);
    for (std::size_t k = 0; k < s.size(); ++k)
      for (std::size_t i = 0; i < model.state_count(); ++i) {
        if (c.flags[k] & (1u << i)) continue;
        const double closed = gain_K(model, p, i, s.states[k], s.inputs[k], s.times[k]);
        worst = std::max(worst, std::abs(c.K[k][static_cast<Eigen::Index>(i)] - closed) /
                                    std::max(1.0, std::abs(closed)));
      }
  }
  // Estimated derivatives on the pendulum with input-carried denominators.
  const NonlinearModel pend = corpus("pendulum");
  const SdcParametrization pin(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(2, 1));
  auto max_error = [&](std::size_t every) {
    const TrajectorySamples s = samples_of(pend, Eigen::Vector2d(1, 1), 4.0, every, false);
    const EmpiricalCoefficients c = empirical_coefficients(s, pin);
    double e = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
      for (std::size_t i = 0; i < 2; ++i)
        e = std::max(e, std::abs(c.K[k][static_cast<Eigen::Index>(i)] -
                                 gain_K(pend, pin, i, s.states[k], s.inputs[k], s.times[k])));
    return e;
  };
  const double r1 = max_error(40) / max_error(20);
  const double r2 = max_error(20) / max_error(10);
  o.pass = worst <= 1e-12 && r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5;
  o.detail = "exact-derivative K mismatch = " + fmt(worst) + " (<= 1e-12), halving ratios " +
             fmt(r1) + ", " + fmt(r2) + " (within [3.5, 4.5])";
  return o;
}

Outcome denominators() {
  Outcome o;
  const NonlinearModel sign = corpus("sign_changing");
  const SdcParametrization one(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd(1, 0));
  const DenominatorReport bad = verify_denominator(sign, one, kGrid);
  const bool witness = !bad.passed() && bad.witness.size() == 1 &&
                       std::abs(bad.witness[0]) < 2.0 / static_cast<double>(kGrid - 1);
  bool search_fails = false;
  try {
    default_parametrization(sign, kGrid);
  } catch (const ParametrizationError&) {
    search_fails = true;
  }
  bool agree = bad.grid_verdict == bad.corner_verdict && bad.corners_checked;
  bool all_pass = true;
  double min_abs = INFINITY;
  std::vector<NonlinearModel> cases = exactness_models();
  for (const char* name : kCorpus) cases.push_back(corpus(name));
  for (const NonlinearModel& model : cases) {
    const DenominatorReport r = verify_denominator(model, default_parametrization(model, kGrid), kGrid);
    all_pass = all_pass && r.passed() && r.min_abs_value > 0.0;
    agree = agree && r.corners_checked && r.grid_verdict == r.corner_verdict;
    min_abs = std::min(min_abs, r.min_abs_value);
  }
  o.pass = witness && search_fails && all_pass && agree;
  std::ostringstream d;
  d << "sign-changing fails with witness y = " << fmt(bad.witness.empty() ? NAN : bad.witness[0])
    << (search_fails ? " and no default exists" : " BUT a default was found")
    << "; corpus " << (all_pass ? "all pass" : "NOT all pass") << " with min |d| = " << fmt(min_abs)
    << "; corner and grid verdicts " << (agree ? "agree" : "DISAGREE");
  o.detail = d.str();
  return o;
}

Outcome rk4_order() {
  Outcome o;
  const NonlinearModel m = load_model("[states]\ny = [-10, 10]\n[rhs]\ny' = -y\n", "decay");
  auto error = [&](double h) {
    const Trajectory tr = integrate_rk4(original_system(m), Eigen::VectorXd::Ones(1), {}, 0.0, 1.0, h);
    return std::abs(tr.states.back()[0] - std::exp(-1.0));
  };
  const double e1 = error(1e-2), e2 = error(5e-3), e3 = error(2.5e-3);
  const double r1 = e1 / e2, r2 = e2 / e3;
  o.pass = r1 >= 14 && r1 <= 18 && r2 >= 14 && r2 <= 18;
  o.detail = "error ratios " + fmt(r1) + ", " + fmt(r2) + " (within [14, 18])";
  return o;
}

Outcome scaling_covariance() {
  Outcome o;
  std::mt19937_64 rng(9);
  double worst = 0.0;
  std::vector<std::pair<NonlinearModel, SdcParametrization>> cases;
  for (const NonlinearModel& model : exactness_models())
    cases.emplace_back(model, default_parametrization(model, kGrid));
  for (const char* name : {"lorenz"}) {
    const NonlinearModel model = corpus(name);
    cases.emplace_back(model, default_parametrization(model, kGrid));
  }
  // A row mixing states and the input.
  const NonlinearModel pend = exactness_models()[1];
  Eigen::MatrixXd a(2, 2), c(2, 1);
  a << 1, 0, 1, 1;
  c << 0, 1;
  cases.emplace_back(pend, SdcParametrization(a, c));
  for (const auto& [model, p] : cases) {
    const VarCoeffSystem ref = factorize(model, p);
    for (double lambda : {-2.0, 0.5, 10.0}) {
      for (std::size_t row = 0; row < model.state_count(); ++row) {
        const VarCoeffSystem scaled = factorize(model, p.with_row_scaled(row, lambda));
        for (int k = 0; k < 100; ++k) {
          const Eigen::VectorXd y = sample(model.state_domain(), rng);
          const Eigen::VectorXd u = sample(model.input_domain(), rng);
          const FrozenCoefficients x = ref.coefficients(y, u, 0.0);
          const FrozenCoefficients z = scaled.coefficients(y, u, 0.0);
          for (Eigen::Index i = 0; i < x.b.size(); ++i)
            worst = std::max(worst, std::abs(x.b.data()[i] - z.b.data()[i]) /
                                        std::max(1.0, std::abs(x.b.data()[i])));
          for (Eigen::Index i = 0; i < x.m.size(); ++i)
            worst = std::max(worst, std::abs(x.m.data()[i] - z.m.data()[i]) /
                                        std::max(1.0, std::abs(x.m.data()[i])));
        }
      }
    }
  }
  o.pass = worst <= 1e-14;
  o.detail = "max coefficient change = " + fmt(worst) + " (<= 1e-14)";
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"factorization exactness", exactness},
      {"trajectory identity", trajectory_identity},
      {"Jacobian correctness", jacobians},
      {"Taylor residual", taylor_residual},
      {"describing-function coefficients", describing_function},
      {"data-driven consistency", data_driven},
      {"denominator verification", denominators},
      {"RK4 order", rk4_order},
      {"scaling covariance", scaling_covariance},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
