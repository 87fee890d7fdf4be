#include "varcoef/cli.hpp"

#include <CLI11.hpp>

#include <memory>
#include <ostream>
#include <sstream>

#include "varcoef/csv.hpp"
#include "varcoef/data_driven.hpp"
#include "varcoef/harmonic.hpp"
#include "varcoef/model.hpp"
#include "varcoef/sdc.hpp"
#include "varcoef/sim.hpp"
#include "varcoef/taylor.hpp"

namespace varcoef::cli {

namespace {

struct RunConfig {
  std::string subcommand;
  std::string model_path;
  std::string param_path;
  std::string param_out;
  std::string out_path;
  std::size_t grid = 64;
  // points
  std::string at;
  std::string y_star;
  std::string u_star;
  std::string y0;
  double t = 0.0;
  // harmonic probe
  std::string state;
  std::string expr;
  double amplitude = 1.0;
  double omega = 1.0;
  int panels = 1024;
  // integration
  bool factorized = false;
  bool ignore_domain = false;
  double t0 = 0.0;
  double t1 = 0.0;
  double h = 0.0;
  // files
  std::string trajectory;
  std::vector<std::string> compare_files;
};

/// Result of a subcommand: text for the output sink plus its exit status.
struct Outcome {
  std::string text;
  int status = kExitOk;
};

class DenominatorFailure : public Error {
 public:
  DenominatorFailure(std::string message, DenominatorReport report)
      : Error(std::move(message)), report_(std::move(report)) {}
  const DenominatorReport& report() const { return report_; }

 private:
  DenominatorReport report_;
};

std::string provenance(const RunConfig& cfg) {
  return "# produced-by=varcoef " + cfg.subcommand +
         ", model=" + (cfg.model_path.empty() ? "-" : cfg.model_path) +
         ", params=" + (cfg.param_path.empty() ? "default" : cfg.param_path) +
         "\n";
}

/// "y1=1,y2=2" (any order, all names) or "1,2" (declared order).
Eigen::VectorXd parse_point(const std::string& text,
                            const std::vector<std::string>& names,
                            const std::string& what) {
  const auto n = static_cast<Eigen::Index>(names.size());
  Eigen::VectorXd v(n);
  if (names.empty()) {
    if (!csv::trim(text).empty())
      throw ValidationError(what + " given but the model declares none");
    return v;
  }
  const auto fields = csv::split(text);
  if (fields.size() != names.size()) {
    throw ValidationError(what + " needs " + std::to_string(names.size()) +
                          " values, got " + std::to_string(fields.size()));
  }
  const bool named = fields.front().find('=') != std::string::npos;
  std::vector<bool> seen(names.size(), false);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!named) {
      v[static_cast<Eigen::Index>(i)] = csv::parse_number(fields[i]);
      continue;
    }
    const auto eq = fields[i].find('=');
    if (eq == std::string::npos)
      throw ValidationError(what + ": mix of named and positional values");
    const std::string key(csv::trim(std::string_view(fields[i]).substr(0, eq)));
    std::size_t idx = names.size();
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == key) idx = k;
    if (idx == names.size()) throw ValidationError(what + ": unknown name '" + key + "'");
    if (seen[idx]) throw ValidationError(what + ": '" + key + "' given twice");
    seen[idx] = true;
    v[static_cast<Eigen::Index>(idx)] =
        csv::parse_number(std::string_view(fields[i]).substr(eq + 1));
  }
  return v;
}

std::string join_numbers(const std::vector<double>& values) {
  std::vector<std::string> f;
  for (double v : values) f.push_back(csv::format_number(v));
  return csv::join(f);
}

std::string verdict_text(Verdict v) { return v == Verdict::pass ? "pass" : "fail"; }

std::string format_report(const DenominatorReport& r, const NonlinearModel& model) {
  std::vector<std::string> header{"verdict",        "min_abs_value",
                                  "samples_checked", "resolution",
                                  "grid_verdict",    "corner_verdict",
                                  "corner_min_abs_value", "witness_equation"};
  for (const auto& s : model.state_names()) header.push_back("witness_" + s);
  for (const auto& s : model.input_names()) header.push_back("witness_" + s);
  std::vector<std::string> row{
      verdict_text(r.verdict),
      csv::format_number(r.min_abs_value),
      std::to_string(r.samples_checked),
      std::to_string(r.resolution),
      verdict_text(r.grid_verdict),
      r.corners_checked ? verdict_text(r.corner_verdict) : "unchecked",
      csv::format_number(r.corner_min_abs_value),
      std::to_string(r.witness_equation + 1)};
  for (double w : r.witness) row.push_back(csv::format_number(w));
  return csv::join(header) + "\n" + csv::join(row) + "\n";
}

std::string witness_text(const DenominatorReport& r, const NonlinearModel& model) {
  std::string out = "equation " + std::to_string(r.witness_equation + 1) + " at (";
  std::vector<std::string> names = model.state_names();
  names.insert(names.end(), model.input_names().begin(), model.input_names().end());
  for (std::size_t i = 0; i < r.witness.size() && i < names.size(); ++i) {
    out += i ? ", " : "";
    out += names[i] + "=" + csv::format_number(r.witness[i]);
  }
  return out + ")";
}

NonlinearModel require_model(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ValidationError("--model is required");
  return load_model_file(cfg.model_path);
}

/// Supplied parametrization (verified) or the default search.
SdcParametrization choose_parametrization(const RunConfig& cfg,
                                          const NonlinearModel& model,
                                          DenominatorReport& report) {
  if (!cfg.param_path.empty()) {
    SdcParametrization p = parse_parametrization(
        csv::read_file(cfg.param_path), model.state_count(), model.input_count());
    report = verify_denominator(model, p, cfg.grid);
    if (!report.passed()) {
      throw DenominatorFailure("parametrization '" + cfg.param_path +
                                   "' fails denominator verification: " +
                                   report.reason,
                               report);
    }
    return p;
  }
  SdcParametrization p = default_parametrization(model, cfg.grid);
  report = verify_denominator(model, p, cfg.grid);
  return p;
}

InputSignal signal_of(const NonlinearModel& model) {
  if (model.input_count() == 0) return {};
  if (!model.input_signal()) {
    throw ValidationError("model '" + model.name() +
                          "' has inputs but no [input_signal] section");
  }
  return *model.input_signal();
}

// ---------------------------------------------------------------------------

Outcome cmd_factor(const RunConfig& cfg) {
  const NonlinearModel model = require_model(cfg);
  DenominatorReport report;
  const SdcParametrization param = choose_parametrization(cfg, model, report);
  std::string out = provenance(cfg);
  out += "# parametrization\n" + format_parametrization(param);
  out += "\n# denominator_report\n" + format_report(report, model);
  if (!cfg.at.empty()) {
    // Accept "y1=..,u1=.." covering states and inputs together.
    std::vector<std::string> names = model.state_names();
    names.insert(names.end(), model.input_names().begin(), model.input_names().end());
    const Eigen::VectorXd point = parse_point(cfg.at, names, "--at");
    const Eigen::VectorXd y = point.head(static_cast<Eigen::Index>(model.state_count()));
    const Eigen::VectorXd u = point.tail(static_cast<Eigen::Index>(model.input_count()));
    const VarCoeffSystem sys = factorize(model, param);
    const FrozenCoefficients fc = sys.coefficients(y, u, cfg.t);
    out += "\n# coefficients at " + cfg.at + ", t=" + csv::format_number(cfg.t) + "\n";
    out += "coefficient,value\n";
    const Eigen::Index n = fc.K.size();
    for (Eigen::Index i = 0; i < n; ++i)
      out += "K_" + std::to_string(i + 1) + "," + csv::format_number(fc.K[i]) + "\n";
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k)
        out += "b_" + std::to_string(i + 1) + std::to_string(k + 1) + "," +
               csv::format_number(fc.b(i, k)) + "\n";
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < fc.m.cols(); ++j)
        out += "m_" + std::to_string(i + 1) + std::to_string(j + 1) + "," +
               csv::format_number(fc.m(i, j)) + "\n";
  }
  if (!cfg.param_out.empty())
    csv::write_file_atomic(cfg.param_out, format_parametrization(param));
  return {out, kExitOk};
}

Outcome cmd_check_denominator(const RunConfig& cfg) {
  const NonlinearModel model = require_model(cfg);
  SdcParametrization param = [&] {
    if (!cfg.param_path.empty())
      return parse_parametrization(csv::read_file(cfg.param_path),
                                   model.state_count(), model.input_count());
    return default_parametrization(model, cfg.grid);
  }();
  const DenominatorReport report = verify_denominator(model, param, cfg.grid);
  if (!report.passed()) throw DenominatorFailure(report.reason, report);
  return {provenance(cfg) + format_report(report, model), kExitOk};
}

Outcome cmd_linearize(const RunConfig& cfg) {
  const NonlinearModel model = require_model(cfg);
  if (cfg.y_star.empty()) throw ValidationError("--y-star is required");
  if (model.input_count() > 0 && cfg.u_star.empty())
    throw ValidationError("--u-star is required for a model with inputs");
  OperatingPoint point{parse_point(cfg.y_star, model.state_names(), "--y-star"),
                       parse_point(cfg.u_star, model.input_names(), "--u-star"),
                       cfg.t};
  const LinearModel lin = linearize_taylor(model, point);

  auto block = [&](const Eigen::MatrixXd& M, const std::vector<std::string>& cols) {
    std::vector<std::string> header{"equation"};
    header.insert(header.end(), cols.begin(), cols.end());
    std::string s = csv::join(header) + "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      std::vector<std::string> row{model.state_names()[static_cast<std::size_t>(i)] + "'"};
      for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(csv::format_number(M(i, k)));
      s += csv::join(row) + "\n";
    }
    return s;
  };
  std::string out = provenance(cfg);
  out += "# B\n" + block(lin.B, model.state_names());
  out += "\n# m\n" + block(lin.m, model.input_names());
  return {out, kExitOk};
}

Outcome cmd_describe(const RunConfig& cfg) {
  Expression f;
  std::string variable;
  if (!cfg.expr.empty()) {
    f = parse_expression(cfg.expr);
  } else {
    const NonlinearModel model = require_model(cfg);
    if (cfg.state.empty()) throw ValidationError("--state or --expr is required");
    f = model.rhs()[model.state_index(cfg.state)];
  }
  const HarmonicProbe probe{cfg.amplitude, cfg.omega, cfg.panels};
  const HarmonicCoefficients c = describing_coefficients(f, probe);
  std::string out = provenance(cfg);
  out += "A,omega,q,q_prime,normalized_q,normalized_q_prime\n";
  out += join_numbers({cfg.amplitude, cfg.omega, c.q, c.q_prime, c.normalized_q,
                       c.normalized_q_prime}) +
         "\n";
  return {out, kExitOk};
}

Outcome cmd_simulate(const RunConfig& cfg, std::ostream& err) {
  const NonlinearModel model = require_model(cfg);
  if (cfg.y0.empty()) throw ValidationError("--y0 is required");
  const Eigen::VectorXd y0 = parse_point(cfg.y0, model.state_names(), "--y0");
  const InputSignal signal = signal_of(model);
  const DomainPolicy policy =
      cfg.ignore_domain ? DomainPolicy::ignore : DomainPolicy::enforce;
  Trajectory traj;
  if (cfg.factorized) {
    DenominatorReport report;
    const SdcParametrization param = choose_parametrization(cfg, model, report);
    traj = integrate_rk4(factorized_system(factorize(model, param), policy), y0, signal,
                         cfg.t0, cfg.t1, cfg.h, SourceTag::factorized);
  } else {
    if (!cfg.param_path.empty())
      throw ValidationError("--param requires --factorized");
    traj = integrate_rk4(original_system(model, policy), y0, signal, cfg.t0, cfg.t1,
                         cfg.h, SourceTag::original);
  }
  switch (traj.halt) {
    case HaltReason::completed:
      break;
    case HaltReason::domain_exit:
      err << "warning: " << traj.halt_message << "; trajectory truncated\n";
      break;
    default:
      err << "error: integration halted: " << traj.halt_message << "\n";
      return {{}, kExitSingular};
  }
  std::string comment = provenance(cfg).substr(2);
  comment.pop_back();
  comment += ", source=" + std::string(to_string(traj.source)) +
             ", halt=" + std::string(to_string(traj.halt));
  return {format_trajectory(traj, model.state_names(), comment), kExitOk};
}

Outcome cmd_compare(const RunConfig& cfg) {
  if (cfg.compare_files.size() != 2)
    throw ValidationError("compare needs exactly two trajectory files");
  std::vector<std::string> names_a, names_b;
  const Trajectory a = parse_trajectory(csv::read_file(cfg.compare_files[0]), &names_a);
  const Trajectory b = parse_trajectory(csv::read_file(cfg.compare_files[1]), &names_b);
  if (names_a != names_b) throw ValidationError("trajectory headers differ");
  const ComparisonReport r = compare_trajectories(a, b);
  std::vector<std::string> header;
  std::vector<double> row;
  auto add = [&](const std::string& prefix, const Eigen::VectorXd& v) {
    for (std::size_t i = 0; i < names_a.size(); ++i) {
      header.push_back(prefix + names_a[i]);
      row.push_back(v[static_cast<Eigen::Index>(i)]);
    }
  };
  add("max_abs_", r.max_abs_error);
  add("max_rel_", r.max_rel_error);
  add("time_of_max_", r.time_of_max);
  add("rms_", r.rms_error);
  std::string out = "# produced-by=varcoef compare, a=" + cfg.compare_files[0] +
                    ", b=" + cfg.compare_files[1] + "\n";
  out += csv::join(header) + "\n" + join_numbers(row) + "\n";
  return {out, kExitOk};
}

Outcome cmd_empirical(const RunConfig& cfg) {
  if (cfg.trajectory.empty()) throw ValidationError("--trajectory is required");
  std::optional<NonlinearModel> model;
  if (!cfg.model_path.empty()) model = load_model_file(cfg.model_path);
  std::optional<SdcParametrization> param;
  if (!cfg.param_path.empty()) {
    const std::string text = csv::read_file(cfg.param_path);
    std::size_t n = 0, l = 0;
    if (model) {
      n = model->state_count();
      l = model->input_count();
    } else {
      const auto table = csv::parse_table(text, false);
      if (table.rows.empty()) throw ValidationError("empty parametrization file");
      n = table.rows.size();
      if (table.rows.front().size() < n)
        throw ValidationError("parametrization rows are shorter than the row count");
      l = table.rows.front().size() - n;
    }
    param = parse_parametrization(text, n, l);
  } else if (model) {
    param = default_parametrization(*model, cfg.grid);
  } else {
    throw ValidationError("empirical needs --param or --model");
  }
  const TrajectorySamples samples = parse_samples(
      csv::read_file(cfg.trajectory), param->state_count(), param->input_count());
  const EmpiricalCoefficients coeffs = empirical_coefficients(samples, *param);
  return {provenance(cfg) + format_coefficients(coeffs), kExitOk};
}

Outcome cmd_eigen(const RunConfig& cfg) {
  const NonlinearModel model = require_model(cfg);
  if (cfg.trajectory.empty()) throw ValidationError("--trajectory is required");
  DenominatorReport report;
  const SdcParametrization param = choose_parametrization(cfg, model, report);
  std::vector<std::string> names;
  const Trajectory traj = parse_trajectory(csv::read_file(cfg.trajectory), &names);
  if (names != model.state_names())
    throw ValidationError("trajectory columns do not match the model states");
  const auto samples =
      frozen_eigenvalues(factorize(model, param), traj, signal_of(model));
  std::vector<std::string> header{"t"};
  for (std::size_t i = 0; i < model.state_count(); ++i) {
    header.push_back("re" + std::to_string(i + 1));
    header.push_back("im" + std::to_string(i + 1));
  }
  std::string out = provenance(cfg) + csv::join(header) + "\n";
  for (const auto& s : samples) {
    std::vector<double> row{s.t};
    for (const auto& z : s.values) {
      row.push_back(z.real());
      row.push_back(z.imag());
    }
    out += join_numbers(row) + "\n";
  }
  return {out, kExitOk};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Variable-coefficient linear forms of nonlinear ODE models"};
  app.name("varcoef");
  app.require_subcommand(1);

  auto add_model = [&](CLI::App* sub, bool required = true) {
    auto* opt = sub->add_option("--model", cfg.model_path, "Model file");
    if (required) opt->required();
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out_path, "Output file (default: stdout)");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid", cfg.grid, "Verification grid points per axis")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  };

  auto* factor = app.add_subcommand("factor", "Choose and verify a parametrization; "
                                              "optionally print b, m, K at a point");
  add_model(factor);
  factor->add_option("--param", cfg.param_path, "Parametrization CSV (n rows of n+l)");
  add_grid(factor);
  factor->add_option("--at", cfg.at, "Point y1=..,u1=.. for the coefficient table");
  factor->add_option("--t", cfg.t, "Time for --at");
  factor->add_option("--param-out", cfg.param_out, "Write the parametrization alone");
  add_out(factor);

  auto* check = app.add_subcommand("check-denominator",
                                   "Verify a parametrization's denominators");
  add_model(check);
  check->add_option("--param", cfg.param_path, "Parametrization CSV");
  add_grid(check);
  add_out(check);

  auto* linearize = app.add_subcommand("linearize", "Jacobians B and m at a point");
  add_model(linearize);
  linearize->add_option("--y-star", cfg.y_star, "Operating state")->required();
  linearize->add_option("--u-star", cfg.u_star, "Operating input");
  linearize->add_option("--t", cfg.t, "Time");
  add_out(linearize);

  auto* describe = app.add_subcommand("describe", "Harmonic-linearization coefficients");
  add_model(describe, false);
  describe->add_option("--state", cfg.state, "Equation whose rhs is probed");
  describe->add_option("--expr", cfg.expr, "Probe this expression instead");
  describe->add_option("--amplitude", cfg.amplitude, "Probe amplitude A")->required();
  describe->add_option("--omega", cfg.omega, "Probe frequency")->required();
  describe->add_option("--panels", cfg.panels, "Simpson panels (even, >= 8)");
  add_out(describe);

  auto* simulate = app.add_subcommand("simulate", "Fixed-step RK4 trajectory");
  simulate->set_help_flag("--help", "Print this help message and exit");
  add_model(simulate);
  simulate->add_flag("--factorized", cfg.factorized, "Integrate the factorized form");
  simulate->add_flag("--ignore-domain", cfg.ignore_domain,
                     "Keep integrating outside the domain box");
  simulate->add_option("--param", cfg.param_path, "Parametrization CSV");
  add_grid(simulate);
  simulate->add_option("--y0", cfg.y0, "Initial state")->required();
  simulate->add_option("--t0", cfg.t0, "Start time");
  simulate->add_option("--t1", cfg.t1, "End time")->required();
  simulate->add_option("--h", cfg.h, "Step")->required();
  add_out(simulate);

  auto* compare = app.add_subcommand("compare", "Error report of two trajectories");
  compare->add_option("files", cfg.compare_files, "Two trajectory CSVs")
      ->required()
      ->expected(2);
  add_out(compare);

  auto* empirical = app.add_subcommand("empirical",
                                       "Coefficients from a sampled trajectory");
  add_model(empirical, false);
  empirical->add_option("--param", cfg.param_path, "Parametrization CSV");
  empirical->add_option("--trajectory", cfg.trajectory, "Trajectory CSV")->required();
  add_grid(empirical);
  add_out(empirical);

  auto* eigen = app.add_subcommand("eigen", "Frozen-coefficient eigenvalues");
  add_model(eigen);
  eigen->add_option("--param", cfg.param_path, "Parametrization CSV");
  eigen->add_option("--trajectory", cfg.trajectory, "Trajectory CSV")->required();
  add_grid(eigen);
  add_out(eigen);

  std::vector<const char*> argv{"varcoef"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();

  try {
    Outcome result;
    if (cfg.subcommand == "factor") result = cmd_factor(cfg);
    else if (cfg.subcommand == "check-denominator") result = cmd_check_denominator(cfg);
    else if (cfg.subcommand == "linearize") result = cmd_linearize(cfg);
    else if (cfg.subcommand == "describe") result = cmd_describe(cfg);
    else if (cfg.subcommand == "simulate") result = cmd_simulate(cfg, err);
    else if (cfg.subcommand == "compare") result = cmd_compare(cfg);
    else if (cfg.subcommand == "empirical") result = cmd_empirical(cfg);
    else if (cfg.subcommand == "eigen") result = cmd_eigen(cfg);
    if (result.status != kExitOk) return result.status;
    if (cfg.out_path.empty()) {
      out << result.text;
    } else {
      csv::write_file_atomic(cfg.out_path, result.text);
    }
    return kExitOk;
  } catch (const DenominatorFailure& e) {
    err << "error: " << e.what() << "\n";
    err << "witness: " << witness_text(e.report(), load_model_file(cfg.model_path))
        << ", |denominator| = " << csv::format_number(e.report().min_abs_value)
        << "\n";
    return kExitSingular;
  } catch (const SingularityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const ParametrizationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EvaluationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace varcoef::cli
