#include "varcoef/sdc.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "varcoef/csv.hpp"

namespace varcoef {

namespace {

constexpr std::size_t kMaxCornerDimension = 20;
constexpr std::size_t kMaxGridSamples = std::size_t{1} << 22;

std::string point_text(const Eigen::VectorXd& y, const Eigen::VectorXd& u) {
  std::string out = "(";
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (k) out += ", ";
    out += csv::format_number(y[k]);
  }
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    out += y.size() + j ? ", " : "";
    out += csv::format_number(u[j]);
  }
  return out + ")";
}

std::vector<double> point_vector(const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& u) {
  std::vector<double> p(y.data(), y.data() + y.size());
  p.insert(p.end(), u.data(), u.data() + u.size());
  return p;
}

struct AffineRow {
  Eigen::VectorXd a;
  Eigen::VectorXd c;

  double operator()(std::span<const double> point) const {
    double d = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k)
      d += a[k] * point[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < c.size(); ++j)
      d += c[j] * point[static_cast<std::size_t>(a.size() + j)];
    return d;
  }
};

bool opposite_signs(double v, double w) {
  return (v > 0.0 && w < 0.0) || (v < 0.0 && w > 0.0);
}

std::vector<Interval> box_of(const NonlinearModel& model) {
  std::vector<Interval> box = model.state_domain();
  box.insert(box.end(), model.input_domain().begin(), model.input_domain().end());
  return box;
}

DenominatorReport verify_affine(const std::vector<Interval>& box,
                                const AffineRow& row, std::size_t equation,
                                std::size_t resolution) {
  if (resolution < 2)
    throw ValidationError("verification grid resolution must be >= 2");
  const std::size_t dims = box.size();

  DenominatorReport report;
  report.witness_equation = equation;

  // Per-axis counts; a degenerate interval contributes one sample.
  std::size_t per_axis = resolution;
  auto total_for = [&](std::size_t r) {
    double total = 1.0;
    for (const auto& iv : box) total *= iv.width() > 0.0 ? static_cast<double>(r) : 1.0;
    return total;
  };
  while (per_axis > 2 && total_for(per_axis) > static_cast<double>(kMaxGridSamples))
    --per_axis;
  report.resolution = per_axis;

  std::vector<std::size_t> counts(dims), strides(dims);
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) {
    counts[d] = box[d].width() > 0.0 ? per_axis : 1;
    strides[d] = total;
    total *= counts[d];
  }

  auto coordinate = [&](std::size_t d, std::size_t idx) {
    if (counts[d] == 1) return box[d].lo;
    if (idx + 1 == counts[d]) return box[d].hi;
    return box[d].lo + box[d].width() * static_cast<double>(idx) /
                           static_cast<double>(counts[d] - 1);
  };

  std::vector<double> values(total);
  std::vector<double> point(dims);
  std::vector<std::size_t> index(dims, 0);
  double min_abs = std::numeric_limits<double>::infinity();
  std::vector<double> argmin(dims);
  bool grid_failed = false;
  std::vector<double> fail_point;
  std::string fail_reason;

  auto point_at = [&](std::size_t flat) {
    std::vector<double> p(dims);
    for (std::size_t d = 0; d < dims; ++d)
      p[d] = coordinate(d, (flat / strides[d]) % counts[d]);
    return p;
  };

  for (std::size_t flat = 0; flat < total; ++flat) {
    for (std::size_t d = 0; d < dims; ++d) point[d] = coordinate(d, index[d]);
    const double v = row(point);
    values[flat] = v;
    if (std::fabs(v) < min_abs) {
      min_abs = std::fabs(v);
      argmin = point;
    }
    if (!grid_failed && std::fabs(v) <= kZeroDenominator) {
      grid_failed = true;
      fail_point = point;
      fail_reason = "denominator vanishes on a grid sample";
    }
    for (std::size_t d = 0; d < dims && !grid_failed; ++d) {
      if (index[d] == 0) continue;
      const double w = values[flat - strides[d]];
      if (opposite_signs(v, w)) {
        grid_failed = true;
        fail_point = std::fabs(v) <= std::fabs(w) ? point : point_at(flat - strides[d]);
        fail_reason = "denominator changes sign between adjacent grid samples";
      }
    }
    for (std::size_t d = 0; d < dims; ++d) {
      if (++index[d] < counts[d]) break;
      index[d] = 0;
    }
  }
  report.samples_checked = total;
  report.min_abs_value = min_abs;
  report.grid_verdict = grid_failed ? Verdict::fail : Verdict::pass;

  // Corners: an affine form attains its extrema over a box at the corners,
  // so a sign-consistent, non-vanishing corner set certifies the whole box.
  bool corner_failed = false;
  std::vector<double> corner_fail_point;
  if (dims <= kMaxCornerDimension) {
    report.corners_checked = true;
    double corner_min = std::numeric_limits<double>::infinity();
    double first = 0.0;
    std::vector<double> corner(dims);
    const std::size_t corners = std::size_t{1} << dims;
    for (std::size_t mask = 0; mask < corners; ++mask) {
      for (std::size_t d = 0; d < dims; ++d)
        corner[d] = (mask >> d) & 1 ? box[d].hi : box[d].lo;
      const double v = row(corner);
      if (mask == 0) first = v;
      if (std::fabs(v) < corner_min) corner_min = std::fabs(v);
      if (!corner_failed &&
          (std::fabs(v) <= kZeroDenominator || opposite_signs(v, first))) {
        corner_failed = true;
        corner_fail_point = corner;
      }
    }
    report.corner_min_abs_value = corner_min;
    report.corner_verdict = corner_failed ? Verdict::fail : Verdict::pass;
    report.samples_checked += corners;
  }

  if (grid_failed) {
    report.verdict = Verdict::fail;
    report.witness = fail_point;
    report.reason = fail_reason;
  } else if (corner_failed) {
    report.verdict = Verdict::fail;
    report.witness = corner_fail_point;
    report.reason = "denominator changes sign or vanishes between box corners";
  } else {
    report.verdict = Verdict::pass;
    report.witness = argmin;
  }
  return report;
}

AffineRow row_of(const SdcParametrization& param, std::size_t i) {
  const auto r = static_cast<Eigen::Index>(i);
  return {param.a().row(r).transpose(), param.c().row(r).transpose()};
}

}  // namespace

// ---------------------------------------------------------------------------

SdcParametrization::SdcParametrization(Eigen::MatrixXd a, Eigen::MatrixXd c)
    : a_(std::move(a)), c_(std::move(c)) {
  if (a_.rows() == 0 || a_.rows() != a_.cols())
    throw ValidationError("parametrization matrix a must be square and non-empty");
  if (c_.rows() != a_.rows()) {
    if (c_.size() == 0) {
      c_.resize(a_.rows(), 0);
    } else {
      throw ValidationError("parametrization matrices a and c need equal row counts");
    }
  }
  if (!a_.allFinite() || !c_.allFinite())
    throw ValidationError("parametrization coefficients must be finite");
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    const bool zero_a = a_.row(i).isZero(0.0);
    const bool zero_c = c_.cols() == 0 || c_.row(i).isZero(0.0);
    if (zero_a && zero_c) {
      throw ValidationError("parametrization row " + std::to_string(i + 1) +
                            " is all zero");
    }
  }
}

SdcParametrization SdcParametrization::with_row_scaled(std::size_t i,
                                                       double factor) const {
  if (factor == 0.0) throw ValidationError("row scale factor must be non-zero");
  Eigen::MatrixXd a = a_;
  Eigen::MatrixXd c = c_;
  a.row(static_cast<Eigen::Index>(i)) *= factor;
  if (c.cols() > 0) c.row(static_cast<Eigen::Index>(i)) *= factor;
  return {std::move(a), std::move(c)};
}

void SdcParametrization::check_against(const NonlinearModel& model) const {
  if (state_count() != model.state_count() ||
      input_count() != model.input_count()) {
    throw ValidationError(
        "parametrization is " + std::to_string(state_count()) + "x(" +
        std::to_string(state_count()) + "+" + std::to_string(input_count()) +
        ") but model '" + model.name() + "' has " +
        std::to_string(model.state_count()) + " states and " +
        std::to_string(model.input_count()) + " inputs");
  }
}

SdcParametrization parse_parametrization(std::string_view text,
                                         std::size_t state_count,
                                         std::size_t input_count) {
  const auto table = csv::parse_table(text, false);
  if (table.rows.size() != state_count) {
    throw ValidationError("parametrization needs " + std::to_string(state_count) +
                          " rows, found " + std::to_string(table.rows.size()));
  }
  const auto n = static_cast<Eigen::Index>(state_count);
  const auto l = static_cast<Eigen::Index>(input_count);
  Eigen::MatrixXd a(n, n), c(n, l);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    if (row.size() != state_count + input_count) {
      throw ValidationError("parametrization row " + std::to_string(i + 1) +
                            " needs " + std::to_string(state_count + input_count) +
                            " values");
    }
    for (Eigen::Index k = 0; k < n; ++k) a(i, k) = row[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < l; ++j)
      c(i, j) = row[static_cast<std::size_t>(n + j)];
  }
  return {std::move(a), std::move(c)};
}

std::string format_parametrization(const SdcParametrization& param) {
  std::string out;
  for (Eigen::Index i = 0; i < param.a().rows(); ++i) {
    std::vector<std::string> fields;
    for (Eigen::Index k = 0; k < param.a().cols(); ++k)
      fields.push_back(csv::format_number(param.a()(i, k)));
    for (Eigen::Index j = 0; j < param.c().cols(); ++j)
      fields.push_back(csv::format_number(param.c()(i, j)));
    out += csv::join(fields) + "\n";
  }
  return out;
}

double denominator(const SdcParametrization& param, std::size_t i,
                   const Eigen::VectorXd& y, const Eigen::VectorXd& u) {
  if (i >= param.state_count()) throw ValidationError("equation index out of range");
  if (static_cast<std::size_t>(y.size()) != param.state_count() ||
      static_cast<std::size_t>(u.size()) != param.input_count()) {
    throw ValidationError("vector sizes do not match the parametrization");
  }
  const auto r = static_cast<Eigen::Index>(i);
  double d = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) d += param.a()(r, k) * y[k];
  for (Eigen::Index j = 0; j < u.size(); ++j) d += param.c()(r, j) * u[j];
  return d;
}

double gain_K(const NonlinearModel& model, const SdcParametrization& param,
              std::size_t i, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
              double t) {
  param.check_against(model);
  const double d = denominator(param, i, y, u);
  if (std::fabs(d) <= kZeroDenominator) {
    throw SingularityError("denominator of equation " + std::to_string(i + 1) +
                               " vanishes at " + point_text(y, u) +
                               ", t = " + csv::format_number(t),
                           i, point_vector(y, u), t);
  }
  return model.eval_component(i, y, u, t) / d;
}

// ---------------------------------------------------------------------------

VarCoeffSystem::VarCoeffSystem(std::shared_ptr<const NonlinearModel> model,
                               SdcParametrization param)
    : model_(std::move(model)), param_(std::move(param)) {
  if (!model_) throw ValidationError("factorization needs a model");
  param_.check_against(*model_);
}

double VarCoeffSystem::gain(std::size_t i, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& u, double t) const {
  return gain_K(*model_, param_, i, y, u, t);
}

Eigen::VectorXd VarCoeffSystem::gains(const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& u, double t) const {
  Eigen::VectorXd K(static_cast<Eigen::Index>(state_count()));
  for (std::size_t i = 0; i < state_count(); ++i)
    K[static_cast<Eigen::Index>(i)] = gain(i, y, u, t);
  return K;
}

FrozenCoefficients VarCoeffSystem::coefficients(const Eigen::VectorXd& y,
                                                const Eigen::VectorXd& u,
                                                double t) const {
  FrozenCoefficients out;
  out.K = gains(y, u, t);
  out.b = param_.a();
  out.m = param_.c();
  for (Eigen::Index i = 0; i < out.K.size(); ++i) {
    out.b.row(i) *= out.K[i];
    if (out.m.cols() > 0) out.m.row(i) *= out.K[i];
  }
  return out;
}

Eigen::MatrixXd VarCoeffSystem::b(const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& u, double t) const {
  return coefficients(y, u, t).b;
}

Eigen::MatrixXd VarCoeffSystem::m(const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& u, double t) const {
  return coefficients(y, u, t).m;
}

Eigen::VectorXd VarCoeffSystem::reconstruct_rhs(const Eigen::VectorXd& y,
                                                const Eigen::VectorXd& u,
                                                double t) const {
  const FrozenCoefficients fc = coefficients(y, u, t);
  Eigen::VectorXd out(static_cast<Eigen::Index>(state_count()));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) acc += fc.b(i, k) * y[k];
    for (Eigen::Index j = 0; j < u.size(); ++j) acc += fc.m(i, j) * u[j];
    out[i] = acc;
  }
  return out;
}

VarCoeffSystem factorize(std::shared_ptr<const NonlinearModel> model,
                         SdcParametrization param) {
  return VarCoeffSystem(std::move(model), std::move(param));
}

VarCoeffSystem factorize(const NonlinearModel& model, SdcParametrization param) {
  return VarCoeffSystem(std::make_shared<const NonlinearModel>(model),
                        std::move(param));
}

Eigen::VectorXd reconstruct_rhs(const VarCoeffSystem& sys,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& u, double t) {
  return sys.reconstruct_rhs(y, u, t);
}

// ---------------------------------------------------------------------------

DenominatorReport verify_denominator_row(const NonlinearModel& model,
                                         const SdcParametrization& param,
                                         std::size_t equation,
                                         std::size_t resolution) {
  param.check_against(model);
  if (equation >= param.state_count())
    throw ValidationError("equation index out of range");
  return verify_affine(box_of(model), row_of(param, equation), equation,
                       resolution);
}

DenominatorReport verify_denominator(const NonlinearModel& model,
                                     const SdcParametrization& param,
                                     std::size_t resolution) {
  param.check_against(model);
  const auto box = box_of(model);
  std::vector<DenominatorReport> rows;
  for (std::size_t i = 0; i < param.state_count(); ++i)
    rows.push_back(verify_affine(box, row_of(param, i), i, resolution));

  // Witness: first failing equation, otherwise the overall minimum.
  std::size_t pick = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].passed()) {
      pick = i;
      break;
    }
    if (rows[i].min_abs_value < rows[pick].min_abs_value) pick = i;
  }
  DenominatorReport overall = rows[pick];
  overall.samples_checked = 0;
  for (const auto& r : rows) {
    overall.samples_checked += r.samples_checked;
    overall.min_abs_value = std::min(overall.min_abs_value, r.min_abs_value);
    overall.corner_min_abs_value =
        std::min(overall.corner_min_abs_value, r.corner_min_abs_value);
    if (!r.passed()) overall.verdict = Verdict::fail;
    if (r.grid_verdict == Verdict::fail) overall.grid_verdict = Verdict::fail;
    if (r.corner_verdict == Verdict::fail) overall.corner_verdict = Verdict::fail;
  }
  return overall;
}

SdcParametrization default_parametrization(const NonlinearModel& model,
                                           std::size_t resolution) {
  const auto n = static_cast<Eigen::Index>(model.state_count());
  const auto l = static_cast<Eigen::Index>(model.input_count());
  const auto box = box_of(model);

  Eigen::VectorXd state_signs(n);
  for (Eigen::Index k = 0; k < n; ++k)
    state_signs[k] =
        model.state_domain()[static_cast<std::size_t>(k)].midpoint() >= 0.0 ? 1.0
                                                                            : -1.0;
  bool inputs_definite = l > 0;
  Eigen::VectorXd input_signs(l);
  for (Eigen::Index j = 0; j < l; ++j) {
    const auto& iv = model.input_domain()[static_cast<std::size_t>(j)];
    if (iv.lo > 0.0) {
      input_signs[j] = 1.0;
    } else if (iv.hi < 0.0) {
      input_signs[j] = -1.0;
    } else {
      inputs_definite = false;
    }
  }

  Eigen::MatrixXd a(n, n), c(n, l);
  DenominatorReport last_failure;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<AffineRow> candidates;
    const Eigen::VectorXd c_zero = Eigen::VectorXd::Zero(l);
    std::vector<Eigen::VectorXd> state_rows{Eigen::VectorXd::Unit(n, i)};
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != i) state_rows.push_back(Eigen::VectorXd::Unit(n, k));
    state_rows.push_back(Eigen::VectorXd::Ones(n));
    state_rows.push_back(state_signs);
    for (const auto& row : state_rows) candidates.push_back({row, c_zero});
    if (inputs_definite) {
      candidates.push_back({Eigen::VectorXd::Zero(n), input_signs});
      for (const auto& row : state_rows) candidates.push_back({row, input_signs});
    }

    bool found = false;
    for (std::size_t ci = 0; ci < candidates.size() && !found; ++ci) {
      DenominatorReport r = verify_affine(box, candidates[ci],
                                          static_cast<std::size_t>(i), resolution);
      if (r.passed()) {
        a.row(i) = candidates[ci].a.transpose();
        c.row(i) = candidates[ci].c.transpose();
        found = true;
      } else if (ci == 0) {
        last_failure = std::move(r);
      }
    }
    if (!found) {
      std::string witness;
      for (std::size_t d = 0; d < last_failure.witness.size(); ++d) {
        witness += d ? ", " : "";
        witness += csv::format_number(last_failure.witness[d]);
      }
      throw ParametrizationError(
          "no default parametrization row for equation " + std::to_string(i + 1) +
          " of '" + model.name() + "' keeps the denominator non-zero over the "
          "domain (one-hot witness at (" + witness + ")); supply a "
          "parametrization file");
    }
  }
  return {std::move(a), std::move(c)};
}

}  // namespace varcoef
