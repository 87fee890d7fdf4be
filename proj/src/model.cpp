#include "varcoef/model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <utility>

#include "varcoef/csv.hpp"

namespace varcoef {

namespace {

const std::string kTime(kTimeSymbol);

void check_name(const std::string& name, const std::string& what) {
  if (!is_valid_identifier(name)) {
    throw ValidationError("invalid " + what + " name '" + name + "'");
  }
  if (name == kTimeSymbol) {
    throw ValidationError("'" + name + "' is reserved for time");
  }
}

void check_interval(const Interval& iv, const std::string& name) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
    throw ValidationError("domain of '" + name + "' must have finite bounds");
  }
  if (iv.lo > iv.hi) {
    throw ValidationError("domain of '" + name + "' has lo > hi");
  }
}

}  // namespace

InputSignal::InputSignal(std::vector<Expression> components)
    : components_(std::move(components)) {
  const std::vector<std::string> symbols{kTime};
  bound_.reserve(components_.size());
  for (const auto& c : components_) {
    for (const auto& v : c.variables()) {
      if (v != kTimeSymbol) {
        throw ValidationError("input signal may only reference t, found '" +
                              v + "'");
      }
    }
    bound_.emplace_back(c, symbols);
  }
}

Eigen::VectorXd InputSignal::operator()(double t) const {
  Eigen::VectorXd u(static_cast<Eigen::Index>(bound_.size()));
  const double slot[1] = {t};
  for (std::size_t j = 0; j < bound_.size(); ++j) {
    u[static_cast<Eigen::Index>(j)] = bound_[j](slot);
  }
  return u;
}

InputSignal InputSignal::constant(const Eigen::VectorXd& value) {
  std::vector<Expression> components;
  for (Eigen::Index j = 0; j < value.size(); ++j)
    components.push_back(Expression::constant(value[j]));
  return InputSignal(std::move(components));
}

// ---------------------------------------------------------------------------

NonlinearModel::NonlinearModel(Declaration decl) : decl_(std::move(decl)) {
  const std::size_t n = decl_.state_names.size();
  const std::size_t l = decl_.input_names.size();
  if (n == 0) throw ValidationError("model must declare at least one state");
  if (decl_.rhs.size() != n) {
    throw ValidationError("model has " + std::to_string(n) + " states but " +
                          std::to_string(decl_.rhs.size()) + " rhs entries");
  }
  if (decl_.state_domain.size() != n) {
    throw ValidationError("missing domain for some declared state");
  }
  if (decl_.input_domain.size() != l) {
    throw ValidationError("missing domain for some declared input");
  }

  std::set<std::string> seen;
  for (const auto& s : decl_.state_names) {
    check_name(s, "state");
    if (!seen.insert(s).second) throw ValidationError("duplicate name '" + s + "'");
  }
  for (const auto& s : decl_.input_names) {
    check_name(s, "input");
    if (!seen.insert(s).second) throw ValidationError("duplicate name '" + s + "'");
  }
  for (std::size_t i = 0; i < n; ++i)
    check_interval(decl_.state_domain[i], decl_.state_names[i]);
  for (std::size_t j = 0; j < l; ++j)
    check_interval(decl_.input_domain[j], decl_.input_names[j]);

  symbols_ = decl_.state_names;
  symbols_.insert(symbols_.end(), decl_.input_names.begin(),
                  decl_.input_names.end());
  symbols_.push_back(kTime);

  bound_rhs_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& v : decl_.rhs[i].variables()) {
      if (std::find(symbols_.begin(), symbols_.end(), v) == symbols_.end()) {
        throw ValidationError("undeclared variable '" + v + "' in rhs of " +
                              decl_.state_names[i] + "'");
      }
    }
    bound_rhs_.emplace_back(decl_.rhs[i], symbols_);
  }

  if (decl_.input_signal && decl_.input_signal->size() != l) {
    throw ValidationError("input signal has " +
                          std::to_string(decl_.input_signal->size()) +
                          " components, model has " + std::to_string(l) +
                          " inputs");
  }
}

void NonlinearModel::check_sizes(const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& u) const {
  if (static_cast<std::size_t>(y.size()) != state_count() ||
      static_cast<std::size_t>(u.size()) != input_count()) {
    throw ValidationError("vector sizes (" + std::to_string(y.size()) + ", " +
                          std::to_string(u.size()) + ") do not match model (" +
                          std::to_string(state_count()) + ", " +
                          std::to_string(input_count()) + ")");
  }
}

std::vector<double> NonlinearModel::slots(const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& u,
                                          double t) const {
  check_sizes(y, u);
  std::vector<double> s(symbols_.size());
  std::copy(y.data(), y.data() + y.size(), s.begin());
  std::copy(u.data(), u.data() + u.size(), s.begin() + y.size());
  s.back() = t;
  return s;
}

Eigen::VectorXd NonlinearModel::eval_rhs(const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& u,
                                         double t) const {
  const auto s = slots(y, u, t);
  Eigen::VectorXd dy(static_cast<Eigen::Index>(state_count()));
  for (std::size_t i = 0; i < bound_rhs_.size(); ++i)
    dy[static_cast<Eigen::Index>(i)] = bound_rhs_[i](s);
  return dy;
}

double NonlinearModel::eval_component(std::size_t i, const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& u,
                                      double t) const {
  if (i >= state_count()) throw ValidationError("equation index out of range");
  return bound_rhs_[i](slots(y, u, t));
}

bool NonlinearModel::state_in_domain(const Eigen::VectorXd& y) const {
  if (static_cast<std::size_t>(y.size()) != state_count()) return false;
  for (std::size_t i = 0; i < state_count(); ++i)
    if (!decl_.state_domain[i].contains(y[static_cast<Eigen::Index>(i)]))
      return false;
  return true;
}

bool NonlinearModel::input_in_domain(const Eigen::VectorXd& u) const {
  if (static_cast<std::size_t>(u.size()) != input_count()) return false;
  for (std::size_t j = 0; j < input_count(); ++j)
    if (!decl_.input_domain[j].contains(u[static_cast<Eigen::Index>(j)]))
      return false;
  return true;
}

bool NonlinearModel::in_domain(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& u) const {
  return state_in_domain(y) && input_in_domain(u);
}

NonlinearModel NonlinearModel::with_domain(
    std::vector<Interval> state_domain,
    std::vector<Interval> input_domain) const {
  Declaration d = decl_;
  d.state_domain = std::move(state_domain);
  d.input_domain = std::move(input_domain);
  return NonlinearModel(std::move(d));
}

NonlinearModel NonlinearModel::with_domain(
    std::vector<Interval> state_domain) const {
  return with_domain(std::move(state_domain), decl_.input_domain);
}

std::size_t NonlinearModel::state_index(std::string_view name) const {
  for (std::size_t i = 0; i < state_count(); ++i)
    if (decl_.state_names[i] == name) return i;
  throw ValidationError("unknown state '" + std::string(name) + "'");
}

std::size_t NonlinearModel::input_index(std::string_view name) const {
  for (std::size_t j = 0; j < input_count(); ++j)
    if (decl_.input_names[j] == name) return j;
  throw ValidationError("unknown input '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Model file loader

namespace {

struct Line {
  std::size_t number;
  std::string text;
};

[[noreturn]] void fail_at(const Line& line, const std::string& what) {
  throw ValidationError("line " + std::to_string(line.number) + ": " + what);
}

std::pair<std::string, std::string> split_assignment(const Line& line) {
  const auto eq = line.text.find('=');
  if (eq == std::string::npos) fail_at(line, "expected 'name = ...'");
  return {std::string(csv::trim(std::string_view(line.text).substr(0, eq))),
          std::string(csv::trim(std::string_view(line.text).substr(eq + 1)))};
}

Expression parse_at(const Line& line, const std::string& text) {
  try {
    return parse_expression(text);
  } catch (const ParseError& e) {
    fail_at(line, e.what());
  }
}

double constant_at(const Line& line, const std::string& text,
                   const Parameters& params) {
  const Expression e = substitute(parse_at(line, text), params);
  const auto vars = e.variables();
  if (!vars.empty()) {
    fail_at(line, "undeclared name '" + *vars.begin() + "' in constant");
  }
  try {
    return evaluate(e, {});
  } catch (const EvaluationError& err) {
    fail_at(line, err.what());
  }
}

Interval interval_at(const Line& line, const std::string& text,
                     const Parameters& params) {
  const auto body = csv::trim(text);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
    fail_at(line, "expected an interval '[lo, hi]'");
  }
  const auto parts = csv::split(body.substr(1, body.size() - 2));
  if (parts.size() != 2) fail_at(line, "interval needs exactly two bounds");
  return {constant_at(line, parts[0], params), constant_at(line, parts[1], params)};
}

}  // namespace

NonlinearModel load_model(std::string_view document, std::string name) {
  static const std::set<std::string, std::less<>> kSections{
      "states", "inputs", "params", "rhs", "input_signal"};
  std::map<std::string, std::vector<Line>, std::less<>> sections;
  std::string current;

  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= document.size()) {
    auto end = document.find('\n', start);
    if (end == std::string_view::npos) end = document.size();
    std::string_view raw = document.substr(start, end - start);
    start = end + 1;
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    const auto text = csv::trim(raw);
    if (text.empty()) continue;
    const Line line{number, std::string(text)};
    if (text.front() == '[' && text.back() == ']' &&
        text.find('=') == std::string_view::npos) {
      current = std::string(csv::trim(text.substr(1, text.size() - 2)));
      if (!kSections.contains(current)) fail_at(line, "unknown section [" + current + "]");
      if (sections.contains(current)) fail_at(line, "duplicate section [" + current + "]");
      sections[current];
      continue;
    }
    if (current.empty()) fail_at(line, "content before the first section");
    sections[current].push_back(line);
  }

  auto lines_of = [&](std::string_view s) -> const std::vector<Line>& {
    static const std::vector<Line> kEmpty;
    auto it = sections.find(s);
    return it == sections.end() ? kEmpty : it->second;
  };

  NonlinearModel::Declaration decl;
  decl.name = std::move(name);

  for (const auto& line : lines_of("params")) {
    auto [key, value] = split_assignment(line);
    if (!is_valid_identifier(key) || key == kTimeSymbol)
      fail_at(line, "invalid parameter name '" + key + "'");
    if (decl.params.contains(key)) fail_at(line, "duplicate parameter '" + key + "'");
    decl.params[key] = constant_at(line, value, decl.params);
  }

  auto read_box = [&](std::string_view section, std::vector<std::string>& names,
                      std::vector<Interval>& box, const char* what) {
    for (const auto& line : lines_of(section)) {
      if (line.text.find('=') == std::string::npos) {
        fail_at(line, std::string("missing domain for ") + what + " '" +
                          line.text + "'");
      }
      auto [key, value] = split_assignment(line);
      if (!is_valid_identifier(key) || key == kTimeSymbol)
        fail_at(line, std::string("invalid ") + what + " name '" + key + "'");
      if (decl.params.contains(key))
        fail_at(line, "'" + key + "' is already a parameter");
      names.push_back(key);
      box.push_back(interval_at(line, value, decl.params));
    }
  };
  read_box("states", decl.state_names, decl.state_domain, "state");
  read_box("inputs", decl.input_names, decl.input_domain, "input");
  if (decl.state_names.empty()) {
    throw ValidationError("model declares no states (missing [states] section)");
  }

  std::set<std::string> declared(decl.state_names.begin(), decl.state_names.end());
  declared.insert(decl.input_names.begin(), decl.input_names.end());
  declared.insert(kTime);

  std::map<std::string, std::pair<Expression, std::size_t>> rhs_by_state;
  std::vector<std::string> rhs_order;
  for (const auto& line : lines_of("rhs")) {
    auto [key, value] = split_assignment(line);
    if (key.size() < 2 || key.back() != '\'')
      fail_at(line, "rhs entries must have the form name' = <expression>");
    const std::string state = std::string(csv::trim(key.substr(0, key.size() - 1)));
    if (std::find(decl.state_names.begin(), decl.state_names.end(), state) ==
        decl.state_names.end())
      fail_at(line, "rhs for undeclared state '" + state + "'");
    if (rhs_by_state.contains(state))
      fail_at(line, "duplicate rhs for state '" + state + "'");
    Expression e = substitute(parse_at(line, value), decl.params);
    for (const auto& v : e.variables()) {
      if (!declared.contains(v))
        fail_at(line, "undeclared variable '" + v + "' in rhs of " + state + "'");
    }
    rhs_by_state.emplace(state, std::make_pair(std::move(e), line.number));
    rhs_order.push_back(state);
  }
  for (std::size_t i = 0; i < decl.state_names.size(); ++i) {
    const auto& s = decl.state_names[i];
    auto it = rhs_by_state.find(s);
    if (it == rhs_by_state.end())
      throw ValidationError("missing rhs for state '" + s + "'");
    if (rhs_order[i] != s) {
      throw ValidationError("line " + std::to_string(it->second.second) +
                            ": rhs entries must follow declared state order");
    }
    decl.rhs.push_back(it->second.first);
  }

  if (sections.contains("input_signal")) {
    std::map<std::string, Expression> by_input;
    for (const auto& line : lines_of("input_signal")) {
      auto [key, value] = split_assignment(line);
      if (std::find(decl.input_names.begin(), decl.input_names.end(), key) ==
          decl.input_names.end())
        fail_at(line, "signal for undeclared input '" + key + "'");
      Expression e = substitute(parse_at(line, value), decl.params);
      for (const auto& v : e.variables())
        if (v != kTimeSymbol)
          fail_at(line, "input signal may only reference t, found '" + v + "'");
      by_input.emplace(key, std::move(e));
    }
    std::vector<Expression> components;
    for (const auto& in : decl.input_names) {
      auto it = by_input.find(in);
      if (it == by_input.end())
        throw ValidationError("input signal missing for '" + in + "'");
      components.push_back(it->second);
    }
    decl.input_signal = InputSignal(std::move(components));
  }

  return NonlinearModel(std::move(decl));
}

NonlinearModel load_model_file(const std::string& path) {
  const std::string text = csv::read_file(path);
  return load_model(text, std::filesystem::path(path).stem().string());
}

}  // namespace varcoef
