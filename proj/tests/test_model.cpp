#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "varcoef/error.hpp"
#include "varcoef/model.hpp"

using namespace varcoef;

namespace {

const char* kVdp = R"(
[states]
y1 = [-3, 3]
y2 = [-4, 4]
[params]
mu = 1
[rhs]
y1' = y2
y2' = mu*(1-y1^2)*y2 - y1
)";

const char* kPendulum = R"(
[states]
y1 = [-1, 1]
y2 = [-1, 1]
[inputs]
u1 = [-1, 1]
[rhs]
y1' = y2
y2' = -sin(y1)-0.1*y2+u1
)";

std::string error_of(const std::string& doc) {
  try {
    load_model(doc, "m");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("load_model examples") {
  const NonlinearModel vdp = load_model(kVdp, "vdp");
  CHECK(vdp.state_count() == 2);
  CHECK(vdp.input_count() == 0);
  CHECK(vdp.params().at("mu") == 1.0);
  const NonlinearModel pend = load_model(kPendulum, "pendulum");
  CHECK(pend.state_count() == 2);
  CHECK(pend.input_count() == 1);
  CHECK(pend.input_names() == std::vector<std::string>{"u1"});
}

TEST_CASE("eval_rhs examples") {
  const NonlinearModel vdp = load_model(kVdp);
  const Eigen::VectorXd f = vdp.eval_rhs(Eigen::Vector2d(1, 1), Eigen::VectorXd(0), 0.0);
  CHECK(f[0] == 1.0);
  CHECK(f[1] == -1.0);
  const NonlinearModel pend = load_model(kPendulum);
  const Eigen::VectorXd g = pend.eval_rhs(Eigen::Vector2d(0, 0), Eigen::VectorXd::Zero(1), 0.0);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  const NonlinearModel id = load_model("[states]\ny1 = [0, 5]\n[rhs]\ny1' = y1\n");
  CHECK(id.eval_rhs(Eigen::VectorXd::Constant(1, 3.0), Eigen::VectorXd(0), 0.0)[0] == 3.0);
}

TEST_CASE("load_model errors") {
  CHECK(error_of("[states]\ny1 = [0,1]\n[rhs]\ny1' = y3\n").find("y3") != std::string::npos);
  CHECK(error_of("[states]\ny1\n[rhs]\ny1' = y1\n").find("missing domain") != std::string::npos);
  CHECK(error_of("[states]\ny1 = [0,1]\ny2 = [0,1]\n[rhs]\ny1' = y2\n").find("y2") != std::string::npos);
  CHECK_FALSE(error_of("[states]\ny1 = [2,1]\n[rhs]\ny1' = y1\n").empty());
  CHECK_FALSE(error_of("[states]\ny1 = [0,1]\n[rhs]\ny1' = y1 +\n").empty());
  CHECK_FALSE(error_of("[statez]\ny1 = [0,1]\n").empty());
  CHECK_FALSE(error_of("[states]\nt = [0,1]\n[rhs]\nt' = 1\n").empty());
  CHECK_FALSE(error_of("[states]\ny1 = [0,1]\ny1 = [0,1]\n[rhs]\ny1' = 1\ny1' = 1\n").empty());
  // Line numbers are reported.
  CHECK(error_of("[states]\ny1 = [0,1]\n[rhs]\ny1' = q\n").find("line 4") != std::string::npos);
}

TEST_CASE("parameters, time and input signals") {
  const NonlinearModel m = load_model(R"(
# comment
[states]
y = [-1, 1]   # trailing comment
[inputs]
u = [-2, 2]
[params]
k = 2
k2 = k^2
[rhs]
y' = -k2*y + u*sin(t)
[input_signal]
u = cos(t)
)");
  CHECK(m.params().at("k2") == 4.0);
  CHECK(m.eval_rhs(Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 1.0),
                   M_PI / 2)[0] == doctest::Approx(-1.0));
  REQUIRE(m.input_signal().has_value());
  CHECK((*m.input_signal())(0.0)[0] == 1.0);
}

TEST_CASE("dimension checks and domain queries") {
  const NonlinearModel pend = load_model(kPendulum);
  CHECK_THROWS_AS(pend.eval_rhs(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 0),
                  ValidationError);
  CHECK(pend.in_domain(Eigen::Vector2d(0.5, -0.5), Eigen::VectorXd::Zero(1)));
  CHECK_FALSE(pend.in_domain(Eigen::Vector2d(1.5, 0), Eigen::VectorXd::Zero(1)));
  const NonlinearModel narrow = pend.with_domain({{0.2, 1.2}, {0.2, 1.2}}, {{0.5, 1.5}});
  CHECK(narrow.state_domain()[0].lo == 0.2);
  CHECK(narrow.input_domain()[0].hi == 1.5);
  CHECK(narrow.state_index("y2") == 1);
  CHECK_THROWS_AS(narrow.state_index("y9"), ValidationError);
}

TEST_CASE("shipped corpus loads and evaluates on a grid over its domain") {
  for (const char* name : {"vdp", "pendulum", "lorenz", "chua", "sign_changing"}) {
    INFO(name);
    const NonlinearModel m = testutil::corpus(name);
    CHECK(m.name() == name);
    std::vector<Interval> box = m.state_domain();
    box.insert(box.end(), m.input_domain().begin(), m.input_domain().end());
    const std::size_t dims = box.size();
    const std::size_t per_axis = dims <= 3 ? 10 : 4;
    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) total *= per_axis;
    for (std::size_t idx = 0; idx < total; ++idx) {
      Eigen::VectorXd p(static_cast<Eigen::Index>(dims));
      std::size_t rest = idx;
      for (std::size_t d = 0; d < dims; ++d) {
        const double frac = static_cast<double>(rest % per_axis) / (per_axis - 1);
        rest /= per_axis;
        p[static_cast<Eigen::Index>(d)] = box[d].lo + frac * box[d].width();
      }
      const auto n = static_cast<Eigen::Index>(m.state_count());
      const Eigen::VectorXd f = m.eval_rhs(p.head(n), p.tail(p.size() - n), 0.0);
      CHECK(f.allFinite());
    }
  }
}

TEST_CASE("load then evaluate is deterministic") {
  const NonlinearModel a = testutil::corpus("lorenz");
  const NonlinearModel b = testutil::corpus("lorenz");
  const Eigen::Vector3d y(1.3, -2.7, 20.1);
  const Eigen::VectorXd fa = a.eval_rhs(y, Eigen::VectorXd(0), 0.0);
  const Eigen::VectorXd fb = b.eval_rhs(y, Eigen::VectorXd(0), 0.0);
  for (int i = 0; i < 3; ++i) CHECK(fa[i] == fb[i]);
}
