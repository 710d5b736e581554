#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "crnred/expm.hpp"
#include "crnred/ode.hpp"

using namespace crnred;
using Catch::Matchers::ContainsSubstring;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("explicit pair reproduces smooth closed forms") {
  SECTION("scalar exponential decay") {
    auto f = [](const Eigen::VectorXd& y) { return vec1(-y[0]); };
    Trajectory tr = integrate_bs23(f, vec1(1.0), 0.0, 2.0);
    CHECK(tr.times.back() == 2.0);
    CHECK(std::abs(tr.states.back()[0] - std::exp(-2.0)) < 1e-7);
  }
  SECTION("logistic growth") {
    auto f = [](const Eigen::VectorXd& y) { return vec1(y[0] * (1 - y[0])); };
    Trajectory tr = integrate_bs23(f, vec1(0.1), 0.0, 5.0);
    double exact = 1.0 / (1.0 + 9.0 * std::exp(-5.0));
    CHECK(std::abs(tr.states.back()[0] - exact) < 1e-7);
  }
  SECTION("harmonic rotation preserves the radius") {
    auto f = [](const Eigen::VectorXd& y) { return vec2(y[1], -y[0]); };
    Trajectory tr = integrate_bs23(f, vec2(1.0, 0.0), 0.0, M_PI);
    CHECK(std::abs(tr.states.back()[0] + 1.0) < 1e-6);
    CHECK(std::abs(tr.states.back()[1]) < 1e-6);
  }
  SECTION("stored derivatives match the right-hand side") {
    auto f = [](const Eigen::VectorXd& y) { return vec1(-y[0]); };
    Trajectory tr = integrate_bs23(f, vec1(1.0), 0.0, 1.0);
    for (std::size_t k = 0; k < tr.times.size(); k += 7)
      CHECK(std::abs(tr.derivs[k][0] + tr.states[k][0]) < 1e-15);
  }
}

TEST_CASE("implicit method agrees with exact linear propagation") {
  Eigen::MatrixXd A(2, 2);
  A << -2, 1, 1, -3;
  auto f = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return A * y; };
  auto jac = [&](const Eigen::VectorXd&) { return A; };
  Eigen::VectorXd y0 = vec2(1.0, 2.0);
  Trajectory tr = integrate_sdirk3(f, jac, y0, 0.0, 1.0);
  Eigen::VectorXd ref = expm(A) * y0;
  CHECK((tr.states.back() - ref).cwiseAbs().maxCoeff() < 1e-7);

  auto fl = [](const Eigen::VectorXd& y) { return vec1(y[0] * (1 - y[0])); };
  auto jl = [](const Eigen::VectorXd& y) {
    Eigen::MatrixXd J(1, 1);
    J << 1 - 2 * y[0];
    return J;
  };
  Trajectory trl = integrate_sdirk3(fl, jl, vec1(0.1), 0.0, 5.0);
  double exact = 1.0 / (1.0 + 9.0 * std::exp(-5.0));
  CHECK(std::abs(trl.states.back()[0] - exact) < 1e-6);
}

TEST_CASE("stiff relaxation stays cheap for the implicit method only") {
  const double lam = 1e6;
  auto f = [&](const Eigen::VectorXd& y) {
    return vec1(lam * (std::cos(1.0) - y[0]));
  };
  auto jac = [&](const Eigen::VectorXd&) {
    Eigen::MatrixXd J(1, 1);
    J << -lam;
    return J;
  };
  Trajectory tr = integrate_sdirk3(f, jac, vec1(0.0), 0.0, 2.0);
  CHECK(std::abs(tr.states.back()[0] - std::cos(1.0)) < 1e-6);
  CHECK(tr.times.size() < 2000);

  OdeOptions tight;
  tight.maxSteps = 20000;
  CHECK_THROWS_WITH(integrate_bs23(f, vec1(0.0), 0.0, 2.0, tight),
                    ContainsSubstring("step budget exhausted"));
}

TEST_CASE("fast transients are damped without oscillation") {
  const double lam = 1e8;
  auto f = [&](const Eigen::VectorXd& y) { return vec1(lam * (1.0 - y[0])); };
  auto jac = [&](const Eigen::VectorXd&) {
    Eigen::MatrixXd J(1, 1);
    J << -lam;
    return J;
  };
  Trajectory tr = integrate_sdirk3(f, jac, vec1(0.0), 0.0, 0.1);
  CHECK(std::abs(tr.states.back()[0] - 1.0) < 1e-6);
  for (const auto& s : tr.states) {
    CHECK(s[0] >= -1e-9);
    CHECK(s[0] <= 1.0 + 1e-6);
  }
  CHECK(tr.times.size() < 2000);
}

TEST_CASE("finite-time blow-up raises a stiffness report") {
  auto f = [](const Eigen::VectorXd& y) { return vec1(y[0] * y[0]); };
  auto jac = [](const Eigen::VectorXd& y) {
    Eigen::MatrixXd J(1, 1);
    J << 2 * y[0];
    return J;
  };
  CHECK_THROWS_AS(integrate_bs23(f, vec1(1.0), 0.0, 2.0), StiffnessError);
  CHECK_THROWS_AS(integrate_sdirk3(f, jac, vec1(1.0), 0.0, 2.0), StiffnessError);
}

TEST_CASE("dense output interpolates to the order of the integrator") {
  auto f = [](const Eigen::VectorXd& y) { return vec1(-y[0]); };
  Trajectory tr = integrate_bs23(f, vec1(1.0), 0.0, 4.0);
  double worst = 0;
  for (double t : uniform_grid(0.0, 4.0, 997))
    worst = std::max(worst, std::abs(tr.eval(t)[0] - std::exp(-t)));
  CHECK(worst < 1e-6);
  // Nodes are reproduced exactly.
  for (std::size_t k = 0; k < tr.times.size(); k += 11)
    CHECK(tr.eval(tr.times[k])[0] == tr.states[k][0]);
}

TEST_CASE("trajectories reject queries outside their span") {
  auto f = [](const Eigen::VectorXd& y) { return vec1(-y[0]); };
  Trajectory tr = integrate_bs23(f, vec1(1.0), 0.0, 2.0);
  CHECK_THROWS_AS(tr.eval(-0.1), std::domain_error);
  CHECK_THROWS_AS(tr.eval(2.1), std::domain_error);
  // Queries within the round-off slack clamp to the endpoint.
  CHECK(tr.eval(2.0 + 1e-10)[0] == tr.states.back()[0]);
  CHECK(Trajectory{}.times.empty());
  CHECK_THROWS_AS(Trajectory{}.eval(0.0), std::logic_error);
}

TEST_CASE("degenerate spans integrate to a single point") {
  auto f = [](const Eigen::VectorXd& y) { return vec1(-y[0]); };
  Trajectory tr = integrate_bs23(f, vec1(3.0), 2.0, 2.0);
  REQUIRE(tr.times.size() == 1);
  CHECK(tr.eval(2.0)[0] == 3.0);
  CHECK_THROWS_AS(integrate_bs23(f, vec1(1.0), 1.0, 0.0), std::domain_error);
  auto jac = [](const Eigen::VectorXd&) {
    Eigen::MatrixXd J(1, 1);
    J << -1;
    return J;
  };
  CHECK_THROWS_AS(integrate_sdirk3(f, jac, vec1(1.0), 1.0, 0.0),
                  std::domain_error);
}

TEST_CASE("uniform grids span the interval inclusively") {
  auto g = uniform_grid(0.0, 1.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[1] == 0.25);
  CHECK(g[2] == 0.5);
  auto g2 = uniform_grid(-1.0, 3.0, 3);
  CHECK(g2[1] == 1.0);
}
