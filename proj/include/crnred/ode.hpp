#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace crnred {

// Raised when an adaptive integrator cannot make progress within its step
// and iteration budget.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(double t, double h, const std::string& hint)
      : std::runtime_error("integrator stalled at t = " + std::to_string(t) +
                           " with step size " + std::to_string(h) + "; " +
                           hint) {}
};

struct OdeOptions {
  double relTol = 1e-8;
  double absTol = 1e-10;
  double initialStep = 0;  // 0 selects a conservative automatic choice
  long maxSteps = 2000000;
};

namespace detail {

inline double weighted_rms(const Eigen::VectorXd& e, const Eigen::VectorXd& y0,
                           const Eigen::VectorXd& y1, double relTol,
                           double absTol) {
  double acc = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    double scale =
        absTol + relTol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double q = e[i] / scale;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(e.size()));
}

inline double step_factor(double errNorm) {
  double raw = errNorm > 0 ? 0.9 * std::pow(errNorm, -1.0 / 3.0) : 5.0;
  return std::clamp(raw, 0.2, 5.0);
}

}  // namespace detail

// Accepted integration points with derivatives; evaluation between points
// uses the cubic Hermite interpolant of the bracketing step.
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> derivs;

  double startTime() const { return times.front(); }
  double endTime() const { return times.back(); }

  Eigen::VectorXd eval(double t) const {
    if (times.empty()) throw std::logic_error("empty trajectory");
    const double lo = times.front(), hi = times.back();
    const double slack = 1e-9 * (1.0 + std::abs(hi - lo));
    if (t < lo - slack || t > hi + slack)
      throw std::domain_error("time outside integrated range");
    t = std::clamp(t, lo, hi);
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k = it == times.begin()
                        ? 0
                        : static_cast<std::size_t>(it - times.begin()) - 1;
    if (k + 1 >= times.size()) k = times.size() - 2;
    if (times.size() == 1) return states.front();
    const double h = times[k + 1] - times[k];
    const double th = (t - times[k]) / h;
    const double t2 = th * th, t3 = t2 * th;
    return (2 * t3 - 3 * t2 + 1) * states[k] +
           (t3 - 2 * t2 + th) * h * derivs[k] +
           (-2 * t3 + 3 * t2) * states[k + 1] +
           (t3 - t2) * h * derivs[k + 1];
  }

  std::vector<Eigen::VectorXd> sample(const std::vector<double>& grid) const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(grid.size());
    for (double t : grid) out.push_back(eval(t));
    return out;
  }
};

// Bogacki-Shampine 3(2) explicit pair with first-same-as-last reuse. Suited
// to the nonstiff limiting systems; stiff problems should use the implicit
// integrator instead.
template <class Rhs>
Trajectory integrate_bs23(Rhs&& f, const Eigen::VectorXd& y0, double t0,
                          double tEnd, const OdeOptions& opts = {}) {
  Trajectory tr;
  const double span = tEnd - t0;
  if (span < 0) throw std::domain_error("integration span must be forward");
  Eigen::VectorXd y = y0;
  Eigen::VectorXd k1 = f(y);
  tr.times.push_back(t0);
  tr.states.push_back(y);
  tr.derivs.push_back(k1);
  if (span == 0) return tr;

  double t = t0;
  double h = opts.initialStep > 0 ? opts.initialStep : span * 1e-6;
  const double hFloor = std::max(span * 1e-13, 1e-300);
  long steps = 0;
  while (t < tEnd) {
    if (++steps > opts.maxSteps)
      throw StiffnessError(t, h,
                           "step budget exhausted; the problem may be stiff, "
                           "use the implicit integrator");
    h = std::min(h, tEnd - t);
    Eigen::VectorXd k2 = f(y + (h / 2) * k1);
    Eigen::VectorXd k3 = f(y + (3 * h / 4) * k2);
    Eigen::VectorXd yNew =
        y + h * ((2.0 / 9) * k1 + (1.0 / 3) * k2 + (4.0 / 9) * k3);
    Eigen::VectorXd k4 = f(yNew);
    Eigen::VectorXd err = h * ((-5.0 / 72) * k1 + (1.0 / 12) * k2 +
                               (1.0 / 9) * k3 - (1.0 / 8) * k4);
    bool finite = yNew.allFinite() && err.allFinite();
    double errNorm = finite
                         ? detail::weighted_rms(err, y, yNew, opts.relTol,
                                                opts.absTol)
                         : std::numeric_limits<double>::infinity();
    if (finite && errNorm <= 1.0) {
      t += h;
      y = yNew;
      k1 = k4;
      tr.times.push_back(t);
      tr.states.push_back(y);
      tr.derivs.push_back(k1);
      h *= detail::step_factor(errNorm);
    } else {
      h *= finite ? detail::step_factor(errNorm) : 0.2;
      if (h < hFloor)
        throw StiffnessError(t, h,
                             "step size underflow; the problem may be stiff, "
                             "use the implicit integrator");
    }
  }
  return tr;
}

// Three-stage singly diagonally implicit method of order three with an
// embedded second-order error estimate. Stiffly accurate and L-stable, so
// fast transient modes are damped rather than resolved.
template <class Rhs, class Jac>
Trajectory integrate_sdirk3(Rhs&& f, Jac&& jac, const Eigen::VectorXd& y0,
                            double t0, double tEnd,
                            const OdeOptions& opts = {}) {
  static constexpr double g = 0.435866521508459;
  static constexpr double c2 = (1 + g) / 2;
  const double b1 = -(6 * g * g - 16 * g + 1) / 4;
  const double b2 = (6 * g * g - 20 * g + 5) / 4;
  const double a21 = c2 - g;
  const double bh1 = g / (1 - g);
  const double bh2 = 1 - bh1;

  Trajectory tr;
  const double span = tEnd - t0;
  if (span < 0) throw std::domain_error("integration span must be forward");
  const Eigen::Index n = y0.size();
  Eigen::VectorXd y = y0;
  Eigen::VectorXd f0 = f(y);
  tr.times.push_back(t0);
  tr.states.push_back(y);
  tr.derivs.push_back(f0);
  if (span == 0) return tr;

  double t = t0;
  double h = opts.initialStep > 0 ? opts.initialStep : span * 1e-6;
  const double hFloor = std::max(span * 1e-13, 1e-300);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  long steps = 0;

  // Simplified Newton: one Jacobian and one factorization per attempted
  // step, shared by all three stages.
  auto solveStage = [&](const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                        const Eigen::VectorXd& base, double hcur,
                        Eigen::VectorXd& stageY,
                        Eigen::VectorXd& stageF) -> bool {
    double prevNorm = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 12; ++it) {
      stageF = f(stageY);
      if (!stageF.allFinite()) return false;
      Eigen::VectorXd res = stageY - base - (hcur * g) * stageF;
      Eigen::VectorXd delta = lu.solve(res);
      if (!delta.allFinite()) return false;
      stageY -= delta;
      double norm = detail::weighted_rms(delta, stageY, stageY, opts.relTol,
                                         opts.absTol);
      if (norm <= 0.03) {
        stageF = f(stageY);
        return stageF.allFinite();
      }
      if (norm > 2 * prevNorm) return false;
      prevNorm = norm;
    }
    return false;
  };

  while (t < tEnd) {
    if (++steps > opts.maxSteps)
      throw StiffnessError(t, h, "step budget exhausted");
    h = std::min(h, tEnd - t);
    Eigen::MatrixXd J = jac(y);
    bool attemptOk = J.allFinite();
    Eigen::VectorXd k1(n), k2(n), k3(n), yNew(n), err(n);
    if (attemptOk) {
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(id - (h * g) * J);
      Eigen::VectorXd stage = y;  // predictor for the first stage
      attemptOk = solveStage(lu, y, h, stage, k1);
      if (attemptOk) {
        Eigen::VectorXd base = y + (h * a21) * k1;
        stage = base + (h * g) * k1;
        attemptOk = solveStage(lu, base, h, stage, k2);
      }
      if (attemptOk) {
        Eigen::VectorXd base = y + (h * b1) * k1 + (h * b2) * k2;
        stage = base + (h * g) * k2;
        attemptOk = solveStage(lu, base, h, stage, k3);
        if (attemptOk) yNew = stage;  // stiffly accurate: y_{n+1} = Y_3
      }
    }
    if (attemptOk) {
      err = h * ((b1 - bh1) * k1 + (b2 - bh2) * k2 + g * k3);
      attemptOk = yNew.allFinite() && err.allFinite();
    }
    double errNorm = attemptOk
                         ? detail::weighted_rms(err, y, yNew, opts.relTol,
                                                opts.absTol)
                         : std::numeric_limits<double>::infinity();
    if (attemptOk && errNorm <= 1.0) {
      t += h;
      y = yNew;
      f0 = f(y);
      tr.times.push_back(t);
      tr.states.push_back(y);
      tr.derivs.push_back(f0);
      h *= detail::step_factor(errNorm);
    } else {
      h *= attemptOk ? detail::step_factor(errNorm) : 0.25;
      if (h < hFloor)
        throw StiffnessError(t, h,
                             "step size underflow in the implicit integrator; "
                             "check the model for blow-up");
    }
  }
  return tr;
}

inline std::vector<double> uniform_grid(double t0, double tEnd, int points) {
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    g.push_back(t0 + (tEnd - t0) * static_cast<double>(i) /
                         static_cast<double>(points - 1));
  return g;
}

}  // namespace crnred
