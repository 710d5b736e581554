#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "crnred/expm.hpp"
#include "crnred/laplacian.hpp"
#include "crnred/ode.hpp"
#include "crnred/reduction.hpp"

namespace crnred {

struct SimConfig {
  double T = 10;
  double relTol = 1e-8;
  double absTol = 1e-10;
  double N = 1;
  Eigen::VectorXd initial;      // raw full-length state x(0)
  bool convergenceMode = true;  // forces intermediate initials to zero
  int samplePoints = 2001;
};

inline void validate_sim_config(const SimConfig& cfg, int dim) {
  if (!(cfg.T > 0)) throw std::invalid_argument("time horizon must be positive");
  if (!(cfg.relTol > 0 && cfg.relTol <= 1e-2) ||
      !(cfg.absTol > 0 && cfg.absTol <= 1e-2))
    throw std::invalid_argument("tolerances must lie in (0, 1e-2]");
  if (!(cfg.N > 0)) throw std::invalid_argument("scale parameter must be positive");
  if (cfg.initial.size() != dim)
    throw std::invalid_argument("initial state has wrong dimension");
  for (Eigen::Index i = 0; i < cfg.initial.size(); ++i)
    if (!std::isfinite(cfg.initial[i]) || cfg.initial[i] < 0)
      throw std::invalid_argument("initial state must be non-negative and finite");
}

// Autonomous polynomial ODE in evaluated form: each term contributes
// coeff * prod_k y_k^{e_k} times a constant increment vector. Negative
// components are clamped to zero inside rate evaluation so that roundoff
// excursions below zero cannot feed back into the dynamics.
struct OdeSystem {
  struct Term {
    double coeff = 0;
    std::vector<std::pair<int, int>> expo;      // (species, power), power >= 1
    std::vector<std::pair<int, double>> delta;  // (species, increment)
  };
  int dim = 0;
  std::vector<Term> terms;

  Eigen::VectorXd rhs(const Eigen::VectorXd& y) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    for (const auto& tm : terms) {
      double v = tm.coeff;
      for (auto [k, e] : tm.expo)
        v *= std::pow(std::max(y[k], 0.0), static_cast<double>(e));
      for (auto [k, d] : tm.delta) out[k] += d * v;
    }
    return out;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& tm : terms) {
      for (auto [m, em] : tm.expo) {
        if (y[m] < 0) continue;  // clamped region, derivative zero
        double dv = tm.coeff * static_cast<double>(em) *
                    std::pow(std::max(y[m], 0.0), static_cast<double>(em - 1));
        for (auto [k, e] : tm.expo)
          if (k != m)
            dv *= std::pow(std::max(y[k], 0.0), static_cast<double>(e));
        for (auto [k, d] : tm.delta) J(k, m) += d * dv;
      }
    }
    return J;
  }
};

inline OdeSystem make_full_system(const ReactionNetwork& net, double N) {
  OdeSystem sys;
  sys.dim = net.speciesCount();
  for (const auto& rx : net.reactions) {
    OdeSystem::Term tm;
    tm.coeff = rx.law.value(N);
    const Complex& src = net.complexes[static_cast<std::size_t>(rx.source)];
    const Complex& tgt = net.complexes[static_cast<std::size_t>(rx.target)];
    for (const auto& [k, c] : src.stoich) tm.expo.emplace_back(k, c);
    std::map<int, double> d;
    for (const auto& [k, c] : tgt.stoich) d[k] += c;
    for (const auto& [k, c] : src.stoich) d[k] -= c;
    for (const auto& [k, val] : d)
      if (val != 0) tm.delta.emplace_back(k, val);
    sys.terms.push_back(std::move(tm));
  }
  return sys;
}

// Rescaled reduced dynamics: dz_k/dt = sum_r N^{-alpha_k} (y_j - y_i)_k
// lambda^r(N^alpha z), expressed over the reduced species indexing.
inline OdeSystem make_reduced_system(const ReducedNetwork& red, double N) {
  OdeSystem sys;
  sys.dim = red.speciesCount();
  for (int r = 0; r < red.reactionCount(); ++r) {
    const auto& rr = red.reactions[static_cast<std::size_t>(r)];
    OdeSystem::Term tm;
    const Complex& src = red.complexes[static_cast<std::size_t>(rr.source)];
    const Complex& tgt = red.complexes[static_cast<std::size_t>(rr.target)];
    tm.coeff = rr.rate.eval(N) *
               std::pow(N, red.scaling.pairing(src).toDouble());
    for (const auto& [k, c] : src.stoich) tm.expo.emplace_back(k, c);
    std::map<int, double> d;
    for (const auto& [k, c] : tgt.stoich) d[k] += c;
    for (const auto& [k, c] : src.stoich) d[k] -= c;
    for (const auto& [k, val] : d)
      if (val != 0)
        tm.delta.emplace_back(
            k, val * std::pow(N, -red.scaling.of(k).toDouble()));
    sys.terms.push_back(std::move(tm));
  }
  return sys;
}

inline OdeSystem make_limiting_system(const LimitingNetwork& lim) {
  OdeSystem sys;
  sys.dim = static_cast<int>(lim.species.size());
  for (const auto& lr : lim.reactions) {
    OdeSystem::Term tm;
    tm.coeff = lr.constant.toDouble();
    for (const auto& [k, c] : lr.monomial) tm.expo.emplace_back(k, c);
    std::map<int, double> d;
    for (const auto& [k, c] : lr.target.stoich) d[k] += c;
    for (const auto& [k, c] : lr.source.stoich) d[k] -= c;
    for (const auto& [k, val] : d)
      if (val != 0) tm.delta.emplace_back(k, val);
    sys.terms.push_back(std::move(tm));
  }
  return sys;
}

namespace detail {

template <class Sys>
Trajectory run_implicit(const Sys& sys, const Eigen::VectorXd& y0, double T,
                        double relTol, double absTol) {
  OdeOptions opts;
  opts.relTol = relTol;
  opts.absTol = absTol;
  return integrate_sdirk3([&](const Eigen::VectorXd& y) { return sys.rhs(y); },
                          [&](const Eigen::VectorXd& y) { return sys.jacobian(y); },
                          y0, 0.0, T, opts);
}

template <class Sys>
Trajectory run_explicit(const Sys& sys, const Eigen::VectorXd& y0, double T,
                        double relTol, double absTol) {
  OdeOptions opts;
  opts.relTol = relTol;
  opts.absTol = absTol;
  return integrate_bs23([&](const Eigen::VectorXd& y) { return sys.rhs(y); },
                        y0, 0.0, T, opts);
}

}  // namespace detail

// Integrates the full network at scale N in raw coordinates, with the
// implicit method because rate constants may span many orders of N.
inline Trajectory simulate_full(const ReactionNetwork& net,
                                const IntermediateDecomposition& dec,
                                SimConfig cfg) {
  validate_sim_config(cfg, net.speciesCount());
  if (cfg.convergenceMode)
    for (int s : dec.vSpecies) cfg.initial[s] = 0;
  OdeSystem sys = make_full_system(net, cfg.N);
  return detail::run_implicit(sys, cfg.initial, cfg.T, cfg.relTol, cfg.absTol);
}

inline Trajectory simulate_reduced(const ReducedNetwork& red,
                                   const SimConfig& cfg,
                                   const Eigen::VectorXd& z0) {
  if (z0.size() != red.speciesCount())
    throw std::invalid_argument("initial state has wrong dimension");
  OdeSystem sys = make_reduced_system(red, cfg.N);
  return detail::run_implicit(sys, z0, cfg.T, cfg.relTol, cfg.absTol);
}

// The limiting system carries no N, so the explicit pair suffices.
inline Trajectory simulate_limiting(const LimitingNetwork& lim,
                                    const SimConfig& cfg,
                                    const Eigen::VectorXd& z0) {
  if (z0.size() != static_cast<Eigen::Index>(lim.species.size()))
    throw std::invalid_argument("initial state has wrong dimension");
  OdeSystem sys = make_limiting_system(lim);
  return detail::run_explicit(sys, z0, cfg.T, cfg.relTol, cfg.absTol);
}

// Integro-differential reformulation: intermediate concentrations equal the
// convolution of their production with the consumption semigroup. The
// running convolution c(t) is advanced exactly through the semigroup
// property; the local integral uses the exponential moment matrices
// phi1, phi2, so fast consumption does not limit the step size. Non-
// intermediate states advance by a Heun predictor-corrector on the fixed
// grid. Intermediate slots of the returned trajectory carry c(t).
inline Trajectory simulate_delayed_oracle(const ReactionNetwork& net,
                                          const IntermediateDecomposition& dec,
                                          SimConfig cfg, int steps = 20000,
                                          int historyCap = 200001) {
  validate_sim_config(cfg, net.speciesCount());
  if (dec.size() == 0) return simulate_full(net, dec, cfg);
  if (steps < 1 || steps + 1 > historyCap)
    throw std::invalid_argument(
        "history buffer would hold " + std::to_string(steps + 1) +
        " points, exceeding the cap of " + std::to_string(historyCap));
  const int n = dec.size();
  const int X = net.speciesCount();
  Eigen::VectorXd x = cfg.initial;
  for (int s : dec.vSpecies) x[s] = 0;  // formulation assumes zero start

  LaplacianCore core = assemble_laplacian(net, dec, cfg.N);
  const double h = cfg.T / steps;

  // exp of the augmented block matrix yields, in its first block row, the
  // semigroup E = exp(hL) and the moment matrices phi_k(hL) = sum_j
  // (hL)^j / (j+k)!. For production interpolated linearly on the step,
  // c(t+h) = E c + h (phi1 a + phi2 (b-a)) is exact, and the slow species
  // receive the exact flux integral int_0^h B c(t+u) du =
  // B (h phi1 c + h^2 (phi2 a + phi3 (b-a))).
  Eigen::MatrixXd M4 = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  M4.topLeftCorner(n, n) = h * core.M;
  M4.block(0, n, n, n) = Eigen::MatrixXd::Identity(n, n);
  M4.block(n, 2 * n, n, n) = Eigen::MatrixXd::Identity(n, n);
  M4.block(2 * n, 3 * n, n, n) = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd X4 = expm(M4);
  Eigen::MatrixXd E = X4.topLeftCorner(n, n);
  Eigen::MatrixXd phi1 = X4.block(0, n, n, n);
  Eigen::MatrixXd phi2 = X4.block(0, 2 * n, n, n);
  Eigen::MatrixXd phi3 = X4.block(0, 3 * n, n, n);

  // Reaction bookkeeping: direct terms (sources without intermediates),
  // production into intermediates, and the linear outflow map B from
  // intermediate levels to non-intermediate species.
  struct PolyTerm {
    double coeff;
    const Complex* src;
    std::vector<std::pair<int, double>> delta;
  };
  std::vector<PolyTerm> direct;
  struct ProdTerm {
    double coeff;
    const Complex* src;
    int l;
  };
  std::vector<ProdTerm> production;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(X, n);
  for (const auto& rx : net.reactions) {
    const Complex& src = net.complexes[static_cast<std::size_t>(rx.source)];
    const Complex& tgt = net.complexes[static_cast<std::size_t>(rx.target)];
    int ls = dec.complexToL[static_cast<std::size_t>(rx.source)];
    int lt = dec.complexToL[static_cast<std::size_t>(rx.target)];
    double rate = rx.law.value(cfg.N);
    if (ls < 0 && lt < 0) {
      PolyTerm tm;
      tm.coeff = rate;
      tm.src = &src;
      std::map<int, double> d;
      for (const auto& [k, c] : tgt.stoich) d[k] += c;
      for (const auto& [k, c] : src.stoich) d[k] -= c;
      for (const auto& [k, val] : d)
        if (val != 0) tm.delta.emplace_back(k, val);
      direct.push_back(std::move(tm));
    } else if (ls < 0) {
      production.push_back({rate, &src, lt});
      PolyTerm tm;
      tm.coeff = rate;
      tm.src = &src;
      for (const auto& [k, c] : src.stoich) tm.delta.emplace_back(k, -double(c));
      direct.push_back(std::move(tm));
    } else if (lt < 0) {
      for (const auto& [k, c] : tgt.stoich) B(k, ls) += rate * c;
    }
    // intermediate-to-intermediate transfer lives entirely inside L
  }

  auto monomial = [](const Eigen::VectorXd& y, const Complex& cx) {
    double v = 1;
    for (const auto& [k, c] : cx.stoich)
      v *= std::pow(std::max(y[k], 0.0), static_cast<double>(c));
    return v;
  };
  auto lambdaOf = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(n);
    for (const auto& p : production) lam[p.l] += p.coeff * monomial(y, *p.src);
    return lam;
  };
  auto directOf = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(X);
    for (const auto& tm : direct) {
      double v = tm.coeff * monomial(y, *tm.src);
      for (auto [k, d] : tm.delta) f[k] += d * v;
    }
    return f;
  };
  auto rhsOf = [&](const Eigen::VectorXd& y, const Eigen::VectorXd& c) {
    return Eigen::VectorXd(directOf(y) + B * c);
  };

  Trajectory tr;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  auto record = [&](double t, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& cv) {
    Eigen::VectorXd state = y, deriv = rhsOf(y, cv);
    Eigen::VectorXd dc = core.M * cv + lambdaOf(y);
    for (int l = 0; l < n; ++l) {
      state[dec.vSpecies[static_cast<std::size_t>(l)]] = cv[l];
      deriv[dec.vSpecies[static_cast<std::size_t>(l)]] = dc[l];
    }
    tr.times.push_back(t);
    tr.states.push_back(std::move(state));
    tr.derivs.push_back(std::move(deriv));
  };
  record(0.0, x, c);
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXd lam0 = lambdaOf(x);
    Eigen::VectorXd d0 = directOf(x);
    Eigen::VectorXd xPred = x + h * (d0 + B * c);
    auto advance = [&](const Eigen::VectorXd& end) {
      Eigen::VectorXd db = lambdaOf(end) - lam0;
      Eigen::VectorXd cEnd = E * c + h * (phi1 * lam0 + phi2 * db);
      Eigen::VectorXd xEnd =
          x + (h / 2) * (d0 + directOf(end)) +
          B * (h * (phi1 * c) + h * h * (phi2 * lam0 + phi3 * db));
      return std::pair<Eigen::VectorXd, Eigen::VectorXd>(xEnd, cEnd);
    };
    auto [x1, c1] = advance(xPred);
    auto [xNew, cNew] = advance(x1);  // refresh with the corrected endpoint
    x = xNew;
    c = cNew;
    record(h * (s + 1), x, c);
  }
  return tr;
}

// Residual of every linear conservation law of the stoichiometric matrix
// along a trajectory, relative to its initial value.
inline double conservation_residual(const ReactionNetwork& net,
                                    const Trajectory& tr,
                                    const std::vector<double>& grid) {
  const int X = net.speciesCount();
  const int R = net.reactionCount();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(X, R);
  for (int r = 0; r < R; ++r) {
    for (const auto& [k, cv] : net.target(r).stoich) S(k, r) += cv;
    for (const auto& [k, cv] : net.source(r).stoich) S(k, r) -= cv;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S.transpose());
  Eigen::MatrixXd kernel = lu.kernel();
  if (lu.dimensionOfKernel() == 0) return 0.0;
  double worst = 0;
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    Eigen::VectorXd w = kernel.col(c);
    double scale = w.cwiseAbs().maxCoeff();
    if (scale == 0) continue;
    w /= scale;
    double ref = w.dot(tr.states.front());
    for (double t : grid) {
      double val = w.dot(tr.eval(t));
      worst = std::max(worst, std::abs(val - ref) / std::max(1.0, std::abs(ref)));
    }
  }
  return worst;
}

inline Eigen::VectorXd full_initial_from_rescaled(const ReducedNetwork& red,
                                                  double N,
                                                  const Eigen::VectorXd& z0,
                                                  int fullDim) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(fullDim);
  for (int ri = 0; ri < red.speciesCount(); ++ri)
    x[red.origIndex[static_cast<std::size_t>(ri)]] =
        std::pow(N, red.scaling.of(ri).toDouble()) * z0[ri];
  return x;
}

// sup over the grid of || N^{-alpha} x(t) - z(t) ||_inf, taken over the
// non-intermediate species carried by the reduced network.
inline double sup_rescaled_error_reduced(const Trajectory& full,
                                         const Trajectory& reduced,
                                         const ReducedNetwork& red, double N,
                                         const std::vector<double>& grid) {
  double worst = 0;
  for (double t : grid) {
    Eigen::VectorXd xf = full.eval(t);
    Eigen::VectorXd zr = reduced.eval(t);
    for (int ri = 0; ri < red.speciesCount(); ++ri) {
      double scaled = std::pow(N, -red.scaling.of(ri).toDouble()) *
                      xf[red.origIndex[static_cast<std::size_t>(ri)]];
      worst = std::max(worst, std::abs(scaled - zr[ri]));
    }
  }
  return worst;
}

// The limiting network shares the reduced species indexing; folded species
// simply have no dynamics and stay at their initial value.
inline double sup_rescaled_error_limiting(const Trajectory& full,
                                          const Trajectory& limiting,
                                          const ReducedNetwork& red, double N,
                                          const std::vector<double>& grid) {
  double worst = 0;
  for (double t : grid) {
    Eigen::VectorXd xf = full.eval(t);
    Eigen::VectorXd zl = limiting.eval(t);
    for (int ri = 0; ri < red.speciesCount(); ++ri) {
      double scaled = std::pow(N, -red.scaling.of(ri).toDouble()) *
                      xf[red.origIndex[static_cast<std::size_t>(ri)]];
      worst = std::max(worst, std::abs(scaled - zl[ri]));
    }
  }
  return worst;
}

struct SweepCell {
  double N = 0;
  double errFullReduced = std::numeric_limits<double>::quiet_NaN();
  double errFullLimiting = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string message;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  bool decreasingFullReduced = false;  // strictly decreasing across the grid
};

// Runs the full, reduced and limiting systems for each N and reports the
// rescaled sup-norm errors. Individual failures are recorded and the sweep
// continues. Cells are independent; jobs > 1 distributes them over threads
// with results stored by grid position.
inline SweepResult convergence_sweep(const ReactionNetwork& net,
                                     const IntermediateDecomposition& dec,
                                     const ScalingSpec& spec,
                                     const std::vector<Rational>& z0,
                                     const SimConfig& base,
                                     const std::vector<double>& Ngrid,
                                     int jobs = 1) {
  ReducedNetwork red = reduce(net, dec, spec);
  if (static_cast<int>(z0.size()) != red.speciesCount())
    throw std::invalid_argument("initial state has wrong dimension");
  std::map<int, Rational> initials;
  Eigen::VectorXd zd(red.speciesCount());
  for (int ri = 0; ri < red.speciesCount(); ++ri) {
    initials[ri] = z0[static_cast<std::size_t>(ri)];
    zd[ri] = z0[static_cast<std::size_t>(ri)].toDouble();
  }
  // A divergent scaling admits no limiting network; the sweep still measures
  // the full-vs-reduced error, and the limiting column stays NaN.
  std::optional<LimitingNetwork> lim;
  try {
    lim = build_limiting(red, initials);
  } catch (const ValidationError&) {
  }

  SweepResult res;
  res.cells.resize(Ngrid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= Ngrid.size()) return;
      SweepCell& cell = res.cells[idx];
      cell.N = Ngrid[idx];
      try {
        SimConfig cfg = base;
        cfg.N = Ngrid[idx];
        cfg.initial =
            full_initial_from_rescaled(red, cfg.N, zd, net.speciesCount());
        Trajectory full = simulate_full(net, dec, cfg);
        Trajectory reduced = simulate_reduced(red, cfg, zd);
        auto grid = uniform_grid(0.0, cfg.T, cfg.samplePoints);
        cell.errFullReduced =
            sup_rescaled_error_reduced(full, reduced, red, cfg.N, grid);
        if (lim) {
          Trajectory limiting = simulate_limiting(*lim, cfg, zd);
          cell.errFullLimiting =
              sup_rescaled_error_limiting(full, limiting, red, cfg.N, grid);
        }
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.message = e.what();
      }
    }
  };
  int nThreads = std::max(1, std::min<int>(jobs, static_cast<int>(Ngrid.size())));
  if (nThreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nThreads));
    for (int i = 0; i < nThreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  res.decreasingFullReduced = res.cells.size() > 1;
  for (std::size_t i = 0; i + 1 < res.cells.size(); ++i) {
    if (res.cells[i].failed || res.cells[i + 1].failed ||
        !(res.cells[i + 1].errFullReduced < res.cells[i].errFullReduced))
      res.decreasingFullReduced = false;
  }
  return res;
}

}  // namespace crnred
