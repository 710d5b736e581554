#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "crnred/parser.hpp"
#include "crnred/simulate.hpp"

namespace crnred {

// Bundled study networks. The embedded text is byte-identical to the files
// shipped under data/, and both are in the canonical serializer form.
struct Scenario {
  std::string name;
  std::string network;
  std::map<std::string, Rational> z0;  // rescaled initial values by species
  double defaultT = 5;
  double defaultN = 100;
};

inline const std::vector<Scenario>& bundled_scenarios() {
  static const std::vector<Scenario> all = {
      {"mm",
       "species: E S ES P\n"
       "intermediates: ES\n"
       "alpha:\n"
       "  E = 0\n"
       "  S = 1\n"
       "  P = 1\n"
       "reactions:\n"
       "  E + S -> ES @ 2\n"
       "  ES -> E + S @ 3 N^2\n"
       "  ES -> E + P @ 4 N^3\n",
       {{"E", Rational(1)}, {"S", Rational(1)}, {"P", Rational(0)}},
       5,
       100},
      {"example2",
       "species: E S P H1 H2\n"
       "intermediates: H1 H2\n"
       "alpha:\n"
       "  E = 0\n"
       "  S = 0\n"
       "  P = 0\n"
       "reactions:\n"
       "  E + S -> H1 @ 3/2\n"
       "  H1 -> E + P @ 5 N^2\n"
       "  H1 -> H2 @ 2 N^3\n"
       "  H2 -> H1 @ N^4\n",
       {{"E", Rational(1)}, {"S", Rational(1)}, {"P", Rational(0)}},
       5,
       100},
      {"example4",
       "species: S P1 P2 H1 H2\n"
       "intermediates: H1 H2\n"
       "alpha:\n"
       "  S = 0\n"
       "  P1 = 0\n"
       "  P2 = 0\n"
       "reactions:\n"
       "  S -> H1 @ 1\n"
       "  H1 -> P1 @ 2 N^2\n"
       "  H1 -> H2 @ 2 N\n"
       "  H2 -> P2 @ 3 N^-2\n",
       {{"S", Rational(1)}, {"P1", Rational(0)}, {"P2", Rational(0)}},
       5,
       100},
      {"sec9-1",
       "species: A H\n"
       "intermediates: H\n"
       "alpha:\n"
       "  A = 0\n"
       "reactions:\n"
       "  0 -> H @ 6\n"
       "  A -> 0 @ 11\n"
       "  2 A -> 3 A @ 6\n"
       "  3 A -> 2 A @ 1\n"
       "  H -> A @ N\n",
       {{"A", Rational(2)}},
       50,
       100},
      {"sec9-2",
       "species: A B H\n"
       "intermediates: H\n"
       "alpha:\n"
       "  A = 0\n"
       "  B = 1\n"
       "reactions:\n"
       "  0 -> H @ 2 N\n"
       "  H -> A @ 3 N^2\n"
       "  H -> B @ 4 N^3\n",
       {{"A", Rational(0)}, {"B", Rational(0)}},
       5,
       1000},
  };
  return all;
}

inline const Scenario& get_scenario(const std::string& name) {
  for (const auto& s : bundled_scenarios())
    if (s.name == name) return s;
  throw std::invalid_argument(
      "unknown scenario '" + name +
      "' (available: mm, example2, example4, sec9-1, sec9-2)");
}

// Initial values over the reduced species ordering; unnamed species start
// at zero.
inline std::vector<Rational> rescaled_initials(
    const ReducedNetwork& red, const std::map<std::string, Rational>& z0) {
  std::vector<Rational> out;
  out.reserve(red.species.size());
  for (const auto& name : red.species) {
    auto it = z0.find(name);
    out.push_back(it == z0.end() ? Rational(0) : it->second);
  }
  return out;
}

// Long-horizon study of the birth-death-autocatalysis scenario: started at
// the unstable equilibrium of the limiting cubic, the full system drains to
// the stable point while the limiting system stays put, so convergence on
// compact intervals does not extend to t -> infinity. The slow-manifold
// start removes the transient production deficit and restores agreement.
struct LongTermProbeReport {
  double N = 0, T = 0;
  double fullFinal = 0;            // full A at T, started at 2
  double limitingFinal = 0;        // limiting z at T, started at 2
  double maxExcessOverLimiting = 0;  // max_t (fullA - limitingZ)
  double maxRelErrIntermediate = 0;  // full H vs 6(1-e^{-Nt})/N
  double slowManifoldMaxDev = 0;     // |H - 6/N| when started on manifold
  double slowManifoldFullVsReduced = 0;
  double stableFullFinal = 0;      // controls started at the stable point 1
  double stableLimitingFinal = 0;
};

inline LongTermProbeReport long_term_probe(double N = 100, double T = 50,
                                           double relTol = 1e-8,
                                           double absTol = 1e-10) {
  const Scenario& sc = get_scenario("sec9-1");
  NetworkBundle bundle = parse_network(sc.network);
  IntermediateDecomposition dec =
      validate_intermediates(bundle.net, bundle.intermediates);
  ReducedNetwork red = reduce(bundle.net, dec, bundle.scaling);
  LimitingNetwork lim = build_limiting(red);
  const int iA = bundle.net.speciesIndex("A");
  const int iH = bundle.net.speciesIndex("H");

  LongTermProbeReport rep;
  rep.N = N;
  rep.T = T;
  SimConfig cfg;
  cfg.T = T;
  cfg.N = N;
  cfg.relTol = relTol;
  cfg.absTol = absTol;
  cfg.initial = Eigen::VectorXd::Zero(bundle.net.speciesCount());
  cfg.initial[iA] = 2;

  Trajectory full = simulate_full(bundle.net, dec, cfg);
  Eigen::VectorXd z2(1);
  z2 << 2;
  Trajectory limiting = simulate_limiting(lim, cfg, z2);
  rep.fullFinal = full.eval(T)[iA];
  rep.limitingFinal = limiting.eval(T)[0];

  auto grid = uniform_grid(0.0, T, 2001);
  for (double t : grid)
    rep.maxExcessOverLimiting = std::max(
        rep.maxExcessOverLimiting, full.eval(t)[iA] - limiting.eval(t)[0]);

  // Transient of the intermediate against its closed form, sampled densely
  // near zero where the rise happens and uniformly afterwards.
  std::vector<double> tPoints;
  for (int i = 1; i <= 40; ++i)
    tPoints.push_back(1e-3 * std::pow(10.0, 4.0 * i / 40.0) / N * 10);
  for (int i = 1; i <= 500; ++i) tPoints.push_back(T * i / 500.0);
  for (double t : tPoints) {
    if (t > T) continue;
    double form = 6.0 * (1.0 - std::exp(-N * t)) / N;
    double got = full.eval(t)[iH];
    rep.maxRelErrIntermediate =
        std::max(rep.maxRelErrIntermediate, std::abs(got - form) / form);
  }

  // Slow-manifold start: H(0)=6/N keeps the intermediate exactly constant
  // and the A dynamics coincide with the reduced system.
  SimConfig cfgManifold = cfg;
  cfgManifold.convergenceMode = false;
  cfgManifold.initial[iH] = 6.0 / N;
  Trajectory manifold = simulate_full(bundle.net, dec, cfgManifold);
  Eigen::VectorXd zr0(1);
  zr0 << 2;
  Trajectory reduced = simulate_reduced(red, cfg, zr0);
  for (double t : grid) {
    rep.slowManifoldMaxDev = std::max(rep.slowManifoldMaxDev,
                                      std::abs(manifold.eval(t)[iH] - 6.0 / N));
    rep.slowManifoldFullVsReduced =
        std::max(rep.slowManifoldFullVsReduced,
                 std::abs(manifold.eval(t)[iA] - reduced.eval(t)[0]));
  }

  SimConfig cfgStable = cfg;
  cfgStable.initial[iA] = 1;
  Trajectory fullStable = simulate_full(bundle.net, dec, cfgStable);
  Eigen::VectorXd z1(1);
  z1 << 1;
  Trajectory limStable = simulate_limiting(lim, cfg, z1);
  rep.stableFullFinal = fullStable.eval(T)[iA];
  rep.stableLimitingFinal = limStable.eval(T)[0];
  return rep;
}

// Production-channel comparison: reducing the two-channel burst scenario
// keeps both products, with A produced at asymptotic rate k1 k3 / k2. An
// alternative that prunes everything but the fastest consumption channel
// loses the A production entirely.
struct Sec92Report {
  double expectedSlope = 0;  // k1 k3 / k2
  double reducedSlope = 0;   // fitted from our reduced system
  double prunedFinalA = 0;   // alternative keeps A at zero
  double fullSlope = 0;      // fitted from the full system at scale N
  double N = 0, T = 0;
};

inline Sec92Report run_sec92_comparison(double N = 1000, double T = 5,
                                        double relTol = 1e-8,
                                        double absTol = 1e-10) {
  const Scenario& sc = get_scenario("sec9-2");
  NetworkBundle bundle = parse_network(sc.network);
  IntermediateDecomposition dec =
      validate_intermediates(bundle.net, bundle.intermediates);
  ReducedNetwork red = reduce(bundle.net, dec, bundle.scaling);

  // The same scenario with the slower consumption channel H -> A dropped,
  // as a naive "keep only the fastest rate" reduction would do.
  static const char* prunedText =
      "species: A B H\n"
      "intermediates: H\n"
      "alpha:\n"
      "  A = 0\n"
      "  B = 1\n"
      "reactions:\n"
      "  0 -> H @ 2 N\n"
      "  H -> B @ 4 N^3\n";
  NetworkBundle pruned = parse_network(prunedText);
  IntermediateDecomposition prunedDec =
      validate_intermediates(pruned.net, pruned.intermediates);
  ReducedNetwork prunedRed = reduce(pruned.net, prunedDec, pruned.scaling);

  Sec92Report rep;
  rep.N = N;
  rep.T = T;
  Rational k1(2), k2(4), k3(3);
  rep.expectedSlope = (k1 * k3 / k2).toDouble();

  SimConfig cfg;
  cfg.T = T;
  cfg.N = N;
  cfg.relTol = relTol;
  cfg.absTol = absTol;

  auto slopeOf = [T](const Trajectory& tr, int idx) {
    return (tr.eval(T)[idx] - tr.eval(T / 2)[idx]) / (T / 2);
  };

  std::vector<Rational> z0 = rescaled_initials(red, sc.z0);
  Eigen::VectorXd zd(static_cast<Eigen::Index>(z0.size()));
  for (std::size_t i = 0; i < z0.size(); ++i)
    zd[static_cast<Eigen::Index>(i)] = z0[i].toDouble();
  Trajectory ours = simulate_reduced(red, cfg, zd);
  int rA = 0;
  for (int i = 0; i < red.speciesCount(); ++i)
    if (red.species[static_cast<std::size_t>(i)] == "A") rA = i;
  rep.reducedSlope = slopeOf(ours, rA);

  Eigen::VectorXd zp = Eigen::VectorXd::Zero(prunedRed.speciesCount());
  Trajectory alt = simulate_reduced(prunedRed, cfg, zp);
  int pA = 0;
  for (int i = 0; i < prunedRed.speciesCount(); ++i)
    if (prunedRed.species[static_cast<std::size_t>(i)] == "A") pA = i;
  rep.prunedFinalA = alt.eval(T)[pA];

  cfg.initial = Eigen::VectorXd::Zero(bundle.net.speciesCount());
  Trajectory full = simulate_full(bundle.net, dec, cfg);
  rep.fullSlope = slopeOf(full, bundle.net.speciesIndex("A"));
  return rep;
}

}  // namespace crnred
