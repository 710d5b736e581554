#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crnred/expm.hpp"
#include "crnred/laplacian.hpp"
#include "crnred/reduction.hpp"

namespace crnred {

enum class CheckStatus {
  Proved,
  ProvedProp1,
  ProvedProp2,
  ProvedProp3,
  NumericSupport,
  ViolatedNumeric,
  Unknown,
  NotApplicable,
  Fail,
};

inline std::string status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Proved: return "PROVED";
    case CheckStatus::ProvedProp1: return "PROVED_PROP1";
    case CheckStatus::ProvedProp2: return "PROVED_PROP2";
    case CheckStatus::ProvedProp3: return "PROVED_PROP3";
    case CheckStatus::NumericSupport: return "NUMERIC_SUPPORT";
    case CheckStatus::ViolatedNumeric: return "VIOLATED_NUMERIC";
    case CheckStatus::Unknown: return "UNKNOWN";
    case CheckStatus::NotApplicable: return "NOT_APPLICABLE";
    case CheckStatus::Fail: return "FAIL";
  }
  return "UNKNOWN";
}

// Per-reaction exponents beta = eta + <alpha, y_src> for every reaction whose
// source contains no intermediate species.
inline std::map<int, Rational> derive_beta(const ReactionNetwork& net,
                                           const std::vector<int>& intermediates,
                                           const ScalingSpec& spec) {
  std::set<int> vset(intermediates.begin(), intermediates.end());
  std::map<int, Rational> beta;
  for (int r = 0; r < net.reactionCount(); ++r) {
    const Complex& src = net.source(r);
    bool touches = false;
    for (const auto& [k, c] : src.stoich)
      if (vset.count(k)) touches = true;
    if (touches) continue;
    beta[r] = net.reactions[static_cast<std::size_t>(r)].law.eta +
              spec.pairing(src);
  }
  return beta;
}

// a_j: smallest abundance exponent among the species of final product y_j
// (+inf for the empty complex). betaStar_l: largest production exponent
// among reactions feeding H_l from outside V (-inf when there is none).
struct ScaleSummary {
  std::map<int, ExtRational> a;         // W complex index -> a_j
  std::vector<ExtRational> betaStar;    // per l
};

inline ScaleSummary compute_scale_summary(const ReactionNetwork& net,
                                          const IntermediateDecomposition& dec,
                                          const ScalingSpec& spec) {
  ScaleSummary s;
  for (int j : dec.W) {
    const Complex& cx = net.complexes[static_cast<std::size_t>(j)];
    if (cx.isEmpty()) {
      s.a.emplace(j, ExtRational::plusInf());
      continue;
    }
    std::optional<Rational> m;
    for (const auto& [k, c] : cx.stoich) {
      Rational ak = spec.of(k);
      if (!m || ak < *m) m = ak;
    }
    s.a.emplace(j, ExtRational(*m));
  }
  std::map<int, Rational> beta = derive_beta(net, dec.vSpecies, spec);
  s.betaStar.assign(static_cast<std::size_t>(dec.size()),
                    ExtRational::minusInf());
  for (int r = 0; r < net.reactionCount(); ++r) {
    const auto& rx = net.reactions[static_cast<std::size_t>(r)];
    int lt = dec.complexToL[static_cast<std::size_t>(rx.target)];
    if (lt < 0) continue;
    auto it = beta.find(r);
    if (it == beta.end()) continue;  // fed from another intermediate
    ExtRational b(it->second);
    if (s.betaStar[static_cast<std::size_t>(lt)] < b)
      s.betaStar[static_cast<std::size_t>(lt)] = b;
  }
  return s;
}

// The fast-consumption condition quantifies over triples (l, l', j) with H_l
// fed directly from an initial reactant, H_l reaching H_l' through
// intermediates, and H_l' reaching the final product y_j.
struct RequiredTriple {
  int l = -1, lp = -1, j = -1;  // j is a W complex index
};

inline std::vector<RequiredTriple> required_triples(
    const ReactionNetwork& net, const IntermediateDecomposition& dec) {
  std::vector<RequiredTriple> out;
  for (int l = 0; l < dec.size(); ++l) {
    bool fedFromU = false;
    for (const auto& rx : net.reactions)
      if (rx.target == dec.vComplex[static_cast<std::size_t>(l)] &&
          !dec.isIntermediateComplex(rx.source))
        fedFromU = true;
    if (!fedFromU) continue;
    for (int lp = 0; lp < dec.size(); ++lp) {
      if (!reaches_through_intermediates(net, dec,
                                         dec.vComplex[static_cast<std::size_t>(l)],
                                         dec.vComplex[static_cast<std::size_t>(lp)]))
        continue;
      for (int j : dec.W)
        if (reaches_through_intermediates(
                net, dec, dec.vComplex[static_cast<std::size_t>(lp)], j))
          out.push_back({l, lp, j});
    }
  }
  return out;
}

// beta*_l - a_j when finite; nullopt encodes -infinity, in which case the
// prefactor vanishes and the triple passes trivially.
inline std::optional<Rational> prefactor_exponent(const ScaleSummary& s, int l,
                                                  int j) {
  const ExtRational& bs = s.betaStar[static_cast<std::size_t>(l)];
  const ExtRational& aj = s.a.at(j);
  if (bs.isMinusInf() || aj.isPlusInf()) return std::nullopt;
  return bs.value() - aj.value();
}

struct TripleEvidence {
  RequiredTriple triple;
  bool pass = false;
  std::string note;
};

struct PropResult {
  CheckStatus status = CheckStatus::NotApplicable;
  std::vector<TripleEvidence> evidence;
  std::optional<RequiredTriple> witness;  // first failure
};

// Uniform consumption order: all intermediate-consuming reactions scale as
// N^gamma; fast consumption holds when gamma exceeds beta*_l - a_j for every
// required pair.
inline PropResult check_prop1_uniform_order(const ReactionNetwork& net,
                                            const IntermediateDecomposition& dec,
                                            const ScalingSpec& spec) {
  PropResult res;
  std::optional<Rational> gamma;
  bool uniform = true, any = false;
  for (const auto& rx : net.reactions) {
    if (dec.complexToL[static_cast<std::size_t>(rx.source)] < 0) continue;
    any = true;
    if (!gamma)
      gamma = rx.law.eta;
    else if (*gamma != rx.law.eta)
      uniform = false;
  }
  if (!any || !uniform) {
    res.status = CheckStatus::NotApplicable;
    return res;
  }
  ScaleSummary s = compute_scale_summary(net, dec, spec);
  std::set<std::pair<int, int>> pairs;
  for (const auto& t : required_triples(net, dec)) pairs.insert({t.l, t.j});
  bool all = true;
  for (auto [l, j] : pairs) {
    TripleEvidence ev;
    ev.triple = {l, l, j};
    auto e = prefactor_exponent(s, l, j);
    if (!e) {
      ev.pass = true;
      ev.note = "prefactor exponent is -inf";
    } else if (*gamma > *e) {
      ev.pass = true;
      ev.note = "gamma " + gamma->str() + " > " + e->str();
    } else {
      ev.pass = false;
      ev.note = "gamma " + gamma->str() + " <= " + e->str();
      if (!res.witness) res.witness = ev.triple;
      all = false;
    }
    res.evidence.push_back(std::move(ev));
  }
  res.status = all ? CheckStatus::ProvedProp1 : CheckStatus::Fail;
  return res;
}

namespace detail {

// Longest-path weights tau[l][lp] over the acyclic intermediate digraph with
// edge weight (transfer exponent minus source consumption exponent); tau
// bounds the order of the probability that a molecule starting in H_l is
// ever transferred to H_lp. Unreachable pairs hold nullopt.
inline std::vector<std::vector<std::optional<Rational>>> transfer_order_bounds(
    const IntermediateDecomposition& dec, const LaplacianCore& core) {
  const int n = dec.size();
  std::vector<std::vector<std::optional<Rational>>> tau(
      static_cast<std::size_t>(n),
      std::vector<std::optional<Rational>>(static_cast<std::size_t>(n)));
  // Relaxation to a fixed point; terminates because the graph is acyclic.
  for (int l = 0; l < n; ++l) tau[static_cast<std::size_t>(l)][static_cast<std::size_t>(l)] = Rational(0);
  for (int pass = 0; pass < n + 1; ++pass) {
    for (int m = 0; m < n; ++m)
      for (int mp = 0; mp < n; ++mp) {
        const NPoly& edge = core.transfer[static_cast<std::size_t>(m)][static_cast<std::size_t>(mp)];
        if (edge.isZero()) continue;
        Rational w = edge.leading().exp - core.consumptionExponent(m);
        for (int l = 0; l < n; ++l) {
          auto& toM = tau[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)];
          if (!toM) continue;
          auto& toMp = tau[static_cast<std::size_t>(l)][static_cast<std::size_t>(mp)];
          Rational cand = *toM + w;
          if (!toMp || cand > *toMp) toMp = cand;
        }
      }
  }
  return tau;
}

}  // namespace detail

// Acyclic intermediates: each required triple is discharged by one of three
// exact exponent arguments. Either the prefactor already vanishes (the
// exponential factor never exceeds one); or every intermediate on the l -> l'
// routes is consumed at an order beating the prefactor, so the exponential
// decay wins; or the total transfer order along every route is small enough
// that the l' occupancy itself beats the prefactor.
inline PropResult check_prop2_acyclic(const ReactionNetwork& net,
                                      const IntermediateDecomposition& dec,
                                      const ScalingSpec& spec) {
  PropResult res;
  if (!is_intermediate_acyclic(net, dec)) {
    res.status = CheckStatus::NotApplicable;
    return res;
  }
  if (dec.size() == 0) {
    res.status = CheckStatus::ProvedProp2;
    return res;
  }
  ScaleSummary s = compute_scale_summary(net, dec, spec);
  LaplacianCore core = assemble_laplacian(net, dec, 1.0);
  auto tau = detail::transfer_order_bounds(dec, core);
  auto onPath = [&](int l, int lp, int m) {
    return tau[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)].has_value() &&
           tau[static_cast<std::size_t>(m)][static_cast<std::size_t>(lp)].has_value();
  };
  bool all = true;
  for (const auto& t : required_triples(net, dec)) {
    TripleEvidence ev;
    ev.triple = t;
    auto e = prefactor_exponent(s, t.l, t.j);
    if (!e) {
      ev.pass = true;
      ev.note = "prefactor exponent is -inf";
    } else if (e->isNegative()) {
      ev.pass = true;
      ev.note = "prefactor exponent " + e->str() + " < 0";
    } else {
      // Slowest consumption among intermediates on any l -> l' route.
      std::optional<Rational> gammaMin;
      for (int m = 0; m < dec.size(); ++m) {
        if (!onPath(t.l, t.lp, m)) continue;
        Rational g = core.consumptionExponent(m);
        if (!gammaMin || g < *gammaMin) gammaMin = g;
      }
      const auto& reachTau = tau[static_cast<std::size_t>(t.l)][static_cast<std::size_t>(t.lp)];
      if (gammaMin && *gammaMin > *e) {
        ev.pass = true;
        ev.note = "consumption exponent " + gammaMin->str() +
                  " beats prefactor " + e->str();
      } else if (reachTau && *reachTau + *e < Rational(0)) {
        ev.pass = true;
        ev.note = "transfer order " + reachTau->str() +
                  " beats prefactor " + e->str();
      } else {
        ev.pass = false;
        ev.note = "no exponent argument closes prefactor " + e->str();
        if (!res.witness) res.witness = t;
        all = false;
      }
    }
    res.evidence.push_back(std::move(ev));
  }
  res.status = all ? CheckStatus::ProvedProp2 : CheckStatus::Fail;
  return res;
}

// Quasi-steady contributions vanish at double rate: the leading exponent of
// N^{beta*_l - 2 a_j} mu_{i l'} evaluated along the scaling must be negative
// for every required tuple.
inline PropResult check_prop3_mu_orders(const ReactionNetwork& net,
                                        const IntermediateDecomposition& dec,
                                        const ScalingSpec& spec) {
  PropResult res;
  if (dec.size() > kTreeEnumerationCap) {
    res.status = CheckStatus::NotApplicable;
    return res;
  }
  ScaleSummary s = compute_scale_summary(net, dec, spec);
  auto triples = required_triples(net, dec);
  std::map<int, MuSymbolic> symCache;
  bool all = true;
  for (const auto& t : triples) {
    // Quantified over every initial reactant feeding H_l directly.
    for (const auto& rx : net.reactions) {
      if (rx.target != dec.vComplex[static_cast<std::size_t>(t.l)]) continue;
      if (dec.isIntermediateComplex(rx.source)) continue;
      int i = rx.source;
      auto [it, inserted] = symCache.try_emplace(i);
      if (inserted) it->second = mu_symbolic(net, dec, i);
      const MuSymbolic& sym = it->second;
      TripleEvidence ev;
      ev.triple = t;
      const ExtRational& aj = s.a.at(t.j);
      const NPoly& num = sym.num[static_cast<std::size_t>(t.lp)];
      if (aj.isPlusInf()) {
        ev.pass = true;
        ev.note = "a_j = +inf";
      } else if (num.isZero()) {
        ev.pass = true;
        ev.note = "mu contribution identically zero";
      } else {
        const Rational bs = s.betaStar[static_cast<std::size_t>(t.l)].value();
        Rational expo = bs - Rational(2) * aj.value() +
                        num.leading().exp - sym.den.leading().exp +
                        spec.pairing(net.complexes[static_cast<std::size_t>(i)]);
        if (expo.isNegative()) {
          ev.pass = true;
          ev.note = "mu order " + expo.str() + " < 0";
        } else {
          ev.pass = false;
          ev.note = "mu order " + expo.str() + " >= 0";
          if (!res.witness) res.witness = t;
          all = false;
        }
      }
      res.evidence.push_back(std::move(ev));
    }
  }
  res.status = all ? CheckStatus::ProvedProp3 : CheckStatus::Fail;
  return res;
}

struct DiagnosticConfig {
  // Half-decade steps; the top end is high enough that the slowest bundled
  // regimes (stretched-exponential decay in sqrt(N)) clear the pass threshold.
  std::vector<double> Ngrid{10.0,   31.622776601683793, 100.0,
                            316.22776601683796, 1000.0,
                            3162.2776601683795, 10000.0};
  std::vector<double> epsilons{0.1, 1.0};
  double decadeFactor = 10.0;
  double passThreshold = 1e-4;
  double violateThreshold = 1e-2;
};

struct DiagnosticRow {
  RequiredTriple triple;
  double eps = 0;
  std::vector<double> values;  // aligned with the N grid
  bool overflow = false;
  bool pass = false;
  bool violated = false;
};

struct NumericDiagnostic {
  CheckStatus verdict = CheckStatus::Unknown;
  std::vector<DiagnosticRow> rows;
  int autoPassed = 0;
};

// Evaluates the fast-consumption quantity N^{beta*-a} [exp(N^{a-beta*} eps
// L^N)]_{l'l} over the (N, eps) grid. Numeric evidence only: a decreasing
// sequence supports the assumption, a sequence bounded away from zero
// refutes it at desk scale, anything else is inconclusive.
inline NumericDiagnostic numeric_rate_to_zero_diagnostic(
    const ReactionNetwork& net, const IntermediateDecomposition& dec,
    const ScalingSpec& spec, const DiagnosticConfig& cfg = {}) {
  NumericDiagnostic diag;
  ScaleSummary s = compute_scale_summary(net, dec, spec);
  auto triples = required_triples(net, dec);
  bool anyViolated = false, allPass = true;
  for (const auto& t : triples) {
    auto e = prefactor_exponent(s, t.l, t.j);
    if (!e) {
      ++diag.autoPassed;
      continue;
    }
    double ed = e->toDouble();
    for (double eps : cfg.epsilons) {
      DiagnosticRow row;
      row.triple = t;
      row.eps = eps;
      for (double N : cfg.Ngrid) {
        LaplacianCore core = assemble_laplacian(net, dec, N);
        double value = std::nan("");
        try {
          Eigen::MatrixXd E = expm(core, eps * std::pow(N, -ed));
          value = std::pow(N, ed) * E(t.lp, t.l);
        } catch (const std::overflow_error&) {
          row.overflow = true;
        }
        row.values.push_back(value);
      }
      bool valid = !row.overflow;
      for (double v : row.values)
        if (!std::isfinite(v)) valid = false;
      if (valid) {
        double first = row.values.front(), last = row.values.back();
        double lo = *std::min_element(row.values.begin(), row.values.end());
        row.pass = last < cfg.passThreshold && first >= cfg.decadeFactor * last;
        row.violated = lo >= cfg.violateThreshold;
      }
      if (row.violated) anyViolated = true;
      if (!row.pass) allPass = false;
      diag.rows.push_back(std::move(row));
    }
  }
  if (anyViolated)
    diag.verdict = CheckStatus::ViolatedNumeric;
  else if (allPass)
    diag.verdict = CheckStatus::NumericSupport;
  else
    diag.verdict = CheckStatus::Unknown;
  return diag;
}

struct AssumptionVerdict {
  CheckStatus status = CheckStatus::Unknown;
  bool triviallyDischarged = false;
  PropResult prop1, prop2, prop3;
  NumericDiagnostic numeric;
  ScaleSummary summary;
  std::vector<RequiredTriple> triples;
};

// Orchestrates the exact sufficient conditions and the numeric diagnostic.
// A plain PROVED is reserved for the case where every required triple is
// discharged directly from the scale summary: the prefactor exponent is
// -infinity or negative, making the quantity vanish because the exponential
// factor never exceeds one.
inline AssumptionVerdict check_all(const ReactionNetwork& net,
                                   const IntermediateDecomposition& dec,
                                   const ScalingSpec& spec,
                                   const DiagnosticConfig& cfg = {}) {
  AssumptionVerdict v;
  v.summary = compute_scale_summary(net, dec, spec);
  v.triples = required_triples(net, dec);
  v.triviallyDischarged = true;
  for (const auto& t : v.triples) {
    auto e = prefactor_exponent(v.summary, t.l, t.j);
    if (e && !e->isNegative()) v.triviallyDischarged = false;
  }
  v.prop1 = check_prop1_uniform_order(net, dec, spec);
  v.prop2 = check_prop2_acyclic(net, dec, spec);
  v.prop3 = check_prop3_mu_orders(net, dec, spec);
  v.numeric = numeric_rate_to_zero_diagnostic(net, dec, spec, cfg);
  if (v.triviallyDischarged)
    v.status = CheckStatus::Proved;
  else if (v.prop1.status == CheckStatus::ProvedProp1)
    v.status = CheckStatus::ProvedProp1;
  else if (v.prop2.status == CheckStatus::ProvedProp2)
    v.status = CheckStatus::ProvedProp2;
  else if (v.prop3.status == CheckStatus::ProvedProp3)
    v.status = CheckStatus::ProvedProp3;
  else
    v.status = v.numeric.verdict;
  return v;
}

}  // namespace crnred
