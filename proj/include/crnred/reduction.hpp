#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crnred/laplacian.hpp"
#include "crnred/npoly.hpp"
#include "crnred/parser.hpp"

namespace crnred {

// One reaction of the reduced system. The rate function of state z and scale
// N factors as rate(N) * z^{y_src}: the state monomial is always the source
// complex of the originating reactions, and rate(N) is an exact ratio of
// polynomials in N collecting the direct constant and the intermediate-
// mediated spanning-tree terms.
struct ReducedReaction {
  int source = -1;  // indices into ReducedNetwork::complexes
  int target = -1;
  NRational rate;
  bool direct = false;    // carries a reaction between non-intermediates
  bool mediated = false;  // carries an intermediate-mediated route
  std::optional<Rational> directEta;
};

struct ReducedNetwork {
  std::vector<std::string> species;  // non-intermediate species, input order
  std::vector<int> origIndex;        // reduced index -> original index
  std::vector<Complex> complexes;    // over reduced indices, sorted
  std::vector<ReducedReaction> reactions;  // sorted by (source, target)
  ScalingSpec scaling;               // re-indexed to reduced species
  NPoly treeDenominator;             // shared mediated-rate denominator

  int speciesCount() const { return static_cast<int>(species.size()); }
  int reactionCount() const { return static_cast<int>(reactions.size()); }
  const Complex& source(int r) const {
    return complexes[static_cast<std::size_t>(
        reactions[static_cast<std::size_t>(r)].source)];
  }
  const Complex& target(int r) const {
    return complexes[static_cast<std::size_t>(
        reactions[static_cast<std::size_t>(r)].target)];
  }

  double intensity(int r, const std::vector<double>& z, double N) const {
    double v = reactions[static_cast<std::size_t>(r)].rate.eval(N);
    for (const auto& [k, c] : source(r).stoich)
      for (int i = 0; i < c; ++i) v *= z[static_cast<std::size_t>(k)];
    return v;
  }
};

// Builds the reduced reaction system on the non-intermediate species: direct
// reactions keep their rate constants, and every ordered pair (initial
// reactant, final product) connected through intermediates gains a mediated
// rate; pairs present in both forms appear once with the summed rate.
inline ReducedNetwork reduce(const ReactionNetwork& net,
                             const IntermediateDecomposition& dec,
                             const ScalingSpec& spec) {
  ReducedNetwork red;
  std::vector<int> toReduced(static_cast<std::size_t>(net.speciesCount()), -1);
  for (int k = 0; k < net.speciesCount(); ++k) {
    if (dec.speciesToL[static_cast<std::size_t>(k)] >= 0) continue;
    toReduced[static_cast<std::size_t>(k)] = red.speciesCount();
    red.species.push_back(net.species[static_cast<std::size_t>(k)]);
    red.origIndex.push_back(k);
  }
  for (int k = 0; k < red.speciesCount(); ++k)
    red.scaling.alpha[k] = spec.of(red.origIndex[static_cast<std::size_t>(k)]);

  auto translate = [&](const Complex& c) {
    Complex out;
    for (const auto& [k, m] : c.stoich)
      out.stoich[toReduced[static_cast<std::size_t>(k)]] = m;
    return out;
  };

  struct Entry {
    NPoly direct;
    NPoly mediatedNum;
    std::optional<Rational> directEta;
  };
  std::map<std::pair<int, int>, Entry> entries;  // original complex indices

  for (int r : dec.R0) {
    const auto& rx = net.reactions[static_cast<std::size_t>(r)];
    Entry& e = entries[{rx.source, rx.target}];
    e.direct = NPoly::monomial(rx.law.kappa, rx.law.eta);
    e.directEta = rx.law.eta;
  }

  red.treeDenominator = NPoly::constant(Rational(1));
  if (!dec.U.empty()) {
    // Per-target exit constants kappa_{lj}.
    std::map<int, std::vector<NPoly>> exitTo;  // W complex -> per-l constant
    for (int j : dec.W)
      exitTo[j].assign(static_cast<std::size_t>(dec.size()), NPoly::zero());
    for (const auto& rx : net.reactions) {
      int ls = dec.complexToL[static_cast<std::size_t>(rx.source)];
      if (ls < 0) continue;
      auto it = exitTo.find(rx.target);
      if (it != exitTo.end())
        it->second[static_cast<std::size_t>(ls)] +=
            NPoly::monomial(rx.law.kappa, rx.law.eta);
    }
    bool haveDen = false;
    for (int i : dec.U) {
      MuSymbolic sym = mu_symbolic(net, dec, i);
      if (!haveDen) {
        // The denominator (trees rooted at the absorbing node) uses no
        // production edge, so it is the same for every initial reactant.
        red.treeDenominator = sym.den;
        haveDen = true;
      }
      for (int j : dec.W) {
        if (j == i) continue;  // flow back to the source is not a reaction
        NPoly num = NPoly::zero();
        const auto& kj = exitTo[j];
        for (int l = 0; l < dec.size(); ++l)
          num += kj[static_cast<std::size_t>(l)] * sym.num[static_cast<std::size_t>(l)];
        if (num.isZero()) continue;  // y_i does not reach y_j
        Entry& e = entries[{i, j}];
        e.mediatedNum += num;
      }
    }
  }

  std::set<Complex> cset;
  for (const auto& [key, e] : entries) {
    cset.insert(translate(net.complexes[static_cast<std::size_t>(key.first)]));
    cset.insert(translate(net.complexes[static_cast<std::size_t>(key.second)]));
  }
  red.complexes.assign(cset.begin(), cset.end());
  auto complexIdx = [&](const Complex& c) {
    auto it = std::lower_bound(red.complexes.begin(), red.complexes.end(), c);
    return static_cast<int>(it - red.complexes.begin());
  };

  for (const auto& [key, e] : entries) {
    ReducedReaction rr;
    rr.source = complexIdx(translate(net.complexes[static_cast<std::size_t>(key.first)]));
    rr.target = complexIdx(translate(net.complexes[static_cast<std::size_t>(key.second)]));
    rr.direct = !e.direct.isZero();
    rr.mediated = !e.mediatedNum.isZero();
    rr.directEta = e.directEta;
    NRational rate = NRational(e.direct, NPoly::constant(Rational(1)));
    if (rr.mediated)
      rate = rate + NRational(e.mediatedNum, red.treeDenominator);
    rr.rate = rate;
    red.reactions.push_back(std::move(rr));
  }
  std::sort(red.reactions.begin(), red.reactions.end(),
            [](const ReducedReaction& a, const ReducedReaction& b) {
              return std::pair{a.source, a.target} <
                     std::pair{b.source, b.target};
            });
  return red;
}

// beta^r per reduced reaction: the exact leading N-exponent of the rate
// evaluated along the scaling, rate(N) * N^{<alpha, y_src>}. Exactness holds
// because all polynomial coefficients are positive (no cancellation).
inline std::vector<Rational> compute_beta_r(const ReducedNetwork& red) {
  std::vector<Rational> out;
  out.reserve(red.reactions.size());
  for (int r = 0; r < red.reactionCount(); ++r) {
    const auto& rr = red.reactions[static_cast<std::size_t>(r)];
    out.push_back(rr.rate.leadingExponent() + red.scaling.pairing(red.source(r)));
  }
  return out;
}

struct SingleScaleViolation {
  int reaction = -1;
  int species = -1;  // reduced index; -1 marks the direct-rate inequality
  Rational betaR;
  Rational bound;
};

struct SingleScaleResult {
  bool pass = true;
  std::vector<Rational> betaR;
  std::vector<SingleScaleViolation> violations;
};

// The single-scale condition on the reduced system: for every reaction and
// every species changed by it, beta^r must not exceed the species' abundance
// exponent; and for reactions with a direct part, beta^r must dominate the
// direct exponent (automatic here since the direct term is one summand of
// the rate).
inline SingleScaleResult check_single_scale(const ReducedNetwork& red) {
  SingleScaleResult res;
  res.betaR = compute_beta_r(red);
  for (int r = 0; r < red.reactionCount(); ++r) {
    const auto& rr = red.reactions[static_cast<std::size_t>(r)];
    const Complex& src = red.source(r);
    const Complex& tgt = red.target(r);
    std::set<int> touched;
    for (const auto& [k, c] : src.stoich) touched.insert(k);
    for (const auto& [k, c] : tgt.stoich) touched.insert(k);
    for (int k : touched) {
      if (tgt.coeff(k) == src.coeff(k)) continue;
      Rational ak = red.scaling.of(k);
      if (res.betaR[static_cast<std::size_t>(r)] > ak) {
        res.pass = false;
        res.violations.push_back(
            {r, k, res.betaR[static_cast<std::size_t>(r)], ak});
      }
    }
    if (rr.directEta) {
      Rational beta = *rr.directEta + red.scaling.pairing(src);
      if (res.betaR[static_cast<std::size_t>(r)] < beta) {
        res.pass = false;
        res.violations.push_back(
            {r, -1, res.betaR[static_cast<std::size_t>(r)], beta});
      }
    }
  }
  return res;
}

struct LimitingReaction {
  Complex source, target;       // limit complexes, reduced species indices
  Rational constant;            // N-free rate constant, folded initials included
  std::map<int, int> monomial;  // rate-law exponents of surviving species
  int fromReduced = -1;
  bool duplicatePair = false;
};

struct RemovedLimitingReaction {
  int fromReduced = -1;
  std::string reason;
};

struct LimitingNetwork {
  std::vector<std::string> species;  // same indexing as the reduced network
  std::vector<int> origIndex;
  std::vector<LimitingReaction> reactions;
  std::vector<RemovedLimitingReaction> removed;
  std::map<int, Rational> folded;  // reduced species index -> initial value

  double intensity(int r, const std::vector<double>& z) const {
    const auto& rx = reactions[static_cast<std::size_t>(r)];
    double v = rx.constant.toDouble();
    for (const auto& [k, c] : rx.monomial)
      for (int i = 0; i < c; ++i) v *= z[static_cast<std::size_t>(k)];
    return v;
  }
};

// The scale-infinity limit of the reduced system. Complex entries survive
// exactly when beta^r equals the species exponent; entries with beta^r below
// it vanish; entries above it diverge and are only tolerable for species
// unchanged by the reaction (they drop from both complexes). Reactions whose
// two limit complexes coincide change nothing and are removed. Species left
// in no limit complex but still present in a surviving rate monomial stay
// constant, so their initial values multiply into the rate constants.
inline LimitingNetwork build_limiting(
    const ReducedNetwork& red, const std::map<int, Rational>& initials = {}) {
  LimitingNetwork lim;
  lim.species = red.species;
  lim.origIndex = red.origIndex;
  std::vector<Rational> betaR = compute_beta_r(red);

  struct Pending {
    Complex src, tgt;
    Rational constant;
    std::map<int, int> monomial;
    int fromReduced;
  };
  std::vector<Pending> pending;

  for (int r = 0; r < red.reactionCount(); ++r) {
    const Complex& src = red.source(r);
    const Complex& tgt = red.target(r);
    const Rational& br = betaR[static_cast<std::size_t>(r)];
    Complex srcL, tgtL;
    for (const auto& [k, c] : src.stoich) {
      Rational ak = red.scaling.of(k);
      if (br == ak) srcL.stoich[k] = c;
      if (br > ak && tgt.coeff(k) != c)
        throw ValidationError(
            "divergent complex entry not cancelled: species '" +
            red.species[static_cast<std::size_t>(k)] + "' in reaction " +
            std::to_string(r));
    }
    for (const auto& [k, c] : tgt.stoich) {
      Rational ak = red.scaling.of(k);
      if (br == ak) tgtL.stoich[k] = c;
      if (br > ak && src.coeff(k) != c)
        throw ValidationError(
            "divergent complex entry not cancelled: species '" +
            red.species[static_cast<std::size_t>(k)] + "' in reaction " +
            std::to_string(r));
    }
    if (srcL == tgtL) {
      lim.removed.push_back({r, "limit complexes coincide"});
      continue;
    }
    Pending p;
    p.src = srcL;
    p.tgt = tgtL;
    p.constant = red.reactions[static_cast<std::size_t>(r)].rate.leadingCoeff();
    p.monomial = src.stoich;
    p.fromReduced = r;
    pending.push_back(std::move(p));
  }

  // Species appearing in no surviving limit complex are constant in the
  // limiting dynamics; fold their initial values into the rate constants.
  std::set<int> inComplexes;
  for (const auto& p : pending) {
    for (const auto& [k, c] : p.src.stoich) inComplexes.insert(k);
    for (const auto& [k, c] : p.tgt.stoich) inComplexes.insert(k);
  }
  for (auto& p : pending) {
    for (auto it = p.monomial.begin(); it != p.monomial.end();) {
      int k = it->first;
      if (inComplexes.count(k)) {
        ++it;
        continue;
      }
      auto init = initials.find(k);
      Rational z0 = init == initials.end() ? Rational(1) : init->second;
      lim.folded.emplace(k, z0);
      p.constant *= Rational::pow(z0, it->second);
      it = p.monomial.erase(it);
    }
  }

  // Distinct reduced reactions may collapse onto the same limit pair; they
  // are kept separate and flagged.
  std::map<std::pair<Complex, Complex>, int> pairCount;
  for (const auto& p : pending) ++pairCount[{p.src, p.tgt}];
  for (auto& p : pending) {
    LimitingReaction lr;
    lr.source = p.src;
    lr.target = p.tgt;
    lr.constant = p.constant;
    lr.monomial = p.monomial;
    lr.fromReduced = p.fromReduced;
    lr.duplicatePair = pairCount[{p.src, p.tgt}] > 1;
    lim.reactions.push_back(std::move(lr));
  }
  return lim;
}

struct SumIdentityReport {
  double flowBalance = 0;   // rows of L mu + lambda per initial reactant
  double splitting = 0;     // sum_l kappa_{lj} mu_{il} vs sum_l lambda_{il} pi_{lj}
  double aggregate = 0;     // total exit flux vs total production
  double max() const {
    return std::max(flowBalance, std::max(splitting, aggregate));
  }
};

// Verifies the stationary flow identities behind the reduced rates at a
// given state: the balance L mu_i = -lambda_i defining mu, the per-product
// split through the exit probabilities, and conservation of total flux.
inline SumIdentityReport verify_sum_identity(
    const ReactionNetwork& net, const IntermediateDecomposition& dec,
    const std::vector<double>& x, double N) {
  SumIdentityReport rep;
  if (dec.size() == 0) return rep;
  LaplacianCore core = assemble_laplacian(net, dec, N);
  Eigen::MatrixXd pi = splitting_probabilities(net, dec, N);
  auto rel = [](double resid, double scale) {
    return scale > 0 ? resid / scale : resid;
  };
  for (int i : dec.U) {
    Eigen::VectorXd lambda = production_vector(net, dec, i, x, N);
    Eigen::VectorXd mu = mu_by_solve(net, dec, i, x, N);
    Eigen::VectorXd resid = core.M * mu + lambda;
    // Balance rows cancel exactly, so the residual is measured against the
    // magnitude of the terms entering the cancellation, not their sum.
    Eigen::VectorXd rowScale =
        core.M.cwiseAbs() * mu.cwiseAbs() + lambda.cwiseAbs();
    for (int l = 0; l < dec.size(); ++l)
      rep.flowBalance =
          std::max(rep.flowBalance, rel(std::abs(resid(l)), rowScale(l)));
    double totalExit = 0;
    for (std::size_t jc = 0; jc < dec.W.size(); ++jc) {
      int j = dec.W[jc];
      double viaMu = 0, viaPi = 0;
      for (const auto& rx : net.reactions) {
        if (rx.target != j) continue;
        int ls = dec.complexToL[static_cast<std::size_t>(rx.source)];
        if (ls >= 0) viaMu += rx.law.value(N) * mu(ls);
      }
      for (int l = 0; l < dec.size(); ++l)
        viaPi += lambda(l) * pi(l, static_cast<int>(jc));
      rep.splitting = std::max(
          rep.splitting, rel(std::abs(viaMu - viaPi), std::max(viaMu, viaPi)));
      totalExit += viaMu;
    }
    double totalIn = lambda.sum();
    rep.aggregate = std::max(
        rep.aggregate, rel(std::abs(totalExit - totalIn), std::max(totalExit, totalIn)));
  }
  return rep;
}

// Reduced network in the text format, with rates as exact rational functions
// of N. Plain monomial rates keep the standard syntax, so a reduction with
// no intermediates round-trips byte-identically through the parser.
inline std::string serialize_reduced(const ReducedNetwork& red) {
  std::ostringstream os;
  os << "species:";
  for (const auto& name : red.species) os << ' ' << name;
  os << '\n';
  os << "alpha:\n";
  for (int k = 0; k < red.speciesCount(); ++k)
    os << "  " << red.species[static_cast<std::size_t>(k)] << " = "
       << red.scaling.of(k).str() << '\n';
  os << "reactions:\n";
  for (int r = 0; r < red.reactionCount(); ++r)
    os << "  " << red.source(r).str(red.species) << " -> "
       << red.target(r).str(red.species) << " @ "
       << red.reactions[static_cast<std::size_t>(r)].rate.str() << '\n';
  return os.str();
}

inline std::string serialize_limiting(const LimitingNetwork& lim) {
  std::ostringstream os;
  os << "species:";
  for (const auto& name : lim.species) os << ' ' << name;
  os << '\n';
  for (const auto& [k, z0] : lim.folded)
    os << "# folded constant: " << lim.species[static_cast<std::size_t>(k)]
       << " = " << z0.str() << '\n';
  os << "reactions:\n";
  for (const auto& rx : lim.reactions) {
    os << "  " << rx.source.str(lim.species) << " -> "
       << rx.target.str(lim.species) << " @ " << rx.constant.str();
    std::vector<std::string> notes;
    if (rx.monomial != rx.source.stoich) {
      // The limit rate law can retain state factors that no longer appear in
      // the limit source complex; record them so the line stays faithful.
      std::string law = "rate law: " + rx.constant.str();
      for (const auto& [k, c] : rx.monomial) {
        law += " * " + lim.species[static_cast<std::size_t>(k)];
        if (c != 1) law += "^" + std::to_string(c);
      }
      notes.push_back(law);
    }
    if (rx.duplicatePair) notes.push_back("duplicate limit pair");
    for (std::size_t i = 0; i < notes.size(); ++i)
      os << (i == 0 ? "  # " : "; ") << notes[i];
    os << '\n';
  }
  return os.str();
}

}  // namespace crnred
