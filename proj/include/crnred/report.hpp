#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "crnred/assumptions.hpp"
#include "crnred/intermediates.hpp"
#include "crnred/network.hpp"
#include "crnred/reduction.hpp"
#include "crnred/simulate.hpp"

#include "json.hpp"

namespace crnred {

using json = nlohmann::json;  // std::map storage keeps keys sorted

inline std::string reaction_str(const ReactionNetwork& net, int r) {
  return net.source(r).str(net.species) + " -> " + net.target(r).str(net.species);
}

inline json network_json(const NetworkBundle& bundle) {
  json j;
  j["species"] = bundle.net.species;
  std::vector<std::string> inter;
  for (int s : bundle.intermediates)
    inter.push_back(bundle.net.species[static_cast<std::size_t>(s)]);
  j["intermediates"] = inter;
  json alpha;
  for (std::size_t k = 0; k < bundle.net.species.size(); ++k) {
    bool isInter = false;
    for (int s : bundle.intermediates)
      if (s == static_cast<int>(k)) isInter = true;
    if (!isInter)
      alpha[bundle.net.species[k]] =
          bundle.scaling.of(static_cast<int>(k)).str();
  }
  j["alpha"] = alpha;
  json reactions = json::array();
  for (int r = 0; r < bundle.net.reactionCount(); ++r) {
    json rr;
    rr["reaction"] = reaction_str(bundle.net, r);
    const auto& law = bundle.net.reactions[static_cast<std::size_t>(r)].law;
    rr["kappa"] = law.kappa.str();
    rr["eta"] = law.eta.str();
    reactions.push_back(rr);
  }
  j["reactions"] = reactions;
  return j;
}

inline json decomposition_json(const ReactionNetwork& net,
                               const IntermediateDecomposition& dec) {
  json j;
  std::vector<std::string> vnames;
  for (int s : dec.vSpecies) vnames.push_back(net.species[static_cast<std::size_t>(s)]);
  j["intermediates"] = vnames;
  std::vector<std::string> u, w;
  for (int c : dec.U) u.push_back(net.complexes[static_cast<std::size_t>(c)].str(net.species));
  for (int c : dec.W) w.push_back(net.complexes[static_cast<std::size_t>(c)].str(net.species));
  j["initialReactants"] = u;
  j["finalProducts"] = w;
  std::vector<std::string> r0, r1;
  for (int r : dec.R0) r0.push_back(reaction_str(net, r));
  for (int r : dec.R1) r1.push_back(reaction_str(net, r));
  j["directReactions"] = r0;
  j["intermediateReactions"] = r1;
  j["acyclic"] = is_intermediate_acyclic(net, dec);
  return j;
}

inline json reduced_json(const ReducedNetwork& red) {
  json j;
  j["species"] = red.species;
  json alpha;
  for (int k = 0; k < red.speciesCount(); ++k)
    alpha[red.species[static_cast<std::size_t>(k)]] = red.scaling.of(k).str();
  j["alpha"] = alpha;
  std::vector<Rational> betaR = compute_beta_r(red);
  json reactions = json::array();
  for (int r = 0; r < red.reactionCount(); ++r) {
    const auto& rr = red.reactions[static_cast<std::size_t>(r)];
    json e;
    e["source"] = red.complexes[static_cast<std::size_t>(rr.source)].str(red.species);
    e["target"] = red.complexes[static_cast<std::size_t>(rr.target)].str(red.species);
    e["rate"] = rr.rate.str();
    e["betaR"] = betaR[static_cast<std::size_t>(r)].str();
    e["direct"] = rr.direct;
    e["mediated"] = rr.mediated;
    reactions.push_back(e);
  }
  j["reactions"] = reactions;
  return j;
}

inline json single_scale_json(const SingleScaleResult& res,
                              const ReducedNetwork& red) {
  json j;
  j["pass"] = res.pass;
  json viol = json::array();
  for (const auto& v : res.violations) {
    json e;
    const auto& rr = red.reactions[static_cast<std::size_t>(v.reaction)];
    e["reaction"] =
        red.complexes[static_cast<std::size_t>(rr.source)].str(red.species) +
        " -> " +
        red.complexes[static_cast<std::size_t>(rr.target)].str(red.species);
    e["species"] = v.species < 0
                       ? std::string("(direct-rate order)")
                       : red.species[static_cast<std::size_t>(v.species)];
    e["betaR"] = v.betaR.str();
    e["bound"] = v.bound.str();
    viol.push_back(e);
  }
  j["violations"] = viol;
  return j;
}

inline json limiting_json(const LimitingNetwork& lim) {
  json j;
  j["species"] = lim.species;
  json reactions = json::array();
  for (const auto& lr : lim.reactions) {
    json e;
    e["source"] = lr.source.str(lim.species);
    e["target"] = lr.target.str(lim.species);
    e["constant"] = lr.constant.str();
    json mono;
    for (const auto& [k, c] : lr.monomial)
      mono[lim.species[static_cast<std::size_t>(k)]] = c;
    e["monomial"] = mono;
    e["duplicatePair"] = lr.duplicatePair;
    reactions.push_back(e);
  }
  j["reactions"] = reactions;
  json removed = json::array();
  for (const auto& rm : lim.removed) {
    json e;
    e["fromReduced"] = rm.fromReduced;
    e["reason"] = rm.reason;
    removed.push_back(e);
  }
  j["removed"] = removed;
  json folded;
  for (const auto& [k, v] : lim.folded)
    folded[lim.species[static_cast<std::size_t>(k)]] = v.str();
  j["folded"] = folded;
  return j;
}

inline json scale_summary_json(const ScaleSummary& s, const ReactionNetwork& net,
                               const IntermediateDecomposition& dec) {
  json j;
  json a;
  for (const auto& [cx, v] : s.a)
    a[net.complexes[static_cast<std::size_t>(cx)].str(net.species)] = v.str();
  j["a"] = a;
  json bs;
  for (int l = 0; l < dec.size(); ++l)
    bs[net.species[static_cast<std::size_t>(
        dec.vSpecies[static_cast<std::size_t>(l)])]] =
        s.betaStar[static_cast<std::size_t>(l)].str();
  j["betaStar"] = bs;
  return j;
}

namespace detail {

inline json triple_json(const RequiredTriple& t, const ReactionNetwork& net,
                        const IntermediateDecomposition& dec) {
  json j;
  j["l"] = net.species[static_cast<std::size_t>(
      dec.vSpecies[static_cast<std::size_t>(t.l)])];
  j["lPrime"] = net.species[static_cast<std::size_t>(
      dec.vSpecies[static_cast<std::size_t>(t.lp)])];
  j["j"] = net.complexes[static_cast<std::size_t>(t.j)].str(net.species);
  return j;
}

inline json prop_json(const PropResult& p, const ReactionNetwork& net,
                      const IntermediateDecomposition& dec) {
  json j;
  j["status"] = status_name(p.status);
  json ev = json::array();
  for (const auto& e : p.evidence) {
    json row = triple_json(e.triple, net, dec);
    row["pass"] = e.pass;
    row["note"] = e.note;
    ev.push_back(row);
  }
  j["evidence"] = ev;
  if (p.witness) j["witness"] = triple_json(*p.witness, net, dec);
  return j;
}

}  // namespace detail

inline json verdict_json(const AssumptionVerdict& v, const ReactionNetwork& net,
                         const IntermediateDecomposition& dec) {
  json j;
  j["status"] = status_name(v.status);
  j["triviallyDischarged"] = v.triviallyDischarged;
  j["scaleSummary"] = scale_summary_json(v.summary, net, dec);
  json triples = json::array();
  for (const auto& t : v.triples) triples.push_back(detail::triple_json(t, net, dec));
  j["requiredTriples"] = triples;
  j["prop1"] = detail::prop_json(v.prop1, net, dec);
  j["prop2"] = detail::prop_json(v.prop2, net, dec);
  j["prop3"] = detail::prop_json(v.prop3, net, dec);
  json num;
  num["verdict"] = status_name(v.numeric.verdict);
  num["autoPassed"] = v.numeric.autoPassed;
  json rows = json::array();
  for (const auto& r : v.numeric.rows) {
    json row = detail::triple_json(r.triple, net, dec);
    row["eps"] = r.eps;
    row["values"] = r.values;
    row["overflow"] = r.overflow;
    row["pass"] = r.pass;
    row["violated"] = r.violated;
    rows.push_back(row);
  }
  num["table"] = rows;
  j["numeric"] = num;
  return j;
}

inline json sweep_json(const SweepResult& res) {
  json j;
  json cells = json::array();
  for (const auto& c : res.cells) {
    json e;
    e["N"] = c.N;
    if (c.failed) {
      e["failed"] = true;
      e["message"] = c.message;
    } else {
      e["errFullVsReduced"] = c.errFullReduced;
      if (std::isfinite(c.errFullLimiting))
        e["errFullVsLimiting"] = c.errFullLimiting;
    }
    cells.push_back(e);
  }
  j["cells"] = cells;
  j["strictlyDecreasing"] = res.decreasingFullReduced;
  return j;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr,
                                 const std::vector<std::string>& names,
                                 const std::vector<double>& grid) {
  os << "time";
  for (const auto& n : names) os << "," << n;
  os << "\n";
  for (double t : grid) {
    Eigen::VectorXd y = tr.eval(t);
    os << format_double(t);
    for (Eigen::Index i = 0; i < y.size(); ++i)
      os << "," << format_double(y[i]);
    os << "\n";
  }
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& res) {
  os << "N,errFullVsReduced,errFullVsLimiting\n";
  for (const auto& c : res.cells) {
    os << format_double(c.N) << ",";
    if (c.failed) {
      os << "nan,nan\n";
    } else {
      os << format_double(c.errFullReduced) << ","
         << format_double(c.errFullLimiting) << "\n";
    }
  }
}

}  // namespace crnred
