#pragma once

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "crnred/network.hpp"

namespace crnred {

// The decomposition induced by a valid intermediate set: the intermediates V
// (as species and as their unit complexes), the initial reactants U (complexes
// outside V that react into V), the final products W (complexes outside V
// produced from V), and the reaction subsets R0 (neither endpoint touches V)
// and R1 (source or target in V). Holds indices into the owning network only.
struct IntermediateDecomposition {
  std::vector<int> vSpecies;   // ascending species index
  std::vector<int> vComplex;   // unit complex index of vSpecies[l]
  std::vector<int> U, W;       // ascending complex indices
  std::vector<int> R0, R1;     // ascending reaction indices

  std::vector<int> speciesToL;  // species index -> l, or -1
  std::vector<int> complexToL;  // complex index -> l, or -1

  // reachV[c][l]: a path c -> H_{m1} -> ... -> H_l exists whose nodes after c
  // are all intermediates (at least one step).
  std::vector<std::vector<char>> reachV;

  std::set<std::pair<int, int>> edges;  // (source complex, target complex)

  int size() const { return static_cast<int>(vSpecies.size()); }
  bool isIntermediateComplex(int c) const {
    return complexToL[static_cast<std::size_t>(c)] >= 0;
  }
  bool hasEdge(int cs, int ct) const { return edges.count({cs, ct}) != 0; }
};

// Checks both requirements on an intermediate set: every proposed species
// occurs only as its own unit complex, and every intermediate lies on a
// directed path from a non-intermediate complex to a non-intermediate
// complex whose interior nodes are all intermediates.
inline IntermediateDecomposition validate_intermediates(
    const ReactionNetwork& net, const std::vector<int>& proposed) {
  IntermediateDecomposition dec;
  dec.vSpecies = proposed;
  std::sort(dec.vSpecies.begin(), dec.vSpecies.end());
  dec.vSpecies.erase(std::unique(dec.vSpecies.begin(), dec.vSpecies.end()),
                     dec.vSpecies.end());
  dec.speciesToL.assign(static_cast<std::size_t>(net.speciesCount()), -1);
  dec.complexToL.assign(static_cast<std::size_t>(net.complexCount()), -1);

  for (std::size_t l = 0; l < dec.vSpecies.size(); ++l) {
    int s = dec.vSpecies[l];
    if (s < 0 || s >= net.speciesCount())
      throw ValidationError("unknown species index in intermediate set");
    const std::string& name = net.species[static_cast<std::size_t>(s)];
    int unit = -1;
    for (int c = 0; c < net.complexCount(); ++c) {
      const Complex& cx = net.complexes[static_cast<std::size_t>(c)];
      if (!cx.contains(s)) continue;
      if (cx.unitSpecies() != std::optional<int>(s))
        throw ValidationError("species '" + name +
                              "' appears in a non-unit complex '" +
                              cx.str(net.species) + "'");
      unit = c;
    }
    if (unit < 0)
      throw ValidationError("intermediate '" + name +
                            "' not on any U->W path");
    dec.vComplex.push_back(unit);
    dec.speciesToL[static_cast<std::size_t>(s)] = static_cast<int>(l);
    dec.complexToL[static_cast<std::size_t>(unit)] = static_cast<int>(l);
  }

  for (const auto& rx : net.reactions) dec.edges.insert({rx.source, rx.target});

  const int n = dec.size();
  auto lOf = [&](int c) { return dec.complexToL[static_cast<std::size_t>(c)]; };

  // Forward closure: intermediates fed (directly or through intermediates)
  // from outside V.
  std::vector<char> fed(static_cast<std::size_t>(n), 0);
  std::vector<char> exits(static_cast<std::size_t>(n), 0);
  std::deque<int> queue;
  for (const auto& rx : net.reactions) {
    int lt = lOf(rx.target);
    if (lt >= 0 && lOf(rx.source) < 0 && !fed[static_cast<std::size_t>(lt)]) {
      fed[static_cast<std::size_t>(lt)] = 1;
      queue.push_back(lt);
    }
  }
  while (!queue.empty()) {
    int l = queue.front();
    queue.pop_front();
    for (const auto& rx : net.reactions) {
      if (rx.source != dec.vComplex[static_cast<std::size_t>(l)]) continue;
      int lt = lOf(rx.target);
      if (lt >= 0 && !fed[static_cast<std::size_t>(lt)]) {
        fed[static_cast<std::size_t>(lt)] = 1;
        queue.push_back(lt);
      }
    }
  }
  // Backward closure: intermediates that reach outside V.
  for (const auto& rx : net.reactions) {
    int ls = lOf(rx.source);
    if (ls >= 0 && lOf(rx.target) < 0 && !exits[static_cast<std::size_t>(ls)]) {
      exits[static_cast<std::size_t>(ls)] = 1;
      queue.push_back(ls);
    }
  }
  while (!queue.empty()) {
    int l = queue.front();
    queue.pop_front();
    for (const auto& rx : net.reactions) {
      if (rx.target != dec.vComplex[static_cast<std::size_t>(l)]) continue;
      int ls = lOf(rx.source);
      if (ls >= 0 && !exits[static_cast<std::size_t>(ls)]) {
        exits[static_cast<std::size_t>(ls)] = 1;
        queue.push_back(ls);
      }
    }
  }
  for (int l = 0; l < n; ++l)
    if (!fed[static_cast<std::size_t>(l)] || !exits[static_cast<std::size_t>(l)])
      throw ValidationError(
          "intermediate '" +
          net.species[static_cast<std::size_t>(dec.vSpecies[static_cast<std::size_t>(l)])] +
          "' not on any U->W path");

  std::set<int> uset, wset;
  for (const auto& rx : net.reactions) {
    bool sV = lOf(rx.source) >= 0;
    bool tV = lOf(rx.target) >= 0;
    if (!sV && tV) uset.insert(rx.source);
    if (sV && !tV) wset.insert(rx.target);
  }
  dec.U.assign(uset.begin(), uset.end());
  dec.W.assign(wset.begin(), wset.end());
  for (int r = 0; r < net.reactionCount(); ++r) {
    const auto& rx = net.reactions[static_cast<std::size_t>(r)];
    bool sV = lOf(rx.source) >= 0;
    bool tV = lOf(rx.target) >= 0;
    if (!sV && !tV)
      dec.R0.push_back(r);
    else
      dec.R1.push_back(r);
  }

  // Memoized reachability into V from every complex.
  dec.reachV.assign(static_cast<std::size_t>(net.complexCount()),
                    std::vector<char>(static_cast<std::size_t>(n), 0));
  for (int c = 0; c < net.complexCount(); ++c) {
    auto& row = dec.reachV[static_cast<std::size_t>(c)];
    std::deque<int> q;
    for (const auto& rx : net.reactions) {
      if (rx.source != c) continue;
      int lt = lOf(rx.target);
      if (lt >= 0 && !row[static_cast<std::size_t>(lt)]) {
        row[static_cast<std::size_t>(lt)] = 1;
        q.push_back(lt);
      }
    }
    while (!q.empty()) {
      int l = q.front();
      q.pop_front();
      for (const auto& rx : net.reactions) {
        if (rx.source != dec.vComplex[static_cast<std::size_t>(l)]) continue;
        int lt = lOf(rx.target);
        if (lt >= 0 && !row[static_cast<std::size_t>(lt)]) {
          row[static_cast<std::size_t>(lt)] = 1;
          q.push_back(lt);
        }
      }
    }
  }
  return dec;
}

// y reacts to y2 through intermediates: either y is itself an intermediate
// and equals y2 or reacts to it directly, or a chain y -> H -> ... -> y2
// with at least one intermediate exists.
inline bool reaches_through_intermediates(const ReactionNetwork& net,
                                          const IntermediateDecomposition& dec,
                                          int cFrom, int cTo) {
  (void)net;
  if (dec.isIntermediateComplex(cFrom) &&
      (cFrom == cTo || dec.hasEdge(cFrom, cTo)))
    return true;
  const auto& row = dec.reachV[static_cast<std::size_t>(cFrom)];
  for (int l = 0; l < dec.size(); ++l)
    if (row[static_cast<std::size_t>(l)] &&
        dec.hasEdge(dec.vComplex[static_cast<std::size_t>(l)], cTo))
      return true;
  return false;
}

// True iff the intermediate-to-intermediate digraph has no directed cycle.
inline bool is_intermediate_acyclic(const ReactionNetwork& net,
                                    const IntermediateDecomposition& dec) {
  (void)net;
  const int n = dec.size();
  // H_l lies on a cycle iff it can reach itself through intermediates.
  for (int l = 0; l < n; ++l)
    if (dec.reachV[static_cast<std::size_t>(dec.vComplex[static_cast<std::size_t>(l)])]
                  [static_cast<std::size_t>(l)])
      return false;
  return true;
}

// Largest valid intermediate set: start from all species occurring only as
// their unit complex and drop members until the path requirement holds for
// every survivor. Dropping a species only ever enlarges the set of valid
// endpoints, so the greedy loop converges to the unique maximal valid set.
inline std::vector<int> detect_maximal_intermediates(
    const ReactionNetwork& net) {
  std::vector<int> cand;
  for (int s = 0; s < net.speciesCount(); ++s) {
    bool unitOnly = true, appears = false;
    for (const auto& cx : net.complexes) {
      if (!cx.contains(s)) continue;
      appears = true;
      if (cx.unitSpecies() != std::optional<int>(s)) unitOnly = false;
    }
    if (appears && unitOnly) cand.push_back(s);
  }
  bool changed = true;
  while (changed && !cand.empty()) {
    changed = false;
    std::set<int> vset(cand.begin(), cand.end());
    auto inV = [&](const Complex& cx) {
      auto u = cx.unitSpecies();
      return u && vset.count(*u) != 0;
    };
    // A member survives iff it is fed from outside V and exits V, in both
    // cases possibly through chains of current members.
    std::set<int> fedS, exitS;
    std::deque<int> q;
    auto grow = [&](std::set<int>& out, bool forward) {
      for (const auto& rx : net.reactions) {
        const Complex& src = net.complexes[static_cast<std::size_t>(rx.source)];
        const Complex& tgt = net.complexes[static_cast<std::size_t>(rx.target)];
        const Complex& from = forward ? src : tgt;
        const Complex& to = forward ? tgt : src;
        if (!inV(from) && inV(to) && out.insert(*to.unitSpecies()).second)
          q.push_back(*to.unitSpecies());
      }
      while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (const auto& rx : net.reactions) {
          const Complex& src = net.complexes[static_cast<std::size_t>(rx.source)];
          const Complex& tgt = net.complexes[static_cast<std::size_t>(rx.target)];
          const Complex& from = forward ? src : tgt;
          const Complex& to = forward ? tgt : src;
          if (from.unitSpecies() == std::optional<int>(v) && inV(to) &&
              out.insert(*to.unitSpecies()).second)
            q.push_back(*to.unitSpecies());
        }
      }
    };
    grow(fedS, true);
    grow(exitS, false);
    std::vector<int> keep;
    for (int s : cand) {
      if (fedS.count(s) && exitS.count(s))
        keep.push_back(s);
      else
        changed = true;
    }
    cand = keep;
  }
  if (!cand.empty()) validate_intermediates(net, cand);  // sanity
  return cand;
}

}  // namespace crnred
