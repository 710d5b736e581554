#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crnred/rational.hpp"

namespace crnred {

// Raised for any structurally invalid network or decomposition.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Multiset of species with positive integer multiplicities; the empty map is
// the empty complex (written "0" in the text form).
struct Complex {
  std::map<int, int> stoich;  // species index -> coefficient >= 1

  bool isEmpty() const { return stoich.empty(); }

  int coeff(int species) const {
    auto it = stoich.find(species);
    return it == stoich.end() ? 0 : it->second;
  }

  bool contains(int species) const { return stoich.count(species) != 0; }

  // Species index if this is a single species with coefficient one.
  std::optional<int> unitSpecies() const {
    if (stoich.size() == 1 && stoich.begin()->second == 1)
      return stoich.begin()->first;
    return std::nullopt;
  }

  bool operator==(const Complex& o) const { return stoich == o.stoich; }
  bool operator!=(const Complex& o) const { return !(*this == o); }
  // Lexicographic on (species, coefficient) pairs; empty complex first.
  bool operator<(const Complex& o) const { return stoich < o.stoich; }

  std::string str(const std::vector<std::string>& names) const {
    if (stoich.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : stoich) {
      if (!first) os << " + ";
      first = false;
      if (c != 1) os << c << ' ';
      os << names.at(static_cast<std::size_t>(k));
    }
    return os.str();
  }
};

// Rate constant kappa * N^eta of one reaction under the scale parameter N.
struct RateLaw {
  Rational kappa;  // > 0
  Rational eta;

  double value(double N) const {
    return kappa.toDouble() * std::pow(N, eta.toDouble());
  }
};

struct Reaction {
  int source;  // complex index
  int target;  // complex index
  RateLaw law;
};

// A reaction network in canonical form: complexes sorted and unique,
// reactions sorted by (source, target) with at most one reaction per ordered
// complex pair, every complex used by some reaction.
class ReactionNetwork {
 public:
  std::vector<std::string> species;  // declaration order
  std::vector<Complex> complexes;
  std::vector<Reaction> reactions;

  int speciesCount() const { return static_cast<int>(species.size()); }
  int complexCount() const { return static_cast<int>(complexes.size()); }
  int reactionCount() const { return static_cast<int>(reactions.size()); }

  const Complex& source(int r) const {
    return complexes[static_cast<std::size_t>(reactions[static_cast<std::size_t>(r)].source)];
  }
  const Complex& target(int r) const {
    return complexes[static_cast<std::size_t>(reactions[static_cast<std::size_t>(r)].target)];
  }

  int speciesIndex(const std::string& name) const {
    for (int k = 0; k < speciesCount(); ++k)
      if (species[static_cast<std::size_t>(k)] == name) return k;
    return -1;
  }

  int complexIndex(const Complex& c) const {
    auto it = std::lower_bound(complexes.begin(), complexes.end(), c);
    if (it != complexes.end() && *it == c)
      return static_cast<int>(it - complexes.begin());
    return -1;
  }

  // Index of the reaction source -> target, or -1.
  int reactionIndex(int source, int target) const {
    for (int r = 0; r < reactionCount(); ++r) {
      const auto& rx = reactions[static_cast<std::size_t>(r)];
      if (rx.source == source && rx.target == target) return r;
    }
    return -1;
  }

  // Mass-action intensity of reaction r at state x (full species order) and
  // scale N: kappa N^eta * prod_k x_k^{y_k}.
  double intensity(int r, const std::vector<double>& x, double N) const {
    const auto& rx = reactions[static_cast<std::size_t>(r)];
    double v = rx.law.value(N);
    for (const auto& [k, c] : complexes[static_cast<std::size_t>(rx.source)].stoich)
      for (int i = 0; i < c; ++i) v *= x[static_cast<std::size_t>(k)];
    return v;
  }
};

// Collects species and reactions in input order, then validates and produces
// the canonical network.
class NetworkBuilder {
 public:
  int addSpecies(const std::string& name) {
    if (nameToIndex_.count(name))
      throw ValidationError("duplicate species '" + name + "'");
    int idx = static_cast<int>(species_.size());
    species_.push_back(name);
    nameToIndex_[name] = idx;
    return idx;
  }

  int speciesIndex(const std::string& name) const {
    auto it = nameToIndex_.find(name);
    return it == nameToIndex_.end() ? -1 : it->second;
  }

  const std::vector<std::string>& species() const { return species_; }

  void addReaction(const Complex& source, const Complex& target,
                   const RateLaw& law) {
    if (!law.kappa.isPositive())
      throw ValidationError("rate constant must be positive");
    if (source == target)
      throw ValidationError("reaction with identical source and target '" +
                            source.str(species_) + "'");
    raw_.push_back({source, target, law});
  }

  ReactionNetwork finalize() const {
    if (raw_.empty()) throw ValidationError("no reactions");
    std::set<Complex> cset;
    for (const auto& rr : raw_) {
      cset.insert(rr.source);
      cset.insert(rr.target);
    }
    ReactionNetwork net;
    net.species = species_;
    net.complexes.assign(cset.begin(), cset.end());
    std::set<std::pair<int, int>> seen;
    for (const auto& rr : raw_) {
      int s = net.complexIndex(rr.source);
      int t = net.complexIndex(rr.target);
      if (!seen.insert({s, t}).second)
        throw ValidationError("duplicate reaction '" + rr.source.str(species_) +
                              " -> " + rr.target.str(species_) + "'");
      net.reactions.push_back({s, t, rr.law});
    }
    std::sort(net.reactions.begin(), net.reactions.end(),
              [](const Reaction& a, const Reaction& b) {
                return std::pair{a.source, a.target} <
                       std::pair{b.source, b.target};
              });
    return net;
  }

 private:
  struct RawReaction {
    Complex source, target;
    RateLaw law;
  };
  std::vector<std::string> species_;
  std::map<std::string, int> nameToIndex_;
  std::vector<RawReaction> raw_;
};

// Species scaling exponents alpha_k; species without an entry scale as N^0.
struct ScalingSpec {
  std::map<int, Rational> alpha;  // species index -> exponent

  Rational of(int species) const {
    auto it = alpha.find(species);
    return it == alpha.end() ? Rational(0) : it->second;
  }

  // <alpha, y> over the species of a complex.
  Rational pairing(const Complex& c) const {
    Rational s(0);
    for (const auto& [k, mult] : c.stoich) s += of(k) * Rational(mult);
    return s;
  }
};

// A parsed model: the network plus the declared intermediate species (in
// ascending species-index order) and the declared scaling exponents.
struct NetworkBundle {
  ReactionNetwork net;
  std::vector<int> intermediates;
  ScalingSpec scaling;
};

}  // namespace crnred
