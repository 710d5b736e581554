#include <catch2/catch_amalgamated.hpp>
#include <functional>
#include <set>
#include <vector>

#include "corpus.hpp"
#include "crnred/intermediates.hpp"
#include "crnred/parser.hpp"
#include "crnred/scenarios.hpp"

using Catch::Matchers::ContainsSubstring;
using namespace crnred;

namespace {

NetworkBundle scenarioBundle(const std::string& name) {
  return parse_network(get_scenario(name).network);
}

std::vector<std::string> namesOf(const ReactionNetwork& net,
                                 const std::vector<int>& species) {
  std::vector<std::string> out;
  for (int s : species)
    out.push_back(net.species[static_cast<std::size_t>(s)]);
  return out;
}

std::vector<std::string> complexNames(const ReactionNetwork& net,
                                      const std::vector<int>& cs) {
  std::vector<std::string> out;
  for (int c : cs)
    out.push_back(net.complexes[static_cast<std::size_t>(c)].str(net.species));
  return out;
}

// Path enumeration over the raw reaction list, independent of the memoized
// reachability table under test.
bool bruteReaches(const ReactionNetwork& net,
                  const IntermediateDecomposition& dec, int cFrom, int cTo) {
  auto hasReaction = [&](int s, int t) {
    return net.reactionIndex(s, t) >= 0;
  };
  if (dec.isIntermediateComplex(cFrom) &&
      (cFrom == cTo || hasReaction(cFrom, cTo)))
    return true;
  std::vector<char> visited(static_cast<std::size_t>(net.complexCount()), 0);
  std::function<bool(int)> dfs = [&](int c) -> bool {
    if (hasReaction(c, cTo)) return true;
    visited[static_cast<std::size_t>(c)] = 1;
    for (const auto& rx : net.reactions)
      if (rx.source == c && dec.isIntermediateComplex(rx.target) &&
          !visited[static_cast<std::size_t>(rx.target)] && dfs(rx.target))
        return true;
    return false;
  };
  for (const auto& rx : net.reactions)
    if (rx.source == cFrom && dec.isIntermediateComplex(rx.target) &&
        !visited[static_cast<std::size_t>(rx.target)] && dfs(rx.target))
      return true;
  return false;
}

bool bruteAcyclic(const ReactionNetwork& net,
                  const IntermediateDecomposition& dec) {
  // Depth-first cycle detection on the digraph restricted to V complexes.
  std::vector<int> color(static_cast<std::size_t>(net.complexCount()), 0);
  std::function<bool(int)> dfs = [&](int c) -> bool {
    color[static_cast<std::size_t>(c)] = 1;
    for (const auto& rx : net.reactions) {
      if (rx.source != c || !dec.isIntermediateComplex(rx.target)) continue;
      if (color[static_cast<std::size_t>(rx.target)] == 1) return false;
      if (color[static_cast<std::size_t>(rx.target)] == 0 && !dfs(rx.target))
        return false;
    }
    color[static_cast<std::size_t>(c)] = 2;
    return true;
  };
  for (int c : dec.vComplex)
    if (color[static_cast<std::size_t>(c)] == 0 && !dfs(c)) return false;
  return true;
}

}  // namespace

TEST_CASE("enzyme kinetics decomposition") {
  NetworkBundle b = scenarioBundle("mm");
  IntermediateDecomposition dec =
      validate_intermediates(b.net, b.intermediates);

  CHECK(namesOf(b.net, dec.vSpecies) == std::vector<std::string>{"ES"});
  CHECK(complexNames(b.net, dec.U) == std::vector<std::string>{"E + S"});
  CHECK(complexNames(b.net, dec.W) ==
        std::vector<std::string>{"E + S", "E + P"});
  CHECK(dec.R0.empty());
  CHECK(dec.R1.size() == 3);
  CHECK(is_intermediate_acyclic(b.net, dec));
}

TEST_CASE("two chained intermediates with a back edge form a cycle") {
  NetworkBundle b = scenarioBundle("example2");
  IntermediateDecomposition dec =
      validate_intermediates(b.net, b.intermediates);

  CHECK(namesOf(b.net, dec.vSpecies) == std::vector<std::string>{"H1", "H2"});
  CHECK(complexNames(b.net, dec.U) == std::vector<std::string>{"E + S"});
  CHECK(complexNames(b.net, dec.W) == std::vector<std::string>{"E + P"});
  CHECK(dec.R0.empty());
  CHECK(dec.R1.size() == 4);
  CHECK_FALSE(is_intermediate_acyclic(b.net, dec));
}

TEST_CASE("branched intermediates without back edges are acyclic") {
  NetworkBundle b = scenarioBundle("example4");
  IntermediateDecomposition dec =
      validate_intermediates(b.net, b.intermediates);

  CHECK(namesOf(b.net, dec.vSpecies) == std::vector<std::string>{"H1", "H2"});
  CHECK(complexNames(b.net, dec.U) == std::vector<std::string>{"S"});
  CHECK(complexNames(b.net, dec.W) == std::vector<std::string>{"P1", "P2"});
  CHECK(is_intermediate_acyclic(b.net, dec));

  int cS = b.net.complexIndex([&] {
    Complex c;
    c.stoich[b.net.speciesIndex("S")] = 1;
    return c;
  }());
  int cP2 = b.net.complexIndex([&] {
    Complex c;
    c.stoich[b.net.speciesIndex("P2")] = 1;
    return c;
  }());
  CHECK(reaches_through_intermediates(b.net, dec, cS, cP2));
  CHECK_FALSE(reaches_through_intermediates(b.net, dec, cP2, cS));
}

TEST_CASE("decomposition with direct reactions and empty complexes") {
  NetworkBundle b = scenarioBundle("sec9-1");
  IntermediateDecomposition dec =
      validate_intermediates(b.net, b.intermediates);

  CHECK(namesOf(b.net, dec.vSpecies) == std::vector<std::string>{"H"});
  CHECK(complexNames(b.net, dec.U) == std::vector<std::string>{"0"});
  CHECK(complexNames(b.net, dec.W) == std::vector<std::string>{"A"});
  CHECK(dec.R0.size() == 3);
  CHECK(dec.R1.size() == 2);
}

TEST_CASE("empty intermediate set leaves every reaction direct") {
  NetworkBundle b = parse_network(
      "species: A B\n"
      "alpha:\n  A = 0\n  B = 0\n"
      "reactions:\n  A -> B @ 2\n  B -> A @ 1\n");
  IntermediateDecomposition dec = validate_intermediates(b.net, {});
  CHECK(dec.size() == 0);
  CHECK(dec.U.empty());
  CHECK(dec.W.empty());
  CHECK(dec.R0.size() == 2);
  CHECK(dec.R1.empty());
  CHECK(is_intermediate_acyclic(b.net, dec));
}

TEST_CASE("validation rejects species in non-unit complexes") {
  NetworkBundle b = parse_network(
      "species: A H B\n"
      "reactions:\n  A -> H @ 1\n  H + A -> B @ 1\n");
  CHECK_THROWS_WITH(
      validate_intermediates(b.net, {b.net.speciesIndex("H")}),
      ContainsSubstring("appears in a non-unit complex 'A + H'"));
}

TEST_CASE("validation rejects intermediates off every feed-drain path") {
  // H is produced but never consumed.
  NetworkBundle made = parse_network(
      "species: A H\n"
      "reactions:\n  A -> H @ 1\n");
  CHECK_THROWS_WITH(
      validate_intermediates(made.net, {made.net.speciesIndex("H")}),
      ContainsSubstring("'H' not on any U->W path"));

  // H is consumed but never produced.
  NetworkBundle drained = parse_network(
      "species: A H\n"
      "reactions:\n  H -> A @ 1\n");
  CHECK_THROWS_WITH(
      validate_intermediates(drained.net, {drained.net.speciesIndex("H")}),
      ContainsSubstring("'H' not on any U->W path"));

  // Two intermediates feeding only each other are not fed from outside.
  NetworkBundle loop = parse_network(
      "species: A H1 H2\n"
      "reactions:\n  H1 -> H2 @ 1\n  H2 -> H1 @ 1\n  A -> 0 @ 1\n");
  CHECK_THROWS_WITH(
      validate_intermediates(loop.net, {loop.net.speciesIndex("H1"),
                                        loop.net.speciesIndex("H2")}),
      ContainsSubstring("not on any U->W path"));

  CHECK_THROWS_WITH(validate_intermediates(made.net, {7}),
                    ContainsSubstring("unknown species index"));
}

TEST_CASE("maximal intermediate detection") {
  CHECK(namesOf(scenarioBundle("mm").net,
                detect_maximal_intermediates(scenarioBundle("mm").net)) ==
        std::vector<std::string>{"ES"});
  CHECK(namesOf(scenarioBundle("example2").net,
                detect_maximal_intermediates(scenarioBundle("example2").net)) ==
        std::vector<std::string>{"H1", "H2"});
  CHECK(namesOf(scenarioBundle("sec9-1").net,
                detect_maximal_intermediates(scenarioBundle("sec9-1").net)) ==
        std::vector<std::string>{"H"});

  // A and B occur only as unit complexes, but neither is fed from outside
  // the candidate set, so the greedy pruning drops both.
  NetworkBundle ab = parse_network(
      "species: A B\n"
      "reactions:\n  A -> B @ 2\n  B -> A @ 1\n");
  CHECK(detect_maximal_intermediates(ab.net).empty());

  // C survives on its own once A and B prune each other away.
  NetworkBundle abc = parse_network(
      "species: A B C\n"
      "reactions:\n  A -> B @ 1\n  B -> A @ 1\n  0 -> C @ 1\n  C -> 0 @ 1\n");
  CHECK(namesOf(abc.net, detect_maximal_intermediates(abc.net)) ==
        std::vector<std::string>{"C"});
}

TEST_CASE("reachability through intermediates matches path enumeration") {
  auto checkAllPairs = [](const ReactionNetwork& net,
                          const IntermediateDecomposition& dec) {
    for (int a = 0; a < net.complexCount(); ++a)
      for (int b = 0; b < net.complexCount(); ++b) {
        INFO("from " << net.complexes[static_cast<std::size_t>(a)].str(net.species)
                     << " to "
                     << net.complexes[static_cast<std::size_t>(b)].str(net.species));
        CHECK(reaches_through_intermediates(net, dec, a, b) ==
              bruteReaches(net, dec, a, b));
      }
    CHECK(is_intermediate_acyclic(net, dec) == bruteAcyclic(net, dec));
  };

  for (const std::string name : {"mm", "example2", "example4", "sec9-1",
                                 "sec9-2"}) {
    NetworkBundle b = scenarioBundle(name);
    checkAllPairs(b.net, validate_intermediates(b.net, b.intermediates));
  }
  for (const auto& rn : corpus::random_networks(60))
    checkAllPairs(rn.bundle.net, rn.dec);
}
