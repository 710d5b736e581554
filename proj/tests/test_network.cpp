#include <catch2/catch_amalgamated.hpp>
#include <fstream>
#include <sstream>
#include <string>

#include "corpus.hpp"
#include "crnred/network.hpp"
#include "crnred/parser.hpp"
#include "crnred/scenarios.hpp"

using Catch::Matchers::ContainsSubstring;
using namespace crnred;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string dataFile(const std::string& name) {
  return std::string(CRN_DATA_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("complex printing and unit detection") {
  std::vector<std::string> names = {"E", "S", "ES"};
  Complex empty;
  CHECK(empty.str(names) == "0");
  CHECK(empty.isEmpty());
  CHECK_FALSE(empty.unitSpecies().has_value());

  Complex es;
  es.stoich[0] = 1;
  es.stoich[1] = 1;
  CHECK(es.str(names) == "E + S");
  CHECK_FALSE(es.unitSpecies().has_value());
  CHECK(es.coeff(0) == 1);
  CHECK(es.coeff(2) == 0);
  CHECK(es.contains(1));

  Complex twoA;
  twoA.stoich[1] = 2;
  CHECK(twoA.str(names) == "2 S");
  CHECK_FALSE(twoA.unitSpecies().has_value());

  Complex h;
  h.stoich[2] = 1;
  CHECK(h.unitSpecies() == 2);

  // Empty complex sorts first, then lexicographic on (species, coeff).
  CHECK(empty < h);
  CHECK(es < h);
  Complex oneA;
  oneA.stoich[1] = 1;
  CHECK(oneA < twoA);
}

TEST_CASE("network builder rejects malformed input") {
  NetworkBuilder b;
  b.addSpecies("A");
  b.addSpecies("B");
  CHECK_THROWS_WITH(b.addSpecies("A"), ContainsSubstring("duplicate species"));

  Complex a, bb;
  a.stoich[0] = 1;
  bb.stoich[1] = 1;
  CHECK_THROWS_WITH(b.addReaction(a, bb, RateLaw{Rational(0), Rational(0)}),
                    ContainsSubstring("rate constant must be positive"));
  CHECK_THROWS_WITH(b.addReaction(a, a, RateLaw{Rational(1), Rational(0)}),
                    ContainsSubstring("identical source and target"));

  b.addReaction(a, bb, RateLaw{Rational(1), Rational(0)});
  b.addReaction(a, bb, RateLaw{Rational(2), Rational(0)});
  CHECK_THROWS_WITH(b.finalize(), ContainsSubstring("duplicate reaction"));

  NetworkBuilder empty;
  CHECK_THROWS_WITH(empty.finalize(), ContainsSubstring("no reactions"));
}

TEST_CASE("finalized network is canonical and intensities are mass action") {
  NetworkBuilder b;
  int e = b.addSpecies("E");
  int s = b.addSpecies("S");
  Complex es, free;
  free.stoich[e] = 1;
  free.stoich[s] = 1;
  es.stoich[s] = 2;
  b.addReaction(free, es, RateLaw{Rational(3), Rational(2)});
  b.addReaction(es, free, RateLaw{Rational(1, 2), Rational(0)});
  ReactionNetwork net = b.finalize();

  REQUIRE(net.complexCount() == 2);
  CHECK(net.complexes[0] == free);  // (E:1,S:1) precedes (S:2) in species order
  CHECK(net.reactionCount() == 2);
  CHECK(net.reactions[0].source == 0);
  CHECK(net.reactionIndex(0, 1) == 0);
  CHECK(net.reactionIndex(1, 0) == 1);
  CHECK(net.reactionIndex(1, 1) == -1);
  CHECK(net.speciesIndex("S") == 1);
  CHECK(net.speciesIndex("P") == -1);

  // lambda = 3 N^2 x_E x_S and 1/2 x_S^2 under the power convention.
  std::vector<double> x = {2.0, 5.0};
  CHECK(net.intensity(0, x, 10.0) == Catch::Approx(3 * 100 * 2 * 5));
  CHECK(net.intensity(1, x, 10.0) == Catch::Approx(0.5 * 25));

  ScalingSpec spec;
  spec.alpha[s] = Rational(1, 2);
  CHECK(spec.of(s) == Rational(1, 2));
  CHECK(spec.of(e) == Rational(0));
  CHECK(spec.pairing(es) == Rational(1));
  CHECK(spec.pairing(free) == Rational(1, 2));
}

TEST_CASE("parser builds the enzyme kinetics network") {
  NetworkBundle b = parse_network(slurp(dataFile("mm.rxn")));
  const ReactionNetwork& net = b.net;

  CHECK(net.species == std::vector<std::string>{"E", "S", "ES", "P"});
  REQUIRE(b.intermediates.size() == 1);
  CHECK(net.species[static_cast<std::size_t>(b.intermediates[0])] == "ES");
  CHECK(b.scaling.of(net.speciesIndex("E")) == Rational(0));
  CHECK(b.scaling.of(net.speciesIndex("S")) == Rational(1));
  CHECK(b.scaling.of(net.speciesIndex("P")) == Rational(1));

  REQUIRE(net.reactionCount() == 3);
  int es = net.speciesIndex("ES");
  Complex ces;
  ces.stoich[es] = 1;
  int cesIdx = net.complexIndex(ces);
  REQUIRE(cesIdx >= 0);
  int binding = -1;
  for (int r = 0; r < net.reactionCount(); ++r)
    if (net.reactions[static_cast<std::size_t>(r)].target == cesIdx) binding = r;
  REQUIRE(binding >= 0);
  CHECK(net.reactions[static_cast<std::size_t>(binding)].law.kappa == Rational(2));
  CHECK(net.reactions[static_cast<std::size_t>(binding)].law.eta == Rational(0));
}

TEST_CASE("parser accepts comments, rate forms and empty complexes") {
  NetworkBundle b = parse_network(
      "# leading comment\n"
      "species: A B   # trailing comment\n"
      "alpha:\n"
      "  A = 1/2\n"
      "  B = -1\n"
      "reactions:\n"
      "  0 -> A @ N^3/2\n"
      "  A -> 0 @ 0.5\n"
      "  2 A -> A + B @ 3/2 N\n"
      "  B -> A @ N^-2\n");
  CHECK(b.net.speciesCount() == 2);
  CHECK(b.scaling.of(0) == Rational(1, 2));
  CHECK(b.scaling.of(1) == Rational(-1));
  REQUIRE(b.net.reactionCount() == 4);

  auto lawOf = [&](const std::string& srcText) {
    Complex src;
    if (srcText == "0") {
    } else if (srcText == "2A") {
      src.stoich[0] = 2;
    } else if (srcText == "A") {
      src.stoich[0] = 1;
    } else {
      src.stoich[1] = 1;
    }
    int c = b.net.complexIndex(src);
    REQUIRE(c >= 0);
    for (const auto& rx : b.net.reactions)
      if (rx.source == c) return rx.law;
    FAIL("no reaction from " + srcText);
    return RateLaw{};
  };
  CHECK(lawOf("0").kappa == Rational(1));
  CHECK(lawOf("0").eta == Rational(3, 2));
  CHECK(lawOf("A").kappa == Rational(1, 2));
  CHECK(lawOf("A").eta == Rational(0));
  CHECK(lawOf("2A").kappa == Rational(3, 2));
  CHECK(lawOf("2A").eta == Rational(1));
  CHECK(lawOf("B").eta == Rational(-2));
}

TEST_CASE("parser reports precise errors with line numbers") {
  auto expectError = [](const std::string& text, const std::string& needle,
                        int line) {
    try {
      parse_network(text);
      FAIL("expected a parse error containing '" + needle + "'");
    } catch (const ParseError& e) {
      CHECK_THAT(e.what(), ContainsSubstring(needle));
      CHECK(e.line() == line);
    }
  };

  expectError("reactions:\n  A -> B @ 1\n", "unknown species 'A'", 2);
  expectError("species: A N\n", "invalid species name 'N'", 1);
  expectError("species: A 0\n", "invalid species name '0'", 1);
  expectError("species: A 2fast\n", "invalid species name '2fast'", 1);
  expectError("species: A A\nreactions:\n  A -> 0 @ 1\n",
              "duplicate species 'A'", 1);
  expectError("  A -> B @ 1\n", "content before any section header", 1);
  expectError("species: A\nspecies: B\n", "duplicate section header", 2);
  expectError("species: A B\nreactions:\n  A + -> B @ 1\n",
              "malformed complex term", 3);
  expectError("species: A B\nreactions:\n  -2 A -> B @ 1\n",
              "negative coefficient", 3);
  expectError("species: A B\nreactions:\n  A B @ 1\n", "expected '->'", 3);
  expectError("species: A B\nreactions:\n  A -> B\n", "expected '@ <rate>'", 3);
  expectError("species: A B\nreactions:\n  A -> B @\n", "missing rate", 3);
  expectError("species: A B\nreactions:\n  A -> B @ 2 N^x\n",
              "malformed rate term 'N^x'", 3);
  expectError("species: A B\nreactions:\n  A -> B @ 1q\n",
              "malformed rate constant '1q'", 3);
  expectError("species: A B\nreactions:\n  A -> B @ 2 N 3\n",
              "trailing tokens after rate", 3);
  expectError("species: A B\nreactions:\n  A -> B @ -2\n",
              "rate constant must be positive", 3);
  expectError("species: A B\nreactions:\n  A -> A @ 1\n",
              "identical source and target", 3);
  expectError("species: A B\nintermediates: C\nreactions:\n  A -> B @ 1\n",
              "unknown species 'C' in intermediates block", 2);
  expectError("species: A B\nintermediates: B B\nreactions:\n  A -> B @ 1\n",
              "duplicate intermediate 'B'", 2);
  expectError("species: A B\nalpha:\n  A 1\nreactions:\n  A -> B @ 1\n",
              "expected 'name = value'", 3);
  expectError("species: A B\nalpha:\n  C = 1\nreactions:\n  A -> B @ 1\n",
              "unknown species 'C' in alpha block", 3);
  expectError(
      "species: A B\nalpha:\n  A = 1\n  A = 2\nreactions:\n  A -> B @ 1\n",
      "duplicate alpha entry for 'A'", 4);
  expectError("species: A B\nalpha:\n  A = x\nreactions:\n  A -> B @ 1\n",
              "malformed exponent 'x'", 3);
  expectError("species: A B\nintermediates: B\nalpha:\n  B = 1\n"
              "reactions:\n  A -> B @ 1\n  B -> A @ 1\n",
              "alpha given for intermediate species 'B'", 7);
  expectError("species: A B\n", "no reactions", 1);
}

TEST_CASE("serialization round-trips the shipped network files byte for byte") {
  for (const std::string name :
       {"mm.rxn", "example2.rxn", "example4.rxn", "sec9-1.rxn", "sec9-2.rxn",
        "empty-intermediates.rxn"}) {
    INFO("file " << name);
    std::string text = slurp(dataFile(name));
    NetworkBundle b = parse_network(text);
    CHECK(serialize_network(b) == text);
  }
}

TEST_CASE("bundled scenario texts match the shipped files") {
  for (const auto& sc : bundled_scenarios()) {
    INFO("scenario " << sc.name);
    CHECK(sc.network == slurp(dataFile(sc.name + ".rxn")));
  }
}

TEST_CASE("serialization is idempotent on generated networks") {
  for (const auto& rn : corpus::random_networks(25)) {
    std::string once = serialize_network(rn.bundle);
    NetworkBundle reparsed = parse_network(once);
    CHECK(reparsed.intermediates == rn.bundle.intermediates);
    CHECK(serialize_network(reparsed) == once);
  }
}
