#pragma once

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crnred/network.hpp"
#include "crnred/npoly.hpp"

namespace crnred {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> splitWs(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline bool validSpeciesName(const std::string& s) {
  if (s.empty()) return false;
  if (s == "N" || s == "0") return false;  // reserved by the rate / complex syntax
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

inline bool allDigitsSigned(const std::string& s) {
  if (s.empty()) return false;
  std::size_t b = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (b == s.size()) return false;
  for (std::size_t i = b; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

inline bool looksNumeric(const std::string& s) {
  if (s.empty()) return false;
  char c = s[0];
  if (std::isdigit(static_cast<unsigned char>(c))) return true;
  return (c == '-' || c == '+' || c == '.') && s.size() > 1;
}

}  // namespace detail

// Parses the line-oriented network format:
//
//   # comment
//   species: E S ES P
//   intermediates: ES
//   alpha:
//     S = 1/2
//   reactions:
//     E + S -> ES @ 2
//     ES -> E + S @ 3 N^2
//
// Sections may appear at most once; species must be declared before use;
// "0" denotes the empty complex; a rate is `<kappa>`, `<kappa> N^<p/q>`,
// `<kappa> N`, or an `N` power alone (kappa = 1).
inline NetworkBundle parse_network(const std::string& text) {
  NetworkBuilder builder;
  std::vector<int> intermediates;
  ScalingSpec scaling;
  std::vector<std::pair<int, Rational>> alphaEntries;

  enum class Section { None, Species, Intermediates, Alpha, Reactions };
  Section section = Section::None;
  bool seen[5] = {false, false, false, false, false};

  auto parseComplex = [&](const std::string& text_, int line) -> Complex {
    Complex c;
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text_) {
      if (ch == '+') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    if (parts.size() == 1 && detail::trim(parts[0]) == "0") return c;
    for (const auto& raw : parts) {
      auto toks = detail::splitWs(detail::trim(raw));
      int coeff = 1;
      std::string name;
      if (toks.size() == 1) {
        name = toks[0];
      } else if (toks.size() == 2 && detail::allDigitsSigned(toks[0])) {
        coeff = std::stoi(toks[0]);
        name = toks[1];
      } else {
        throw ParseError(line, "malformed complex term '" +
                                   detail::trim(raw) + "'");
      }
      if (coeff <= 0)
        throw ParseError(line, "negative coefficient in '" +
                                   detail::trim(raw) + "'");
      int k = builder.speciesIndex(name);
      if (k < 0)
        throw ParseError(line, "unknown species '" + name + "'");
      c.stoich[k] += coeff;
    }
    return c;
  };

  auto parseRate = [&](const std::string& text_, int line) -> RateLaw {
    auto toks = detail::splitWs(text_);
    RateLaw law{Rational(1), Rational(0)};
    auto parseNPower = [&](const std::string& t) {
      if (t == "N") {
        law.eta = Rational(1);
        return;
      }
      if (t.rfind("N^", 0) == 0) {
        try {
          law.eta = Rational::parse(t.substr(2));
          return;
        } catch (const std::invalid_argument&) {
        }
      }
      throw ParseError(line, "malformed rate term '" + t + "'");
    };
    if (toks.empty()) throw ParseError(line, "missing rate");
    std::size_t pos = 0;
    if (detail::looksNumeric(toks[0])) {
      try {
        law.kappa = Rational::parse(toks[0]);
      } catch (const std::invalid_argument&) {
        throw ParseError(line, "malformed rate constant '" + toks[0] + "'");
      }
      pos = 1;
    }
    if (pos < toks.size()) parseNPower(toks[pos++]);
    if (pos != toks.size())
      throw ParseError(line, "trailing tokens after rate");
    if (!law.kappa.isPositive())
      throw ParseError(line, "rate constant must be positive");
    return law;
  };

  auto handleContent = [&](const std::string& content, int line) {
    switch (section) {
      case Section::None:
        throw ParseError(line, "content before any section header");
      case Section::Species:
        for (const auto& name : detail::splitWs(content)) {
          if (!detail::validSpeciesName(name))
            throw ParseError(line, "invalid species name '" + name + "'");
          try {
            builder.addSpecies(name);
          } catch (const ValidationError& e) {
            throw ParseError(line, e.what());
          }
        }
        break;
      case Section::Intermediates:
        for (const auto& name : detail::splitWs(content)) {
          int k = builder.speciesIndex(name);
          if (k < 0)
            throw ParseError(line,
                             "unknown species '" + name +
                                 "' in intermediates block");
          if (std::find(intermediates.begin(), intermediates.end(), k) !=
              intermediates.end())
            throw ParseError(line, "duplicate intermediate '" + name + "'");
          intermediates.push_back(k);
        }
        break;
      case Section::Alpha: {
        auto eq = content.find('=');
        if (eq == std::string::npos)
          throw ParseError(line, "expected 'name = value' in alpha block");
        std::string name = detail::trim(content.substr(0, eq));
        std::string value = detail::trim(content.substr(eq + 1));
        int k = builder.speciesIndex(name);
        if (k < 0)
          throw ParseError(line,
                           "unknown species '" + name + "' in alpha block");
        if (scaling.alpha.count(k))
          throw ParseError(line, "duplicate alpha entry for '" + name + "'");
        try {
          scaling.alpha[k] = Rational::parse(value);
        } catch (const std::invalid_argument&) {
          throw ParseError(line, "malformed exponent '" + value + "'");
        }
        break;
      }
      case Section::Reactions: {
        auto arrow = content.find("->");
        if (arrow == std::string::npos)
          throw ParseError(line, "expected '->' in reaction");
        auto at = content.find('@', arrow + 2);
        if (at == std::string::npos)
          throw ParseError(line, "expected '@ <rate>' in reaction");
        Complex src = parseComplex(content.substr(0, arrow), line);
        Complex tgt =
            parseComplex(content.substr(arrow + 2, at - arrow - 2), line);
        RateLaw law = parseRate(content.substr(at + 1), line);
        try {
          builder.addReaction(src, tgt, law);
        } catch (const ValidationError& e) {
          throw ParseError(line, e.what());
        }
        break;
      }
    }
  };

  std::istringstream stream(text);
  std::string rawLine;
  int lineNo = 0;
  while (std::getline(stream, rawLine)) {
    ++lineNo;
    auto hash = rawLine.find('#');
    if (hash != std::string::npos) rawLine.erase(hash);
    std::string line = detail::trim(rawLine);
    if (line.empty()) continue;

    Section newSection = Section::None;
    std::string rest;
    for (auto [prefix, sec] :
         {std::pair{"species:", Section::Species},
          std::pair{"intermediates:", Section::Intermediates},
          std::pair{"alpha:", Section::Alpha},
          std::pair{"reactions:", Section::Reactions}}) {
      if (line.rfind(prefix, 0) == 0) {
        newSection = sec;
        rest = detail::trim(line.substr(std::string(prefix).size()));
        break;
      }
    }
    if (newSection != Section::None) {
      if (seen[static_cast<int>(newSection)])
        throw ParseError(lineNo, "duplicate section header");
      seen[static_cast<int>(newSection)] = true;
      section = newSection;
      if (!rest.empty()) handleContent(rest, lineNo);
    } else {
      handleContent(line, lineNo);
    }
  }

  NetworkBundle bundle;
  try {
    bundle.net = builder.finalize();
  } catch (const ValidationError& e) {
    throw ParseError(lineNo, e.what());
  }
  std::sort(intermediates.begin(), intermediates.end());
  bundle.intermediates = intermediates;
  for (int k : intermediates)
    if (scaling.alpha.count(k))
      throw ParseError(lineNo, "alpha given for intermediate species '" +
                                   bundle.net.species[static_cast<std::size_t>(k)] + "'");
  bundle.scaling = scaling;
  return bundle;
}

// Canonical text form. Properties: species in declaration order on one line;
// the intermediates line is omitted when there are none; every
// non-intermediate species gets an explicit alpha entry; reactions sorted by
// (source, target) complex index; rates rendered as `kappa`, `kappa N^e` or
// `N^e` with unit factors dropped. parse_network round-trips this exactly.
inline std::string serialize_network(const NetworkBundle& bundle) {
  const ReactionNetwork& net = bundle.net;
  std::ostringstream os;
  os << "species:";
  for (const auto& name : net.species) os << ' ' << name;
  os << '\n';
  if (!bundle.intermediates.empty()) {
    os << "intermediates:";
    for (int k : bundle.intermediates)
      os << ' ' << net.species[static_cast<std::size_t>(k)];
    os << '\n';
  }
  os << "alpha:\n";
  for (int k = 0; k < net.speciesCount(); ++k) {
    if (std::find(bundle.intermediates.begin(), bundle.intermediates.end(),
                  k) != bundle.intermediates.end())
      continue;
    os << "  " << net.species[static_cast<std::size_t>(k)] << " = "
       << bundle.scaling.of(k).str() << '\n';
  }
  os << "reactions:\n";
  for (int r = 0; r < net.reactionCount(); ++r) {
    const auto& rx = net.reactions[static_cast<std::size_t>(r)];
    os << "  " << net.source(r).str(net.species) << " -> "
       << net.target(r).str(net.species) << " @ "
       << NPoly::monomial(rx.law.kappa, rx.law.eta).str() << '\n';
  }
  return os.str();
}

}  // namespace crnred
