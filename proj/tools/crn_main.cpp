#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "crnred/assumptions.hpp"
#include "crnred/intermediates.hpp"
#include "crnred/laplacian.hpp"
#include "crnred/parser.hpp"
#include "crnred/reduction.hpp"
#include "crnred/report.hpp"
#include "crnred/scenarios.hpp"
#include "crnred/simulate.hpp"

namespace {

using crnred::json;

struct CommonArgs {
  std::string network;
  std::string scenario;
  std::vector<std::string> alphaOverrides;
  std::string outDir = ".";
  double N = 0;  // 0 means "use the scenario default or 100"
  double T = 0;  // 0 means "use the scenario default or the rate heuristic"
  std::string grid;
  int jobs = 1;
};

struct LoadedModel {
  crnred::NetworkBundle bundle;
  crnred::IntermediateDecomposition dec;
  std::string stem;
  std::map<std::string, crnred::Rational> z0;  // rescaled initial values
  double defaultT = 0;
  double defaultN = 100;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open network file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadedModel load_model(const CommonArgs& args) {
  LoadedModel m;
  std::string text;
  if (!args.scenario.empty()) {
    const crnred::Scenario& sc = crnred::get_scenario(args.scenario);
    text = sc.network;
    m.stem = sc.name;
    m.z0 = sc.z0;
    m.defaultT = sc.defaultT;
    m.defaultN = sc.defaultN;
  } else if (!args.network.empty()) {
    text = read_file(args.network);
    m.stem = std::filesystem::path(args.network).stem().string();
  } else {
    throw std::runtime_error("one of --network or --scenario is required");
  }
  m.bundle = crnred::parse_network(text);
  for (const auto& ov : args.alphaOverrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("malformed --alpha override '" + ov +
                               "', expected name=p/q");
    std::string name = ov.substr(0, eq);
    crnred::Rational value = crnred::Rational::parse(ov.substr(eq + 1));
    int idx = m.bundle.net.speciesIndex(name);
    if (idx < 0)
      throw std::runtime_error("unknown species in --alpha override: '" +
                               name + "'");
    for (int s : m.bundle.intermediates)
      if (s == idx)
        throw std::runtime_error("alpha override given for intermediate '" +
                                 name + "'");
    m.bundle.scaling.alpha[idx] = value;
  }
  m.dec = crnred::validate_intermediates(m.bundle.net, m.bundle.intermediates);
  if (m.z0.empty())
    for (std::size_t k = 0; k < m.bundle.net.species.size(); ++k)
      if (m.dec.speciesToL[k] < 0)
        m.z0[m.bundle.net.species[k]] = crnred::Rational(1);
  return m;
}

double pick_N(const CommonArgs& args, const LoadedModel& m) {
  return args.N > 0 ? args.N : m.defaultN;
}

// Horizon heuristic: roughly ten units of the fastest reduced time scale,
// clamped to a sane window. Scenario defaults and --T take precedence.
double pick_T(const CommonArgs& args, const LoadedModel& m,
              const crnred::ReducedNetwork& red, double N) {
  if (args.T > 0) return args.T;
  if (m.defaultT > 0) return m.defaultT;
  double maxRate = 0;
  for (const auto& rr : red.reactions)
    maxRate = std::max(maxRate,
                       rr.rate.eval(N) * std::pow(N, red.scaling.pairing(
                               red.complexes[static_cast<std::size_t>(rr.source)])
                               .toDouble()));
  if (maxRate <= 0) return 10.0;
  return std::clamp(10.0 / maxRate, 1e-3, 1e3);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::runtime_error("empty --grid");
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::map<int, crnred::Rational> folded_initials(
    const crnred::ReducedNetwork& red,
    const std::map<std::string, crnred::Rational>& z0) {
  std::map<int, crnred::Rational> out;
  for (int ri = 0; ri < red.speciesCount(); ++ri) {
    auto it = z0.find(red.species[static_cast<std::size_t>(ri)]);
    if (it != z0.end()) out[ri] = it->second;
  }
  return out;
}

int cmd_reduce(const CommonArgs& args) {
  LoadedModel m = load_model(args);
  crnred::ReducedNetwork red =
      crnred::reduce(m.bundle.net, m.dec, m.bundle.scaling);
  crnred::SingleScaleResult scale = crnred::check_single_scale(red);

  std::filesystem::create_directories(args.outDir);
  std::filesystem::path outDir(args.outDir);
  write_text_file(outDir / (m.stem + ".reduced.rxn"),
                  crnred::serialize_reduced(red));

  json report;
  report["network"] = crnred::network_json(m.bundle);
  report["decomposition"] = crnred::decomposition_json(m.bundle.net, m.dec);
  report["reduced"] = crnred::reduced_json(red);
  report["singleScale"] = crnred::single_scale_json(scale, red);
  if (scale.pass) {
    crnred::LimitingNetwork lim =
        crnred::build_limiting(red, folded_initials(red, m.z0));
    write_text_file(outDir / (m.stem + ".limiting.rxn"),
                    crnred::serialize_limiting(lim));
    report["limiting"] = crnred::limiting_json(lim);
  }
  std::cout << report.dump(2) << "\n";
  return scale.pass ? 0 : 2;
}

int cmd_check(const CommonArgs& args) {
  LoadedModel m = load_model(args);
  crnred::DiagnosticConfig cfg;
  if (!args.grid.empty()) cfg.Ngrid = parse_grid(args.grid);
  crnred::AssumptionVerdict verdict =
      crnred::check_all(m.bundle.net, m.dec, m.bundle.scaling, cfg);

  json report;
  report["network"] = crnred::network_json(m.bundle);
  report["decomposition"] = crnred::decomposition_json(m.bundle.net, m.dec);
  // The verdict never needs the symbolic reduction, so a decomposition too
  // large for tree enumeration only drops the single-scale side report.
  bool scalePass = true;
  try {
    crnred::ReducedNetwork red =
        crnred::reduce(m.bundle.net, m.dec, m.bundle.scaling);
    crnred::SingleScaleResult scale = crnred::check_single_scale(red);
    scalePass = scale.pass;
    report["singleScale"] = crnred::single_scale_json(scale, red);
  } catch (const crnred::TreeCapExceeded& ex) {
    report["singleScale"] = json{{"skipped", true}, {"reason", ex.what()}};
  }
  report["verdict"] = crnred::verdict_json(verdict, m.bundle.net, m.dec);
  std::cout << report.dump(2) << "\n";

  if (!scalePass) return 2;
  switch (verdict.status) {
    case crnred::CheckStatus::ViolatedNumeric: return 2;
    case crnred::CheckStatus::Unknown: return 3;
    default: return 0;
  }
}

int cmd_check_intermediates(const CommonArgs& args) {
  LoadedModel m = load_model(args);
  std::vector<int> maximal = crnred::detect_maximal_intermediates(m.bundle.net);
  json report;
  report["network"] = crnred::network_json(m.bundle);
  report["declared"] = crnred::decomposition_json(m.bundle.net, m.dec);
  std::vector<std::string> maxNames;
  for (int s : maximal)
    maxNames.push_back(m.bundle.net.species[static_cast<std::size_t>(s)]);
  report["maximalIntermediates"] = maxNames;
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_mu(const CommonArgs& args) {
  LoadedModel m = load_model(args);
  double N = pick_N(args, m);
  std::vector<double> ones(
      static_cast<std::size_t>(m.bundle.net.speciesCount()), 1.0);

  json report;
  report["N"] = N;
  json entries = json::array();
  for (int i : m.dec.U) {
    json e;
    e["complex"] =
        m.bundle.net.complexes[static_cast<std::size_t>(i)].str(m.bundle.net.species);
    Eigen::VectorXd mu = crnred::mu_by_solve(m.bundle.net, m.dec, i, ones, N);
    json muj, symNum;
    crnred::MuSymbolic sym;
    bool haveSym = m.dec.size() <= crnred::kTreeEnumerationCap;
    if (haveSym) sym = crnred::mu_symbolic(m.bundle.net, m.dec, i);
    for (int l = 0; l < m.dec.size(); ++l) {
      const std::string& name = m.bundle.net.species[static_cast<std::size_t>(
          m.dec.vSpecies[static_cast<std::size_t>(l)])];
      muj[name] = mu[l];
      if (haveSym) symNum[name] = sym.num[static_cast<std::size_t>(l)].str();
    }
    e["mu"] = muj;
    if (haveSym) {
      e["symbolicNumerators"] = symNum;
      e["symbolicDenominator"] = sym.den.str();
    }
    entries.push_back(e);
  }
  report["entries"] = entries;

  Eigen::MatrixXd pi = crnred::splitting_probabilities(m.bundle.net, m.dec, N);
  json split;
  for (int l = 0; l < m.dec.size(); ++l) {
    const std::string& name = m.bundle.net.species[static_cast<std::size_t>(
        m.dec.vSpecies[static_cast<std::size_t>(l)])];
    json row;
    for (std::size_t wi = 0; wi < m.dec.W.size(); ++wi)
      row[m.bundle.net.complexes[static_cast<std::size_t>(m.dec.W[wi])].str(
          m.bundle.net.species)] = pi(l, static_cast<Eigen::Index>(wi));
    split[name] = row;
  }
  report["splitting"] = split;
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  LoadedModel m = load_model(args);
  crnred::ReducedNetwork red =
      crnred::reduce(m.bundle.net, m.dec, m.bundle.scaling);
  double N = pick_N(args, m);
  double T = pick_T(args, m, red, N);
  crnred::LimitingNetwork lim =
      crnred::build_limiting(red, folded_initials(red, m.z0));

  crnred::SimConfig cfg;
  cfg.N = N;
  cfg.T = T;
  std::vector<crnred::Rational> z0 = crnred::rescaled_initials(red, m.z0);
  Eigen::VectorXd zd(red.speciesCount());
  for (int i = 0; i < red.speciesCount(); ++i)
    zd[i] = z0[static_cast<std::size_t>(i)].toDouble();
  cfg.initial = crnred::full_initial_from_rescaled(
      red, N, zd, m.bundle.net.speciesCount());

  crnred::Trajectory full = crnred::simulate_full(m.bundle.net, m.dec, cfg);
  crnred::Trajectory reduced = crnred::simulate_reduced(red, cfg, zd);
  crnred::Trajectory limiting = crnred::simulate_limiting(lim, cfg, zd);
  auto grid = crnred::uniform_grid(0.0, T, cfg.samplePoints);

  std::filesystem::create_directories(args.outDir);
  std::filesystem::path outDir(args.outDir);
  auto writeCsv = [&](const std::string& kind, const crnred::Trajectory& tr,
                      const std::vector<std::string>& names) {
    std::ofstream out(outDir / (m.stem + "." + kind + ".csv"), std::ios::binary);
    crnred::write_trajectory_csv(out, tr, names, grid);
  };
  writeCsv("full", full, m.bundle.net.species);
  writeCsv("reduced", reduced, red.species);
  writeCsv("limiting", limiting, lim.species);

  json report;
  report["N"] = N;
  report["T"] = T;
  report["supErrorFullVsReduced"] =
      crnred::sup_rescaled_error_reduced(full, reduced, red, N, grid);
  report["supErrorFullVsLimiting"] =
      crnred::sup_rescaled_error_limiting(full, limiting, red, N, grid);
  report["conservationResidual"] =
      crnred::conservation_residual(m.bundle.net, full, grid);
  json finals;
  Eigen::VectorXd xT = full.eval(T);
  for (std::size_t k = 0; k < m.bundle.net.species.size(); ++k)
    finals[m.bundle.net.species[k]] = xT[static_cast<Eigen::Index>(k)];
  report["fullFinal"] = finals;
  json finalsLim;
  Eigen::VectorXd zT = limiting.eval(T);
  for (std::size_t k = 0; k < lim.species.size(); ++k)
    finalsLim[lim.species[k]] = zT[static_cast<Eigen::Index>(k)];
  report["limitingFinal"] = finalsLim;
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  LoadedModel m = load_model(args);
  crnred::ReducedNetwork red =
      crnred::reduce(m.bundle.net, m.dec, m.bundle.scaling);
  std::vector<double> grid =
      args.grid.empty() ? std::vector<double>{10, 100, 1000}
                        : parse_grid(args.grid);
  crnred::SimConfig cfg;
  cfg.T = pick_T(args, m, red, grid.back());
  std::vector<crnred::Rational> z0 = crnred::rescaled_initials(red, m.z0);
  crnred::SweepResult res = crnred::convergence_sweep(
      m.bundle.net, m.dec, m.bundle.scaling, z0, cfg, grid, args.jobs);

  std::filesystem::create_directories(args.outDir);
  std::ofstream csv(std::filesystem::path(args.outDir) / (m.stem + ".sweep.csv"),
                    std::ios::binary);
  crnred::write_sweep_csv(csv, res);

  json report;
  report["T"] = cfg.T;
  report["sweep"] = crnred::sweep_json(res);
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model reduction for reaction networks with intermediate species"};
  app.require_subcommand(1);

  CommonArgs args;
  auto addCommon = [&](CLI::App* sub, bool withSim) {
    sub->add_option("--network", args.network, "network file in the DSL");
    sub->add_option("--scenario", args.scenario,
                    "bundled scenario: mm, example2, example4, sec9-1, sec9-2");
    sub->add_option("--alpha", args.alphaOverrides,
                    "override a scaling exponent, name=p/q");
    sub->add_option("--out-dir", args.outDir, "directory for emitted files");
    if (withSim) {
      sub->add_option("--N", args.N, "scale parameter");
      sub->add_option("--T", args.T, "time horizon");
      sub->add_option("--grid", args.grid, "comma-separated N values");
      sub->add_option("--jobs", args.jobs, "parallel integrations");
    }
  };

  CLI::App* reduceCmd = app.add_subcommand(
      "reduce", "emit the reduced and limiting networks with a report");
  addCommon(reduceCmd, false);
  CLI::App* checkCmd = app.add_subcommand(
      "check", "run the fast-consumption assumption checkers");
  addCommon(checkCmd, true);
  CLI::App* interCmd = app.add_subcommand(
      "check-intermediates", "validate declared and detect maximal intermediates");
  addCommon(interCmd, false);
  CLI::App* muCmd = app.add_subcommand(
      "mu", "print quasi-steady contributions and splitting probabilities");
  addCommon(muCmd, true);
  CLI::App* simCmd =
      app.add_subcommand("simulate", "integrate full, reduced and limiting systems");
  addCommon(simCmd, true);
  CLI::App* sweepCmd =
      app.add_subcommand("sweep", "convergence sweep over a grid of N");
  addCommon(sweepCmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  auto started = std::chrono::steady_clock::now();
  int code = 1;
  try {
    if (reduceCmd->parsed()) code = cmd_reduce(args);
    else if (checkCmd->parsed()) code = cmd_check(args);
    else if (interCmd->parsed()) code = cmd_check_intermediates(args);
    else if (muCmd->parsed()) code = cmd_mu(args);
    else if (simCmd->parsed()) code = cmd_simulate(args);
    else if (sweepCmd->parsed()) code = cmd_sweep(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  auto elapsed = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - started)
                     .count();
  std::cerr << "elapsed: " << elapsed << " s\n";
  return code;
}
