#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int exitCode = -1;
  std::string out, err;
};

// Each invocation gets a fresh working directory so file outputs never alias.
fs::path freshDir() {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() /
                 ("crn-cli-" + std::to_string(::getpid()) + "-" +
                  std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

RunResult run(const std::string& args, const fs::path& dir) {
  fs::path outP = dir / "stdout.capture";
  fs::path errP = dir / "stderr.capture";
  std::string cmd = std::string(CRN_CLI_PATH) + " " + args + " > " +
                    outP.string() + " 2> " + errP.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  if (WIFEXITED(status)) r.exitCode = WEXITSTATUS(status);
  r.out = slurp(outP);
  r.err = slurp(errP);
  return r;
}

std::string dataFile(const std::string& name) {
  return std::string(CRN_DATA_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("reduce emits the symbolic networks and a structured report") {
  fs::path dir = freshDir();
  RunResult r = run("reduce --network " + dataFile("mm.rxn") + " --out-dir " +
                        dir.string(),
                    dir);
  REQUIRE(r.exitCode == 0);
  CHECK_THAT(r.err, ContainsSubstring("elapsed:"));

  json rep = json::parse(r.out);
  REQUIRE(rep.contains("network"));
  REQUIRE(rep.contains("decomposition"));
  REQUIRE(rep.contains("reduced"));
  REQUIRE(rep.contains("singleScale"));
  REQUIRE(rep.contains("limiting"));
  CHECK(rep["singleScale"]["pass"] == true);

  std::string reduced = slurp(dir / "mm.reduced.rxn");
  CHECK_THAT(reduced, ContainsSubstring("(8 N^3) / (4 N^3 + 3 N^2)"));
  CHECK(fs::exists(dir / "mm.limiting.rxn"));
}

TEST_CASE("reduce leaves a network without intermediates untouched") {
  fs::path dir = freshDir();
  RunResult r = run("reduce --network " + dataFile("empty-intermediates.rxn") +
                        " --out-dir " + dir.string(),
                    dir);
  REQUIRE(r.exitCode == 0);
  CHECK(slurp(dir / "empty-intermediates.reduced.rxn") ==
        slurp(dataFile("empty-intermediates.rxn")));
}

TEST_CASE("reduce signals a failed single-scale check") {
  fs::path dir = freshDir();
  RunResult r = run("reduce --network " + dataFile("mm.rxn") +
                        " --alpha P=0 --out-dir " + dir.string(),
                    dir);
  CHECK(r.exitCode == 2);
  json rep = json::parse(r.out);
  CHECK(rep["singleScale"]["pass"] == false);
  CHECK(!rep.contains("limiting"));
  CHECK(fs::exists(dir / "mm.reduced.rxn"));
  CHECK(!fs::exists(dir / "mm.limiting.rxn"));
}

TEST_CASE("check exit codes follow the proof ladder") {
  SECTION("proved by exponent comparison") {
    fs::path dir = freshDir();
    RunResult r = run("check --network " + dataFile("example4.rxn"), dir);
    CHECK(r.exitCode == 0);
    json rep = json::parse(r.out);
    CHECK(rep["verdict"]["status"] == "PROVED_PROP2");
  }
  SECTION("proved by the uniform-order argument") {
    fs::path dir = freshDir();
    RunResult r = run("check --network " + dataFile("sec9-1.rxn"), dir);
    CHECK(r.exitCode == 0);
    CHECK(json::parse(r.out)["verdict"]["status"] == "PROVED_PROP1");
  }
  SECTION("inconclusive networks exit with three") {
    fs::path dir = freshDir();
    std::string text = "species: A B";
    for (int i = 1; i <= 11; ++i) text += " H" + std::to_string(i);
    text += "\nintermediates:";
    for (int i = 1; i <= 11; ++i) text += " H" + std::to_string(i);
    text += "\nalpha:\n  A = 0\n  B = 0\nreactions:\n  A -> H1 @ 1\n";
    for (int i = 1; i <= 10; ++i)
      text += "  H" + std::to_string(i) + " -> H" + std::to_string(i + 1) +
              " @ N^45\n";
    text += "  H11 -> B @ N^45\n  H11 -> H1 @ N^44\n";
    fs::path net = dir / "tower.rxn";
    std::ofstream(net, std::ios::binary) << text;
    RunResult r = run("check --network " + net.string(), dir);
    CHECK(r.exitCode == 3);
    CHECK(json::parse(r.out)["verdict"]["status"] == "UNKNOWN");
  }
  SECTION("a failed single-scale check dominates") {
    fs::path dir = freshDir();
    RunResult r =
        run("check --network " + dataFile("mm.rxn") + " --alpha S=4", dir);
    CHECK(r.exitCode == 2);
    CHECK(json::parse(r.out)["singleScale"]["pass"] == false);
  }
}

TEST_CASE("splitting probabilities come with symbolic backing") {
  fs::path dir = freshDir();
  RunResult r =
      run("mu --network " + dataFile("mm.rxn") + " --N 10", dir);
  REQUIRE(r.exitCode == 0);
  json rep = json::parse(r.out);
  CHECK(rep["N"] == 10.0);
  REQUIRE(rep["entries"].size() == 1);
  const json& e = rep["entries"][0];
  CHECK(e["complex"] == "E + S");
  CHECK(e["symbolicDenominator"] == "4 N^3 + 3 N^2");
  CHECK(double(e["mu"]["ES"]) == Catch::Approx(2.0 / 4300.0).epsilon(1e-12));
  CHECK(double(rep["splitting"]["ES"]["E + S"]) ==
        Catch::Approx(300.0 / 4300.0).epsilon(1e-12));
  CHECK(double(rep["splitting"]["ES"]["E + P"]) ==
        Catch::Approx(4000.0 / 4300.0).epsilon(1e-12));
}

TEST_CASE("declared and maximal intermediate sets are reported") {
  fs::path dir = freshDir();
  RunResult r =
      run("check-intermediates --network " + dataFile("mm.rxn"), dir);
  REQUIRE(r.exitCode == 0);
  json rep = json::parse(r.out);
  REQUIRE(rep.contains("declared"));
  REQUIRE(rep["maximalIntermediates"].is_array());
  CHECK(rep["maximalIntermediates"] == json::array({"ES"}));
}

TEST_CASE("simulate writes trajectories and final-state summaries") {
  fs::path dir = freshDir();
  RunResult r = run("simulate --scenario sec9-1 --N 100 --T 50 --out-dir " +
                        dir.string(),
                    dir);
  REQUIRE(r.exitCode == 0);
  CHECK(fs::exists(dir / "sec9-1.full.csv"));
  CHECK(fs::exists(dir / "sec9-1.reduced.csv"));
  CHECK(fs::exists(dir / "sec9-1.limiting.csv"));
  json rep = json::parse(r.out);
  CHECK(rep["N"] == 100.0);
  CHECK(rep["T"] == 50.0);
  CHECK(double(rep["conservationResidual"]) < 1e-8);
  // The scale-infinity system parks on the unstable equilibrium while the
  // finite-scale flow slides off it.
  CHECK(std::abs(double(rep["limitingFinal"]["A"]) - 2.0) < 1e-6);
  CHECK(std::abs(double(rep["fullFinal"]["A"]) - 1.0) < 1e-2);
}

TEST_CASE("sweep reports the contraction across scales") {
  fs::path dir = freshDir();
  RunResult r = run("sweep --scenario example2 --grid 10,100 --T 5 --out-dir " +
                        dir.string(),
                    dir);
  REQUIRE(r.exitCode == 0);
  CHECK(fs::exists(dir / "example2.sweep.csv"));
  json rep = json::parse(r.out);
  CHECK(rep["T"] == 5.0);
  const json& sweep = rep["sweep"];
  CHECK(sweep["strictlyDecreasing"] == true);
  REQUIRE(sweep["cells"].size() == 2);
  CHECK(sweep["cells"][1]["errFullVsReduced"].get<double>() <
        sweep["cells"][0]["errFullVsReduced"].get<double>());
}

TEST_CASE("repeated invocations print byte-identical reports") {
  fs::path d1 = freshDir(), d2 = freshDir();
  RunResult a = run("reduce --network " + dataFile("mm.rxn") + " --out-dir " +
                        d1.string(),
                    d1);
  RunResult b = run("reduce --network " + dataFile("mm.rxn") + " --out-dir " +
                        d2.string(),
                    d2);
  REQUIRE(a.exitCode == 0);
  CHECK(a.out == b.out);

  RunResult c = run("check --network " + dataFile("example4.rxn"), d1);
  RunResult d = run("check --network " + dataFile("example4.rxn"), d2);
  REQUIRE(c.exitCode == 0);
  CHECK(c.out == d.out);
}

TEST_CASE("argument errors land on stderr with exit code one") {
  fs::path dir = freshDir();
  auto expectError = [&](const std::string& args, const std::string& needle) {
    RunResult r = run(args, dir);
    INFO(args);
    CHECK(r.exitCode == 1);
    CHECK(r.out.empty());
    CHECK_THAT(r.err, ContainsSubstring("error:"));
    CHECK_THAT(r.err, ContainsSubstring(needle));
  };
  expectError("reduce --network " + dataFile("no-such-file.rxn"),
              "cannot open network file");
  expectError("reduce", "one of --network or --scenario is required");
  expectError("reduce --network " + dataFile("mm.rxn") + " --alpha S",
              "malformed --alpha override");
  expectError("reduce --network " + dataFile("mm.rxn") + " --alpha Q=1",
              "unknown species in --alpha override");
  expectError("reduce --network " + dataFile("mm.rxn") + " --alpha ES=1",
              "alpha override given for intermediate");
  expectError("simulate --scenario nope", "unknown scenario");
}
