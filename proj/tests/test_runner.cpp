#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "bsgame/common.hpp"
#include "bsgame/runner.hpp"

using namespace bsgame;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bsgame_runner_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "missing file: " << p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

const char* kGameText = R"json({
  "levy": {"sigma": 1.0, "jumps": {"type": "atoms", "atoms": [{"size": 1.0, "rate": 1.0}]}},
  "dims": {"n": 1, "d": 1, "m1": 1, "m2": 1, "K": 2},
  "grid": {"T": 1.0, "steps": 5},
  "mc": {"paths": 300, "seed": 2024},
  "problem": {
    "A": 0.2, "B": 0.1, "C": [0.1, 0.0],
    "D1": 1.0, "D2": 1.0, "E": 0.5,
    "M": 1.0, "N1": 1.0, "N2": 1.0,
    "xi": {"type": "affine", "value": 1.0, "w": 0.5}
  }
})json";

const char* kNoProblemText = R"json({
  "levy": {"sigma": 1.0, "jumps": {"type": "atoms", "atoms": [{"size": 1.0, "rate": 1.0}]}},
  "dims": {"n": 1, "d": 1, "K": 2},
  "grid": {"T": 1.0, "steps": 4},
  "mc": {"paths": 100, "seed": 7}
})json";

std::string convergence_text(int steps) {
  std::ostringstream out;
  out << R"json({
    "levy": {"sigma": 1.0, "jumps": {"type": "atoms", "atoms": [{"size": 1.0, "rate": 1.0}]}},
    "dims": {"d": 1, "K": 2},
    "grid": {"T": 1.0, "steps": )json"
      << steps << R"json(},
    "mc": {"paths": 400, "seed": 31}
  })json";
  return out.str();
}

}  // namespace

TEST_CASE("orthonormalize mode writes its artifacts and manifest") {
  const fs::path dir = fresh_dir("ortho");
  const ProblemConfig cfg = parse_config_text(kNoProblemText);
  RunOptions opts;
  opts.out_dir = dir.string();
  CHECK(run_mode(cfg, "orthonormalize", opts) == 0);

  CHECK(fs::exists(dir / "gram.csv"));
  CHECK(fs::exists(dir / "basis.csv"));
  const json m = read_manifest(dir);
  CHECK(m["status"] == "ok");
  CHECK(m["mode"] == "orthonormalize");
  CHECK(m["config_hash"] == config_hash(cfg));
  CHECK(m["order_used"] == 2);
  CHECK(m["results"]["residual"].get<double>() <= 1e-12);
  CHECK(m["wall_seconds"].get<double>() >= 0.0);
}

TEST_CASE("solve-lq runs are byte-identical") {
  const fs::path d1 = fresh_dir("lq_a");
  const fs::path d2 = fresh_dir("lq_b");
  const ProblemConfig cfg = parse_config_text(kGameText);
  RunOptions o1, o2;
  o1.out_dir = d1.string();
  o2.out_dir = d2.string();
  REQUIRE(run_mode(cfg, "solve-lq", o1) == 0);
  REQUIRE(run_mode(cfg, "solve-lq", o2) == 0);

  CHECK(slurp(d1 / "controls.csv") == slurp(d2 / "controls.csv"));
  CHECK(slurp(d1 / "adjoint.csv") == slurp(d2 / "adjoint.csv"));
  CHECK(slurp(d1 / "stationarity.json") == slurp(d2 / "stationarity.json"));

  const json m = read_manifest(d1);
  CHECK(m["status"] == "ok");
  CHECK(m["results"]["stationarity_ok"] == true);
  CHECK(std::isfinite(m["results"]["J"].get<double>()));
  // full information: the projected gradient is identically zero
  CHECK(m["results"]["stationarity_max_p1"].get<double>() <= 1e-12);
}

TEST_CASE("failures still leave a manifest behind") {
  const fs::path dir = fresh_dir("fail");
  const ProblemConfig cfg = parse_config_text(kNoProblemText);
  RunOptions opts;
  opts.out_dir = dir.string();
  CHECK_THROWS_AS(run_mode(cfg, "solve-lq", opts), ConfigError);

  const json m = read_manifest(dir);
  CHECK(m["status"] == "error");
  CHECK(m["failing_stage"] == "problem");
  CHECK(m.contains("error"));
}

TEST_CASE("unknown commands are rejected") {
  const fs::path dir = fresh_dir("unknown");
  const ProblemConfig cfg = parse_config_text(kNoProblemText);
  RunOptions opts;
  opts.out_dir = dir.string();
  CHECK_THROWS_AS(run_mode(cfg, "frobnicate", opts), ConfigError);
  CHECK(read_manifest(dir)["failing_stage"] == "setup");
}

TEST_CASE("refinement report recovers the first-order rate") {
  const fs::path c8 = fresh_dir("conv8");
  const fs::path c16 = fresh_dir("conv16");
  const fs::path rep = fresh_dir("report");

  RunOptions o8, o16;
  o8.out_dir = c8.string();
  o16.out_dir = c16.string();
  REQUIRE(run_mode(parse_config_text(convergence_text(8)), "bsde-convergence", o8) == 0);
  REQUIRE(run_mode(parse_config_text(convergence_text(16)), "bsde-convergence", o16) == 0);
  CHECK(fs::exists(c8 / "convergence.csv"));

  const std::vector<std::string> inputs = {(c8 / "manifest.json").string(),
                                           (c16 / "manifest.json").string()};
  CHECK(write_report(inputs, rep.string()) == 0);
  const json m = read_manifest(rep);
  CHECK(m["mode"] == "report");
  CHECK(m["status"] == "ok");

  // last cell of the second data row is the measured refinement rate
  const std::string csv = slurp(rep / "comparison.csv");
  std::istringstream lines(csv);
  std::string header, row1, row2;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, row1));
  REQUIRE(std::getline(lines, row2));
  const double rate = std::stod(row2.substr(row2.rfind(',') + 1));
  CHECK(rate == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("reports refuse manifests from different experiments") {
  const fs::path a = fresh_dir("mix_a");
  const fs::path b = fresh_dir("mix_b");
  RunOptions oa, ob;
  oa.out_dir = a.string();
  ob.out_dir = b.string();
  REQUIRE(run_mode(parse_config_text(convergence_text(8)), "bsde-convergence", oa) == 0);

  std::string other = convergence_text(8);
  other.replace(other.find("\"sigma\": 1.0"), 12, "\"sigma\": 2.0");
  REQUIRE(run_mode(parse_config_text(other), "bsde-convergence", ob) == 0);

  const fs::path rep = fresh_dir("mix_rep");
  const std::vector<std::string> inputs = {(a / "manifest.json").string(),
                                           (b / "manifest.json").string()};
  CHECK_THROWS_AS(write_report(inputs, rep.string()), ConfigError);
  CHECK_THROWS_AS(write_report({}, rep.string()), ConfigError);
  CHECK_THROWS_AS(write_report({(rep / "nope.json").string()}, rep.string()), ConfigError);
}
