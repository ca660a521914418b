#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bsgame/common.hpp"
#include "bsgame/config.hpp"
#include "bsgame/runner.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<int> steps;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "problem configuration (JSON)")->required();
  cmd->add_option("--out", flags.out, "output directory (default: the config's outputs.directory)");
  cmd->add_option("--seed", flags.seed, "override mc.seed");
  cmd->add_option("--paths", flags.paths, "override mc.paths");
  cmd->add_option("--steps", flags.steps, "override grid.steps");
}

int run_command(const std::string& mode, const CommonFlags& flags) {
  bsgame::ProblemConfig cfg = bsgame::load_config(flags.config);
  std::vector<bsgame::FieldError> errs;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.paths) {
    if (*flags.paths < 1) errs.push_back({"mc.paths", "must be >= 1"});
    cfg.paths = *flags.paths;
  }
  if (flags.steps) {
    if (*flags.steps < 1) errs.push_back({"grid.steps", "must be >= 1"});
    cfg.steps = *flags.steps;
  }
  if (!errs.empty()) throw bsgame::ConfigError("invalid command-line override", std::move(errs));

  bsgame::RunOptions opts;
  opts.out_dir = flags.out;
  return bsgame::run_mode(cfg, mode, opts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Zero-sum stochastic differential games on backward systems driven by a "
      "Brownian motion and the orthonormal jump martingales of a Levy process"};
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::App* orth = app.add_subcommand(
      "orthonormalize", "Build the orthonormal martingale basis and report its residual");
  CLI::App* sim = app.add_subcommand(
      "simulate", "Sample driving noise and check the bracket identity empirically");
  CLI::App* lq = app.add_subcommand(
      "solve-lq", "Solve the linear-quadratic game and verify stationarity");
  CLI::App* saddle = app.add_subcommand(
      "verify-saddle", "Solve the game, then probe the saddle inequalities pathwise");
  CLI::App* conv = app.add_subcommand(
      "bsde-convergence", "Run the linear-driver oracle and report its grid error");
  for (CLI::App* cmd : {orth, sim, lq, saddle, conv}) add_common(cmd, flags);

  std::vector<std::string> manifests;
  std::string report_out;
  CLI::App* rep = app.add_subcommand(
      "report", "Tabulate value estimates and refinement rates across run manifests");
  rep->add_option("manifests", manifests, "manifest.json files from prior runs")->required();
  rep->add_option("--out", report_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string mode = app.get_subcommands().front()->get_name();
  try {
    if (mode == "report") return bsgame::write_report(manifests, report_out);
    return run_command(mode, flags);
  } catch (const bsgame::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    for (const auto& f : e.fields()) std::cerr << "  " << f.path << ": " << f.message << '\n';
    return 2;
  } catch (const bsgame::VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return 4;
  } catch (const bsgame::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
}
