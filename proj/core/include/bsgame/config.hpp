#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "bsgame/bsde_solver.hpp"
#include "bsgame/info_structure.hpp"
#include "bsgame/levy_model.hpp"
#include "bsgame/lq_game.hpp"

namespace bsgame {

// Terminal data xi, either a constant vector or affine in the terminal
// noise levels: xi = value + w * W(T) + h * H(T).
struct TerminalConfig {
  enum class Kind { Constant, Affine };
  Kind kind = Kind::Constant;
  Eigen::VectorXd value;  // n
  Eigen::MatrixXd w;      // n x d  (Affine)
  Eigen::MatrixXd h;      // n x K  (Affine)
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

// Everything a run needs, parsed from one JSON document. See README for the
// schema; parse errors carry JSON-style field paths.
struct ProblemConfig {
  LevyTriplet levy;

  int n = 1;
  int d = 1;
  int m1 = 1;
  int m2 = 1;
  int order = 1;  // requested martingale truncation order K

  double horizon = 1.0;
  int steps = 1;
  int paths = 1;
  std::uint64_t seed = 0;

  InfoStructure info1, info2;
  RegressionConfig regression;

  bool has_problem = false;
  LQSpec lq;  // dimensions filled from the dims block
  bool has_terminal = false;
  TerminalConfig terminal;

  OutputConfig outputs;

  TimeGrid grid() const { return TimeGrid(horizon, steps); }
};

ProblemConfig parse_config_text(const std::string& json_text);
ProblemConfig load_config(const std::string& path);

// FNV-1a digest of the canonical re-serialization; formatting-insensitive.
std::string config_hash(const ProblemConfig& cfg);
// Same digest with the sampling knobs (seed, paths, steps) blanked, so runs
// of one experiment at different resolutions share it.
std::string base_hash(const ProblemConfig& cfg);

// Terminal callback for the configured xi; order_used may be below the
// requested order, in which case affine loadings on dropped martingales
// must be zero.
TerminalFn make_terminal(const TerminalConfig& terminal, int n, int d, int order_used);

}  // namespace bsgame
