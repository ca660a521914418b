#pragma once

#include <string>
#include <vector>

#include "bsgame/config.hpp"
#include "bsgame/info_structure.hpp"
#include "bsgame/path_sim.hpp"
#include "bsgame/teugel.hpp"

namespace bsgame {

// Stages every command shares: moments and basis from the driver's law,
// then (for the commands that consume noise) simulation, orthonormal
// martingale increments, and cumulative levels.
struct Pipeline {
  Eigen::MatrixXd gram;
  int order_used = 0;  // effective order; may sit below the requested one
  OrthonormalBasis basis;
  PathBundle bundle;
  TeugelIncrements incs;
  NoiseLevels levels;
};

Pipeline build_pipeline(const ProblemConfig& cfg, bool with_paths);

struct RunOptions {
  std::string out_dir;  // overrides the config's output directory when nonempty
};

// Executes one command against a validated config, writing every artifact
// plus manifest.json into the output directory. The manifest is written
// even when a stage throws (status "error" with the failing stage) before
// the exception continues to the caller. Returns 0, or 4 when a
// verification ran to completion and landed outside tolerance.
int run_mode(const ProblemConfig& cfg, const std::string& mode, const RunOptions& opts);

// Tabulates value estimates, oracle errors, and step-refinement rates
// across manifests sharing one base configuration (seed / paths / steps
// free). Writes comparison.csv plus its own manifest into out_dir.
int write_report(const std::vector<std::string>& manifest_paths, const std::string& out_dir);

}  // namespace bsgame
