#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "bsgame/adjoint_game.hpp"
#include "bsgame/bsde_solver.hpp"
#include "bsgame/info_structure.hpp"

namespace bsgame {

// Piecewise-constant matrix of time, left-continuous from the right:
// piece i applies on [breaks[i-1], breaks[i]).
struct TimeVarying {
  std::vector<double> breaks;           // ascending interior breakpoints
  std::vector<Eigen::MatrixXd> values;  // breaks.size() + 1 pieces

  static TimeVarying constant(Eigen::MatrixXd v);
  const Eigen::MatrixXd& at(double t) const;
  bool fixed_shape(Eigen::Index rows, Eigen::Index cols) const;
};

// Linear driver / quadratic cost game:
//   f = A y + sum_i B^i q^i + sum_i C^i z^i + D1 u1 + D2 u2
//   l = <E,y> + sum_i <F^i,q^i> + sum_i <G^i,z^i> + <N1 u1,u1> - <N2 u2,u2>
//   time-0 cost term <M, y(0)>.
// Player 1 minimizes, player 2 maximizes.
struct LQSpec {
  int n = 1;      // state dimension
  int d = 1;      // Brownian components
  int m1 = 1;     // player-1 control dimension
  int m2 = 1;     // player-2 control dimension
  int order = 1;  // martingale truncation order

  TimeVarying A;
  std::vector<TimeVarying> B;  // d entries, n x n
  std::vector<TimeVarying> C;  // order entries, n x n
  TimeVarying D1;              // n x m1
  TimeVarying D2;              // n x m2
  TimeVarying E;               // n x 1
  std::vector<TimeVarying> F;  // d entries, n x 1
  std::vector<TimeVarying> G;  // order entries, n x 1
  Eigen::VectorXd M;           // n
  TimeVarying N1;              // m1 x m1, symmetric positive definite
  TimeVarying N2;              // m2 x m2, symmetric positive definite
};

// Shape and definiteness checks; throws ConfigError naming each bad field.
void validate_lq(const LQSpec& spec);

DriverFn make_lq_driver(const LQSpec& spec);
CostSpec make_lq_cost(const LQSpec& spec);
HamiltonianSpec make_lq_hamiltonian(const LQSpec& spec);

// Pointwise saddle of the conditionally expected Hamiltonian:
//   u1 = +1/2 N1^{-1} D1' E[k|info1],  u2 = -1/2 N2^{-1} D2' E[k|info2].
std::pair<ControlProcess, ControlProcess> lq_optimal_controls(
    const LQSpec& spec, const AdjointSolution& adjoint, const InfoStructure& info1,
    const InfoStructure& info2, const NoiseLevels& levels, const RegressionConfig& cfg);

struct LQSolveOptions {
  BackwardOptions backward;
  InfoStructure info1 = InfoStructure::full();
  InfoStructure info2 = InfoStructure::full();
};

struct LQSolveResult {
  AdjointSolution adjoint;
  ControlProcess u1, u2;
  BSDESolution bsde;  // state under the candidate controls
  CostEstimate cost;
};

// Candidate equilibrium on a frozen noise sample: adjoint forward (its
// coefficients do not involve the state or the controls here), candidate
// controls by conditional projection, then the state backward under them.
LQSolveResult lq_solve(const LQSpec& spec, const TerminalFn& xi, const NoiseLevels& levels,
                       const PathBundle& bundle, const TeugelIncrements& incs,
                       const LQSolveOptions& opts);

struct PlayerStationarity {
  double max_residual = 0.0;      // worst |projected control gradient| anywhere
  double max_se = 0.0;            // worst standard error of the mean gradient
  std::vector<double> per_step;   // max-abs projected gradient per step
};

struct StationarityReport {
  PlayerStationarity player1, player2;
};

// Projects each player's Hamiltonian control gradient onto their own
// information and reports how far it is from zero.
StationarityReport verify_stationarity(const LQSpec& spec, const AdjointSolution& adjoint,
                                       const ControlProcess& u1, const ControlProcess& u2,
                                       const InfoStructure& info1, const InfoStructure& info2,
                                       const NoiseLevels& levels, const RegressionConfig& cfg);

struct SaddleProbe {
  std::string direction;
  int player = 0;
  double epsilon = 0.0;
  double delta_j = 0.0;     // mean pathwise cost change under the perturbation
  double se = 0.0;          // standard error of that mean (common random numbers)
  double quad_ratio = 0.0;  // delta_j over its exact second-order prediction
  bool sign_ok = false;
  bool ratio_ok = false;
};

struct SaddleReport {
  double baseline_value = 0.0;
  double baseline_se = 0.0;
  std::vector<SaddleProbe> probes;
  bool signs_ok = true;
  bool ratios_ok = true;
  bool all_ok() const { return signs_ok && ratios_ok; }
};

struct SaddleOptions {
  std::vector<double> epsilons{0.1, 0.2, 0.4};
  double ratio_tol = 0.15;
  // Also probe along sign(W^1(t)) (admissible under full information only).
  bool adapted_directions = false;
};

// Perturbs each player in turn on the same noise sample and re-solves the
// state, so cost differences are measured pathwise. Player-1 perturbations
// must not lower the cost, player-2 perturbations must not raise it, and the
// measured change must match the exact quadratic term of the discrete map.
SaddleReport verify_saddle(const LQSpec& spec, const TerminalFn& xi, const NoiseLevels& levels,
                           const PathBundle& bundle, const TeugelIncrements& incs,
                           const LQSolveResult& candidate, const LQSolveOptions& solve_opts,
                           const SaddleOptions& opts);

struct MinimaxOptions {
  bool grid = true;       // also scan a control grid around the candidate
  int grid_points = 9;    // per component, odd so the candidate is included
  double grid_radius = 1.0;
  int path_stride = 97;   // subsample paths for the grid scan
  double tol = 1e-10;
};

struct MinimaxReport {
  double max_dev_u1 = 0.0;  // candidate vs closed-form pointwise optimizer
  double max_dev_u2 = 0.0;
  bool analytic_ok = false;
  bool grid_ok = true;
  double worst_grid_violation = 0.0;  // > tol would mean a grid point beats the candidate
  std::string note;
};

// Checks that the candidate controls solve the pointwise min/max of the
// conditionally expected Hamiltonian: closed form when the control costs
// are definite, and optionally a brute grid scan that needs no convexity.
MinimaxReport verify_minimax(const LQSpec& spec, const AdjointSolution& adjoint,
                             const ControlProcess& u1, const ControlProcess& u2,
                             const InfoStructure& info1, const InfoStructure& info2,
                             const NoiseLevels& levels, const RegressionConfig& cfg,
                             const MinimaxOptions& opts);

}  // namespace bsgame
