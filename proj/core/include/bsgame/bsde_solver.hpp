#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "bsgame/info_structure.hpp"
#include "bsgame/path_sim.hpp"
#include "bsgame/teugel.hpp"

namespace bsgame {

// Read-only view of one simulated path's cumulative noise, handed to
// terminal-condition callbacks.
class PathView {
 public:
  PathView(const NoiseLevels& levels, int path) : levels_(&levels), path_(path) {}
  const TimeGrid& grid() const { return levels_->grid; }
  double w(int gridpoint, int component) const { return levels_->w_at(path_, gridpoint, component); }
  double wl(int gridpoint) const { return levels_->wl_at(path_, gridpoint); }
  double h(int gridpoint, int i) const { return levels_->h_at(path_, gridpoint, i); }
  double w_terminal(int component) const { return w(levels_->grid.steps, component); }
  double wl_terminal() const { return wl(levels_->grid.steps); }
  double h_terminal(int i) const { return h(levels_->grid.steps, i); }
  int path() const { return path_; }

 private:
  const NoiseLevels* levels_;
  int path_;
};

// Driver f(t, y, q, z, u1, u2) -> out, written into `out` to avoid per-path
// allocations in the backward loop. q has one column per Brownian component,
// z one column per martingale.
using DriverFn =
    std::function<void(double t, const Eigen::VectorXd& y, const Eigen::MatrixXd& q,
                       const Eigen::MatrixXd& z, const Eigen::VectorXd& u1,
                       const Eigen::VectorXd& u2, Eigen::VectorXd& out)>;

using TerminalFn = std::function<void(const PathView& path, Eigen::VectorXd& out)>;

using RunningCostFn =
    std::function<double(double t, const Eigen::VectorXd& y, const Eigen::MatrixXd& q,
                         const Eigen::MatrixXd& z, const Eigen::VectorXd& u1,
                         const Eigen::VectorXd& u2)>;
using InitialCostFn = std::function<double(const Eigen::VectorXd& y0)>;

// Payoff: running part integrated over [0,T] plus a function of y at time 0
// (the terminal value is pinned by the data, so the free endpoint is t = 0).
struct CostSpec {
  RunningCostFn running;
  InitialCostFn initial;
};

// Piecewise-constant control sample, path-major.
struct ControlProcess {
  int n_paths = 0;
  int steps = 0;
  int dim = 0;
  std::vector<double> values;  // [path][step][component]

  static ControlProcess zeros(int n_paths, int steps, int dim);
  static ControlProcess constant(int n_paths, int steps, const Eigen::VectorXd& u);

  double* at(int path, int step) {
    return values.data() + (static_cast<size_t>(path) * steps + step) * dim;
  }
  const double* at(int path, int step) const {
    return values.data() + (static_cast<size_t>(path) * steps + step) * dim;
  }
  void get(int path, int step, Eigen::VectorXd& out) const {
    out.resize(dim);
    if (dim > 0) out = Eigen::Map<const Eigen::VectorXd>(at(path, step), dim);
  }
};

struct BSDESolution {
  TimeGrid grid{1.0, 1};
  int n_paths = 0;
  int dim_y = 0;
  int dim_w = 0;
  int order = 0;  // martingale truncation order the solve actually used

  std::vector<double> y;  // [path][gridpoint][comp], gridpoints 0..N
  std::vector<double> q;  // [path][step][comp][brownian]
  std::vector<double> z;  // [path][step][comp][martingale]

  double y_at(int path, int gridpoint, int comp) const {
    return y[(static_cast<size_t>(path) * (grid.steps + 1) + gridpoint) * dim_y + comp];
  }
  double q_at(int path, int step, int comp, int i) const {  // i: 0-based Brownian index
    return q[((static_cast<size_t>(path) * grid.steps + step) * dim_y + comp) * dim_w + i];
  }
  double z_at(int path, int step, int comp, int i) const {  // i: 1-based martingale index
    return z[((static_cast<size_t>(path) * grid.steps + step) * dim_y + comp) * order + (i - 1)];
  }

  Eigen::VectorXd y0_mean() const;
};

struct BackwardOptions {
  RegressionConfig regression;
  double divergence_guard = 1e8;  // abort when any |y| component exceeds this
};

// Backward induction for y(t) = xi + int f ds - int q dW - sum_i int z^i dH^i
// under exogenous controls. Conditional expectations are polynomial
// regressions on the noise levels at the current gridpoint; the martingale
// coefficients are regressed in increment-correlation form, which is exact
// for constant data and keeps the estimator unbiased step by step.
BSDESolution solve_backward(const NoiseLevels& levels, const PathBundle& bundle,
                            const TeugelIncrements& incs, int dim_y, const DriverFn& driver,
                            const TerminalFn& terminal, const ControlProcess& u1,
                            const ControlProcess& u2, const BackwardOptions& opts);

struct CostEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Payoff of a solved tuple under the given controls, one entry per path:
// left-endpoint quadrature of the running cost plus the time-0 term. Keeping
// the per-path values makes common-random-number comparisons exact.
Eigen::VectorXd pathwise_cost(const BSDESolution& sol, const CostSpec& cost,
                              const ControlProcess& u1, const ControlProcess& u2);

CostEstimate evaluate_cost(const BSDESolution& sol, const CostSpec& cost,
                           const ControlProcess& u1, const ControlProcess& u2);

struct ResidualReport {
  std::vector<double> step_mean;  // max-abs over components of the ensemble mean, per step
  double max_step_mean = 0.0;
  double rms = 0.0;
};

// One-step defects r_k = y_{k+1} - y_k + f dt - q dW - sum z^i dH^i. Their
// ensemble means should vanish to regression accuracy; the RMS shows the
// size of the martingale part that the scheme absorbs.
ResidualReport residual_audit(const BSDESolution& sol, const PathBundle& bundle,
                              const TeugelIncrements& incs, const DriverFn& driver,
                              const ControlProcess& u1, const ControlProcess& u2);

}  // namespace bsgame
