#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bsgame/path_sim.hpp"
#include "bsgame/teugel.hpp"

namespace bsgame {

// What a controller is allowed to see at time t: everything (Full), nothing
// beyond deterministic time (Trivial), or the driving noise up to t - delay.
struct InfoStructure {
  enum class Kind { Full, Trivial, Delayed };
  Kind kind = Kind::Full;
  double delay = 0.0;

  static InfoStructure full() { return {Kind::Full, 0.0}; }
  static InfoStructure trivial() { return {Kind::Trivial, 0.0}; }
  static InfoStructure delayed(double delta);
};

struct RegressionConfig {
  int degree = 2;      // total degree of the polynomial feature basis
  double ridge = 0.0;  // relative penalty; 0 = plain least squares
};

// Cumulative noise levels W, W_L and H^1..H^K on the grid, path-major.
// These are the regression variables for delayed conditioning.
class NoiseLevels {
 public:
  TimeGrid grid{1.0, 1};
  int n_paths = 0;
  int dim_w = 0;
  int order = 0;

  std::vector<double> w;   // [path][gridpoint][component]
  std::vector<double> wl;  // [path][gridpoint]
  std::vector<double> h;   // [path][gridpoint][i]

  double w_at(int path, int gridpoint, int component) const {
    return w[(static_cast<size_t>(path) * (grid.steps + 1) + gridpoint) * dim_w + component];
  }
  double wl_at(int path, int gridpoint) const {
    return wl[static_cast<size_t>(path) * (grid.steps + 1) + gridpoint];
  }
  double h_at(int path, int gridpoint, int i) const {  // i is 1-based
    return h[(static_cast<size_t>(path) * (grid.steps + 1) + gridpoint) * order + (i - 1)];
  }
  int n_variables() const { return dim_w + 1 + order; }
  // Rows = paths, columns = (W^1..W^d, W_L, H^1..H^K) at one gridpoint.
  Eigen::MatrixXd variables_at(int gridpoint) const;
};

NoiseLevels accumulate_levels(const PathBundle& bundle, const TeugelIncrements& incs);

// Gridpoint whose noise levels a delayed controller may use at time t_k;
// -1 means no information yet (degenerates to the trivial structure).
int conditioning_gridpoint(const TimeGrid& grid, int gridpoint, double delay);

// Cross-sectional estimate of E[values | info at t_gridpoint], one value per
// path. Full returns the input; Trivial the ensemble mean; Delayed a
// polynomial regression on the visible noise levels.
Eigen::VectorXd cond_exp(const Eigen::VectorXd& values, const InfoStructure& info,
                         const NoiseLevels& levels, int gridpoint,
                         const RegressionConfig& cfg);

// Column-wise variant sharing one design factorization per call.
Eigen::MatrixXd cond_exp_columns(const Eigen::MatrixXd& values, const InfoStructure& info,
                                 const NoiseLevels& levels, int gridpoint,
                                 const RegressionConfig& cfg);

// Regression of values on explicit variables (intercept added internally).
// This is the estimator cond_exp uses once the feature matrix is built.
Eigen::MatrixXd regress_on(const Eigen::MatrixXd& values, const Eigen::MatrixXd& variables,
                           const RegressionConfig& cfg);

struct AdaptednessReport {
  bool adapted = false;
  double worst = 0.0;            // worst deviation measure over checked times
  std::vector<double> per_time;  // per-column deviation (Trivial: max spread;
                                 // Delayed: 1 - R^2 of the projection)
  std::string note;
};

// Checks one scalar process (rows = paths, column c = gridpoint first_gridpoint + c)
// for measurability with respect to the information structure.
AdaptednessReport is_adapted(const Eigen::MatrixXd& process, const InfoStructure& info,
                             const NoiseLevels& levels, int first_gridpoint,
                             const RegressionConfig& cfg);

}  // namespace bsgame
