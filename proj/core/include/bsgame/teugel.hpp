#pragma once

#include <Eigen/Core>
#include <vector>

#include "bsgame/path_sim.hpp"

namespace bsgame {

// Coefficients of the orthonormal polynomial family under the measure
// mu(dx) = x^2 nu(dx) + sigma^2 delta_0(dx). Row i holds q_i(x) =
// sum_{j<=i} coeff(i,j) x^j (0-based), so coeff is lower triangular with a
// positive diagonal and coeff * G * coeff^T = I for the Gram matrix G the
// basis was built from.
struct OrthonormalBasis {
  int order = 0;
  Eigen::MatrixXd coeff;

  // max-norm of coeff * G * coeff^T - I; the defining identity's residual.
  double residual(const Eigen::MatrixXd& gram) const;
};

// Inverse lower Cholesky factor of the leading order x order block of G.
// Equivalent to Gram-Schmidt on the monomials under the G inner product but
// numerically tighter, and the positive-diagonal convention is automatic.
// Throws NumericError naming the failing order when a pivot is <= tol.
OrthonormalBasis orthonormalize(const Eigen::MatrixXd& gram, int order, double tol = 1e-12);

// Per-path, per-step increments of the orthonormal martingale family:
// dH^i = sum_{j<=i} coeff(i,j) dY^(j). Layout [path][step][i-1].
struct TeugelIncrements {
  int order = 0;
  int n_paths = 0;
  int steps = 0;
  std::vector<double> dH;

  double value(int path, int step, int index) const {
    return dH[(static_cast<std::size_t>(path) * steps + step) * order + index - 1];
  }
};

// Applies the basis row-wise to the bundle's power-jump increments.
// Requires bundle.max_power >= basis.order.
TeugelIncrements increments(const PathBundle& bundle, const OrthonormalBasis& basis);

// Monte Carlo realized covariation sum_k dH^i_k dH^j_k averaged over paths.
// Unbiased for delta_ij * T at any step count, so the estimate must land
// within a few standard errors of the identity scaled by T.
struct BracketReport {
  Eigen::MatrixXd estimate;
  Eigen::MatrixXd se;
  int n_paths = 0;
};

BracketReport bracket_test(const TeugelIncrements& incs, const TimeGrid& grid);

}  // namespace bsgame
