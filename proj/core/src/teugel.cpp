#include "bsgame/teugel.hpp"

#include <cmath>

#include "bsgame/common.hpp"

namespace bsgame {

double OrthonormalBasis::residual(const Eigen::MatrixXd& gram) const {
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(order, order);
  return (coeff * gram.topLeftCorner(order, order) * coeff.transpose() - identity)
      .cwiseAbs()
      .maxCoeff();
}

OrthonormalBasis orthonormalize(const Eigen::MatrixXd& gram, int order, double tol) {
  if (order < 1) throw std::invalid_argument("orthonormalize: order must be >= 1");
  if (gram.rows() < order || gram.cols() < order) {
    throw std::invalid_argument("orthonormalize: Gram matrix smaller than requested order");
  }

  // Cholesky of the leading block, aborting on the first unusable pivot.
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(order, order);
  for (int k = 0; k < order; ++k) {
    double pivot = gram(k, k);
    for (int j = 0; j < k; ++j) pivot -= chol(k, j) * chol(k, j);
    if (!(pivot > tol)) {
      throw NumericError("orthonormalize: Gram matrix rank-deficient at order " +
                         std::to_string(k + 1) + " (pivot " + std::to_string(pivot) +
                         "); lower the truncation order");
    }
    chol(k, k) = std::sqrt(pivot);
    for (int i = k + 1; i < order; ++i) {
      double value = gram(i, k);
      for (int j = 0; j < k; ++j) value -= chol(i, j) * chol(k, j);
      chol(i, k) = value / chol(k, k);
    }
  }

  // coeff = L^{-1} by forward substitution; diagonal 1/L(k,k) > 0.
  OrthonormalBasis basis;
  basis.order = order;
  basis.coeff = Eigen::MatrixXd::Zero(order, order);
  for (int col = 0; col < order; ++col) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(order);
    e(col) = 1.0;
    for (int i = col; i < order; ++i) {
      double value = e(i);
      for (int j = 0; j < i; ++j) value -= chol(i, j) * basis.coeff(j, col);
      basis.coeff(i, col) = value / chol(i, i);
    }
  }
  return basis;
}

TeugelIncrements increments(const PathBundle& bundle, const OrthonormalBasis& basis) {
  if (basis.order > bundle.max_power) {
    throw std::invalid_argument("increments: bundle power order " +
                                std::to_string(bundle.max_power) + " below basis order " +
                                std::to_string(basis.order));
  }

  TeugelIncrements incs;
  incs.order = basis.order;
  incs.n_paths = bundle.n_paths;
  incs.steps = bundle.grid.steps;
  incs.dH.resize(static_cast<std::size_t>(bundle.n_paths) * incs.steps * incs.order);

  const int order = basis.order;
  for (int p = 0; p < bundle.n_paths; ++p) {
    for (int k = 0; k < incs.steps; ++k) {
      const double* dy =
          bundle.dY.data() + (static_cast<std::size_t>(p) * incs.steps + k) * bundle.max_power;
      double* dh = incs.dH.data() + (static_cast<std::size_t>(p) * incs.steps + k) * order;
      for (int i = 0; i < order; ++i) {
        double acc = 0.0;
        for (int j = 0; j <= i; ++j) acc += basis.coeff(i, j) * dy[j];
        dh[i] = acc;
      }
    }
  }
  return incs;
}

BracketReport bracket_test(const TeugelIncrements& incs, const TimeGrid& grid) {
  if (incs.n_paths < 100) {
    throw std::invalid_argument("bracket_test: need at least 100 paths");
  }
  if (incs.steps != grid.steps) {
    throw std::invalid_argument("bracket_test: grid does not match the increments");
  }

  const int order = incs.order;
  BracketReport report;
  report.n_paths = incs.n_paths;
  report.estimate = Eigen::MatrixXd::Zero(order, order);
  report.se = Eigen::MatrixXd::Zero(order, order);

  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(order, order);
  Eigen::MatrixXd covariation(order, order);
  for (int p = 0; p < incs.n_paths; ++p) {
    covariation.setZero();
    for (int k = 0; k < incs.steps; ++k) {
      const double* dh = incs.dH.data() + (static_cast<std::size_t>(p) * incs.steps + k) * order;
      for (int i = 0; i < order; ++i) {
        for (int j = 0; j <= i; ++j) covariation(i, j) += dh[i] * dh[j];
      }
    }
    report.estimate += covariation;
    sum_sq += covariation.cwiseProduct(covariation);
  }

  const double n = incs.n_paths;
  report.estimate /= n;
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double var =
          std::max(0.0, (sum_sq(i, j) - n * report.estimate(i, j) * report.estimate(i, j)) /
                            (n - 1.0));
      report.se(i, j) = std::sqrt(var / n);
      report.se(j, i) = report.se(i, j);
      report.estimate(j, i) = report.estimate(i, j);
    }
  }
  return report;
}

}  // namespace bsgame
