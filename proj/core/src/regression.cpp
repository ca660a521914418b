#include "bsgame/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>

#include "bsgame/common.hpp"

namespace bsgame {

namespace {

void enumerate(int n_vars, int remaining, int var, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  if (var == n_vars - 1) {
    cur[var] = remaining;
    out.push_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[var] = e;
    enumerate(n_vars, remaining - e, var + 1, cur, out);
  }
}

}  // namespace

PolynomialBasis PolynomialBasis::total_degree(int n_vars, int degree) {
  if (n_vars < 0) throw ConfigError("polynomial basis: negative variable count");
  if (degree < 0) throw ConfigError("polynomial basis: negative degree");
  PolynomialBasis basis;
  basis.n_vars = n_vars;
  basis.degree = degree;
  std::vector<int> cur(std::max(n_vars, 1), 0);
  if (n_vars == 0) {
    basis.exponents.push_back({});
    return basis;
  }
  for (int total = 0; total <= degree; ++total) {
    enumerate(n_vars, total, 0, cur, basis.exponents);
  }
  return basis;
}

Eigen::MatrixXd PolynomialBasis::evaluate(const Eigen::MatrixXd& variables) const {
  if (variables.cols() != n_vars) {
    throw ConfigError("polynomial basis: variable count mismatch");
  }
  const Eigen::Index n = variables.rows();
  Eigen::MatrixXd out(n, n_terms());
  for (int t = 0; t < n_terms(); ++t) {
    Eigen::VectorXd col = Eigen::VectorXd::Ones(n);
    for (int v = 0; v < n_vars; ++v) {
      for (int e = 0; e < exponents[t][v]; ++e) col.array() *= variables.col(v).array();
    }
    out.col(t) = col;
  }
  return out;
}

DesignSolver::DesignSolver(const Eigen::MatrixXd& design, double ridge) {
  const Eigen::Index n = design.rows();
  if (n == 0) throw ConfigError("least squares: empty sample");
  if (!design.allFinite()) throw NumericError("least squares: non-finite design");
  if (ridge < 0.0) throw ConfigError("least squares: negative ridge");
  n_rows_ = n;

  // Standardize and drop constant columns; the intercept carries the mean.
  std::vector<Eigen::Index> keep;
  Eigen::VectorXd mean(design.cols()), scale(design.cols());
  for (Eigen::Index c = 0; c < design.cols(); ++c) {
    mean[c] = design.col(c).mean();
    const double sd = std::sqrt((design.col(c).array() - mean[c]).square().sum() /
                                static_cast<double>(n));
    scale[c] = sd;
    if (sd > 1e-14 * (1.0 + std::abs(mean[c]))) keep.push_back(c);
  }
  n_columns_ = static_cast<int>(keep.size());
  if (keep.empty()) {
    rank_ = 1;
    return;
  }

  xs_.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) {
    xs_.col(static_cast<Eigen::Index>(j)) =
        (design.col(keep[j]).array() - mean[keep[j]]) / scale[keep[j]];
  }

  double lambda = ridge;
  if (ridge == 0.0) {
    qr_.compute(xs_);
    qr_.setThreshold(1e-10);
    rank_ = static_cast<int>(qr_.rank()) + 1;
    if (qr_.rank() == xs_.cols()) {
      use_qr_ = true;
      return;
    }
    lambda = 1e-10;
    ridge_bumped_ = true;
  }
  Eigen::MatrixXd gram = xs_.transpose() * xs_;
  gram.diagonal().array() += lambda * static_cast<double>(n);
  ldlt_.compute(gram);
  if (ldlt_.info() != Eigen::Success) {
    throw NumericError("least squares: normal equations factorization failed");
  }
  if (rank_ == 0) rank_ = static_cast<int>(xs_.cols()) + 1;
}

Eigen::MatrixXd DesignSolver::project(const Eigen::MatrixXd& responses) const {
  if (responses.rows() != n_rows_) throw ConfigError("least squares: row count mismatch");
  if (!responses.allFinite()) throw NumericError("least squares: non-finite responses");
  const Eigen::RowVectorXd resp_mean = responses.colwise().mean();
  if (n_columns_ == 0) return resp_mean.replicate(n_rows_, 1);
  Eigen::MatrixXd centered = responses.rowwise() - resp_mean;
  Eigen::MatrixXd beta =
      use_qr_ ? Eigen::MatrixXd(qr_.solve(centered)) : ldlt_.solve(xs_.transpose() * centered);
  return (xs_ * beta).rowwise() + resp_mean;
}

LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& design,
                                  const Eigen::MatrixXd& responses, double ridge) {
  DesignSolver solver(design, ridge);
  LeastSquaresFit fit;
  fit.fitted = solver.project(responses);
  fit.rank = solver.rank();
  fit.n_columns = solver.n_columns();
  fit.ridge_bumped = solver.ridge_bumped();
  return fit;
}

}  // namespace bsgame
