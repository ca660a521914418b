#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>
#include <vector>

namespace bsgame {

// Exponent table of all monomials in n_vars variables with total degree
// <= degree, constant term first. Column order is deterministic
// (graded lexicographic), so regressions are reproducible bit for bit.
struct PolynomialBasis {
  int n_vars = 0;
  int degree = 0;
  std::vector<std::vector<int>> exponents;

  static PolynomialBasis total_degree(int n_vars, int degree);
  int n_terms() const { return static_cast<int>(exponents.size()); }

  // Evaluates every monomial on the given variables (rows = samples).
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& variables) const;
};

struct LeastSquaresFit {
  Eigen::MatrixXd fitted;  // rows = samples, one column per response
  int rank = 0;
  int n_columns = 0;       // columns actually used (zero-variance ones dropped)
  bool ridge_bumped = false;
};

// Least squares against [1, standardized design columns], factored once so
// several response sets can be projected cheaply. Zero-variance columns are
// dropped up front. ridge = 0 uses rank-revealing QR; a rank-deficient
// design (or ridge > 0) falls back to penalized normal equations with the
// intercept left unpenalized, so fitted values always preserve the sample
// mean and never expand the sample L2 norm.
class DesignSolver {
 public:
  DesignSolver(const Eigen::MatrixXd& design, double ridge);

  Eigen::MatrixXd project(const Eigen::MatrixXd& responses) const;

  int rank() const { return rank_; }
  int n_columns() const { return n_columns_; }
  bool ridge_bumped() const { return ridge_bumped_; }

 private:
  Eigen::MatrixXd xs_;  // standardized, variance-filtered columns
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  bool use_qr_ = false;
  int rank_ = 0;
  int n_columns_ = 0;
  bool ridge_bumped_ = false;
  Eigen::Index n_rows_ = 0;
};

LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& design,
                                  const Eigen::MatrixXd& responses, double ridge);

}  // namespace bsgame
