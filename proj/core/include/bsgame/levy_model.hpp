#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bsgame/common.hpp"

namespace bsgame {

// One point mass of a discrete jump measure: rate = measure of {size}.
struct JumpAtom {
  double size = 0.0;
  double rate = 0.0;
};

// Finite-activity jump measure of the driving Lévy process. Three families:
// a finite list of atoms, an exponential density rate*beta*exp(-beta*x) on
// (0, inf), or no jumps at all. Every family has finite moments of all
// orders and satisfies an exponential-moment bound, so power-jump
// compensators exist at any order.
struct JumpSpec {
  enum class Family { None, Atoms, Exponential };

  Family family = Family::None;
  std::vector<JumpAtom> atoms;  // Family::Atoms
  double intensity = 0.0;       // Family::Exponential, total mass lambda > 0
  double decay = 0.0;           // Family::Exponential, size distribution rate beta > 0

  static JumpSpec none();
  static JumpSpec make_atoms(std::vector<JumpAtom> atoms);
  static JumpSpec exponential(double intensity, double decay);

  // Total jump intensity nu(R).
  double total_rate() const;
};

// Law of the driving one-dimensional Lévy process, parameterized by the
// mean rate b = E[L(1)] (not the truncated drift), the Gaussian
// coefficient sigma, and a finite-activity jump measure.
struct LevyTriplet {
  double mean_rate = 0.0;
  double sigma = 0.0;
  JumpSpec jumps;
};

// m_j = integral of x^j against the jump measure, computed in closed form:
// Atoms -> sum rate * size^j; Exponential(lambda, beta) -> lambda * j! / beta^j;
// None -> 0. Requires j >= 1.
double moment(const JumpSpec& jumps, int j);

// Same integral by numeric quadrature; cross-check for the closed forms.
double moment_quadrature(const JumpSpec& jumps, int j);

// Cached moments m_1..m_max of a jump measure.
struct MomentTable {
  std::vector<double> m;

  static MomentTable build(const JumpSpec& jumps, int max_order);
  int max_order() const { return static_cast<int>(m.size()); }
  double value(int j) const;
};

// Gram matrix of the monomials 1, x, ..., x^(K-1) under the
// orthonormalization measure mu(dx) = x^2 nu(dx) + sigma^2 delta_0(dx):
//   G(i, j) = m_{i+j+2} + sigma^2 * [i == j == 0]   (0-based indices).
// Symmetric positive semidefinite by construction.
Eigen::MatrixXd gram_matrix(const LevyTriplet& triplet, int order);

// Largest K' <= dim(G) whose leading principal block admits a Cholesky
// factorization with every pivot (diagonal of the LDL^T factor) > tol.
// Returns 0 when already G(0,0) <= tol. This is the maximal usable
// orthonormal-basis order for the given driver.
int effective_order(const Eigen::MatrixXd& gram, double tol);

struct ValidationReport {
  bool valid = false;
  std::string error;               // nonempty iff !valid
  std::vector<std::string> notes;  // human-readable diagnostics
};

// Checks the triplet is a usable driver: sigma >= 0, nonnegative rates,
// finite total intensity, and not degenerate (sigma == 0 with no jumps).
// Notes record the moment growth and the exponential-moment margin.
ValidationReport validate(const LevyTriplet& triplet);

}  // namespace bsgame
