#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "bsgame/bsde_solver.hpp"

namespace bsgame {

// H(t, y, q, z, u1, u2, k) = <k, -f> + l evaluated pathwise; k is the
// adjoint variable, one component per state component.
using HamiltonianFn =
    std::function<double(double t, const Eigen::VectorXd& y, const Eigen::MatrixXd& q,
                         const Eigen::MatrixXd& z, const Eigen::VectorXd& u1,
                         const Eigen::VectorXd& u2, const Eigen::VectorXd& k)>;

struct HamiltonianGradients {
  Eigen::VectorXd dy;   // n
  Eigen::MatrixXd dq;   // n x d, column i = gradient in q^i
  Eigen::MatrixXd dz;   // n x K, column i = gradient in z^i
  Eigen::VectorXd du1;  // m1
  Eigen::VectorXd du2;  // m2
};

using HamiltonianGradFn =
    std::function<void(double t, const Eigen::VectorXd& y, const Eigen::MatrixXd& q,
                       const Eigen::MatrixXd& z, const Eigen::VectorXd& u1,
                       const Eigen::VectorXd& u2, const Eigen::VectorXd& k,
                       HamiltonianGradients& out)>;

struct HamiltonianSpec {
  HamiltonianFn value;
  HamiltonianGradFn gradients;  // empty: central differences on `value`
};

// Gradient blocks of the Hamiltonian; falls back to central finite
// differences with step 1e-5 * (1 + |coordinate|) when no analytic form
// is supplied.
void hamiltonian_gradients(const HamiltonianSpec& ham, double t, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& q, const Eigen::MatrixXd& z,
                           const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                           const Eigen::VectorXd& k, HamiltonianGradients& out);

struct AdjointSolution {
  TimeGrid grid{1.0, 1};
  int n_paths = 0;
  int dim_k = 0;
  std::vector<double> k;  // [path][gridpoint][comp], gridpoints 0..N

  double k_at(int path, int gridpoint, int comp) const {
    return k[(static_cast<size_t>(path) * (grid.steps + 1) + gridpoint) * dim_k + comp];
  }
  Eigen::MatrixXd at_gridpoint(int gridpoint) const;  // n_paths x dim_k
  void mean_se(int gridpoint, Eigen::VectorXd& mean, Eigen::VectorXd& se) const;
};

// Gradient of the time-0 cost term; the adjoint starts at its negative.
using InitialGradientFn =
    std::function<void(const Eigen::VectorXd& y0, Eigen::VectorXd& out)>;

// Forward Euler for dk = -H_y dt - sum_i H_{q^i} dW^i - sum_i H_{z^i} dH^i,
// k(0) = -(gradient of the time-0 cost at y(0)), with every coefficient
// evaluated at the left endpoint. State and controls are read from the
// solved backward system.
AdjointSolution solve_adjoint_forward(const HamiltonianSpec& ham,
                                      const InitialGradientFn& initial_gradient,
                                      const BSDESolution& state, const PathBundle& bundle,
                                      const TeugelIncrements& incs, const ControlProcess& u1,
                                      const ControlProcess& u2);

// Same stepping for Hamiltonians whose y/q/z/u gradients do not read the
// state (the linear-quadratic case): no backward solve needed, k starts at
// the given deterministic vector and the callbacks see zero state.
AdjointSolution solve_adjoint_forward(const HamiltonianSpec& ham, const Eigen::VectorXd& k0,
                                      const PathBundle& bundle, const TeugelIncrements& incs);

}  // namespace bsgame
