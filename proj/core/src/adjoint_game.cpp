#include "bsgame/adjoint_game.hpp"

#include <cmath>

#include "bsgame/common.hpp"

namespace bsgame {

namespace {

double fd_step(double coord) { return 1e-5 * (1.0 + std::abs(coord)); }

}  // namespace

void hamiltonian_gradients(const HamiltonianSpec& ham, double t, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& q, const Eigen::MatrixXd& z,
                           const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                           const Eigen::VectorXd& k, HamiltonianGradients& out) {
  if (ham.gradients) {
    ham.gradients(t, y, q, z, u1, u2, k, out);
    return;
  }
  if (!ham.value) throw ConfigError("hamiltonian: no value callback");
  out.dy.resize(y.size());
  out.dq.resize(q.rows(), q.cols());
  out.dz.resize(z.rows(), z.cols());
  out.du1.resize(u1.size());
  out.du2.resize(u2.size());

  Eigen::VectorXd yp = y;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double h = fd_step(y[i]);
    yp[i] = y[i] + h;
    const double up = ham.value(t, yp, q, z, u1, u2, k);
    yp[i] = y[i] - h;
    const double dn = ham.value(t, yp, q, z, u1, u2, k);
    yp[i] = y[i];
    out.dy[i] = (up - dn) / (2.0 * h);
  }
  Eigen::MatrixXd qp = q;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const double h = fd_step(q(i, j));
      qp(i, j) = q(i, j) + h;
      const double up = ham.value(t, y, qp, z, u1, u2, k);
      qp(i, j) = q(i, j) - h;
      const double dn = ham.value(t, y, qp, z, u1, u2, k);
      qp(i, j) = q(i, j);
      out.dq(i, j) = (up - dn) / (2.0 * h);
    }
  }
  Eigen::MatrixXd zp = z;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double h = fd_step(z(i, j));
      zp(i, j) = z(i, j) + h;
      const double up = ham.value(t, y, q, zp, u1, u2, k);
      zp(i, j) = z(i, j) - h;
      const double dn = ham.value(t, y, q, zp, u1, u2, k);
      zp(i, j) = z(i, j);
      out.dz(i, j) = (up - dn) / (2.0 * h);
    }
  }
  Eigen::VectorXd u1p = u1;
  for (Eigen::Index i = 0; i < u1.size(); ++i) {
    const double h = fd_step(u1[i]);
    u1p[i] = u1[i] + h;
    const double up = ham.value(t, y, q, z, u1p, u2, k);
    u1p[i] = u1[i] - h;
    const double dn = ham.value(t, y, q, z, u1p, u2, k);
    u1p[i] = u1[i];
    out.du1[i] = (up - dn) / (2.0 * h);
  }
  Eigen::VectorXd u2p = u2;
  for (Eigen::Index i = 0; i < u2.size(); ++i) {
    const double h = fd_step(u2[i]);
    u2p[i] = u2[i] + h;
    const double up = ham.value(t, y, q, z, u1, u2p, k);
    u2p[i] = u2[i] - h;
    const double dn = ham.value(t, y, q, z, u1, u2p, k);
    u2p[i] = u2[i];
    out.du2[i] = (up - dn) / (2.0 * h);
  }
}

Eigen::MatrixXd AdjointSolution::at_gridpoint(int gridpoint) const {
  Eigen::MatrixXd out(n_paths, dim_k);
  for (int p = 0; p < n_paths; ++p) {
    for (int c = 0; c < dim_k; ++c) out(p, c) = k_at(p, gridpoint, c);
  }
  return out;
}

void AdjointSolution::mean_se(int gridpoint, Eigen::VectorXd& mean, Eigen::VectorXd& se) const {
  mean = Eigen::VectorXd::Zero(dim_k);
  se = Eigen::VectorXd::Zero(dim_k);
  for (int p = 0; p < n_paths; ++p) {
    for (int c = 0; c < dim_k; ++c) mean[c] += k_at(p, gridpoint, c);
  }
  mean /= static_cast<double>(n_paths);
  for (int p = 0; p < n_paths; ++p) {
    for (int c = 0; c < dim_k; ++c) {
      const double d = k_at(p, gridpoint, c) - mean[c];
      se[c] += d * d;
    }
  }
  se = (se / static_cast<double>(n_paths) / static_cast<double>(n_paths)).cwiseSqrt();
}

namespace {

// Shared Euler kernel; `load_state` fills the Hamiltonian arguments for
// (path, step).
AdjointSolution adjoint_kernel(
    const HamiltonianSpec& ham, const PathBundle& bundle, const TeugelIncrements& incs,
    int dim_k,
    const std::function<void(int path, Eigen::VectorXd& k0)>& initial,
    const std::function<void(int path, int step, Eigen::VectorXd& y, Eigen::MatrixXd& q,
                             Eigen::MatrixXd& z, Eigen::VectorXd& u1, Eigen::VectorXd& u2)>&
        load_state) {
  if (incs.n_paths != bundle.n_paths || incs.steps != bundle.grid.steps) {
    throw ConfigError("adjoint solve: bundle and increments disagree on shape");
  }
  const int n = bundle.n_paths;
  const int N = bundle.grid.steps;
  const int d = bundle.dim_w;
  const int K = incs.order;
  const double dt = bundle.grid.dt();

  AdjointSolution sol;
  sol.grid = bundle.grid;
  sol.n_paths = n;
  sol.dim_k = dim_k;
  sol.k.assign(static_cast<size_t>(n) * (N + 1) * dim_k, 0.0);

  Eigen::VectorXd kcur(dim_k), y, u1, u2;
  Eigen::MatrixXd q, z;
  HamiltonianGradients grad;
  for (int p = 0; p < n; ++p) {
    initial(p, kcur);
    if (kcur.size() != dim_k) throw ConfigError("adjoint solve: initial value dimension mismatch");
    for (int c = 0; c < dim_k; ++c) sol.k[(static_cast<size_t>(p) * (N + 1)) * dim_k + c] = kcur[c];
    for (int m = 0; m < N; ++m) {
      load_state(p, m, y, q, z, u1, u2);
      hamiltonian_gradients(ham, bundle.grid.time(m), y, q, z, u1, u2, kcur, grad);
      if (grad.dy.size() != dim_k || grad.dq.rows() != dim_k || grad.dq.cols() != d ||
          grad.dz.rows() != dim_k || grad.dz.cols() != K) {
        throw ConfigError("adjoint solve: gradient dimension mismatch");
      }
      kcur -= grad.dy * dt;
      for (int i = 0; i < d; ++i) kcur -= grad.dq.col(i) * bundle.dw(p, m, i);
      for (int i = 1; i <= K; ++i) kcur -= grad.dz.col(i - 1) * incs.value(p, m, i);
      if (!kcur.allFinite()) {
        throw NumericError("adjoint solve: non-finite adjoint state");
      }
      for (int c = 0; c < dim_k; ++c) {
        sol.k[(static_cast<size_t>(p) * (N + 1) + m + 1) * dim_k + c] = kcur[c];
      }
    }
  }
  return sol;
}

}  // namespace

AdjointSolution solve_adjoint_forward(const HamiltonianSpec& ham,
                                      const InitialGradientFn& initial_gradient,
                                      const BSDESolution& state, const PathBundle& bundle,
                                      const TeugelIncrements& incs, const ControlProcess& u1,
                                      const ControlProcess& u2) {
  if (!initial_gradient) throw ConfigError("adjoint solve: initial gradient callback missing");
  if (state.n_paths != bundle.n_paths || state.grid.steps != bundle.grid.steps) {
    throw ConfigError("adjoint solve: state shape mismatch");
  }
  const int dim_y = state.dim_y;
  auto initial = [&](int p, Eigen::VectorXd& k0) {
    Eigen::VectorXd y0(dim_y);
    for (int c = 0; c < dim_y; ++c) y0[c] = state.y_at(p, 0, c);
    initial_gradient(y0, k0);
    k0 = -k0;
  };
  auto load_state = [&](int p, int m, Eigen::VectorXd& y, Eigen::MatrixXd& q, Eigen::MatrixXd& z,
                        Eigen::VectorXd& uu1, Eigen::VectorXd& uu2) {
    y.resize(dim_y);
    q.resize(dim_y, state.dim_w);
    z.resize(dim_y, state.order);
    for (int c = 0; c < dim_y; ++c) {
      y[c] = state.y_at(p, m, c);
      for (int i = 0; i < state.dim_w; ++i) q(c, i) = state.q_at(p, m, c, i);
      for (int i = 1; i <= state.order; ++i) z(c, i - 1) = state.z_at(p, m, c, i);
    }
    u1.get(p, m, uu1);
    u2.get(p, m, uu2);
  };
  return adjoint_kernel(ham, bundle, incs, dim_y, initial, load_state);
}

AdjointSolution solve_adjoint_forward(const HamiltonianSpec& ham, const Eigen::VectorXd& k0,
                                      const PathBundle& bundle, const TeugelIncrements& incs) {
  const int dim_k = static_cast<int>(k0.size());
  if (dim_k == 0) throw ConfigError("adjoint solve: empty initial value");
  Eigen::VectorXd zero_y = Eigen::VectorXd::Zero(dim_k);
  Eigen::MatrixXd zero_q = Eigen::MatrixXd::Zero(dim_k, bundle.dim_w);
  Eigen::MatrixXd zero_z = Eigen::MatrixXd::Zero(dim_k, incs.order);
  Eigen::VectorXd empty;
  auto initial = [&](int, Eigen::VectorXd& k) { k = k0; };
  auto load_state = [&](int, int, Eigen::VectorXd& y, Eigen::MatrixXd& q, Eigen::MatrixXd& z,
                        Eigen::VectorXd& uu1, Eigen::VectorXd& uu2) {
    y = zero_y;
    q = zero_q;
    z = zero_z;
    uu1 = empty;
    uu2 = empty;
  };
  return adjoint_kernel(ham, bundle, incs, dim_k, initial, load_state);
}

}  // namespace bsgame
