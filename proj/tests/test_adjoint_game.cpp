#include <doctest.h>

#include <cmath>

#include "bsgame/adjoint_game.hpp"
#include "bsgame/common.hpp"

using namespace bsgame;

namespace {

struct Fixture {
  LevyTriplet triplet;
  TimeGrid grid{1.0, 1};
  PathBundle bundle;
  TeugelIncrements incs;
  NoiseLevels levels;

  Fixture(int n_paths, int steps, std::uint64_t seed = 99) : grid(1.0, steps) {
    triplet.sigma = 1.0;
    triplet.jumps = JumpSpec::make_atoms({{1.0, 1.0}});
    bundle = simulate(triplet, grid, 1, 2, n_paths, seed);
    const OrthonormalBasis basis = orthonormalize(gram_matrix(triplet, 2), 2);
    incs = increments(bundle, basis);
    levels = accumulate_levels(bundle, incs);
  }
};

// Smooth scalar Hamiltonian with every cross term we differentiate against.
double probe_hamiltonian(double, const Eigen::VectorXd& y, const Eigen::MatrixXd& q,
                         const Eigen::MatrixXd& z, const Eigen::VectorXd& u1,
                         const Eigen::VectorXd& u2, const Eigen::VectorXd& k) {
  const double lin = 0.2 * y[0] + 0.1 * q(0, 0) + 0.3 * z(0, 0) - 0.15 * z(0, 1) +
                     0.5 * u1[0] - 0.4 * u2[0];
  return k[0] * lin + 0.5 * y[0] * y[0] + y[0] * u1[0] + 0.3 * q(0, 0) * z(0, 0) +
         0.5 * u1[0] * u1[0] - 0.7 * u2[0] * u2[0];
}

void probe_gradients(double, const Eigen::VectorXd& y, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& z, const Eigen::VectorXd& u1,
                     const Eigen::VectorXd& u2, const Eigen::VectorXd& k,
                     HamiltonianGradients& out) {
  out.dy.resize(1);
  out.dq.resize(1, 1);
  out.dz.resize(1, 2);
  out.du1.resize(1);
  out.du2.resize(1);
  out.dy[0] = 0.2 * k[0] + y[0] + u1[0];
  out.dq(0, 0) = 0.1 * k[0] + 0.3 * z(0, 0);
  out.dz(0, 0) = 0.3 * k[0] + 0.3 * q(0, 0);
  out.dz(0, 1) = -0.15 * k[0];
  out.du1[0] = 0.5 * k[0] + y[0] + u1[0];
  out.du2[0] = -0.4 * k[0] - 1.4 * u2[0];
}

}  // namespace

TEST_CASE("finite differences reproduce the analytic gradient blocks") {
  HamiltonianSpec analytic{probe_hamiltonian, probe_gradients};
  HamiltonianSpec numeric{probe_hamiltonian, nullptr};

  Eigen::VectorXd y(1), u1(1), u2(1), k(1);
  Eigen::MatrixXd q(1, 1), z(1, 2);
  y << 0.7;
  q << -1.3;
  z << 0.4, 2.1;
  u1 << -0.2;
  u2 << 0.9;
  k << 1.7;

  HamiltonianGradients ga, gn;
  hamiltonian_gradients(analytic, 0.3, y, q, z, u1, u2, k, ga);
  hamiltonian_gradients(numeric, 0.3, y, q, z, u1, u2, k, gn);

  CHECK(std::abs(ga.dy[0] - gn.dy[0]) <= 1e-6);
  CHECK(std::abs(ga.dq(0, 0) - gn.dq(0, 0)) <= 1e-6);
  CHECK(std::abs(ga.dz(0, 0) - gn.dz(0, 0)) <= 1e-6);
  CHECK(std::abs(ga.dz(0, 1) - gn.dz(0, 1)) <= 1e-6);
  CHECK(std::abs(ga.du1[0] - gn.du1[0]) <= 1e-6);
  CHECK(std::abs(ga.du2[0] - gn.du2[0]) <= 1e-6);
}

TEST_CASE("missing value callback is rejected") {
  HamiltonianSpec ham;  // neither value nor gradients
  Eigen::VectorXd y(1), u1(0), u2(0), k(1);
  Eigen::MatrixXd q(1, 1), z(1, 2);
  y << 0.0;
  q.setZero();
  z.setZero();
  k << 0.0;
  HamiltonianGradients g;
  CHECK_THROWS_AS(hamiltonian_gradients(ham, 0.0, y, q, z, u1, u2, k, g), ConfigError);
}

TEST_CASE("adjoint starts at the negated initial cost gradient") {
  const Fixture f(50, 4);
  const TerminalFn xi = [](const PathView& path, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::Constant(1, 1.0 + path.w_terminal(0));
  };
  const ControlProcess u = ControlProcess::zeros(f.bundle.n_paths, f.grid.steps, 0);
  const DriverFn zero = [](double, const Eigen::VectorXd&, const Eigen::MatrixXd&,
                           const Eigen::MatrixXd&, const Eigen::VectorXd&,
                           const Eigen::VectorXd&, Eigen::VectorXd& out) { out.setZero(); };
  const BSDESolution state =
      solve_backward(f.levels, f.bundle, f.incs, 1, zero, xi, u, u, BackwardOptions{});

  HamiltonianSpec ham;
  ham.value = [](double, const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::MatrixXd&,
                 const Eigen::VectorXd&, const Eigen::VectorXd&,
                 const Eigen::VectorXd&) { return 0.0; };
  const InitialGradientFn grad0 = [](const Eigen::VectorXd& y0, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::Constant(1, 2.0 * y0[0] + 1.0);
  };
  const AdjointSolution adj = solve_adjoint_forward(ham, grad0, state, f.bundle, f.incs, u, u);
  for (int p = 0; p < f.bundle.n_paths; ++p) {
    const double expect = -(2.0 * state.y_at(p, 0, 0) + 1.0);
    CHECK(adj.k_at(p, 0, 0) == expect);
  }
}

TEST_CASE("state-independent dynamics ignore the supplied state and controls") {
  const Fixture f(40, 6);
  HamiltonianSpec ham;
  ham.gradients = [](double, const Eigen::VectorXd&, const Eigen::MatrixXd&,
                     const Eigen::MatrixXd&, const Eigen::VectorXd&, const Eigen::VectorXd&,
                     const Eigen::VectorXd& k, HamiltonianGradients& out) {
    out.dy = Eigen::VectorXd::Constant(1, -0.3 * k[0]);
    out.dq = Eigen::MatrixXd::Constant(1, 1, 0.25);
    out.dz = Eigen::MatrixXd::Zero(1, 2);
    out.dz(0, 0) = -0.5;
    out.du1.resize(0);
    out.du2.resize(0);
  };

  Eigen::VectorXd k0(1);
  k0 << 1.5;
  const AdjointSolution free_run = solve_adjoint_forward(ham, k0, f.bundle, f.incs);

  const ControlProcess u_empty = ControlProcess::zeros(f.bundle.n_paths, f.grid.steps, 0);
  Eigen::VectorXd seven(1);
  seven << 7.0;
  const ControlProcess u_big = ControlProcess::constant(f.bundle.n_paths, f.grid.steps, seven);
  const TerminalFn xi = [](const PathView& path, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::Constant(1, path.wl_terminal());
  };
  const DriverFn zero = [](double, const Eigen::VectorXd&, const Eigen::MatrixXd&,
                           const Eigen::MatrixXd&, const Eigen::VectorXd&,
                           const Eigen::VectorXd&, Eigen::VectorXd& out) { out.setZero(); };
  const BSDESolution state =
      solve_backward(f.levels, f.bundle, f.incs, 1, zero, xi, u_big, u_big, BackwardOptions{});
  const InitialGradientFn grad0 = [&](const Eigen::VectorXd&, Eigen::VectorXd& out) {
    out = -k0;  // negated by the solver, so the run starts at k0
  };
  const AdjointSolution with_state =
      solve_adjoint_forward(ham, grad0, state, f.bundle, f.incs, u_big, u_big);
  const AdjointSolution with_other =
      solve_adjoint_forward(ham, grad0, state, f.bundle, f.incs, u_empty, u_empty);

  CHECK(free_run.k == with_state.k);
  CHECK(with_state.k == with_other.k);
}

TEST_CASE("constant-coefficient dynamics integrate exactly") {
  const Fixture f(60, 10);
  const double b = 0.4, c1 = -0.7, c2 = 0.2;
  HamiltonianSpec ham;
  ham.gradients = [&](double, const Eigen::VectorXd&, const Eigen::MatrixXd&,
                      const Eigen::MatrixXd&, const Eigen::VectorXd&, const Eigen::VectorXd&,
                      const Eigen::VectorXd&, HamiltonianGradients& out) {
    out.dy = Eigen::VectorXd::Zero(1);
    out.dq = Eigen::MatrixXd::Constant(1, 1, b);
    out.dz.resize(1, 2);
    out.dz(0, 0) = c1;
    out.dz(0, 1) = c2;
    out.du1.resize(0);
    out.du2.resize(0);
  };
  Eigen::VectorXd k0(1);
  k0 << 2.0;
  const AdjointSolution adj = solve_adjoint_forward(ham, k0, f.bundle, f.incs);

  // dk = -b dW - c1 dH1 - c2 dH2 sums to an affine function of the levels
  for (int p = 0; p < f.bundle.n_paths; ++p) {
    for (int g = 0; g <= f.grid.steps; ++g) {
      const double expect = 2.0 - b * f.levels.w_at(p, g, 0) - c1 * f.levels.h_at(p, g, 1) -
                            c2 * f.levels.h_at(p, g, 2);
      CHECK(std::abs(adj.k_at(p, g, 0) - expect) <= 1e-12);
    }
  }
}

TEST_CASE("deterministic decay matches the euler product") {
  const Fixture f(5, 20);
  HamiltonianSpec ham;
  ham.gradients = [](double, const Eigen::VectorXd&, const Eigen::MatrixXd&,
                     const Eigen::MatrixXd&, const Eigen::VectorXd&, const Eigen::VectorXd&,
                     const Eigen::VectorXd& k, HamiltonianGradients& out) {
    out.dy = k;  // dk = -k dt
    out.dq = Eigen::MatrixXd::Zero(1, 1);
    out.dz = Eigen::MatrixXd::Zero(1, 2);
    out.du1.resize(0);
    out.du2.resize(0);
  };
  Eigen::VectorXd k0(1);
  k0 << 3.0;
  const AdjointSolution adj = solve_adjoint_forward(ham, k0, f.bundle, f.incs);
  const double dt = f.grid.dt();
  for (int g = 0; g <= f.grid.steps; ++g) {
    const double expect = 3.0 * std::pow(1.0 - dt, g);
    for (int p = 0; p < 5; ++p) {
      CHECK(adj.k_at(p, g, 0) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("ensemble statistics match hand computation") {
  AdjointSolution sol;
  sol.grid = TimeGrid(1.0, 1);
  sol.n_paths = 3;
  sol.dim_k = 1;
  sol.k = {1.0, 4.0, 2.0, 5.0, 3.0, 6.0};  // paths x gridpoints, dim 1

  const Eigen::MatrixXd at1 = sol.at_gridpoint(1);
  REQUIRE(at1.rows() == 3);
  CHECK(at1(0, 0) == 4.0);
  CHECK(at1(2, 0) == 6.0);

  Eigen::VectorXd mean, se;
  sol.mean_se(1, mean, se);
  CHECK(mean[0] == doctest::Approx(5.0));
  // population variance 2/3, standard error sqrt(2/3/3)
  CHECK(se[0] == doctest::Approx(std::sqrt(2.0 / 9.0)).epsilon(1e-12));
}
