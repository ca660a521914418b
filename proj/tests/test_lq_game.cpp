#include <doctest.h>

#include <cmath>
#include <string>

#include "bsgame/common.hpp"
#include "bsgame/lq_game.hpp"

using namespace bsgame;

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// Scalar game with every coefficient exercised; order 2.
LQSpec scalar_spec() {
  LQSpec s;
  s.n = s.d = s.m1 = s.m2 = 1;
  s.order = 2;
  s.A = TimeVarying::constant(scalar(0.2));
  s.B = {TimeVarying::constant(scalar(0.1))};
  s.C = {TimeVarying::constant(scalar(0.05)), TimeVarying::constant(scalar(-0.02))};
  s.D1 = TimeVarying::constant(scalar(1.0));
  s.D2 = TimeVarying::constant(scalar(0.5));
  s.E = TimeVarying::constant(scalar(0.5));
  s.F = {TimeVarying::constant(scalar(0.3))};
  s.G = {TimeVarying::constant(scalar(0.1)), TimeVarying::constant(scalar(0.0))};
  s.M = Eigen::VectorXd::Ones(1);
  s.N1 = TimeVarying::constant(scalar(1.0));
  s.N2 = TimeVarying::constant(scalar(2.0));
  return s;
}

struct Fixture {
  LevyTriplet triplet;
  TimeGrid grid{1.0, 1};
  PathBundle bundle;
  TeugelIncrements incs;
  NoiseLevels levels;

  Fixture(int n_paths, int steps, std::uint64_t seed = 4242) : grid(1.0, steps) {
    triplet.sigma = 1.0;
    triplet.jumps = JumpSpec::make_atoms({{1.0, 1.0}});
    bundle = simulate(triplet, grid, 1, 2, n_paths, seed);
    const OrthonormalBasis basis = orthonormalize(gram_matrix(triplet, 2), 2);
    incs = increments(bundle, basis);
    levels = accumulate_levels(bundle, incs);
  }
};

const TerminalFn kAffineXi = [](const PathView& path, Eigen::VectorXd& out) {
  out = Eigen::VectorXd::Constant(1, 1.0 + 0.5 * path.w_terminal(0));
};

bool has_field(const ConfigError& e, const std::string& path) {
  for (const auto& f : e.fields()) {
    if (f.path == path) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("piecewise matrices switch at their breakpoints") {
  TimeVarying tv;
  tv.breaks = {0.5};
  tv.values = {scalar(1.0), scalar(2.0)};
  CHECK(tv.at(0.0)(0, 0) == 1.0);
  CHECK(tv.at(0.49)(0, 0) == 1.0);
  CHECK(tv.at(0.5)(0, 0) == 2.0);  // pieces live on [break, next break)
  CHECK(tv.at(9.0)(0, 0) == 2.0);
  CHECK(tv.fixed_shape(1, 1));
  CHECK_FALSE(tv.fixed_shape(2, 1));

  TimeVarying empty;
  CHECK_THROWS_AS(empty.at(0.0), ConfigError);
  TimeVarying ragged;
  ragged.breaks = {0.5};
  ragged.values = {scalar(1.0)};  // piece count must be breaks + 1
  CHECK_FALSE(ragged.fixed_shape(1, 1));
}

TEST_CASE("specification validation names the offending fields") {
  CHECK_NOTHROW(validate_lq(scalar_spec()));

  {
    LQSpec s = scalar_spec();
    s.D1 = TimeVarying::constant(Eigen::MatrixXd::Zero(2, 1));
    try {
      validate_lq(s);
      FAIL("expected rejection");
    } catch (const ConfigError& e) {
      CHECK(has_field(e, "problem.D1"));
    }
  }
  {
    LQSpec s = scalar_spec();
    s.M = Eigen::VectorXd::Zero(3);
    try {
      validate_lq(s);
      FAIL("expected rejection");
    } catch (const ConfigError& e) {
      CHECK(has_field(e, "problem.M"));
    }
  }
  {
    LQSpec s = scalar_spec();
    s.N1 = TimeVarying::constant(scalar(-1.0));
    try {
      validate_lq(s);
      FAIL("expected rejection");
    } catch (const ConfigError& e) {
      CHECK(has_field(e, "problem.N1"));
    }
  }
  {
    LQSpec s = scalar_spec();
    s.B.clear();
    try {
      validate_lq(s);
      FAIL("expected rejection");
    } catch (const ConfigError& e) {
      CHECK(has_field(e, "problem.B"));
    }
  }
  {
    LQSpec s = scalar_spec();
    s.n = 0;
    CHECK_THROWS_AS(validate_lq(s), ConfigError);
  }
}

TEST_CASE("driver, cost, and hamiltonian match their hand formulas") {
  const LQSpec s = scalar_spec();
  Eigen::VectorXd y(1), u1(1), u2(1), k(1);
  Eigen::MatrixXd q(1, 1), z(1, 2);
  y << 2.0;
  q << -1.0;
  z << 3.0, 0.5;
  u1 << 0.7;
  u2 << -0.3;
  k << 1.2;
  const double t = 0.4;

  Eigen::VectorXd f(1);
  make_lq_driver(s)(t, y, q, z, u1, u2, f);
  const double f_hand = 0.2 * 2.0 + 0.1 * (-1.0) + 0.05 * 3.0 - 0.02 * 0.5 + 0.7 + 0.5 * (-0.3);
  CHECK(f[0] == doctest::Approx(f_hand).epsilon(1e-14));

  const CostSpec cost = make_lq_cost(s);
  const double l_hand =
      0.5 * 2.0 + 0.3 * (-1.0) + 0.1 * 3.0 + 0.7 * 0.7 * 1.0 - (-0.3) * (-0.3) * 2.0;
  CHECK(cost.running(t, y, q, z, u1, u2) == doctest::Approx(l_hand).epsilon(1e-14));
  CHECK(cost.initial(y) == doctest::Approx(2.0).epsilon(1e-14));

  const HamiltonianSpec ham = make_lq_hamiltonian(s);
  CHECK(ham.value(t, y, q, z, u1, u2, k) ==
        doctest::Approx(-1.2 * f_hand + l_hand).epsilon(1e-14));

  HamiltonianGradients g;
  ham.gradients(t, y, q, z, u1, u2, k, g);
  CHECK(g.dy[0] == doctest::Approx(-0.2 * 1.2 + 0.5).epsilon(1e-14));
  CHECK(g.dq(0, 0) == doctest::Approx(-0.1 * 1.2 + 0.3).epsilon(1e-14));
  CHECK(g.dz(0, 0) == doctest::Approx(-0.05 * 1.2 + 0.1).epsilon(1e-14));
  CHECK(g.dz(0, 1) == doctest::Approx(0.02 * 1.2).epsilon(1e-14));
  CHECK(g.du1[0] == doctest::Approx(-1.2 + 2.0 * 0.7).epsilon(1e-14));
  CHECK(g.du2[0] == doctest::Approx(-0.5 * 1.2 + 2.0 * 2.0 * 0.3).epsilon(1e-14));

  // central differences on the value agree with the analytic blocks
  HamiltonianSpec fd;
  fd.value = ham.value;
  HamiltonianGradients gn;
  hamiltonian_gradients(fd, t, y, q, z, u1, u2, k, gn);
  CHECK(std::abs(gn.dy[0] - g.dy[0]) <= 1e-6);
  CHECK(std::abs(gn.du1[0] - g.du1[0]) <= 1e-6);
  CHECK(std::abs(gn.du2[0] - g.du2[0]) <= 1e-6);
}

TEST_CASE("control gains scale inversely under D -> aD, N -> a^2 N") {
  const Fixture f(400, 5);
  const LQSpec s = scalar_spec();
  const HamiltonianSpec ham = make_lq_hamiltonian(s);
  const AdjointSolution adjoint = solve_adjoint_forward(ham, -s.M, f.bundle, f.incs);

  LQSpec scaled = s;
  scaled.D1 = TimeVarying::constant(scalar(2.0 * s.D1.at(0.0)(0, 0)));
  scaled.N1 = TimeVarying::constant(scalar(4.0 * s.N1.at(0.0)(0, 0)));

  const RegressionConfig cfg;
  const InfoStructure full = InfoStructure::full();
  const auto base = lq_optimal_controls(s, adjoint, full, full, f.levels, cfg);
  const auto bumped = lq_optimal_controls(scaled, adjoint, full, full, f.levels, cfg);

  REQUIRE(base.first.values.size() == bumped.first.values.size());
  for (size_t i = 0; i < base.first.values.size(); ++i) {
    // u scales exactly like 1/a, and the drift contribution D u is unchanged
    CHECK(bumped.first.values[i] == 0.5 * base.first.values[i]);
    CHECK(2.0 * bumped.first.values[i] == base.first.values[i]);
  }
  CHECK(bumped.second.values == base.second.values);  // player 2 untouched
}

TEST_CASE("full information controls are stationary to solver precision") {
  const Fixture f(2000, 10);
  const LQSpec s = scalar_spec();
  LQSolveOptions opts;
  const LQSolveResult res = lq_solve(s, kAffineXi, f.levels, f.bundle, f.incs, opts);

  // the adjoint starts at -M on every path
  for (int p = 0; p < 5; ++p) CHECK(res.adjoint.k_at(p, 0, 0) == -1.0);
  CHECK(std::isfinite(res.cost.value));
  CHECK(res.cost.se > 0.0);

  const RegressionConfig cfg;
  const StationarityReport rep = verify_stationarity(
      s, res.adjoint, res.u1, res.u2, opts.info1, opts.info2, f.levels, cfg);
  CHECK(rep.player1.max_residual <= 1e-8);
  CHECK(rep.player2.max_residual <= 1e-8);
  REQUIRE(rep.player1.per_step.size() == 10);
}

TEST_CASE("trivial information controls are stationary within noise") {
  const Fixture f(3000, 10, 515151);
  const LQSpec s = scalar_spec();
  LQSolveOptions opts;
  opts.info1 = InfoStructure::trivial();
  opts.info2 = InfoStructure::trivial();
  const LQSolveResult res = lq_solve(s, kAffineXi, f.levels, f.bundle, f.incs, opts);

  const RegressionConfig cfg;
  const StationarityReport rep = verify_stationarity(
      s, res.adjoint, res.u1, res.u2, opts.info1, opts.info2, f.levels, cfg);
  CHECK(rep.player1.max_residual <= 3.5 * rep.player1.max_se);
  CHECK(rep.player2.max_residual <= 3.5 * rep.player2.max_se);
}

TEST_CASE("saddle probes move the cost the right way") {
  const Fixture f(2500, 10, 90909);
  const LQSpec s = scalar_spec();
  LQSolveOptions opts;
  const LQSolveResult res = lq_solve(s, kAffineXi, f.levels, f.bundle, f.incs, opts);

  SaddleOptions sopts;
  sopts.epsilons = {0.4};
  sopts.ratio_tol = 0.5;  // coarse grid, so the quadratic prediction is loose
  const SaddleReport rep =
      verify_saddle(s, kAffineXi, f.levels, f.bundle, f.incs, res, opts, sopts);
  CHECK(rep.signs_ok);
  CHECK(rep.ratios_ok);
  CHECK(rep.all_ok());
  REQUIRE(rep.probes.size() >= 2);
  for (const auto& probe : rep.probes) {
    if (probe.player == 1) CHECK(probe.delta_j >= -3.0 * probe.se);
    if (probe.player == 2) CHECK(probe.delta_j <= 3.0 * probe.se);
  }
}

TEST_CASE("candidate controls solve the pointwise minimax") {
  const Fixture f(2000, 8);
  const LQSpec s = scalar_spec();
  LQSolveOptions opts;
  const LQSolveResult res = lq_solve(s, kAffineXi, f.levels, f.bundle, f.incs, opts);

  const RegressionConfig cfg;
  MinimaxOptions mopts;
  const MinimaxReport rep = verify_minimax(s, res.adjoint, res.u1, res.u2, opts.info1,
                                           opts.info2, f.levels, cfg, mopts);
  CHECK(rep.analytic_ok);
  CHECK(rep.max_dev_u1 <= 1e-10);
  CHECK(rep.max_dev_u2 <= 1e-10);
  CHECK(rep.grid_ok);
  CHECK(rep.worst_grid_violation <= mopts.tol);
}

TEST_CASE("observation lag beyond the horizon degenerates to no information") {
  const Fixture f(800, 6);
  const LQSpec s = scalar_spec();

  LQSolveOptions lagged;
  lagged.info1 = InfoStructure::delayed(2.0);  // nothing is ever visible
  lagged.info2 = InfoStructure::trivial();
  LQSolveOptions blind;
  blind.info1 = InfoStructure::trivial();
  blind.info2 = InfoStructure::trivial();

  const LQSolveResult a = lq_solve(s, kAffineXi, f.levels, f.bundle, f.incs, lagged);
  const LQSolveResult b = lq_solve(s, kAffineXi, f.levels, f.bundle, f.incs, blind);
  CHECK(a.u1.values == b.u1.values);
  CHECK(a.u2.values == b.u2.values);
  CHECK(a.bsde.y == b.bsde.y);
}

TEST_CASE("zero observation lag reproduces full information on affine problems") {
  const Fixture f(1500, 10);
  // with A = B = C = 0 the adjoint is affine in the noise levels, so the
  // lag-0 projection recovers it exactly and both solves must agree
  LQSpec s = scalar_spec();
  s.A = TimeVarying::constant(scalar(0.0));
  s.B = {TimeVarying::constant(scalar(0.0))};
  s.C = {TimeVarying::constant(scalar(0.0)), TimeVarying::constant(scalar(0.0))};

  LQSolveOptions full;
  LQSolveOptions lag0;
  lag0.info1 = InfoStructure::delayed(0.0);
  lag0.info2 = InfoStructure::delayed(0.0);

  const LQSolveResult a = lq_solve(s, kAffineXi, f.levels, f.bundle, f.incs, full);
  const LQSolveResult b = lq_solve(s, kAffineXi, f.levels, f.bundle, f.incs, lag0);
  REQUIRE(a.u1.values.size() == b.u1.values.size());
  double worst = 0.0;
  for (size_t i = 0; i < a.u1.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.u1.values[i] - b.u1.values[i]));
  }
  for (size_t i = 0; i < a.u2.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.u2.values[i] - b.u2.values[i]));
  }
  CHECK(worst <= 1e-6);
}
