// Microbenchmarks for the hot paths: sampling, martingale construction,
// the per-step regression, and the two solver loops.

#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "bsgame/bsde_solver.hpp"
#include "bsgame/info_structure.hpp"
#include "bsgame/levy_model.hpp"
#include "bsgame/lq_game.hpp"
#include "bsgame/path_sim.hpp"
#include "bsgame/regression.hpp"
#include "bsgame/teugel.hpp"

namespace {

using namespace bsgame;

LevyTriplet triplet() {
  LevyTriplet t;
  t.sigma = 1.0;
  t.jumps = JumpSpec::make_atoms({{1.0, 1.0}});
  return t;
}

struct Fixture {
  PathBundle bundle;
  OrthonormalBasis basis;
  TeugelIncrements incs;
  NoiseLevels levels;

  Fixture(int n_paths, int steps) {
    const LevyTriplet t = triplet();
    bundle = simulate(t, TimeGrid(1.0, steps), 1, 2, n_paths, 99);
    basis = orthonormalize(gram_matrix(t, 2), 2);
    incs = increments(bundle, basis);
    levels = accumulate_levels(bundle, incs);
  }
};

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

LQSpec scalar_spec() {
  LQSpec s;
  s.n = s.d = s.m1 = s.m2 = 1;
  s.order = 2;
  s.A = TimeVarying::constant(scalar(0.2));
  s.B = {TimeVarying::constant(scalar(0.1))};
  s.C = {TimeVarying::constant(scalar(0.1)), TimeVarying::constant(scalar(0.0))};
  s.D1 = TimeVarying::constant(scalar(1.0));
  s.D2 = TimeVarying::constant(scalar(1.0));
  s.E = TimeVarying::constant(scalar(0.5));
  s.F = {TimeVarying::constant(scalar(0.0))};
  s.G = {TimeVarying::constant(scalar(0.0)), TimeVarying::constant(scalar(0.0))};
  s.M = Eigen::VectorXd::Ones(1);
  s.N1 = TimeVarying::constant(scalar(1.0));
  s.N2 = TimeVarying::constant(scalar(1.0));
  return s;
}

void BM_SimulatePaths(benchmark::State& state) {
  const LevyTriplet t = triplet();
  const int n_paths = static_cast<int>(state.range(0));
  const TimeGrid grid(1.0, 100);
  for (auto _ : state) {
    PathBundle b = simulate(t, grid, 1, 2, n_paths, 7);
    benchmark::DoNotOptimize(b.dW.data());
  }
  state.SetItemsProcessed(state.iterations() * n_paths * grid.steps);
}
BENCHMARK(BM_SimulatePaths)->Arg(1000)->Arg(4000);

void BM_TeugelIncrements(benchmark::State& state) {
  const Fixture f(4000, 100);
  for (auto _ : state) {
    TeugelIncrements incs = increments(f.bundle, f.basis);
    benchmark::DoNotOptimize(incs.dH.data());
  }
  state.SetItemsProcessed(state.iterations() * f.bundle.n_paths * f.bundle.grid.steps);
}
BENCHMARK(BM_TeugelIncrements);

// One per-step conditional-expectation regression at the solver's default
// degree: factor the design once, project one response column.
void BM_RegressionStep(benchmark::State& state) {
  const Fixture f(10000, 10);
  const Eigen::MatrixXd vars = f.levels.variables_at(5);
  const PolynomialBasis basis = PolynomialBasis::total_degree(f.levels.n_variables(), 2);
  const Eigen::MatrixXd design = basis.evaluate(vars);
  const Eigen::MatrixXd response = vars.col(0).array().sin().matrix();
  for (auto _ : state) {
    const DesignSolver solver(design, 0.0);
    Eigen::MatrixXd fitted = solver.project(response);
    benchmark::DoNotOptimize(fitted.data());
  }
  state.SetItemsProcessed(state.iterations() * design.rows());
}
BENCHMARK(BM_RegressionStep);

void BM_BackwardSolve(benchmark::State& state) {
  const Fixture f(2000, 50);
  const DriverFn driver = [](double, const Eigen::VectorXd& y, const Eigen::MatrixXd&,
                             const Eigen::MatrixXd&, const Eigen::VectorXd&,
                             const Eigen::VectorXd&, Eigen::VectorXd& out) { out = 0.5 * y; };
  const TerminalFn xi = [](const PathView&, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::Ones(1);
  };
  const ControlProcess u = ControlProcess::zeros(2000, 50, 0);
  for (auto _ : state) {
    BSDESolution sol =
        solve_backward(f.levels, f.bundle, f.incs, 1, driver, xi, u, u, BackwardOptions{});
    benchmark::DoNotOptimize(sol.y.data());
  }
  state.SetItemsProcessed(state.iterations() * f.bundle.n_paths * f.bundle.grid.steps);
}
BENCHMARK(BM_BackwardSolve);

void BM_LQSolveFull(benchmark::State& state) {
  const Fixture f(2000, 50);
  const LQSpec spec = scalar_spec();
  const TerminalFn xi = [](const PathView& path, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::Constant(1, 1.0 + 0.5 * path.w_terminal(0));
  };
  for (auto _ : state) {
    LQSolveResult res = lq_solve(spec, xi, f.levels, f.bundle, f.incs, LQSolveOptions{});
    benchmark::DoNotOptimize(res.u1.values.data());
  }
  state.SetItemsProcessed(state.iterations() * f.bundle.n_paths * f.bundle.grid.steps);
}
BENCHMARK(BM_LQSolveFull);

}  // namespace

BENCHMARK_MAIN();
