#include <doctest.h>

#include <cmath>

#include "bsgame/info_structure.hpp"

using namespace bsgame;

namespace {

struct Fixture {
  LevyTriplet triplet;
  TimeGrid grid{1.0, 10};
  PathBundle bundle;
  TeugelIncrements incs;
  NoiseLevels levels;

  explicit Fixture(int n_paths = 500, int steps = 10) : grid(1.0, steps) {
    triplet.sigma = 1.0;
    triplet.jumps = JumpSpec::make_atoms({{1.0, 1.0}});
    bundle = simulate(triplet, grid, 1, 2, n_paths, 77);
    const OrthonormalBasis basis = orthonormalize(gram_matrix(triplet, 2), 2);
    incs = increments(bundle, basis);
    levels = accumulate_levels(bundle, incs);
  }
};

}  // namespace

TEST_CASE("delay maps to the right conditioning gridpoint") {
  const TimeGrid grid(1.0, 10);  // dt = 0.1
  CHECK(conditioning_gridpoint(grid, 5, 0.0) == 5);
  CHECK(conditioning_gridpoint(grid, 5, 0.1) == 4);
  CHECK(conditioning_gridpoint(grid, 5, 0.25) == 2);  // floor of visible time
  CHECK(conditioning_gridpoint(grid, 5, 0.5) == -1);  // nothing visible yet
  CHECK(conditioning_gridpoint(grid, 5, 2.0) == -1);
  // at t = 0 the levels are identically zero, so "no information" is right
  // even with zero delay (the projections coincide anyway)
  CHECK(conditioning_gridpoint(grid, 0, 0.0) == -1);
  // floating-time division must not round a full-delay boundary down
  const TimeGrid fine(1.0, 3);
  CHECK(conditioning_gridpoint(fine, 2, 1.0 / 3.0) == 1);
}

TEST_CASE("levels are prefix sums of the increments") {
  const Fixture f(50, 6);
  REQUIRE(f.levels.n_paths == 50);
  for (int p = 0; p < 50; ++p) {
    CHECK(f.levels.w_at(p, 0, 0) == 0.0);
    CHECK(f.levels.h_at(p, 0, 1) == 0.0);
    double w = 0.0, wl = 0.0, h2 = 0.0;
    for (int k = 0; k < 6; ++k) {
      w += f.bundle.dw(p, k, 0);
      wl += f.bundle.dwl(p, k);
      h2 += f.incs.value(p, k, 2);
      CHECK(f.levels.w_at(p, k + 1, 0) == doctest::Approx(w).epsilon(1e-14));
      CHECK(f.levels.wl_at(p, k + 1) == doctest::Approx(wl).epsilon(1e-14));
      CHECK(f.levels.h_at(p, k + 1, 2) == doctest::Approx(h2).epsilon(1e-14));
    }
  }
}

TEST_CASE("conditional expectation under each information structure") {
  const Fixture f;
  const int g = 6;
  Eigen::VectorXd x(f.levels.n_paths);
  for (int p = 0; p < f.levels.n_paths; ++p) x[p] = f.levels.w_at(p, g, 0);

  RegressionConfig cfg;

  SUBCASE("full information is the identity") {
    const Eigen::VectorXd out = cond_exp(x, InfoStructure::full(), f.levels, g, cfg);
    CHECK((out - x).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("trivial information is the ensemble mean") {
    const Eigen::VectorXd out = cond_exp(x, InfoStructure::trivial(), f.levels, g, cfg);
    for (int p = 0; p < out.size(); ++p) CHECK(out[p] == doctest::Approx(x.mean()).epsilon(1e-14));
  }
  SUBCASE("zero delay recovers processes spanned by the current levels") {
    Eigen::VectorXd affine(f.levels.n_paths);
    for (int p = 0; p < f.levels.n_paths; ++p) {
      affine[p] = 1.5 - 2.0 * f.levels.w_at(p, g, 0) + 0.5 * f.levels.h_at(p, g, 1);
    }
    const Eigen::VectorXd out = cond_exp(affine, InfoStructure::delayed(0.0), f.levels, g, cfg);
    CHECK((out - affine).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("full delay degenerates to the trivial structure") {
    const Eigen::VectorXd trivial = cond_exp(x, InfoStructure::trivial(), f.levels, g, cfg);
    const Eigen::VectorXd delayed = cond_exp(x, InfoStructure::delayed(5.0), f.levels, g, cfg);
    CHECK((trivial - delayed).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("conditional expectations preserve means and act linearly") {
  const Fixture f;
  const int g = 7;
  RegressionConfig cfg;
  Eigen::VectorXd x(f.levels.n_paths), y(f.levels.n_paths);
  for (int p = 0; p < f.levels.n_paths; ++p) {
    const double w = f.levels.w_at(p, g, 0);
    x[p] = w * w - 1.0;
    y[p] = std::sin(3.0 * f.levels.h_at(p, g, 1));
  }
  for (const InfoStructure& info :
       {InfoStructure::trivial(), InfoStructure::delayed(0.0), InfoStructure::delayed(0.35)}) {
    const Eigen::VectorXd px = cond_exp(x, info, f.levels, g, cfg);
    const Eigen::VectorXd py = cond_exp(y, info, f.levels, g, cfg);
    // tower property at the ensemble level
    CHECK(px.mean() == doctest::Approx(x.mean()).epsilon(1e-10));
    CHECK(py.mean() == doctest::Approx(y.mean()).epsilon(1e-10));
    const Eigen::VectorXd pz = cond_exp(2.0 * x - 3.0 * y, info, f.levels, g, cfg);
    CHECK((pz - (2.0 * px - 3.0 * py)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("column-wise conditional expectation matches the scalar one") {
  const Fixture f(300, 8);
  const int g = 4;
  RegressionConfig cfg;
  Eigen::MatrixXd values(f.levels.n_paths, 2);
  for (int p = 0; p < f.levels.n_paths; ++p) {
    values(p, 0) = f.levels.wl_at(p, g);
    values(p, 1) = f.levels.w_at(p, g, 0) * f.levels.wl_at(p, g);
  }
  for (const InfoStructure& info :
       {InfoStructure::full(), InfoStructure::trivial(), InfoStructure::delayed(0.3)}) {
    const Eigen::MatrixXd joint = cond_exp_columns(values, info, f.levels, g, cfg);
    for (int c = 0; c < 2; ++c) {
      const Eigen::VectorXd single = cond_exp(values.col(c), info, f.levels, g, cfg);
      CHECK((joint.col(c) - single).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("adaptedness checks") {
  const Fixture f;
  RegressionConfig cfg;
  const int first = 3;
  const int cols = 4;

  Eigen::MatrixXd current(f.levels.n_paths, cols);
  Eigen::MatrixXd lagged(f.levels.n_paths, cols);
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(f.levels.n_paths, cols, 2.5);
  const double delay = 0.2;  // two steps on this grid
  for (int c = 0; c < cols; ++c) {
    const int g = first + c;
    const int visible = conditioning_gridpoint(f.grid, g, delay);
    REQUIRE(visible >= 0);
    for (int p = 0; p < f.levels.n_paths; ++p) {
      current(p, c) = f.levels.w_at(p, g, 0);
      lagged(p, c) = 0.7 * f.levels.w_at(p, visible, 0) - 0.1 * f.levels.h_at(p, visible, 1);
    }
  }

  CHECK(is_adapted(current, InfoStructure::full(), f.levels, first, cfg).adapted);
  CHECK(is_adapted(flat, InfoStructure::trivial(), f.levels, first, cfg).adapted);
  CHECK_FALSE(is_adapted(current, InfoStructure::trivial(), f.levels, first, cfg).adapted);
  CHECK(is_adapted(lagged, InfoStructure::delayed(delay), f.levels, first, cfg).adapted);
  CHECK_FALSE(is_adapted(current, InfoStructure::delayed(delay), f.levels, first, cfg).adapted);
}
