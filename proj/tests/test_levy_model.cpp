#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "bsgame/levy_model.hpp"

using namespace bsgame;

namespace {

LevyTriplet unit_atom_triplet() {
  LevyTriplet t;
  t.sigma = 1.0;
  t.jumps = JumpSpec::make_atoms({{1.0, 1.0}});
  return t;
}

}  // namespace

TEST_CASE("jump measure moments in closed form") {
  CHECK(moment(JumpSpec::make_atoms({{1.0, 1.0}}), 5) == doctest::Approx(1.0));
  // gamma integral: lambda * j! / beta^j
  CHECK(moment(JumpSpec::exponential(2.0, 1.0), 3) == doctest::Approx(12.0));
  CHECK(moment(JumpSpec::none(), 2) == 0.0);
  CHECK(moment(JumpSpec::make_atoms({{2.0, 0.5}, {-1.0, 0.25}}), 2) ==
        doctest::Approx(0.5 * 4.0 + 0.25 * 1.0));
  CHECK_THROWS_AS(moment(JumpSpec::none(), 0), std::invalid_argument);
}

TEST_CASE("closed-form moments agree with quadrature") {
  const JumpSpec expo = JumpSpec::exponential(1.0, 2.0);
  const JumpSpec atoms = JumpSpec::make_atoms({{0.7, 1.3}, {2.1, 0.4}});
  for (int j = 1; j <= 8; ++j) {
    CHECK(moment(expo, j) ==
          doctest::Approx(moment_quadrature(expo, j)).epsilon(1e-7));
    CHECK(moment(atoms, j) ==
          doctest::Approx(moment_quadrature(atoms, j)).epsilon(1e-12));
  }
}

TEST_CASE("moment table caches and bounds") {
  const JumpSpec expo = JumpSpec::exponential(1.5, 2.5);
  const MomentTable table = MomentTable::build(expo, 10);
  REQUIRE(table.max_order() == 10);
  for (int j = 1; j <= 10; ++j) CHECK(table.value(j) == doctest::Approx(moment(expo, j)));
  // even moments are nonnegative and Cauchy-Schwarz consistent
  for (int i = 1; 2 * i <= 10; ++i) CHECK(table.value(2 * i) >= 0.0);
  for (int i = 1; i <= 2; ++i) {
    for (int j = 1; j <= 2; ++j) {
      const double lhs = table.value(i + j) * table.value(i + j);
      CHECK(lhs <= table.value(2 * i) * table.value(2 * j) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("gram matrix of the orthonormalization measure") {
  SUBCASE("unit atom with gaussian part") {
    const Eigen::MatrixXd g = gram_matrix(unit_atom_triplet(), 2);
    CHECK(g(0, 0) == doctest::Approx(2.0));
    CHECK(g(0, 1) == doctest::Approx(1.0));
    CHECK(g(1, 0) == doctest::Approx(1.0));
    CHECK(g(1, 1) == doctest::Approx(1.0));
  }
  SUBCASE("pure gaussian") {
    LevyTriplet t;
    t.sigma = 1.0;
    t.jumps = JumpSpec::none();
    const Eigen::MatrixXd g = gram_matrix(t, 1);
    CHECK(g(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("pure jump") {
    LevyTriplet t;
    t.sigma = 0.0;
    t.jumps = JumpSpec::make_atoms({{2.0, 0.5}});
    const Eigen::MatrixXd g = gram_matrix(t, 1);
    CHECK(g(0, 0) == doctest::Approx(2.0));
  }
}

TEST_CASE("gram matrices are positive semidefinite") {
  const LevyTriplet triplets[] = {
      unit_atom_triplet(),
      {0.3, 0.5, JumpSpec::exponential(1.0, 2.0)},
      {0.0, 0.0, JumpSpec::make_atoms({{1.0, 0.5}, {-0.5, 0.25}, {2.0, 0.1}})},
      {0.0, 2.0, JumpSpec::none()},
  };
  for (const auto& t : triplets) {
    for (int order = 1; order <= 4; ++order) {
      const Eigen::MatrixXd g = gram_matrix(t, order);
      CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("effective order finds the usable truncation") {
  Eigen::MatrixXd g(2, 2);
  g << 2, 1, 1, 1;
  CHECK(effective_order(g, 1e-12) == 2);

  Eigen::MatrixXd one(1, 1);
  one << 1;
  CHECK(effective_order(one, 1e-12) == 1);

  // a one-atom pure-jump measure has a rank-1 moment matrix at any order
  LevyTriplet t;
  t.sigma = 0.0;
  t.jumps = JumpSpec::make_atoms({{1.0, 1.0}});
  CHECK(effective_order(gram_matrix(t, 3), 1e-12) == 1);

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  CHECK(effective_order(zero, 1e-12) == 0);
}

TEST_CASE("triplet validation") {
  CHECK(validate({0.0, 1.0, JumpSpec::none()}).valid);
  CHECK(validate({1.0, 0.5, JumpSpec::exponential(1.0, 2.0)}).valid);

  const ValidationReport degenerate = validate({0.0, 0.0, JumpSpec::none()});
  CHECK_FALSE(degenerate.valid);
  CHECK(!degenerate.error.empty());

  CHECK_FALSE(validate({0.0, -1.0, JumpSpec::none()}).valid);
  CHECK_THROWS_AS(JumpSpec::make_atoms({{1.0, -0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(JumpSpec::exponential(0.0, 1.0), std::invalid_argument);
}
