// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "cfisac/conic.hpp"
#include "cfisac/rng.hpp"
#include "doctest.h"

using namespace cfisac;

TEST_CASE("lp: min x subject to x >= 1") {
  ConicProgram p(1);
  p.set_bounds(0, 0.0, 10.0);
  p.add_linear(AffineExpr::unit(1, 0), Direction::GE, 1.0);
  p.set_objective(AffineExpr::unit(1, 0), Sense::Minimize);
  SolveStatus st = solve(p);
  REQUIRE(st.kind == SolveKind::Optimal);
  CHECK(st.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(p.is_feasible(st.primal, 10.0 * kDefaultSolverTol));
}

TEST_CASE("soc: min t subject to ||(3,4)|| <= t") {
  ConicProgram p(1);
  p.set_bounds(0, 0.0, 100.0);
  SocCon con;
  con.A = Eigen::MatrixXd::Zero(2, 1);
  con.b = Eigen::Vector2d(3.0, 4.0);
  con.c = Eigen::VectorXd::Ones(1);
  con.d = 0.0;
  p.add_soc(con);
  p.set_objective(AffineExpr::unit(1, 0), Sense::Minimize);
  SolveStatus st = solve(p);
  REQUIRE(st.kind == SolveKind::Optimal);
  CHECK(st.objective == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(p.is_feasible(st.primal, 10.0 * kDefaultSolverTol));
}

TEST_CASE("geomean: fixed u=4, v=9 allows w up to 6") {
  ConicProgram p(2);
  p.set_bounds(0, 4.0, 4.0);
  p.set_bounds(1, 9.0, 9.0);
  const int w = p.add_sqrt_product(0, 1);
  p.set_objective(AffineExpr::unit(p.num_vars(), w), Sense::Maximize);
  SolveStatus st = solve(p);
  REQUIRE(st.kind == SolveKind::Optimal);
  CHECK(st.objective == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("geomean: u = 0 forces w <= 0") {
  ConicProgram p(2);
  p.set_bounds(0, 0.0, 0.0);
  p.set_bounds(1, 0.0, 9.0);
  const int w = p.add_sqrt_product(0, 1);
  p.set_objective(AffineExpr::unit(p.num_vars(), w), Sense::Maximize);
  SolveStatus st = solve(p);
  REQUIRE(st.kind == SolveKind::Optimal);
  CHECK(st.objective == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("geomean: max w subject to u + v <= 2 is 1 at u = v = 1") {
  ConicProgram p(2);
  p.set_bounds(0, 0.0, 2.0);
  p.set_bounds(1, 0.0, 2.0);
  const int w = p.add_sqrt_product(0, 1);
  AffineExpr sum(p.num_vars());
  sum.add(0, 1.0).add(1, 1.0);
  p.add_linear(sum, Direction::LE, 2.0);
  p.set_objective(AffineExpr::unit(p.num_vars(), w), Sense::Maximize);
  SolveStatus st = solve(p);
  REQUIRE(st.kind == SolveKind::Optimal);
  CHECK(st.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(st.primal(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(st.primal(1) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("quadratic upper bound: max x subject to x^2 <= 4") {
  ConicProgram p(1);
  p.set_bounds(0, -5.0, 5.0);
  AffineExpr rhs(1, 4.0);
  p.add_quadratic_upper(AffineExpr::unit(1, 0), rhs);
  p.set_objective(AffineExpr::unit(1, 0), Sense::Maximize);
  SolveStatus st = solve(p);
  REQUIRE(st.kind == SolveKind::Optimal);
  CHECK(st.objective == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("quadratic encoding matches the direct check on sampled points") {
  ConicProgram p(2);
  p.set_bounds(0, -3.0, 3.0);
  p.set_bounds(1, -3.0, 3.0);
  // (x0 + 2 x1 - 1)^2 + (x1)^2 <= 3 x0 + 2
  std::vector<AffineExpr> terms;
  AffineExpr t0(2, -1.0);
  t0.add(0, 1.0).add(1, 2.0);
  terms.push_back(t0);
  terms.push_back(AffineExpr::unit(2, 1));
  AffineExpr rhs(2, 2.0);
  rhs.add(0, 3.0);
  p.add_quadratic_upper(terms, rhs);

  Xoshiro256 rng(11);
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd x(2);
    x << rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0);
    const double lhs =
        std::pow(x(0) + 2.0 * x(1) - 1.0, 2) + std::pow(x(1), 2);
    const double direct = lhs - (3.0 * x(0) + 2.0);
    const bool encoded = p.is_feasible(x, 1e-9);
    if (direct <= -1e-7) CHECK(encoded);
    if (direct >= 1e-7) CHECK(!encoded);
  }
}

TEST_CASE("x^2 <= 0 encoding admits only x = 0") {
  ConicProgram p(1);
  p.set_bounds(0, -1.0, 1.0);
  p.add_quadratic_upper(AffineExpr::unit(1, 0), AffineExpr(1, 0.0));
  Eigen::VectorXd x(1);
  x << 0.0;
  CHECK(p.is_feasible(x, 1e-9));
  x << 0.1;
  CHECK(!p.is_feasible(x, 1e-9));
}

TEST_CASE("random socp optimum matches a dense grid within resolution") {
  Xoshiro256 rng(7);
  for (int inst = 0; inst < 5; ++inst) {
    const double cx = rng.uniform(0.5, 1.5);
    const double cy = rng.uniform(0.5, 1.5);
    const double r = rng.uniform(0.3, 0.9);
    Eigen::Vector2d c(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));

    ConicProgram p(2);
    p.set_bounds(0, 0.0, 2.0);
    p.set_bounds(1, 0.0, 2.0);
    SocCon ball;  // ||x - center|| <= r
    ball.A = Eigen::MatrixXd::Identity(2, 2);
    ball.b = Eigen::Vector2d(-cx, -cy);
    ball.c = Eigen::VectorXd::Zero(2);
    ball.d = r;
    p.add_soc(ball);
    Eigen::VectorXd obj(2);
    obj << c(0), c(1);
    p.set_objective(obj, Sense::Minimize);
    SolveStatus st = solve(p);
    REQUIRE(st.kind == SolveKind::Optimal);
    CHECK(p.is_feasible(st.primal, 10.0 * kDefaultSolverTol));

    const double step = 0.005;
    double grid_best = kInf;
    for (double x = 0.0; x <= 2.0; x += step)
      for (double y = 0.0; y <= 2.0; y += step) {
        if (std::hypot(x - cx, y - cy) > r) continue;
        grid_best = std::min(grid_best, c(0) * x + c(1) * y);
      }
    REQUIRE(grid_best < kInf);
    CHECK(std::abs(st.objective - grid_best) < 4.0 * step);
  }
}

TEST_CASE("monotone tightening: adding a constraint never improves a minimum") {
  ConicProgram p(2);
  p.set_bounds(0, 0.0, 2.0);
  p.set_bounds(1, 0.0, 2.0);
  AffineExpr sum(2);
  sum.add(0, 1.0).add(1, 1.0);
  p.add_linear(sum, Direction::GE, 1.0);
  Eigen::VectorXd obj(2);
  obj << 1.0, 2.0;
  p.set_objective(obj, Sense::Minimize);
  SolveStatus loose = solve(p);
  REQUIRE(loose.kind == SolveKind::Optimal);

  p.add_linear(AffineExpr::unit(2, 0), Direction::LE, 0.25);
  SolveStatus tight = solve(p);
  REQUIRE(tight.kind == SolveKind::Optimal);
  CHECK(tight.objective >= loose.objective - 1e-7);
}

TEST_CASE("infeasible box/linear combination is reported infeasible") {
  ConicProgram p(1);
  p.set_bounds(0, 0.0, 1.0);
  p.add_linear(AffineExpr::unit(1, 0), Direction::GE, 2.0);
  p.set_objective(AffineExpr::unit(1, 0), Sense::Minimize);
  SolveStatus st = solve(p);
  CHECK(st.kind == SolveKind::Infeasible);
}

TEST_CASE("validate rejects malformed programs") {
  ConicProgram p(2);
  p.set_bounds(0, 0.0, 1.0);
  p.set_bounds(1, 0.0, 1.0);
  SUBCASE("geomean factors must be nonnegative") {
    p.set_bounds(0, -1.0, 1.0);
    CHECK_THROWS(p.add_sqrt_product(0, 1));
  }
  SUBCASE("geomean auxiliary with an unsound usage sign") {
    const int w = p.add_sqrt_product(0, 1);
    // -w on the large side of a >= constraint would exploit the cone's
    // implicit lower bound, which the encoding does not certify
    AffineExpr neg(p.num_vars());
    neg.add(w, -1.0);
    p.add_linear(neg, Direction::GE, 0.5);
    CHECK_THROWS(p.validate());
  }
  SUBCASE("non-finite constraint row") {
    AffineExpr bad(2);
    bad.add(0, std::numeric_limits<double>::quiet_NaN());
    p.add_linear(bad, Direction::LE, 1.0);
    CHECK_THROWS(p.validate());
  }
}

TEST_CASE("dump lists one constraint per line") {
  ConicProgram p(1);
  p.set_bounds(0, 0.0, 1.0);
  p.add_linear(AffineExpr::unit(1, 0), Direction::LE, 1.0);
  const std::string text = p.dump();
  CHECK(text.find('\n') != std::string::npos);
}
