#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wtmpc/conic.hpp"

using wtmpc::ConicBuilder;
using wtmpc::SolveStatus;

TEST_SUITE("conic") {
  TEST_CASE("linear examples") {
    {
      ConicBuilder b;
      const int x = b.add_variables(1);
      b.add_nonneg(x);
      b.add_linear_cost(x, 1.0);
      const auto r = wtmpc::solve(b.build());
      REQUIRE(r.status == SolveStatus::optimal);
      CHECK(std::abs(r.primal(0)) <= 1e-7);
      CHECK(r.primal.size() == 1);
    }
    {
      ConicBuilder b;
      const int x = b.add_variables(1);
      b.add_less_equal({{x, -1.0}}, -1.0);
      b.add_less_equal({{x, 1.0}}, 0.0);
      const auto r = wtmpc::solve(b.build());
      CHECK(r.status == SolveStatus::infeasible);
      CHECK(r.primal.size() == 0);
      CHECK_FALSE(wtmpc::feasibility(b.build()));
    }
    {
      ConicBuilder b;
      const int x = b.add_variables(1);
      b.add_linear_cost(x, 1.0);
      b.add_less_equal({{x, 1.0}}, 0.0);
      CHECK(wtmpc::solve(b.build()).status == SolveStatus::unbounded);
    }
  }

  TEST_CASE("SOC epigraph of the Euclidean norm") {
    ConicBuilder b;
    const int x = b.add_variables(2);
    const int t = b.add_variables(1);
    b.add_equality({{x, 1.0}}, 3.0);
    b.add_equality({{x + 1, 1.0}}, 4.0);
    b.add_soc({{{t, -1.0}}, {{x, -1.0}}, {{x + 1, -1.0}}}, {0.0, 0.0, 0.0});
    b.add_linear_cost(t, 1.0);
    const auto r = wtmpc::solve(b.build());
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.objective_value == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(r.primal_residual <= 1e-8 * 5);
  }

  TEST_CASE("feasibility of an unconstrained program") {
    ConicBuilder b;
    b.add_variables(1);
    CHECK(wtmpc::feasibility(b.build()));
  }

  TEST_CASE("malformed programs and unknown adapters") {
    wtmpc::ConicProgram p;
    p.num_vars = 2;
    p.q = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(wtmpc::solve(p), wtmpc::MalformedProgram);
    ConicBuilder b;
    b.add_variables(1);
    wtmpc::SolveOptions o;
    o.adapter = "none";
    CHECK_THROWS_AS(wtmpc::solve(b.build(), o), wtmpc::AdapterUnavailable);
    const auto names = wtmpc::registered_solvers();
    CHECK(std::find(names.begin(), names.end(), "ecos") != names.end());
  }

  TEST_CASE("box QPs agree with active-set enumeration") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> dim(1, 5);
    for (int rep = 0; rep < 60; ++rep) {
      const int n = dim(rng);
      const Eigen::MatrixXd M = fixture::random_matrix(n, n, rng);
      const Eigen::MatrixXd P = M * M.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
      const Eigen::VectorXd q = 3 * fixture::random_direction(n, rng);
      const Eigen::VectorXd lo = -Eigen::VectorXd::Ones(n);
      const Eigen::VectorXd hi = Eigen::VectorXd::Ones(n);
      const double ref = oracle::box_qp(P, q, lo, hi);
      ConicBuilder b;
      const int x = b.add_variables(n);
      for (int i = 0; i < n; ++i) {
        b.add_less_equal({{x + i, 1.0}}, hi(i));
        b.add_less_equal({{x + i, -1.0}}, -lo(i));
        b.add_linear_cost(x + i, q(i));
        for (int j = 0; j < n; ++j) b.add_quadratic_cost(x + i, x + j, P(i, j));
      }
      const auto r = wtmpc::solve(b.build());
      REQUIRE(r.status == SolveStatus::optimal);
      CHECK(std::abs(r.objective_value - ref) <= 1e-6);
      wtmpc::SolveOptions forced;
      forced.force_epigraph = true;
      const auto f = wtmpc::solve(b.build(), forced);
      REQUIRE(f.status == SolveStatus::optimal);
      CHECK(std::abs(f.objective_value - r.objective_value) <= 1e-6);
    }
  }

  TEST_CASE("epigraph reformulation factors P") {
    ConicBuilder b;
    const int x = b.add_variables(3);
    b.add_quadratic_cost(x, x, 2.0);
    b.add_quadratic_cost(x + 1, x + 1, 4.0);
    b.add_quadratic_cost(x, x + 1, 1.0);
    b.add_quadratic_cost(x + 1, x, 1.0);
    const auto p = b.build();
    const auto e = wtmpc::epigraph_reformulation(p);
    CHECK(e.num_vars == 4);
    CHECK_FALSE(e.P.has_value());
    std::mt19937_64 rng(2);
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd xv = fixture::random_direction(3, rng);
      Eigen::VectorXd ext(4);
      ext.head(3) = xv;
      // The smallest feasible t is ½ xᵀPx.
      ext(3) = wtmpc::objective_value(p, xv);
      CHECK(wtmpc::primal_residual(e, ext) <= 1e-10);
      ext(3) -= 1e-3;
      CHECK(wtmpc::primal_residual(e, ext) > 0.0);
    }
  }

  TEST_CASE("text dump round trip") {
    ConicBuilder b;
    const int x = b.add_variables(3);
    b.add_equality({{x, 0.1}, {x + 2, -1.0 / 3.0}}, 2.5);
    b.add_less_equal({{x + 1, 1e-300}}, 7.0);
    b.add_nonneg(x);
    b.add_soc({{{x, -1.0}}, {{x + 1, 2.0}}, {{x + 2, M_PI}}}, {1.0, 0.0, -2.0});
    b.add_linear_cost(x + 1, 0.7);
    b.add_quadratic_cost(x, x, 1.25);
    b.add_constant_cost(3.0);
    const auto p = b.build();
    const auto q = wtmpc::parse_program(wtmpc::dump_program(p));
    CHECK(q.num_vars == p.num_vars);
    CHECK(q.q == p.q);
    CHECK(q.q0 == p.q0);
    CHECK(Eigen::MatrixXd(q.A_eq) == Eigen::MatrixXd(p.A_eq));
    CHECK(Eigen::MatrixXd(q.A_in) == Eigen::MatrixXd(p.A_in));
    CHECK(q.b_eq == p.b_eq);
    CHECK(q.b_in == p.b_in);
    CHECK(q.A_in.nonZeros() == p.A_in.nonZeros());
    REQUIRE(q.P.has_value());
    CHECK(Eigen::MatrixXd(*q.P) == Eigen::MatrixXd(*p.P));
    REQUIRE(q.cones.size() == p.cones.size());
    for (std::size_t k = 0; k < p.cones.size(); ++k) {
      CHECK(q.cones[k].kind == p.cones[k].kind);
      CHECK(q.cones[k].size == p.cones[k].size);
    }
    CHECK_THROWS_AS(wtmpc::parse_program("garbage"), wtmpc::MalformedProgram);
  }
}
