#include <doctest.h>

#include "fixtures.hpp"
#include "geometry_properties.hpp"
#include "oracles.hpp"
#include "wtmpc/geometry.hpp"
#include "wtmpc/geometry_io.hpp"

using wtmpc::Polytoped;
using fixture::vec2;

TEST_SUITE("geometry") {
  TEST_CASE("support of a box and of a singleton") {
    const auto W = Polytoped::symmetric_box(vec2(0.15, 0.15));
    CHECK(wtmpc::support(W, vec2(1, 0)) == doctest::Approx(0.15).epsilon(1e-15));
    const auto S = Polytoped::origin(2);
    CHECK(wtmpc::support(S, vec2(3, -7)) == 0.0);
    CHECK(wtmpc::support(Polytoped::empty(2), vec2(1, 0)) ==
          -std::numeric_limits<double>::infinity());
  }

  TEST_CASE("support of W ⊕ A_K W matches vertex sums") {
    const auto& ctx = fixture::study();
    const auto& W = ctx.plant.sys.W();
    const auto AKW = wtmpc::linear_image(W, ctx.plant.sys.AK());
    const auto S = wtmpc::minkowski_sum(W, AKW);
    const Eigen::Vector2d a(0, 1);
    CHECK(wtmpc::support(S, a) ==
          doctest::Approx(oracle::max_dot(oracle::pair_sums(W.vertices(), AKW.vertices()), a))
              .epsilon(1e-12));
  }

  TEST_CASE("Minkowski sum examples") {
    const auto B1 = Polytoped::symmetric_box(vec2(1, 1));
    const auto Z = wtmpc::minkowski_sum(B1, Polytoped::origin(2));
    CHECK(wtmpc::same_vertex_set(Z.vertices(), B1.vertices(), 1e-12));
    const auto S = wtmpc::minkowski_sum(B1, Polytoped::symmetric_box(vec2(0.15, 0.15)));
    CHECK(wtmpc::same_vertex_set(S.vertices(),
                                 Polytoped::symmetric_box(vec2(1.15, 1.15)).vertices(), 1e-12));
    CHECK_THROWS_AS(wtmpc::minkowski_sum(B1, Polytoped::origin(3)), wtmpc::DimensionMismatch);
  }

  TEST_CASE("A_K W ⊕ W matches the hull of all 16 vertex sums") {
    const auto& ctx = fixture::study();
    const auto& W = ctx.plant.sys.W();
    const Eigen::MatrixXd AK = ctx.plant.sys.AK();
    const auto S = wtmpc::minkowski_sum(wtmpc::linear_image(W, AK), W);
    const Eigen::MatrixXd sums = oracle::pair_sums(AK * W.vertices(), W.vertices());
    REQUIRE(sums.cols() == 16);
    CHECK(wtmpc::same_vertex_set(S.vertices(), oracle::jarvis_hull(sums), 1e-12));
  }

  TEST_CASE("Pontryagin difference examples") {
    const auto P = Polytoped::symmetric_box(vec2(2, 2));
    const auto D = wtmpc::pontryagin_diff(P, Polytoped::symmetric_box(vec2(0.15, 0.15)));
    CHECK(wtmpc::same_vertex_set(D.vertices(),
                                 Polytoped::symmetric_box(vec2(1.85, 1.85)).vertices(), 1e-12));
    const auto I = wtmpc::pontryagin_diff(P, Polytoped::origin(2));
    CHECK(wtmpc::same_vertex_set(I.vertices(), P.vertices(), 0.0));
    const auto E = wtmpc::pontryagin_diff(P, Polytoped::symmetric_box(vec2(3, 3)));
    CHECK(E.is_empty());
  }

  TEST_CASE("input tightening U ⊖ K E_1") {
    const auto& ctx = fixture::study();
    const auto KW = wtmpc::linear_image(ctx.plant.sys.W(), ctx.plant.sys.K());
    double s = 0.0;
    for (Eigen::Index j = 0; j < ctx.plant.sys.W().vertices().cols(); ++j) {
      s = std::max(s, (ctx.plant.sys.K() * ctx.plant.sys.W().vertices().col(j))(0));
    }
    const auto T = wtmpc::pontryagin_diff(ctx.plant.U, KW);
    const auto [lo, hi] = wtmpc::bounding_box(T);
    CHECK(lo(0) == doctest::Approx(-1 + s).epsilon(1e-12));
    CHECK(hi(0) == doctest::Approx(1 - s).epsilon(1e-12));
  }

  TEST_CASE("linear image examples") {
    const auto& ctx = fixture::study();
    const auto& W = ctx.plant.sys.W();
    const auto I = wtmpc::linear_image(W, Eigen::Matrix2d::Identity());
    CHECK(wtmpc::same_vertex_set(I.vertices(), W.vertices(), 0.0));
    const auto Z = wtmpc::linear_image(W, Eigen::Matrix2d::Zero());
    CHECK(Z.num_vertices() == 1);
    CHECK(Z.vertices().col(0).norm() == 0.0);
    const Eigen::MatrixXd AK = ctx.plant.sys.AK();
    const auto M = wtmpc::linear_image(W, AK);
    CHECK(wtmpc::same_vertex_set(M.vertices(), oracle::jarvis_hull(AK * W.vertices()), 1e-12));
  }

  TEST_CASE("membership") {
    const auto P = Polytoped::symmetric_box(vec2(2, 2));
    CHECK(wtmpc::contains(P, vec2(0, 0)));
    CHECK_FALSE(wtmpc::contains(P, vec2(2.1, 0), 1e-9));
    CHECK(wtmpc::contains(fixture::study().plant.X, vec2(-5, -2)));
  }

  TEST_CASE("representations agree after construction") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 50; ++k) {
      const auto P = fixture::random_polygon(rng);
      CHECK(P.representations_agree());
      const auto H = Polytoped::from_hrep(P.F(), P.g());
      CHECK(wtmpc::same_vertex_set(H.vertices(), P.vertices(), 1e-9));
    }
  }

  TEST_CASE("serialization round trip is bit exact") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
      const auto P = fixture::random_polygon(rng);
      const auto Q = wtmpc::deserialize_polytope(wtmpc::serialize(P));
      CHECK(Q.F() == P.F());
      CHECK(Q.g() == P.g());
      CHECK(Q.vertices() == P.vertices());
    }
  }

  TEST_CASE("randomized properties on 1000 instances") {
    double worst = 0.0;
    CHECK(geometry_properties::pontryagin_then_minkowski(1000, 101, &worst) == 0);
    CHECK(worst <= 1e-9);
    CHECK(geometry_properties::support_additivity(1000, 102, &worst) == 0);
    CHECK(worst <= 1e-9);
    CHECK(geometry_properties::image_distributes(1000, 103, &worst) == 0);
    CHECK(geometry_properties::hull_idempotent(1000, 104, &worst) == 0);
    CHECK(geometry_properties::pontryagin_membership(1000, 105, &worst) == 0);
  }
}
