#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wtmpc/ambiguity.hpp"

using wtmpc::TransportCost;

TEST_SUITE("ambiguity") {
  TEST_CASE("pushforward examples") {
    std::mt19937_64 rng(1);
    const wtmpc::EmpiricalDistribution P{fixture::random_matrix(3, 6, rng)};
    CHECK(wtmpc::pushforward_empirical(P, Eigen::MatrixXd::Identity(3, 3)).atoms == P.atoms);
    CHECK(wtmpc::pushforward_empirical(P, Eigen::MatrixXd::Zero(2, 3)).atoms.isZero());
    CHECK_THROWS_AS(wtmpc::pushforward_empirical(P, Eigen::MatrixXd::Zero(2, 2)),
                    wtmpc::DimensionMismatch);
    const Eigen::MatrixXd M1 = fixture::random_matrix(4, 3, rng);
    const Eigen::MatrixXd M2 = fixture::random_matrix(2, 4, rng);
    const auto twice = wtmpc::pushforward_empirical(wtmpc::pushforward_empirical(P, M1), M2);
    const auto once = wtmpc::pushforward_empirical(P, M2 * M1);
    CHECK((twice.atoms - once.atoms).norm() <= 1e-12);
  }

  TEST_CASE("pushforward of stacked trajectories equals error rollouts") {
    const auto& ctx = fixture::study();
    const auto data = wtmpc::NoiseDataset::draw(ctx.plant.sys.W(), 200, 20, 10, 5);
    for (int t = 1; t <= 10; ++t) {
      const auto e = wtmpc::pushforward_empirical({data.truncated(t)}, ctx.stack.D_of(t));
      for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd ref =
            oracle::error_rollout(ctx.plant.sys.AK(), data.truncated(t).col(i), t);
        CHECK((e.atoms.col(i) - ref).norm() <= 1e-10);
      }
    }
  }

  TEST_CASE("transport cost examples") {
    const auto I = TransportCost::pinv_weighted(Eigen::MatrixXd::Identity(2, 2));
    CHECK(I(Eigen::Vector2d(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));
    const auto& D = fixture::study().stack.D_of(3);
    const auto c = TransportCost::pinv_weighted(D);
    const Eigen::VectorXd u1 = c.svd().U.col(0) * c.svd().sigma(0);
    CHECK(c(u1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(c(Eigen::VectorXd::Zero(3)), wtmpc::DimensionMismatch);
    const auto e = TransportCost::euclidean(2);
    CHECK(e(Eigen::Vector2d(3, 4)) == doctest::Approx(5.0));
  }

  TEST_CASE("SVD cost formula equals the explicit pseudoinverse") {
    const auto& st = fixture::study().stack;
    std::mt19937_64 rng(2);
    for (int t = 1; t <= 10; ++t) {
      const auto c = TransportCost::pinv_weighted(st.D_of(t));
      const Eigen::MatrixXd Dp = oracle::pinv(st.D_of(t));
      for (int k = 0; k < 100; ++k) {
        const Eigen::VectorXd xi = fixture::random_direction(2, rng);
        const double ref = (Dp * xi).norm();
        CHECK(std::abs(c(xi) - ref) <= 1e-10 * std::max(1.0, ref));
        CHECK(std::abs(wtmpc::pinv_cost_direct(st.D_of(t), xi) - ref) <= 1e-10 * std::max(1.0, ref));
      }
    }
  }

  TEST_CASE("pinv cost is a norm") {
    const auto& st = fixture::study().stack;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> s(-5.0, 5.0);
    for (int t = 1; t <= 10; ++t) {
      const auto c = TransportCost::pinv_weighted(st.D_of(t));
      CHECK(c(Eigen::Vector2d::Zero()) == 0.0);
      for (int k = 0; k < 200; ++k) {
        const Eigen::VectorXd x = fixture::random_direction(2, rng);
        const Eigen::VectorXd y = fixture::random_direction(2, rng);
        const double a = s(rng);
        CHECK(std::abs(c(a * x) - std::abs(a) * c(x)) <= 1e-9);
        CHECK(c(x + y) <= c(x) + c(y) + 1e-9);
        CHECK(c(x) > 0.0);
      }
    }
  }

  TEST_CASE("dual norm matrix examples") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    CHECK(wtmpc::dual_norm_matrix(I) == I);
    CHECK(wtmpc::dual_norm_matrix(2 * I) == 2 * I);
    Eigen::MatrixXd singular(2, 4);
    singular << 1, 0, 1, 0, 2, 0, 2, 0;
    CHECK_THROWS_AS(wtmpc::dual_norm_matrix(singular), wtmpc::RankDeficient);
    CHECK_THROWS_AS(TransportCost::pinv_weighted(singular), wtmpc::RankDeficient);
  }

  TEST_CASE("dual norm identity and inequality") {
    const auto& st = fixture::study().stack;
    std::mt19937_64 rng(4);
    for (int t = 1; t <= 10; ++t) {
      const Eigen::MatrixXd& D = st.D_of(t);
      const Eigen::MatrixXd Dp = oracle::pinv(D);
      const Eigen::MatrixXd literal = Dp * (Dp.transpose() * Dp).inverse();
      const auto c = TransportCost::pinv_weighted(D);
      for (int k = 0; k < 100; ++k) {
        const Eigen::VectorXd y = fixture::random_direction(2, rng);
        const double ref = (literal * y).norm();
        CHECK(std::abs((D.transpose() * y).norm() - ref) <= 1e-9 * std::max(1.0, ref));
        CHECK(std::abs(c.dual(y) - ref) <= 1e-9 * std::max(1.0, ref));
        const Eigen::VectorXd xi = fixture::random_direction(2, rng);
        CHECK(std::abs(y.dot(xi)) <= c.dual(y) * c(xi) * (1 + 1e-12) + 1e-12);
        // ξ = D Dᵀ y attains equality.
        const Eigen::VectorXd star = D * D.transpose() * y;
        CHECK(std::abs(y.dot(star) - c.dual(y) * c(star)) <= 1e-9 * std::max(1.0, y.dot(star)));
      }
    }
  }

  TEST_CASE("propagated tube") {
    const auto& ctx = fixture::study();
    const auto data = wtmpc::NoiseDataset::draw(ctx.plant.sys.W(), 200, 20, 10, 6,
                                                wtmpc::StackingMode::without_replacement);
    const auto tube = wtmpc::propagate_tube(ctx.stack, data, 0.1, 10);
    REQUIRE(tube.horizon() == 10);
    for (int t = 1; t <= 10; ++t) {
      const auto& s = tube.at(t);
      CHECK(s.radius == 0.1);
      CHECK(s.center.count() == 20);
      for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd ref =
            oracle::error_rollout(ctx.plant.sys.AK(), data.truncated(t).col(i), t);
        CHECK((s.center.atoms.col(i) - ref).norm() <= 1e-10);
        CHECK(wtmpc::contains(s.support, s.center.atoms.col(i)));
      }
    }
    const auto zero = wtmpc::NoiseDataset::from_pool(Eigen::MatrixXd::Zero(2, 1), 1, 10, 1,
                                                     wtmpc::StackingMode::with_replacement);
    const auto z = wtmpc::propagate_tube(ctx.stack, zero, 0.0, 10);
    for (int t = 1; t <= 10; ++t) CHECK(z.at(t).center.atoms.isZero());
  }

  TEST_CASE("support diameter is attained at vertices") {
    const auto& ctx = fixture::study();
    const auto data = wtmpc::NoiseDataset::draw(ctx.plant.sys.W(), 20, 2, 10, 7);
    const auto tube = wtmpc::propagate_tube(ctx.stack, data, 0.0, 10);
    std::mt19937_64 rng(8);
    for (int t : {1, 4, 9}) {
      const double diam = wtmpc::support_diameter(tube.at(t));
      for (int k = 0; k < 200; ++k) {
        const Eigen::VectorXd a = fixture::sample_in(tube.at(t).support, rng);
        const Eigen::VectorXd b = fixture::sample_in(tube.at(t).support, rng);
        CHECK(tube.at(t).cost(a - b) <= diam + 1e-12);
      }
    }
  }

  TEST_CASE("tube export writes steps and a manifest") {
    const auto& ctx = fixture::study();
    const auto data = wtmpc::NoiseDataset::draw(ctx.plant.sys.W(), 50, 5, 10, 9);
    const auto tube = wtmpc::propagate_tube(ctx.stack, data, 0.01, 10);
    const auto dir = std::filesystem::temp_directory_path() / "wtmpc_tube_export";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    wtmpc::write_tube(tube, dir.string());
    for (int t = 1; t <= 10; ++t) {
      CHECK(std::filesystem::exists(dir / ("tube_step_" + std::to_string(t) + ".csv")));
    }
    std::ifstream in(dir / "tube_manifest.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["epsilon"].get<double>() == 0.01);
    CHECK(j["steps"].size() == 10);
  }
}
