#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wtmpc/lti.hpp"

using wtmpc::Polytoped;

namespace {

/// Returns c ≡ 0.
class ZeroController final : public wtmpc::Controller {
 public:
  explicit ZeroController(int m) : m_(m) {}
  wtmpc::ControlDecision control(int, const Eigen::VectorXd&) override {
    wtmpc::ControlDecision d;
    d.c = Eigen::VectorXd::Zero(m_);
    return d;
  }

 private:
  int m_;
};

class FailingController final : public wtmpc::Controller {
 public:
  wtmpc::ControlDecision control(int t, const Eigen::VectorXd&) override {
    if (t == 2) throw wtmpc::Infeasible("no plan");
    wtmpc::ControlDecision d;
    d.c = Eigen::VectorXd::Zero(1);
    return d;
  }
};

}  // namespace

TEST_SUITE("lti") {
  TEST_CASE("LQR limits") {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, 0.5);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const Eigen::MatrixXd K = wtmpc::make_lqr_gain(A, B, Q, Eigen::MatrixXd::Constant(1, 1, 1e9));
    CHECK(std::abs(K(0, 0)) < 1e-8);

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd Kd = wtmpc::make_lqr_gain(I, I, I, 1e-9 * I);
    CHECK((Kd + I).norm() < 1e-6);
  }

  TEST_CASE("LQR gain of the study matches the doubling oracle") {
    const auto cfg = wtmpc::ExperimentConfig::defaults();
    const auto& s = cfg.system;
    const Eigen::MatrixXd P = wtmpc::solve_dare(s.A, s.B, cfg.mpc.Q, cfg.mpc.R);
    const Eigen::MatrixXd Po = oracle::doubling_dare(s.A, s.B, cfg.mpc.Q, cfg.mpc.R);
    CHECK((P - Po).norm() <= 1e-9 * Po.norm());
    const Eigen::MatrixXd Ko = -(cfg.mpc.R + s.B.transpose() * Po * s.B)
                                   .ldlt()
                                   .solve(s.B.transpose() * Po * s.A);
    const Eigen::MatrixXd K = wtmpc::make_lqr_gain(s.A, s.B, cfg.mpc.Q, cfg.mpc.R);
    CHECK((K - Ko).norm() <= 1e-9);
    CHECK(wtmpc::spectral_radius(s.A + s.B * K) < 1.0);
  }

  TEST_CASE("system construction checks") {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, 2.0);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const auto W = Polytoped::symmetric_box(Eigen::VectorXd::Constant(1, 0.1));
    CHECK_THROWS_AS(wtmpc::LinearSystem(A, B, Eigen::MatrixXd::Zero(1, 1), W),
                    wtmpc::NotSchurStable);
    const auto Wshift = Polytoped::box(Eigen::VectorXd::Constant(1, 0.1),
                                       Eigen::VectorXd::Constant(1, 0.2));
    CHECK_THROWS_AS(wtmpc::LinearSystem(A, B, Eigen::MatrixXd::Constant(1, 1, -1.5), Wshift),
                    wtmpc::OriginNotInSupport);
  }

  TEST_CASE("error stack structure") {
    const auto& ctx = fixture::study();
    const auto& st = ctx.stack;
    const Eigen::MatrixXd AK = ctx.plant.sys.AK();
    CHECK(st.D_of(1) == Eigen::MatrixXd::Identity(2, 2));
    CHECK(wtmpc::same_vertex_set(st.E_of(1).vertices(), ctx.plant.sys.W().vertices(), 1e-12));
    CHECK(st.D_of(2).leftCols(2) == Eigen::MatrixXd::Identity(2, 2));
    CHECK((st.D_of(2).rightCols(2) - AK).norm() == 0.0);
    for (int t = 1; t <= st.horizon; ++t) {
      const auto& sv = st.svd_of(t);
      CHECK(sv.sigma.minCoeff() > 0.0);
      const Eigen::MatrixXd rebuilt = sv.U * sv.sigma.asDiagonal() * sv.V.transpose();
      CHECK((rebuilt - st.D_of(t)).norm() <= 1e-12 * st.D_of(t).norm());
    }
  }

  TEST_CASE("E_t matches the hull of all vertex combinations for t <= 4") {
    const auto& ctx = fixture::study();
    const Eigen::MatrixXd AK = ctx.plant.sys.AK();
    for (int t = 1; t <= 4; ++t) {
      const Eigen::MatrixXd combos =
          oracle::tube_vertex_combinations(AK, ctx.plant.sys.W().vertices(), t);
      CHECK(wtmpc::same_vertex_set(ctx.stack.E_of(t).vertices(), oracle::jarvis_hull(combos),
                                   1e-10));
    }
  }

  TEST_CASE("E_t stays inside the geometric decay envelope") {
    const auto& ctx = fixture::study();
    const Eigen::MatrixXd AK = ctx.plant.sys.AK();
    const double wmax = ctx.plant.sys.W().vertices().colwise().norm().maxCoeff();
    double bound = 0.0;
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(2, 2);
    for (int t = 1; t <= ctx.stack.horizon; ++t) {
      bound += power.operatorNorm() * wmax;
      power = AK * power;
      CHECK(ctx.stack.E_of(t).vertices().colwise().norm().maxCoeff() <= bound + 1e-12);
    }
  }

  TEST_CASE("error recursion equals D_{t-1} times the stacked noise") {
    const auto& ctx = fixture::study();
    const Eigen::MatrixXd AK = ctx.plant.sys.AK();
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 100; ++rep) {
      const Eigen::MatrixXd w = wtmpc::sample_uniform(ctx.plant.sys.W(), 10, rng);
      Eigen::VectorXd stacked(20);
      for (int k = 0; k < 10; ++k) stacked.segment(2 * (9 - k), 2) = w.col(k);
      for (int t = 1; t <= 10; ++t) {
        const Eigen::VectorXd direct = ctx.stack.D_of(t) * stacked.tail(2 * t);
        CHECK((direct - oracle::error_rollout(AK, stacked.tail(2 * t), t)).norm() <= 1e-10);
      }
    }
  }

  TEST_CASE("seed derivation") {
    CHECK(wtmpc::derive_seed(1, {2, 3}) == wtmpc::derive_seed(1, {2, 3}));
    CHECK(wtmpc::derive_seed(1, {2, 3}) != wtmpc::derive_seed(1, {3, 2}));
    CHECK(wtmpc::derive_seed(1, {2}) != wtmpc::derive_seed(2, {2}));
  }

  TEST_CASE("uniform sampling stays in W") {
    std::mt19937_64 rng(5);
    const auto W = fixture::study().plant.sys.W();
    const Eigen::MatrixXd s = wtmpc::sample_uniform(W, 5000, rng);
    for (Eigen::Index k = 0; k < s.cols(); ++k) CHECK(wtmpc::contains(W, s.col(k), 0.0));
    CHECK(s.rowwise().mean().norm() < 0.01);
    const auto tri = Polytoped::from_vertices(
        (Eigen::MatrixXd(2, 3) << -1, 1, 0, -1, -1, 1).finished());
    const Eigen::MatrixXd t = wtmpc::sample_uniform(tri, 500, rng);
    for (Eigen::Index k = 0; k < t.cols(); ++k) CHECK(wtmpc::contains(tri, t.col(k)));
  }

  TEST_CASE("trajectory stacking") {
    SUBCASE("zero pool gives zero trajectories") {
      const Eigen::MatrixXd pool = Eigen::MatrixXd::Zero(2, 1);
      CHECK(wtmpc::stack_trajectories(pool, 5, 3, 1).isZero());
    }
    SUBCASE("n = n0, t = 1 without replacement is a permutation") {
      std::mt19937_64 rng(1);
      const Eigen::MatrixXd pool = wtmpc::sample_uniform(fixture::study().plant.sys.W(), 30, rng);
      const Eigen::MatrixXd out = wtmpc::stack_trajectories(
          pool, 30, 1, 9, wtmpc::StackingMode::without_replacement);
      std::multiset<std::pair<double, double>> a, b;
      for (int k = 0; k < 30; ++k) {
        a.insert({pool(0, k), pool(1, k)});
        b.insert({out(0, k), out(1, k)});
      }
      CHECK(a == b);
    }
    SUBCASE("deterministic and drawn from the pool") {
      std::mt19937_64 rng(2);
      const Eigen::MatrixXd pool = wtmpc::sample_uniform(fixture::study().plant.sys.W(), 7, rng);
      const Eigen::MatrixXd x = wtmpc::stack_trajectories(pool, 20, 4, 77);
      CHECK(x == wtmpc::stack_trajectories(pool, 20, 4, 77));
      for (int i = 0; i < 20; ++i) {
        for (int k = 0; k < 4; ++k) {
          const Eigen::Vector2d blk = x.block(2 * k, i, 2, 1);
          CHECK((pool.colwise() - blk).colwise().norm().minCoeff() == 0.0);
        }
      }
    }
    SUBCASE("errors") {
      CHECK_THROWS_AS(wtmpc::stack_trajectories(Eigen::MatrixXd(2, 0), 1, 1, 1),
                      wtmpc::EmptyPool);
      CHECK_THROWS_AS(wtmpc::stack_trajectories(Eigen::MatrixXd::Zero(2, 3), 2, 2, 1,
                                                wtmpc::StackingMode::without_replacement),
                      wtmpc::InvalidArgument);
    }
  }

  TEST_CASE("noise CSV round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "wtmpc_lti_csv";
    std::filesystem::create_directories(dir);
    const auto data = wtmpc::NoiseDataset::draw(fixture::study().plant.sys.W(), 40, 4, 10, 3);
    wtmpc::write_samples_csv((dir / "pool.csv").string(), data.pool);
    CHECK(wtmpc::read_samples_csv((dir / "pool.csv").string()) == data.pool);
    wtmpc::write_trajectories_csv((dir / "traj.csv").string(), data.trajectories, 2);
    CHECK(wtmpc::read_trajectories_csv((dir / "traj.csv").string()) ==
          data.trajectories);
    std::ifstream in(dir / "pool.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "w1,w2");
  }

  TEST_CASE("closed-loop simulation") {
    const auto& ctx = fixture::study();
    const auto& sys = ctx.plant.sys;
    const wtmpc::StageWeights weights{Eigen::MatrixXd::Identity(2, 2),
                                      Eigen::MatrixXd::Identity(1, 1)};
    ZeroController zero(1);
    SUBCASE("equilibrium") {
      const auto log = wtmpc::simulate_closed_loop(sys, zero, Eigen::Vector2d::Zero(), 10,
                                                   Eigen::MatrixXd::Zero(2, 10), weights);
      CHECK(log.x.isZero());
      CHECK(log.total_cost() == 0.0);
    }
    SUBCASE("T = 0") {
      const auto log = wtmpc::simulate_closed_loop(sys, zero, Eigen::Vector2d(1, 2), 0,
                                                   Eigen::MatrixXd(2, 0), weights);
      CHECK(log.x.cols() == 1);
      CHECK(log.steps() == 0);
    }
    SUBCASE("replay is exact") {
      std::mt19937_64 rng(4);
      const Eigen::MatrixXd w = wtmpc::sample_uniform(sys.W(), 12, rng);
      const auto log = wtmpc::simulate_closed_loop(sys, zero, Eigen::Vector2d(-5, -2), 12, w,
                                                   weights);
      for (int t = 0; t < 12; ++t) {
        const Eigen::VectorXd next =
            sys.A() * log.x.col(t) + sys.B() * log.u.col(t) + log.w.col(t);
        CHECK(next == log.x.col(t + 1));
        CHECK(log.w.col(t) == w.col(t));
      }
    }
    SUBCASE("controller failure carries the step") {
      FailingController bad;
      try {
        wtmpc::simulate_closed_loop(sys, bad, Eigen::Vector2d::Zero(), 5,
                                    Eigen::MatrixXd::Zero(2, 5), weights);
        FAIL("expected ControllerInfeasible");
      } catch (const wtmpc::ControllerInfeasible& e) {
        CHECK(e.step() == 2);
      }
    }
  }
}
