#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wtmpc/mpc.hpp"

using wtmpc::NominalMode;
using wtmpc::Polytoped;

namespace {

wtmpc::WassersteinTube tube_for(const wtmpc::ExperimentContext& ctx, double eps, int n) {
  return wtmpc::propagate_tube(ctx.stack, wtmpc::make_dataset(ctx, n, 0), eps, ctx.cfg.mpc.N);
}

wtmpc::MpcConfig fast_config(const wtmpc::ExperimentContext& ctx, NominalMode mode, double eps,
                             int n) {
  auto cfg = wtmpc::cell_config(ctx, mode, eps, n);
  cfg.gamma_options.drop_trivial_piece = true;
  return cfg;
}

wtmpc::OpenLoopPlan plan_at(const wtmpc::ExperimentContext& ctx, NominalMode mode, double eps,
                            int n, const Eigen::VectorXd& x) {
  const auto cfg = fast_config(ctx, mode, eps, n);
  const auto problem =
      wtmpc::build_problem(ctx.plant, ctx.stack, tube_for(ctx, eps, n), ctx.terminal.Zf, cfg, x);
  return wtmpc::solve_problem(problem, cfg.solve_options, cfg.accept_residual);
}

wtmpc::ExperimentContext context_with(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd K,
                                      Polytoped W, Polytoped X, Polytoped U, int N) {
  auto cfg = wtmpc::ExperimentConfig::defaults();
  cfg.system.A = std::move(A);
  cfg.system.B = std::move(B);
  cfg.system.K = std::move(K);
  cfg.system.W = std::move(W);
  cfg.system.X = std::move(X);
  cfg.system.U = std::move(U);
  cfg.mpc.R = Eigen::MatrixXd::Identity(cfg.system.B.cols(), cfg.system.B.cols());
  cfg.mpc.N = N;
  return wtmpc::make_context(cfg);
}

}  // namespace

TEST_SUITE("mpc") {
  TEST_CASE("mode names") {
    for (auto m : {NominalMode::wt_simple, NominalMode::wt_tightened, NominalMode::robust}) {
      CHECK(wtmpc::parse_mode(wtmpc::to_string(m)) == m);
    }
    CHECK_THROWS_AS(wtmpc::parse_mode("tight"), wtmpc::ConfigInvalid);
  }

  TEST_CASE("configuration checks") {
    const auto& ctx = fixture::study();
    auto cfg = wtmpc::cell_config(ctx, NominalMode::wt_simple, 0.1, 5);
    CHECK_NOTHROW(cfg.validate(2, 1));
    auto bad = cfg;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(bad.validate(2, 1), wtmpc::ConfigInvalid);
    bad = cfg;
    bad.R = Eigen::MatrixXd::Zero(1, 1);
    CHECK_THROWS_AS(bad.validate(2, 1), wtmpc::ConfigInvalid);
    bad = cfg;
    bad.N = 0;
    CHECK_THROWS_AS(bad.validate(2, 1), wtmpc::ConfigInvalid);
    bad = cfg;
    bad.epsilon = -1;
    CHECK_THROWS_AS(bad.validate(2, 1), wtmpc::ConfigInvalid);
  }

  TEST_CASE("terminal set of the study passes independent vertex checks") {
    const auto& ctx = fixture::study();
    const auto& Zf = ctx.terminal.Zf;
    const int N = ctx.cfg.mpc.N;
    CHECK(ctx.terminal.certificate.ok());
    const auto& sys = ctx.plant.sys;
    const auto& E = ctx.stack.E_of(N).vertices();
    const Eigen::MatrixXd AKN = ctx.stack.AK_pow_W[static_cast<std::size_t>(N)].vertices();
    // K Zf ⊆ U ⊖ K E_N.
    const double kE_hi = oracle::max_dot(sys.K() * E, Eigen::VectorXd::Ones(1));
    const double kE_lo = -oracle::max_dot(sys.K() * E, -Eigen::VectorXd::Ones(1));
    for (Eigen::Index v = 0; v < Zf.vertices().cols(); ++v) {
      const double u = (sys.K() * Zf.vertices().col(v))(0);
      CHECK(u + kE_hi <= 1.0 + 1e-9);
      CHECK(u + kE_lo >= -1.0 - 1e-9);
      // Zf ⊆ X ⊖ E_N.
      for (Eigen::Index e = 0; e < E.cols(); ++e) {
        CHECK(wtmpc::contains(ctx.plant.X, Eigen::VectorXd(Zf.vertices().col(v) + E.col(e)), 1e-9));
      }
      // A_K Zf ⊕ A_K^N W ⊆ Zf.
      for (Eigen::Index w = 0; w < AKN.cols(); ++w) {
        const Eigen::VectorXd next = sys.AK() * Zf.vertices().col(v) + AKN.col(w);
        CHECK(wtmpc::contains(Zf, next, 1e-9));
      }
    }
  }

  TEST_CASE("terminal set without noise under a contraction is the constraint box") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    const auto X = Polytoped::symmetric_box(Eigen::Vector2d(100, 100));
    const auto U = Polytoped::symmetric_box(Eigen::Vector2d(1e6, 1e6));
    const auto ctx =
        context_with(0.5 * I, I, Eigen::MatrixXd::Zero(2, 2), Polytoped::origin(2), X, U, 3);
    CHECK(ctx.terminal.certificate.ok());
    CHECK(wtmpc::same_vertex_set(ctx.terminal.Zf.vertices(), X.vertices(), 1e-9));
  }

  TEST_CASE("terminal set of a deadbeat loop") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    const auto W = Polytoped::symmetric_box(Eigen::Vector2d(0.1, 0.1));
    const auto X = Polytoped::symmetric_box(Eigen::Vector2d(2, 2));
    const auto U = Polytoped::symmetric_box(Eigen::Vector2d(5, 5));
    const auto ctx = context_with(Eigen::MatrixXd::Zero(2, 2), I, Eigen::MatrixXd::Zero(2, 2), W,
                                  X, U, 2);
    CHECK(ctx.terminal.certificate.ok());
    CHECK(ctx.terminal.certificate.iterations <= 2);
    CHECK(wtmpc::same_vertex_set(ctx.terminal.Zf.vertices(),
                                 wtmpc::pontryagin_diff(X, W).vertices(), 1e-9));
  }

  TEST_CASE("minimal horizon") {
    auto cfg = wtmpc::ExperimentConfig::defaults();
    cfg.mpc.N = 1;
    const auto ctx = wtmpc::make_context(cfg);
    const auto tube = tube_for(ctx, 0.1, 5);
    for (auto mode : {NominalMode::wt_simple, NominalMode::wt_tightened, NominalMode::robust}) {
      const auto problem = wtmpc::build_problem(ctx.plant, ctx.stack, tube, ctx.terminal.Zf,
                                                wtmpc::cell_config(ctx, mode, 0.1, 5),
                                                Eigen::Vector2d(0.2, 0.1));
      CHECK(problem.layout.blocks.empty());
      CHECK(problem.program.num_eq() == 2 + 2 + 1);
      const auto plan = wtmpc::solve_problem(problem, {});
      CHECK(plan.usable);
    }
  }

  TEST_CASE("robust plan at x0 satisfies its constraints") {
    const auto& ctx = fixture::study();
    const auto plan = plan_at(ctx, NominalMode::robust, 0.0, 5, ctx.cfg.system.x0);
    REQUIRE(plan.usable);
    CHECK(std::isfinite(plan.objective));
    const int N = ctx.cfg.mpc.N;
    for (int k = 1; k < N; ++k) {
      const auto Xk = wtmpc::pontryagin_diff(ctx.plant.X, ctx.stack.E_of(k));
      CHECK(wtmpc::contains(Xk, plan.z.col(k), 1e-6));
    }
    CHECK(wtmpc::contains(ctx.terminal.Zf, plan.z.col(N), 1e-6));
    CHECK((plan.z.col(0) - ctx.cfg.system.x0).norm() <= 1e-9);
  }

  TEST_CASE("plan rollout reproduces the nominal states") {
    const auto& ctx = fixture::study();
    const auto& sys = ctx.plant.sys;
    for (auto mode : {NominalMode::wt_simple, NominalMode::robust}) {
      const auto plan = plan_at(ctx, mode, 0.1, 5, ctx.cfg.system.x0);
      REQUIRE(plan.usable);
      Eigen::VectorXd z = plan.z.col(0);
      for (int k = 0; k < ctx.cfg.mpc.N; ++k) {
        z = sys.AK() * z + sys.B() * plan.c.col(k);
        CHECK((z - plan.z.col(k + 1)).norm() <= std::max(1e-9, 10 * plan.residual));
        CHECK((plan.v.col(k) - sys.K() * plan.z.col(k) - plan.c.col(k)).norm() <=
              std::max(1e-9, 10 * plan.residual));
      }
    }
  }

  TEST_CASE("zero state gives zero feedforward") {
    const auto& ctx = fixture::study();
    for (auto mode : {NominalMode::wt_simple, NominalMode::robust}) {
      const auto plan = plan_at(ctx, mode, 0.1, 5, Eigen::Vector2d::Zero());
      REQUIRE(plan.usable);
      CHECK(plan.c.cwiseAbs().maxCoeff() <= 1e-5);
    }
  }

  TEST_CASE("optimal costs follow the feasible-set nesting") {
    const auto& ctx = fixture::study();
    const std::vector<Eigen::Vector2d> states{{-5, -2}, {-1.0, 1.6}, {0.5, 1.2}, {-8, 1.8}};
    for (const auto& x : states) {
      const auto s = plan_at(ctx, NominalMode::wt_simple, 0.1, 5, x);
      const auto t = plan_at(ctx, NominalMode::wt_tightened, 0.1, 5, x);
      const auto r = plan_at(ctx, NominalMode::robust, 0.1, 5, x);
      if (!(s.usable && t.usable && r.usable)) continue;
      CHECK(s.objective <= t.objective + 1e-6 * std::max(1.0, t.objective));
      CHECK(t.objective <= r.objective + 1e-6 * std::max(1.0, r.objective));
    }
  }

  TEST_CASE("wt_simple cost is nondecreasing in ε") {
    const auto& ctx = fixture::study();
    const Eigen::Vector2d x(-1.0, 1.6);
    double prev = -1.0;
    for (double eps : {0.0, 0.01, 0.1, 1.0, 10.0}) {
      const auto p = plan_at(ctx, NominalMode::wt_simple, eps, 5, x);
      if (!p.usable) break;
      CHECK(p.objective >= prev - 1e-6 * std::max(1.0, prev));
      prev = p.objective;
    }
  }

  TEST_CASE("shifted-policy certificate for vertex disturbances") {
    const auto& ctx = fixture::study();
    for (auto mode : {NominalMode::wt_tightened, NominalMode::robust}) {
      const auto cfg = fast_config(ctx, mode, 0.1, 3);
      const auto problem = wtmpc::build_problem(ctx.plant, ctx.stack, tube_for(ctx, 0.1, 3),
                                                ctx.terminal.Zf, cfg, ctx.cfg.system.x0);
      const auto plan = wtmpc::solve_problem(problem, cfg.solve_options, cfg.accept_residual);
      REQUIRE(plan.usable);
      const auto& V = ctx.plant.sys.W().vertices();
      for (Eigen::Index v = 0; v < V.cols(); ++v) {
        const auto cert = wtmpc::verify_shifted_policy(problem, plan, ctx.plant, ctx.stack,
                                                       ctx.terminal.Zf, V.col(v));
        CHECK_MESSAGE(cert.ok, cert.failed_check);
      }
    }
    const auto cfg = fast_config(ctx, NominalMode::wt_simple, 0.1, 3);
    const auto problem = wtmpc::build_problem(ctx.plant, ctx.stack, tube_for(ctx, 0.1, 3),
                                              ctx.terminal.Zf, cfg, ctx.cfg.system.x0);
    const auto plan = wtmpc::solve_problem(problem, cfg.solve_options);
    CHECK_THROWS_AS(wtmpc::verify_shifted_policy(problem, plan, ctx.plant, ctx.stack,
                                                 ctx.terminal.Zf, Eigen::Vector2d::Zero()),
                    wtmpc::InvalidArgument);
  }

  TEST_CASE("controller fallback and infeasibility") {
    const auto& ctx = fixture::study();
    const Eigen::Vector2d far(1.9, 1.99);
    {
      wtmpc::TubeMpcController c(ctx.plant, ctx.stack, tube_for(ctx, 0.1, 3), ctx.terminal.Zf,
                                 fast_config(ctx, NominalMode::wt_simple, 0.1, 3));
      const auto d = c.control(0, far);
      CHECK(d.fallback);
      CHECK(d.c.isZero());
      CHECK(c.fallback_count() == 1);
    }
    {
      wtmpc::TubeMpcController c(ctx.plant, ctx.stack, tube_for(ctx, 0.1, 3), ctx.terminal.Zf,
                                 fast_config(ctx, NominalMode::robust, 0.1, 3));
      CHECK_THROWS_AS(c.control(0, far), wtmpc::Infeasible);
      const auto d = c.control(1, ctx.cfg.system.x0);
      CHECK_FALSE(d.fallback);
      CHECK(d.c.allFinite());
    }
  }

  TEST_CASE("ε = 0 feasibility matches the directly built empirical CVaR program") {
    const auto& ctx = fixture::study();
    const auto tube = tube_for(ctx, 0.0, 5);
    const auto cfg = wtmpc::cell_config(ctx, NominalMode::wt_simple, 0.0, 5);
    auto problem =
        wtmpc::build_problem(ctx.plant, ctx.stack, tube, ctx.terminal.Zf, cfg, ctx.cfg.system.x0);
    int compared = 0;
    for (double x1 = -9.0; x1 <= 1.9; x1 += 2.7) {
      for (double x2 = -1.9; x2 <= 1.9; x2 += 0.95) {
        const Eigen::Vector2d x(x1, x2);
        problem.set_initial_state(x);
        const auto plan = wtmpc::solve_problem(problem, cfg.solve_options);
        CHECK(plan.usable == oracle::saa_cvar_mpc_feasible(ctx, tube, x));
        ++compared;
      }
    }
    CHECK(compared == 25);
  }
}
