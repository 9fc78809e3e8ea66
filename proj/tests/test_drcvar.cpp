#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wtmpc/drcvar.hpp"

using wtmpc::GammaBlock;
using wtmpc::GammaOptions;
using wtmpc::PwaLoss;
using wtmpc::Polytoped;

namespace {

wtmpc::WassersteinTube study_tube(double eps, int n, int repeat = 0) {
  const auto& ctx = fixture::study();
  return wtmpc::propagate_tube(ctx.stack, wtmpc::make_dataset(ctx, n, repeat), eps,
                               ctx.cfg.mpc.N);
}

PwaLoss study_loss() { return PwaLoss::from_polytope(fixture::study().plant.X); }

/// Single-atom step at the origin supported on W with the identity cost.
wtmpc::TubeStep point_step(double eps) {
  wtmpc::TubeStep s;
  s.t = 1;
  s.center.atoms = Eigen::MatrixXd::Zero(2, 1);
  s.radius = eps;
  s.cost = wtmpc::TransportCost::pinv_weighted(Eigen::MatrixXd::Identity(2, 2));
  s.support = fixture::study().plant.sys.W();
  return s;
}

std::vector<double> losses_at(const PwaLoss& loss, const Eigen::VectorXd& z,
                              const Eigen::MatrixXd& atoms) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < atoms.cols(); ++i) v.push_back(loss(z + atoms.col(i)));
  return v;
}

}  // namespace

TEST_SUITE("drcvar") {
  TEST_CASE("empirical CVaR examples") {
    CHECK(wtmpc::cvar_empirical({2.5, 2.5, 2.5}, 0.3) == doctest::Approx(2.5));
    const std::vector<double> v{0.3, -1.0, 4.0, 2.0};
    CHECK(wtmpc::cvar_empirical(v, 1.0) == doctest::Approx(1.325));
    CHECK(wtmpc::cvar_empirical({0.0, 1.0}, 0.5) == doctest::Approx(1.0));
    CHECK(oracle::cvar_grid({0.0, 1.0}, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(wtmpc::cvar_empirical({}, 0.5), wtmpc::EmptyInput);
    CHECK_THROWS_AS(wtmpc::cvar_empirical({1.0}, 0.0), wtmpc::GammaOutOfRange);
    CHECK_THROWS_AS(wtmpc::cvar_empirical({1.0}, 1.5), wtmpc::GammaOutOfRange);
  }

  TEST_CASE("empirical CVaR matches the τ grid on random samples") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> lev(0.05, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> v(1 + rep % 17);
      for (auto& x : v) x = g(rng);
      const double gamma = lev(rng);
      // The grid spacing bounds the oracle's error.
      CHECK(std::abs(wtmpc::cvar_empirical(v, gamma) - oracle::cvar_grid(v, gamma)) <= 1e-3 / gamma);
      CHECK(wtmpc::cvar_empirical(v, gamma) <= oracle::cvar_grid(v, gamma) + 1e-12);
    }
  }

  TEST_CASE("block layout and counts") {
    const auto tube = study_tube(0.1, 10);
    const auto block = wtmpc::build_gamma_block(tube.at(3), study_loss(), 0.2);
    CHECK(block.J == 4);
    CHECK(block.affine_rows() == 10 * 5);
    CHECK(block.cone_count() == 10 * 5);
    CHECK(block.budget_rows() == 1);
    CHECK(block.alpha.col(4).isZero());
    CHECK(block.beta_tau(4) == 1.0);
    for (int j = 0; j < 4; ++j) {
      CHECK((block.alpha.col(j) - study_loss().a.row(j).transpose() / 0.2).norm() == 0.0);
      CHECK(block.beta_tau(j) == doctest::Approx(-4.0));
    }
    wtmpc::ConicBuilder b;
    const int z = b.add_variables(2);
    wtmpc::append_gamma_block(b, block, wtmpc::StateRef::variables({z, z + 1}), true);
    const auto p = b.build();
    int socs = 0;
    for (const auto& c : p.cones) socs += c.kind == wtmpc::ConeBlock::Kind::soc;
    CHECK(socs == block.cone_count());
    const int q = block.q;
    CHECK(p.num_vars == 2 + 2 + 10 + 10 * 5 * q);
    CHECK(p.num_in() == 1 + 10 * 5 * q + 1 + 50 + 50 * (1 + 2));
  }

  TEST_CASE("block construction errors") {
    const auto tube = study_tube(0.1, 5);
    CHECK_THROWS_AS(wtmpc::build_gamma_block(tube.at(1), study_loss(), 1.0),
                    wtmpc::GammaOutOfRange);
    CHECK_THROWS_AS(wtmpc::build_gamma_block(tube.at(1), study_loss(), 1e-4),
                    wtmpc::GammaOutOfRange);
    auto bad = tube.at(1);
    bad.center.atoms(0, 0) = 1.0;
    CHECK_THROWS_AS(wtmpc::build_gamma_block(bad, study_loss(), 0.2),
                    wtmpc::CenterOutsideSupport);
  }

  TEST_CASE("single atom at ε = 0 reduces to the affine constraint") {
    PwaLoss loss{(Eigen::MatrixXd(1, 2) << 1.0, 0.5).finished(), Eigen::VectorXd::Constant(1, -0.3)};
    const auto block = wtmpc::build_gamma_block(point_step(0.0), loss, 0.2);
    for (double x = -1.0; x <= 1.0; x += 0.25) {
      for (double y = -1.0; y <= 1.0; y += 0.25) {
        const Eigen::Vector2d z(x, y);
        const double value = loss.a.row(0).dot(z) + loss.b(0);
        if (std::abs(value) < 1e-6) continue;
        CHECK(wtmpc::gamma_feasible(block, z) == (value < 0));
      }
    }
  }

  TEST_CASE("a state-independent negative loss is always satisfied") {
    PwaLoss loss{Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Constant(2, -1.0)};
    const auto block = wtmpc::build_gamma_block(point_step(0.5), loss, 0.2);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd z = 10 * fixture::random_direction(2, rng);
      CHECK(wtmpc::gamma_feasible(block, z));
      CHECK(wtmpc::worst_case_cvar(block, z) == doctest::Approx(-1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("X ⊖ E_1 lies inside Γ_1 at ε = 0.01, n = 10") {
    const auto& ctx = fixture::study();
    const auto block = wtmpc::build_gamma_block(study_tube(0.01, 10).at(1), study_loss(), 0.2);
    const auto inner = wtmpc::pontryagin_diff(ctx.plant.X, ctx.stack.E_of(1));
    std::mt19937_64 rng(2);
    int infeasible = 0;
    for (int k = 0; k < 200; ++k) {
      infeasible += !wtmpc::gamma_feasible(block, fixture::sample_in(inner, rng));
    }
    CHECK(infeasible == 0);
  }

  TEST_CASE("ε = 0 worst case equals the empirical CVaR") {
    const auto tube = study_tube(0.0, 10);
    const auto loss = study_loss();
    std::mt19937_64 rng(3);
    for (int t : {1, 4, 8}) {
      const auto block = wtmpc::build_gamma_block(tube.at(t), loss, 0.2);
      for (int k = 0; k < 10; ++k) {
        const Eigen::VectorXd z = oracle::uniform_in(Eigen::Vector2d(-10, -2), Eigen::Vector2d(2, 2), rng);
        const auto v = losses_at(loss, z, tube.at(t).center.atoms);
        const double wc = wtmpc::worst_case_cvar(block, z);
        CHECK(wc == doctest::Approx(wtmpc::cvar_empirical(v, 0.2)).epsilon(1e-6));
        double mean = 0.0;
        for (double x : v) mean += x / v.size();
        CHECK(wc >= mean - 1e-7);
      }
    }
  }

  TEST_CASE("a radius beyond the support diameter gives the robust maximum") {
    const auto& ctx = fixture::study();
    PwaLoss loss{(Eigen::MatrixXd(1, 2) << 0.3, -1.0).finished(), Eigen::VectorXd::Constant(1, 0.2)};
    const auto base = study_tube(0.0, 5);
    std::mt19937_64 rng(4);
    for (int t : {1, 3}) {
      auto step = base.at(t);
      step.radius = 1.01 * wtmpc::support_diameter(step);
      const auto block = wtmpc::build_gamma_block(step, loss, 0.2);
      for (int k = 0; k < 5; ++k) {
        const Eigen::VectorXd z = fixture::random_direction(2, rng);
        double robust = -std::numeric_limits<double>::infinity();
        const auto& V = ctx.stack.E_of(t).vertices();
        for (Eigen::Index v = 0; v < V.cols(); ++v) robust = std::max(robust, loss(z + V.col(v)));
        CHECK(wtmpc::worst_case_cvar(block, z) == doctest::Approx(robust).epsilon(1e-5));
      }
    }
  }

  TEST_CASE("worst case is monotone in ε and scales with the loss") {
    const auto loss = study_loss();
    std::mt19937_64 rng(5);
    const std::vector<double> radii{0.0, 0.01, 0.1, 1.0};
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd z = oracle::uniform_in(Eigen::Vector2d(-10, -2), Eigen::Vector2d(2, 2), rng);
      double prev = -std::numeric_limits<double>::infinity();
      for (double eps : radii) {
        const auto block = wtmpc::build_gamma_block(study_tube(eps, 10).at(5), loss, 0.2);
        const double v = wtmpc::worst_case_cvar(block, z);
        CHECK(v >= prev - 1e-7);
        prev = v;
      }
      const auto block = wtmpc::build_gamma_block(study_tube(0.1, 10).at(5), loss, 0.2);
      const PwaLoss scaled{3.0 * loss.a, 3.0 * loss.b};
      const auto sblock = wtmpc::build_gamma_block(study_tube(0.1, 10).at(5), scaled, 0.2);
      const double v = wtmpc::worst_case_cvar(block, z);
      CHECK(wtmpc::worst_case_cvar(sblock, z) == doctest::Approx(3.0 * v).epsilon(1e-6));
      if (std::abs(v) > 1e-6) {
        CHECK(wtmpc::gamma_feasible(block, z) == wtmpc::gamma_feasible(sblock, z));
      }
    }
  }

  TEST_CASE("feasibility agrees with the sign of the worst case") {
    const auto loss = study_loss();
    std::mt19937_64 rng(6);
    for (double eps : {0.0, 0.1}) {
      const auto block = wtmpc::build_gamma_block(study_tube(eps, 10).at(3), loss, 0.2);
      for (int k = 0; k < 40; ++k) {
        const Eigen::VectorXd z = oracle::uniform_in(Eigen::Vector2d(-10.5, -2.5), Eigen::Vector2d(2.5, 2.5), rng);
        const double v = wtmpc::worst_case_cvar(block, z);
        if (std::abs(v) <= 1e-6) continue;
        CHECK(wtmpc::gamma_feasible(block, z) == (v < 0));
      }
    }
  }

  TEST_CASE("block variants describe the same set") {
    const auto loss = study_loss();
    const auto step = study_tube(0.1, 8).at(4);
    const auto full = wtmpc::build_gamma_block(step, loss, 0.2);
    GammaOptions drop;
    drop.drop_trivial_piece = true;
    GammaOptions transpose;
    transpose.dual_form = wtmpc::DualForm::transpose;
    GammaOptions literal;
    literal.dual_form = wtmpc::DualForm::literal;
    std::mt19937_64 rng(7);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd z = oracle::uniform_in(Eigen::Vector2d(-10, -2), Eigen::Vector2d(2, 2), rng);
      const double v = wtmpc::worst_case_cvar(full, z);
      for (const auto& opts : {drop, transpose, literal}) {
        const auto other = wtmpc::build_gamma_block(step, loss, 0.2, opts);
        CHECK(wtmpc::worst_case_cvar(other, z) == doctest::Approx(v).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("in-ball perturbations of the center respect the chance level") {
    const auto& ctx = fixture::study();
    const auto loss = study_loss();
    const auto step = study_tube(0.05, 20).at(4);
    const auto block = wtmpc::build_gamma_block(step, loss, 0.2);
    // Boundary point of Γ along x1 by bisection from a feasible start.
    double lo = -5.0, hi = 2.0;
    const double y = 1.0;
    REQUIRE(wtmpc::gamma_feasible(block, Eigen::Vector2d(lo, y)));
    for (int it = 0; it < 30; ++it) {
      const double mid = 0.5 * (lo + hi);
      (wtmpc::gamma_feasible(block, Eigen::Vector2d(mid, y)) ? lo : hi) = mid;
    }
    const Eigen::Vector2d z(lo, y);
    std::mt19937_64 rng(8);
    const auto& V = ctx.stack.E_of(4).vertices();
    std::uniform_int_distribution<Eigen::Index> pick(0, V.cols() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
      Eigen::MatrixXd moved = step.center.atoms;
      std::vector<double> cost(20);
      double total = 0.0;
      for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd target = V.col(pick(rng));
        const double theta = u(rng);
        moved.col(i) += theta * (target - moved.col(i));
        cost[i] = step.cost(moved.col(i) - step.center.atoms.col(i));
        total += cost[i] / 20;
      }
      // Shrink every displacement so the mean transport cost fits the radius.
      if (total > step.radius) {
        const double s = step.radius / total;
        moved = step.center.atoms + s * (moved - step.center.atoms);
      }
      int violations = 0;
      for (int i = 0; i < 20; ++i) violations += loss(z + moved.col(i)) > 1e-6;
      CHECK(violations <= 0.2 * 20);
    }
  }

  TEST_CASE("tightening offsets") {
    const auto& ctx = fixture::study();
    const auto loss = study_loss();
    const auto tube = study_tube(0.1, 5);
    const auto one = wtmpc::build_tightened_spec(ctx.stack, tube, loss, 0.2, 1);
    REQUIRE(one.blocks.size() == 1);
    CHECK(one.blocks[0].offsets.isZero());
    const auto three = wtmpc::build_tightened_spec(ctx.stack, tube, loss, 0.2, 3);
    REQUIRE(three.blocks.size() == 3);
    CHECK(three.blocks[2].offsets.isZero());
    const Eigen::MatrixXd AK = ctx.plant.sys.AK();
    const Eigen::MatrixXd Wv = ctx.plant.sys.W().vertices();
    const Eigen::MatrixXd sums = oracle::pair_sums(AK * Wv, AK * AK * Wv);
    for (int j = 0; j < loss.pieces(); ++j) {
      const Eigen::VectorXd alpha = loss.a.row(j).transpose() / 0.2;
      CHECK(three.blocks[0].offsets(j) == doctest::Approx(oracle::max_dot(sums, alpha)).epsilon(1e-12));
      CHECK(three.blocks[1].offsets(j) ==
            doctest::Approx(oracle::max_dot(AK * AK * Wv, alpha)).epsilon(1e-12));
    }
    CHECK(three.blocks[0].offsets(loss.pieces()) == 0.0);
    CHECK_THROWS_AS(wtmpc::build_tightened_spec(ctx.stack, tube, loss, 0.2, 11),
                    wtmpc::InvalidArgument);

    // Without noise every offset vanishes.
    wtmpc::LinearSystem quiet(ctx.plant.sys.A(), ctx.plant.sys.B(), ctx.plant.sys.K(),
                              Polytoped::origin(2));
    const auto qstack = wtmpc::error_stack(quiet, 10);
    wtmpc::TighteningOffsets cache(qstack, loss.a.transpose());
    for (int p = 1; p <= 5; ++p) CHECK(cache.offsets(p, 5).isZero());
  }

  TEST_CASE("tightened sets nest inside Γ_k and contain X ⊖ E_k") {
    const auto& ctx = fixture::study();
    const auto loss = study_loss();
    const auto tube = study_tube(0.1, 5);
    std::mt19937_64 rng(9);
    for (int k : {2, 4}) {
      const auto spec = wtmpc::build_tightened_spec(ctx.stack, tube, loss, 0.2, k);
      const auto gamma_k = wtmpc::build_gamma_block(tube.at(k), loss, 0.2);
      const auto inner = wtmpc::pontryagin_diff(ctx.plant.X, ctx.stack.E_of(k));
      for (int s = 0; s < 20; ++s) {
        const Eigen::VectorXd z = fixture::sample_in(inner, rng);
        for (const auto& block : spec.blocks) CHECK(wtmpc::gamma_feasible(block, z));
      }
      for (int s = 0; s < 20; ++s) {
        const Eigen::VectorXd z = oracle::uniform_in(Eigen::Vector2d(-10, -2), Eigen::Vector2d(2, 2), rng);
        bool in_zk = true;
        for (const auto& block : spec.blocks) in_zk = in_zk && wtmpc::gamma_feasible(block, z);
        if (in_zk) CHECK(wtmpc::gamma_feasible(gamma_k, z));
      }
    }
  }

  TEST_CASE("support of Γ along the rows of X") {
    const auto& ctx = fixture::study();
    const auto block = wtmpc::build_gamma_block(study_tube(0.1, 10).at(2), study_loss(), 0.2);
    const auto inner = wtmpc::pontryagin_diff(ctx.plant.X, ctx.stack.E_of(2));
    for (Eigen::Index r = 0; r < ctx.plant.X.F().rows(); ++r) {
      const Eigen::VectorXd a = ctx.plant.X.F().row(r).transpose();
      const double h = wtmpc::gamma_support(block, a, nullptr);
      CHECK(h <= wtmpc::support(ctx.plant.X, a) + 1e-6);
      CHECK(h >= wtmpc::support(inner, a) - 1e-6);
    }
  }
}
