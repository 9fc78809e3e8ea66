// Acceptance gate: one PASS/FAIL line per criterion. Criteria may be
// selected by number on the command line; the exit code is nonzero when any
// selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "geometry_properties.hpp"
#include "oracles.hpp"
#include "wtmpc/harness.hpp"

using wtmpc::NominalMode;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

const std::vector<double> kRadii{0.0, 0.01, 0.1, 1.0};
constexpr double kGamma = 0.2;

wtmpc::WassersteinTube study_tube(const wtmpc::ExperimentContext& ctx, double eps, int n,
                                  int repeat) {
  return wtmpc::propagate_tube(ctx.stack, wtmpc::make_dataset(ctx, n, repeat), eps,
                               ctx.cfg.mpc.N);
}

// ---------------------------------------------------------------------------

Verdict conic_block_matches_worst_case() {
  const auto& ctx = fixture::study();
  const auto loss = wtmpc::PwaLoss::from_polytope(ctx.plant.X);
  std::mt19937_64 rng(1001);
  int compared = 0, skipped = 0, disagreements = 0;
  for (int t : {1, 3, 5}) {
    std::vector<wtmpc::GammaBlock> blocks;
    for (double eps : kRadii) {
      blocks.push_back(wtmpc::build_gamma_block(study_tube(ctx, eps, 20, 0).at(t), loss, kGamma));
    }
    for (int k = 0; k < 500; ++k) {
      const auto& block = blocks[static_cast<std::size_t>(k) % blocks.size()];
      const Eigen::VectorXd z =
          oracle::uniform_in(Eigen::Vector2d(-11, -3), Eigen::Vector2d(3, 3), rng);
      const double v = wtmpc::worst_case_cvar(block, z);
      if (std::abs(v) <= 1e-6) {
        ++skipped;
        continue;
      }
      ++compared;
      if (wtmpc::gamma_feasible(block, z) != (v < 0)) ++disagreements;
    }
  }
  return {disagreements == 0, fmt("%d disagreements over %d states (%d inside the 1e-6 band)",
                                  disagreements, compared, skipped)};
}

/// max yᵀx over {‖D⁺x‖₂ ≤ 1} by a conic solve.
double ellipse_support_conic(const Eigen::MatrixXd& Dp, const Eigen::Vector2d& y) {
  wtmpc::ConicBuilder b;
  const int x = b.add_variables(2);
  std::vector<std::vector<std::pair<int, double>>> rows{{}};
  std::vector<double> h{1.0};
  for (Eigen::Index i = 0; i < Dp.rows(); ++i) {
    rows.push_back({{x, -Dp(i, 0)}, {x + 1, -Dp(i, 1)}});
    h.push_back(0.0);
  }
  b.add_soc(rows, h);
  b.add_linear_cost(x, -y(0));
  b.add_linear_cost(x + 1, -y(1));
  const auto r = wtmpc::solve(b.build());
  if (r.status != wtmpc::SolveStatus::optimal) return std::nan("");
  return -r.objective_value;
}

/// The same maximum by sweeping boundary points x(θ) = u(θ)/‖D⁺u(θ)‖ and
/// refining the best bracket by golden-section search.
double ellipse_support_sampled(const Eigen::MatrixXd& Dp, const Eigen::Vector2d& y) {
  auto value = [&](double th) {
    const Eigen::Vector2d u(std::cos(th), std::sin(th));
    return y.dot(u) / (Dp * u).norm();
  };
  constexpr int kGrid = 20000;
  int best = 0;
  double best_v = -1e300;
  for (int i = 0; i < kGrid; ++i) {
    const double v = value(2 * M_PI * i / kGrid);
    if (v > best_v) best_v = v, best = i;
  }
  double lo = 2 * M_PI * (best - 1) / kGrid, hi = 2 * M_PI * (best + 1) / kGrid;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double a = hi - g * (hi - lo), c = lo + g * (hi - lo);
    if (value(a) > value(c)) hi = c; else lo = a;
  }
  return std::max(best_v, value(0.5 * (lo + hi)));
}

Verdict dual_norm_identity() {
  const auto& st = fixture::study().stack;
  std::mt19937_64 rng(1002);
  double worst_identity = 0.0, worst_max = 0.0;
  for (int t = 1; t <= 10; ++t) {
    const Eigen::MatrixXd& D = st.D_of(t);
    const Eigen::MatrixXd Dp = oracle::pinv(D);
    const Eigen::MatrixXd literal = Dp * (Dp.transpose() * Dp).inverse();
    const auto cost = wtmpc::TransportCost::pinv_weighted(D);
    for (int k = 0; k < 1000; ++k) {
      const Eigen::Vector2d y = fixture::random_direction(2, rng);
      const double ref = (literal * y).norm();
      const double scale = std::max(1.0, ref);
      worst_identity = std::max(worst_identity, std::abs((D.transpose() * y).norm() - ref) / scale);
      worst_identity = std::max(worst_identity, std::abs(cost.dual(y) - ref) / scale);
      if (k < 50) {
        const double conic = ellipse_support_conic(Dp, y);
        const double sampled = ellipse_support_sampled(Dp, y);
        worst_max = std::max({worst_max, std::abs(conic - cost.dual(y)),
                              std::abs(sampled - cost.dual(y))});
        if (std::isnan(conic)) worst_max = INFINITY;
      }
    }
  }
  return {worst_identity <= 1e-9 && worst_max <= 1e-4,
          fmt("worst identity gap %.3g (tol 1e-9), worst maximization gap %.3g (tol 1e-4)",
              worst_identity, worst_max)};
}

Verdict tube_propagation() {
  const auto& ctx = fixture::study();
  const Eigen::MatrixXd AK = ctx.plant.sys.AK();
  double worst = 0.0;
  for (int repeat = 0; repeat < 5; ++repeat) {
    const auto data = wtmpc::make_dataset(ctx, 20, repeat);
    const auto tube = wtmpc::propagate_tube(ctx.stack, data, 0.1, ctx.cfg.mpc.N);
    for (int t = 1; t <= ctx.cfg.mpc.N; ++t) {
      for (int i = 0; i < data.count(); ++i) {
        const Eigen::VectorXd ref = oracle::error_rollout(AK, data.truncated(t).col(i), t);
        worst = std::max(worst, (tube.at(t).center.atoms.col(i) - ref).lpNorm<Eigen::Infinity>());
      }
    }
  }
  int hull_mismatch = 0;
  for (int t = 1; t <= 4; ++t) {
    const Eigen::MatrixXd brute = oracle::jarvis_hull(
        oracle::tube_vertex_combinations(AK, ctx.plant.sys.W().vertices(), t));
    if (!wtmpc::same_vertex_set(ctx.stack.E_of(t).vertices(), brute, 1e-9)) ++hull_mismatch;
  }
  return {worst <= 1e-10 && hull_mismatch == 0,
          fmt("worst center gap %.3g (tol 1e-10), %d of 4 E_t hulls differ", worst, hull_mismatch)};
}

// ---------------------------------------------------------------------------
// Closed-loop sweep shared by criteria 4, 6 and 7.

const wtmpc::ResultTable& closed_loop_sweep() {
  static const wtmpc::ResultTable table = [] {
    auto cfg = wtmpc::ExperimentConfig::defaults();
    cfg.epsilons = kRadii;
    cfg.ns = {20};
    cfg.modes = {NominalMode::wt_simple, NominalMode::robust};
    cfg.closed_loop.T = 15;
    cfg.closed_loop.repeats = 100;
    cfg.closed_loop.trajectories = false;
    cfg.mpc.gamma_options.drop_trivial_piece = true;
    cfg.workers = 0;
    return wtmpc::run_closed_loop(wtmpc::make_context(cfg));
  }();
  return table;
}

std::vector<const wtmpc::ResultRow*> runs_of(const wtmpc::ResultTable& table, NominalMode mode,
                                             double eps) {
  std::vector<const wtmpc::ResultRow*> out;
  for (const auto& r : table.rows) {
    if (r.mode == mode && r.epsilon == eps) out.push_back(&r);
  }
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->repeat < b->repeat; });
  return out;
}

Verdict robust_never_violates() {
  const auto& table = closed_loop_sweep();
  long violations = 0;
  int runs = 0, infeasible = 0;
  for (const auto& r : table.rows) {
    if (r.mode != NominalMode::robust) continue;
    ++runs;
    infeasible += r.infeasible_events;
    violations += std::lround(r.violation_frequency * 15);
  }
  return {violations == 0 && infeasible == 0 && runs == 400,
          fmt("%ld violating steps over %d runs of 15 steps, %d infeasible events", violations,
              runs, infeasible)};
}

Verdict violation_frequency_bound() {
  const auto runs = runs_of(closed_loop_sweep(), NominalMode::wt_simple, 1.0);
  double total = 0.0;
  for (auto* r : runs) total += r->violation_frequency;
  const double freq = total / static_cast<double>(runs.size());
  const double sigma = std::sqrt(kGamma * (1 - kGamma) / (15.0 * static_cast<double>(runs.size())));
  const double bound = kGamma + 3 * sigma;
  return {runs.size() == 100 && freq <= bound,
          fmt("violation frequency %.4f over %zu runs, bound %.4f", freq, runs.size(), bound)};
}

Verdict cost_ordering() {
  const auto& table = closed_loop_sweep();
  bool ok = true;
  std::string detail;
  for (double eps : kRadii) {
    const auto wt = runs_of(table, NominalMode::wt_simple, eps);
    const auto rt = runs_of(table, NominalMode::robust, eps);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < std::min(wt.size(), rt.size()); ++i) {
      if (wt[i]->repeat != rt[i]->repeat) ok = false;
      a.push_back(wt[i]->closed_loop_cost);
      b.push_back(rt[i]->closed_loop_cost);
    }
    if (a.size() != 100) ok = false;
    const auto ci = wtmpc::paired_bootstrap(a, b, 10000, 0.95, 1007);
    const double mean_rt = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    // Ties are allowed to solver tolerance.
    const bool ordered = ci.mean <= 1e-6 * std::abs(mean_rt);
    const bool significant = eps > 0.1 || ci.upper < 0.0;
    ok = ok && ordered && significant;
    detail += fmt("%seps=%g diff %.4g [%.4g, %.4g]", detail.empty() ? "" : "; ", eps, ci.mean,
                  ci.lower, ci.upper);
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------

Verdict monotone_safety() {
  auto cfg = wtmpc::ExperimentConfig::defaults();
  cfg.epsilons = kRadii;
  cfg.ns = {20};
  cfg.modes = {NominalMode::wt_simple};
  cfg.open_loop.center_repeats = 50;
  cfg.open_loop.mc_realizations = 2000;
  cfg.open_loop.tube_sections = false;
  cfg.mpc.gamma_options.drop_trivial_piece = true;
  const auto table = wtmpc::run_open_loop(wtmpc::make_context(cfg));
  std::map<double, std::vector<double>> by_eps;
  for (const auto& r : table.rows) by_eps[r.epsilon].push_back(r.violation_frequency);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < kRadii.size(); ++i) {
    const auto& cur = by_eps[kRadii[i]];
    const double mean = std::accumulate(cur.begin(), cur.end(), 0.0) / static_cast<double>(cur.size());
    detail += fmt("%seps=%g mean %.4f", detail.empty() ? "" : "; ", kRadii[i], mean);
    if (cur.size() != 50) ok = false;
    if (i == 0) continue;
    const auto ci = wtmpc::paired_bootstrap(cur, by_eps[kRadii[i - 1]], 10000, 0.95, 1005 + i);
    detail += fmt(" (step CI [%.4g, %.4g])", ci.lower, ci.upper);
    if (ci.upper > 0.0) ok = false;
  }
  return {ok, detail};
}

Verdict recursive_feasibility() {
  auto cfg = wtmpc::ExperimentConfig::defaults();
  cfg.mpc.feedback_fallback = false;
  const auto ctx = wtmpc::make_context(cfg);
  constexpr int kSamples = 5;
  constexpr double kEps = 0.1;
  constexpr int T = 15;
  const auto tube = study_tube(ctx, kEps, kSamples, 0);
  auto mcfg = wtmpc::cell_config(ctx, NominalMode::wt_tightened, kEps, kSamples);
  mcfg.gamma_options.drop_trivial_piece = true;
  const auto& sys = ctx.plant.sys;
  const Eigen::MatrixXd V = sys.W().vertices();
  int infeasible = 0, certificate_failures = 0, checks = 0;
  double worst = 0.0;
  for (int s = 0; s < 200; ++s) {
    std::mt19937_64 rng(wtmpc::evaluation_seed(cfg.root_seed, s, 3));
    std::uniform_int_distribution<Eigen::Index> pick(0, V.cols() - 1);
    wtmpc::TubeMpcController controller(ctx.plant, ctx.stack, tube, ctx.terminal.Zf, mcfg);
    Eigen::VectorXd x = cfg.system.x0;
    for (int t = 0; t < T; ++t) {
      wtmpc::ControlDecision d;
      try {
        d = controller.control(t, x);
      } catch (const wtmpc::Infeasible&) {
        ++infeasible;
        break;
      }
      for (Eigen::Index v = 0; v < V.cols(); ++v) {
        const auto cert = wtmpc::verify_shifted_policy(controller.problem(), controller.last_plan(),
                                                       ctx.plant, ctx.stack, ctx.terminal.Zf,
                                                       V.col(v));
        ++checks;
        worst = std::max(worst, cert.worst_violation);
        if (!cert.ok) ++certificate_failures;
      }
      x = sys.A() * x + sys.B() * (sys.K() * x + d.c) + V.col(pick(rng));
    }
  }
  return {infeasible == 0 && certificate_failures == 0,
          fmt("%d infeasible events, %d of %d shifted-policy checks failed (worst %.3g), n=%d",
              infeasible, certificate_failures, checks, worst, kSamples)};
}

Verdict geometry_suite() {
  double w[5];
  const int f = geometry_properties::pontryagin_then_minkowski(1000, 2001, &w[0]) +
                geometry_properties::support_additivity(1000, 2002, &w[1]) +
                geometry_properties::image_distributes(1000, 2003, &w[2]) +
                geometry_properties::hull_idempotent(1000, 2004, &w[3]) +
                geometry_properties::pontryagin_membership(1000, 2005, &w[4]);
  return {f == 0, fmt("%d failures over 5 x 1000 instances, worst deviations %.2g %.2g %.2g "
                      "%.2g %.2g",
                      f, w[0], w[1], w[2], w[3], w[4])};
}

Verdict saa_endpoint() {
  const auto& ctx = fixture::study();
  const auto tube = study_tube(ctx, 0.0, 20, 0);
  const auto cfg = wtmpc::cell_config(ctx, NominalMode::wt_simple, 0.0, 20);
  auto problem =
      wtmpc::build_problem(ctx.plant, ctx.stack, tube, ctx.terminal.Zf, cfg, ctx.cfg.system.x0);
  auto wt = [&](const Eigen::VectorXd& x) {
    problem.set_initial_state(x);
    return wtmpc::solve_problem(problem, cfg.solve_options, cfg.accept_residual).usable;
  };
  auto saa = [&](const Eigen::VectorXd& x) { return oracle::saa_cvar_mpc_feasible(ctx, tube, x); };
  int agree = 0, band = 0, disagree = 0, feasible = 0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const Eigen::Vector2d x(-11.0 + 14.0 * i / 19.0, -2.5 + 5.0 * j / 19.0);
      const bool a = wt(x), b = saa(x);
      feasible += a;
      if (a == b) {
        ++agree;
        continue;
      }
      bool flips = false;
      for (int k = 0; k < 2 && !flips; ++k) {
        for (double s : {-1e-6, 1e-6}) {
          Eigen::Vector2d y = x;
          y(k) += s;
          if (wt(y) != a || saa(y) != b) flips = true;
        }
      }
      if (flips) ++band; else ++disagree;
    }
  }
  return {disagree == 0 && agree + band == 400,
          fmt("%d of 400 agree (%d feasible), %d inside the boundary band, %d disagree", agree,
              feasible, band, disagree)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"conic block feasibility matches the worst-case CVaR sign", conic_block_matches_worst_case},
      {"dual norm identity and maximization", dual_norm_identity},
      {"tube centers and error sets", tube_propagation},
      {"robust closed loop has zero violations", robust_never_violates},
      {"open-loop violations nonincreasing in radius", monotone_safety},
      {"closed-loop violation frequency bound at radius 1", violation_frequency_bound},
      {"wt_simple closed-loop cost below robust", cost_ordering},
      {"recursive feasibility under vertex noise", recursive_feasibility},
      {"geometry property suite", geometry_suite},
      {"empirical-CVaR endpoint feasible set", saa_endpoint},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s: %s [%.0fs]\n", v.pass ? "PASS" : "FAIL", id,
                criteria[k].first.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
