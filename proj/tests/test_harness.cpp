#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "wtmpc/harness.hpp"

namespace fs = std::filesystem;

namespace {

wtmpc::ExperimentConfig small_config() {
  auto cfg = wtmpc::ExperimentConfig::defaults();
  cfg.epsilons = {0.0, 1.0};
  cfg.ns = {3};
  cfg.modes = {wtmpc::NominalMode::wt_simple, wtmpc::NominalMode::robust};
  cfg.open_loop.mc_realizations = 50;
  cfg.open_loop.center_repeats = 2;
  cfg.closed_loop.T = 4;
  cfg.closed_loop.repeats = 2;
  cfg.mpc.gamma_options.drop_trivial_piece = true;
  cfg.workers = 1;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int line_count(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

const std::vector<std::string> kDeterministic{
    "results.csv",  "open_loop_steps.csv", "tube_sections.csv", "closed_loop_trajectories.csv",
    "tradeoff.csv", "config_echo.json"};

bool same_rows(const std::vector<wtmpc::ResultRow>& a, const std::vector<wtmpc::ResultRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.mode != y.mode || x.epsilon != y.epsilon || x.n != y.n || x.repeat != y.repeat) return false;
    if (x.violation_frequency != y.violation_frequency) return false;
    if (!(x.closed_loop_cost == y.closed_loop_cost ||
          (std::isnan(x.closed_loop_cost) && std::isnan(y.closed_loop_cost)))) {
      return false;
    }
    if (x.infeasible_events != y.infeasible_events) return false;
    if (x.per_step_violation != y.per_step_violation) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("defaults describe the double-integrator study") {
    const auto cfg = wtmpc::ExperimentConfig::defaults();
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.system.A == (Eigen::Matrix2d() << 1, 1, 0, 1).finished());
    CHECK(cfg.mpc.N == 10);
    CHECK(cfg.mpc.gamma == 0.2);
    CHECK(wtmpc::contains(cfg.system.X, cfg.system.x0));
  }

  TEST_CASE("configuration round trip through JSON") {
    auto cfg = small_config();
    cfg.root_seed = 77;
    cfg.stacking = wtmpc::StackingMode::with_replacement;
    const auto back = wtmpc::config_from_json(wtmpc::to_json(cfg));
    CHECK(wtmpc::to_json(back) == wtmpc::to_json(cfg));
    CHECK(back.root_seed == 77);
    CHECK(back.epsilons == cfg.epsilons);
    CHECK(back.mpc.gamma_options.drop_trivial_piece);
  }

  TEST_CASE("invalid configurations are rejected") {
    using nlohmann::json;
    CHECK_THROWS_AS(wtmpc::config_from_json(json{{"horizon", 3}}), wtmpc::ConfigInvalid);
    CHECK_THROWS_AS(wtmpc::config_from_json(json{{"mpc", {{"gamma", 1.5}}}}), wtmpc::ConfigInvalid);
    CHECK_THROWS_AS(wtmpc::config_from_json(json{{"sweep", {{"epsilons", {-0.1}}}}}),
                    wtmpc::ConfigInvalid);
    CHECK_THROWS_AS(wtmpc::config_from_json(json{{"sweep", {{"modes", {"tight"}}}}}),
                    wtmpc::ConfigInvalid);
    CHECK_THROWS_AS(wtmpc::config_from_json(json{{"system", {{"x0", {1, 2, 3}}}}}),
                    wtmpc::ConfigInvalid);
    CHECK_THROWS_AS(wtmpc::config_from_json(json{{"workers", -1}}), wtmpc::ConfigInvalid);
    CHECK_THROWS_AS(wtmpc::load_config("/nonexistent/cfg.json"), wtmpc::Error);
  }

  TEST_CASE("seeds separate datasets and share evaluation noise") {
    CHECK(wtmpc::dataset_seed(1, 20, 0) != wtmpc::dataset_seed(1, 20, 1));
    CHECK(wtmpc::dataset_seed(1, 20, 0) != wtmpc::dataset_seed(1, 50, 0));
    CHECK(wtmpc::dataset_seed(1, 20, 0) != wtmpc::dataset_seed(2, 20, 0));
    CHECK(wtmpc::evaluation_seed(1, 0, 1) != wtmpc::evaluation_seed(1, 0, 2));
    CHECK(wtmpc::evaluation_seed(1, 3, 2) == wtmpc::evaluation_seed(1, 3, 2));
  }

  TEST_CASE("empty sweep writes header-only tables") {
    auto cfg = small_config();
    cfg.epsilons.clear();
    const auto ctx = wtmpc::make_context(cfg);
    auto table = wtmpc::run_open_loop(ctx);
    CHECK(table.rows.empty());
    const auto dir = fresh_dir("wtmpc_empty_sweep");
    wtmpc::emit_outputs(table, cfg, dir.string());
    for (const char* f : {"results.csv", "open_loop_steps.csv", "tube_sections.csv", "tradeoff.csv"}) {
      CHECK(line_count(slurp(dir / f)) == 1);
    }
    CHECK(slurp(dir / "results.csv").rfind("experiment,mode,epsilon,n,repeat,violation_frequency", 0) == 0);
  }

  TEST_CASE("sweep cardinality and reproducible outputs") {
    const auto cfg = small_config();
    const auto ctx = wtmpc::make_context(cfg);
    auto open = wtmpc::run_open_loop(ctx);
    const auto closed = wtmpc::run_closed_loop(ctx);
    CHECK(open.rows.size() == 2 * 2 * 1 * 2);
    CHECK(closed.rows.size() == 2 * 2 * 1 * 2);
    CHECK(closed.trajectories.size() == closed.rows.size() * 5);
    for (const auto& r : open.rows) {
      CHECK(r.per_step_violation.size() == 10);
      CHECK(r.violation_frequency >= 0.0);
      CHECK(r.violation_frequency <= 1.0);
    }
    for (const auto& r : closed.rows) CHECK(std::isfinite(r.closed_loop_cost));

    auto merged = open;
    merged.rows.insert(merged.rows.end(), closed.rows.begin(), closed.rows.end());
    merged.trajectories = closed.trajectories;
    merged.diagnostics = closed.diagnostics;
    merged.sort();
    const auto a = fresh_dir("wtmpc_repro_a");
    const auto b = fresh_dir("wtmpc_repro_b");
    wtmpc::emit_outputs(merged, cfg, a.string());

    auto again = wtmpc::run_open_loop(ctx);
    const auto closed2 = wtmpc::run_closed_loop(ctx);
    again.rows.insert(again.rows.end(), closed2.rows.begin(), closed2.rows.end());
    again.trajectories = closed2.trajectories;
    again.diagnostics = closed2.diagnostics;
    again.sort();
    wtmpc::emit_outputs(again, cfg, b.string());
    for (const auto& f : kDeterministic) {
      CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    }
    CHECK(line_count(slurp(a / "results.csv")) == 1 + 16);
    // One closed-loop summary per (mode, ε, n).
    CHECK(line_count(slurp(a / "tradeoff.csv")) == 1 + 4);
  }

  TEST_CASE("worker count does not change the results") {
    auto cfg = small_config();
    cfg.modes = {wtmpc::NominalMode::wt_simple};
    const auto serial = wtmpc::run_closed_loop(wtmpc::make_context(cfg));
    cfg.workers = 3;
    const auto parallel = wtmpc::run_closed_loop(wtmpc::make_context(cfg));
    CHECK(same_rows(serial.rows, parallel.rows));
    const auto open_serial = wtmpc::run_open_loop(wtmpc::make_context(small_config()));
    auto pcfg = small_config();
    pcfg.workers = 4;
    CHECK(same_rows(open_serial.rows, wtmpc::run_open_loop(wtmpc::make_context(pcfg)).rows));
  }

  TEST_CASE("noise-free plant never violates") {
    auto cfg = small_config();
    cfg.system.W = wtmpc::Polytoped::origin(2);
    const auto ctx = wtmpc::make_context(cfg);
    for (const auto& r : wtmpc::run_open_loop(ctx).rows) CHECK(r.violation_frequency == 0.0);
    for (const auto& r : wtmpc::run_closed_loop(ctx).rows) CHECK(r.violation_frequency == 0.0);
  }

  TEST_CASE("tube sections nest between the robust and the nominal constraints") {
    const auto& ctx = fixture::study();
    const auto rows = wtmpc::tube_sections(ctx, 0.1, 3, 0);
    CHECK(rows.size() == 9 * 4);
    for (const auto& r : rows) {
      CHECK(r.support_robust <= r.support_X + 1e-9);
      CHECK(r.support_gamma <= r.support_X + 1e-6);
    }
  }

  TEST_CASE("parallel_for covers every index and rethrows") {
    std::vector<int> hit(100, 0);
    wtmpc::parallel_for(100, 4, [&](int i) { hit[static_cast<std::size_t>(i)] += 1; });
    CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
    CHECK_THROWS_AS(wtmpc::parallel_for(10, 3,
                                        [](int i) {
                                          if (i == 7) throw wtmpc::InvalidArgument("seven");
                                        }),
                    wtmpc::InvalidArgument);
    CHECK_NOTHROW(wtmpc::parallel_for(0, 2, [](int) {}));
  }

  TEST_CASE("paired bootstrap") {
    const std::vector<double> a{1, 2, 3, 4, 5, 6};
    const std::vector<double> b{0, 1, 2, 3, 4, 5};
    const auto ci = wtmpc::paired_bootstrap(a, b, 1000, 0.95, 3);
    CHECK(ci.mean == doctest::Approx(1.0));
    CHECK(ci.lower == doctest::Approx(1.0));
    CHECK(ci.upper == doctest::Approx(1.0));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.5, 1.0);
    std::vector<double> x(400), y(400, 0.0);
    for (auto& v : x) v = g(rng);
    const auto c2 = wtmpc::paired_bootstrap(x, y, 2000, 0.95, 5);
    CHECK(c2.lower < c2.mean);
    CHECK(c2.mean < c2.upper);
    CHECK(c2.lower > 0.3);
    CHECK(c2.upper < 0.7);
    CHECK_THROWS_AS(wtmpc::paired_bootstrap(a, {1.0}, 10, 0.95, 1), wtmpc::DimensionMismatch);
  }
}
