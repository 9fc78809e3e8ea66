#include "wtmpc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "wtmpc/drcvar.hpp"
#include "wtmpc/geometry_io.hpp"

namespace wtmpc {

namespace {

constexpr std::uint64_t kDatasetKey = 0x64617461;     // "data"
constexpr std::uint64_t kEvaluationKey = 0x6576616c;  // "eval"
constexpr std::uint64_t kOpenLoopStream = 1;
constexpr std::uint64_t kClosedLoopStream = 2;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell_key(NominalMode mode, double epsilon, int n, int repeat) {
  return "mode=" + to_string(mode) + " eps=" + num(epsilon) + " n=" + std::to_string(n) +
         " repeat=" + std::to_string(repeat);
}

struct Cell {
  NominalMode mode;
  double epsilon;
  int n;
  int repeat;
};

std::vector<Cell> sweep_cells(const ExperimentConfig& cfg, int repeats) {
  std::vector<Cell> cells;
  for (auto mode : cfg.modes) {
    for (double eps : cfg.epsilons) {
      for (int n : cfg.ns) {
        for (int r = 0; r < repeats; ++r) cells.push_back({mode, eps, n, r});
      }
    }
  }
  return cells;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

ExperimentContext make_context(const ExperimentConfig& cfg) {
  cfg.validate();
  const SystemSpec& s = cfg.system;
  Eigen::MatrixXd K = s.K ? *s.K : make_lqr_gain(s.A, s.B, cfg.mpc.Q, cfg.mpc.R);
  ExperimentContext ctx{cfg, ConstrainedSystem{LinearSystem(s.A, s.B, K, s.W), s.X, s.U},
                        ErrorStack{}, TerminalSet{}};
  ctx.stack = error_stack(ctx.plant.sys, cfg.mpc.N);
  if (cfg.mpc.terminal) {
    ctx.terminal.Zf = *cfg.mpc.terminal;
    ctx.terminal.certificate = certify_terminal_set(ctx.terminal.Zf, ctx.plant, ctx.stack,
                                                    cfg.mpc.N);
  } else {
    ctx.terminal = compute_terminal_set(ctx.plant, ctx.stack, cfg.mpc.N);
  }
  return ctx;
}

std::uint64_t dataset_seed(std::uint64_t root, int n, int repeat) {
  return derive_seed(root, {kDatasetKey, static_cast<std::uint64_t>(n),
                            static_cast<std::uint64_t>(repeat)});
}

std::uint64_t evaluation_seed(std::uint64_t root, int repeat, std::uint64_t stream) {
  return derive_seed(root, {kEvaluationKey, stream, static_cast<std::uint64_t>(repeat)});
}

NoiseDataset make_dataset(const ExperimentContext& ctx, int n, int repeat) {
  const int N = ctx.cfg.mpc.N;
  return NoiseDataset::draw(ctx.plant.sys.W(), ctx.cfg.pool_factor * n * N, n, N,
                            dataset_seed(ctx.cfg.root_seed, n, repeat), ctx.cfg.stacking);
}

MpcConfig cell_config(const ExperimentContext& ctx, NominalMode mode, double epsilon, int n) {
  MpcConfig cfg = ctx.cfg.mpc;
  cfg.mode = mode;
  cfg.epsilon = epsilon;
  cfg.n = n;
  cfg.terminal = ctx.terminal.Zf;
  return cfg;
}

void ResultTable::sort() {
  auto key = [](const auto& r) {
    return std::make_tuple(static_cast<int>(r.mode), r.epsilon, r.n, r.repeat);
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const ResultRow& a, const ResultRow& b) {
    return std::make_tuple(a.experiment, key(a)) < std::make_tuple(b.experiment, key(b));
  });
  std::stable_sort(sections.begin(), sections.end(),
                   [](const TubeSectionRow& a, const TubeSectionRow& b) {
                     return std::make_tuple(a.epsilon, a.n, a.k, a.row) <
                            std::make_tuple(b.epsilon, b.n, b.k, b.row);
                   });
  std::stable_sort(diagnostics.begin(), diagnostics.end(),
                   [&](const DiagnosticRow& a, const DiagnosticRow& b) {
                     return std::make_tuple(key(a), a.t) < std::make_tuple(key(b), b.t);
                   });
  std::stable_sort(trajectories.begin(), trajectories.end(),
                   [&](const TrajectoryRow& a, const TrajectoryRow& b) {
                     return std::make_tuple(key(a), a.t) < std::make_tuple(key(b), b.t);
                   });
}

ResultRow run_open_loop_cell(const ExperimentContext& ctx, NominalMode mode, double epsilon,
                             int n, int repeat) {
  const ExperimentConfig& cfg = ctx.cfg;
  const int N = cfg.mpc.N;
  const int d = ctx.plant.sys.state_dim();
  const NoiseDataset data = make_dataset(ctx, n, repeat);
  const WassersteinTube tube = propagate_tube(ctx.stack, data, epsilon, N);
  const MpcConfig mcfg = cell_config(ctx, mode, epsilon, n);
  const MpcProblem problem =
      build_problem(ctx.plant, ctx.stack, tube, ctx.terminal.Zf, mcfg, cfg.system.x0);
  const OpenLoopPlan plan = solve_problem(problem, mcfg.solve_options, mcfg.accept_residual);
  if (!plan.usable) {
    throw Infeasible("open-loop plan unavailable (" + to_string(plan.status) + ") at " +
                     cell_key(mode, epsilon, n, repeat));
  }

  // Same evaluation noise for every mode, ε and n of a repeat.
  std::mt19937_64 rng(evaluation_seed(cfg.root_seed, repeat, kOpenLoopStream));
  const int M = cfg.open_loop.mc_realizations;
  const Eigen::MatrixXd& AK = ctx.plant.sys.AK();
  std::vector<long> step_hits(static_cast<std::size_t>(N), 0);
  long any_hits = 0;
  Eigen::VectorXd e(d);
  for (int r = 0; r < M; ++r) {
    const Eigen::MatrixXd w = sample_uniform(ctx.plant.sys.W(), N, rng);
    e.setZero();
    bool violated = false;
    for (int k = 1; k <= N; ++k) {
      e = AK * e + w.col(k - 1);
      if (!contains(ctx.plant.X, Eigen::VectorXd(plan.z.col(k) + e), 1e-7)) {
        ++step_hits[static_cast<std::size_t>(k - 1)];
        violated = true;
      }
    }
    if (violated) ++any_hits;
  }

  ResultRow row;
  row.experiment = "open_loop";
  row.mode = mode;
  row.epsilon = epsilon;
  row.n = n;
  row.repeat = repeat;
  row.violation_frequency = static_cast<double>(any_hits) / M;
  row.mean_solve_time = plan.solve_time;
  for (long h : step_hits) row.per_step_violation.push_back(static_cast<double>(h) / M);
  return row;
}

std::vector<TubeSectionRow> tube_sections(const ExperimentContext& ctx, double epsilon, int n,
                                          int repeat) {
  const ExperimentConfig& cfg = ctx.cfg;
  const int N = cfg.mpc.N;
  const NoiseDataset data = make_dataset(ctx, n, repeat);
  const WassersteinTube tube = propagate_tube(ctx.stack, data, epsilon, N);
  const PwaLoss loss = PwaLoss::from_polytope(ctx.plant.X);
  const Polytoped& X = ctx.plant.X;
  std::vector<TubeSectionRow> out;
  for (int k = 1; k < N; ++k) {
    const Polytoped tightened = pontryagin_diff(X, ctx.stack.E_of(k));
    const GammaBlock block =
        build_gamma_block(tube.at(k), loss, cfg.mpc.gamma, cfg.mpc.gamma_options);
    for (Eigen::Index r = 0; r < X.F().rows(); ++r) {
      TubeSectionRow s;
      s.epsilon = epsilon;
      s.n = n;
      s.k = k;
      s.row = static_cast<int>(r);
      s.direction = X.F().row(r).transpose();
      s.support_X = support(X, s.direction);
      s.support_robust = tightened.is_empty() ? -std::numeric_limits<double>::infinity()
                                              : support(tightened, s.direction);
      s.support_gamma = gamma_support(block, s.direction, nullptr, cfg.mpc.solve_options);
      out.push_back(std::move(s));
    }
  }
  return out;
}

ResultTable run_open_loop(const ExperimentContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const std::vector<Cell> cells = sweep_cells(cfg, cfg.open_loop.center_repeats);
  ResultTable table;
  table.rows.resize(cells.size());
  parallel_for(static_cast<int>(cells.size()), cfg.workers, [&](int i) {
    const Cell& c = cells[static_cast<std::size_t>(i)];
    table.rows[static_cast<std::size_t>(i)] =
        run_open_loop_cell(ctx, c.mode, c.epsilon, c.n, c.repeat);
  });
  if (cfg.open_loop.tube_sections && cfg.open_loop.center_repeats > 0) {
    std::vector<std::pair<double, int>> keys;
    for (double eps : cfg.epsilons) {
      for (int n : cfg.ns) keys.emplace_back(eps, n);
    }
    std::vector<std::vector<TubeSectionRow>> parts(keys.size());
    parallel_for(static_cast<int>(keys.size()), cfg.workers, [&](int i) {
      const auto& [eps, n] = keys[static_cast<std::size_t>(i)];
      parts[static_cast<std::size_t>(i)] = tube_sections(ctx, eps, n, 0);
    });
    for (auto& p : parts) {
      table.sections.insert(table.sections.end(), p.begin(), p.end());
    }
  }
  table.sort();
  return table;
}

ResultRow run_closed_loop_cell(const ExperimentContext& ctx, NominalMode mode, double epsilon,
                               int n, int repeat, std::vector<DiagnosticRow>* diagnostics,
                               TrajectoryLog* log) {
  const ExperimentConfig& cfg = ctx.cfg;
  const int T = cfg.closed_loop.T;
  const NoiseDataset data = make_dataset(ctx, n, repeat);
  const WassersteinTube tube = propagate_tube(ctx.stack, data, epsilon, cfg.mpc.N);
  TubeMpcController controller(ctx.plant, ctx.stack, tube, ctx.terminal.Zf,
                               cell_config(ctx, mode, epsilon, n));
  std::mt19937_64 rng(evaluation_seed(cfg.root_seed, repeat, kClosedLoopStream));
  const Eigen::MatrixXd noise = sample_uniform(ctx.plant.sys.W(), T, rng);

  ResultRow row;
  row.experiment = "closed_loop";
  row.mode = mode;
  row.epsilon = epsilon;
  row.n = n;
  row.repeat = repeat;
  TrajectoryLog result;
  try {
    result = simulate_closed_loop(ctx.plant.sys, controller, cfg.system.x0, T, noise,
                                  StageWeights{cfg.mpc.Q, cfg.mpc.R});
  } catch (const ControllerInfeasible&) {
    // Only modes without a fallback end here; the run is counted and dropped.
    row.infeasible_events = controller.fallback_count() + 1;
    row.violation_frequency = std::numeric_limits<double>::quiet_NaN();
    row.closed_loop_cost = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  int violations = 0;
  for (int t = 1; t <= T; ++t) {
    if (!contains(ctx.plant.X, Eigen::VectorXd(result.x.col(t)), 1e-7)) ++violations;
  }
  row.violation_frequency = static_cast<double>(violations) / T;
  row.closed_loop_cost = result.total_cost();
  row.infeasible_events = controller.fallback_count();
  double total_time = 0.0;
  for (const auto& dec : result.decisions) total_time += dec.solve_time;
  row.mean_solve_time = T > 0 ? total_time / T : 0.0;
  if (diagnostics) {
    long plan_id = 0;
    for (int t = 0; t < T; ++t) {
      const ControlDecision& dec = result.decisions[static_cast<std::size_t>(t)];
      DiagnosticRow dr;
      dr.mode = mode;
      dr.epsilon = epsilon;
      dr.n = n;
      dr.repeat = repeat;
      dr.t = t;
      dr.status = dec.status;
      dr.objective = dec.objective;
      dr.solve_time = dec.solve_time;
      dr.c_star_0 = dec.c.size() > 0 ? dec.c(0) : 0.0;
      dr.fallback = dec.fallback;
      dr.plan_id = dec.fallback ? -1 : plan_id++;
      diagnostics->push_back(dr);
    }
  }
  if (log) *log = std::move(result);
  return row;
}

ResultTable run_closed_loop(const ExperimentContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const std::vector<Cell> cells = sweep_cells(cfg, cfg.closed_loop.repeats);
  const bool keep = cfg.closed_loop.trajectories;
  ResultTable table;
  table.rows.resize(cells.size());
  std::vector<std::vector<DiagnosticRow>> diag(cells.size());
  std::vector<TrajectoryLog> logs(keep ? cells.size() : 0);
  parallel_for(static_cast<int>(cells.size()), cfg.workers, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    const Cell& c = cells[idx];
    table.rows[idx] = run_closed_loop_cell(ctx, c.mode, c.epsilon, c.n, c.repeat, &diag[idx],
                                           keep ? &logs[idx] : nullptr);
  });
  for (std::size_t i = 0; i < cells.size(); ++i) {
    table.diagnostics.insert(table.diagnostics.end(), diag[i].begin(), diag[i].end());
    if (!keep || logs[i].x.cols() == 0) continue;
    const Cell& c = cells[i];
    const TrajectoryLog& log = logs[i];
    for (Eigen::Index t = 0; t < log.x.cols(); ++t) {
      TrajectoryRow tr;
      tr.mode = c.mode;
      tr.epsilon = c.epsilon;
      tr.n = c.n;
      tr.repeat = c.repeat;
      tr.t = static_cast<int>(t);
      tr.x = log.x.col(t);
      if (t < log.u.cols()) tr.u = log.u.col(t);
      table.trajectories.push_back(std::move(tr));
    }
  }
  table.sort();
  return table;
}

void emit_outputs(const ResultTable& table, const ExperimentConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const int d = static_cast<int>(cfg.system.A.rows());
  const int m = static_cast<int>(cfg.system.B.cols());

  {
    const fs::path p = root / "results.csv";
    auto out = open_out(p);
    out << "experiment,mode,epsilon,n,repeat,violation_frequency,closed_loop_cost,"
           "infeasible_events\n";
    for (const auto& r : table.rows) {
      out << r.experiment << ',' << to_string(r.mode) << ',' << num(r.epsilon) << ',' << r.n
          << ',' << r.repeat << ',' << num(r.violation_frequency) << ','
          << num(r.closed_loop_cost) << ',' << r.infeasible_events << '\n';
    }
    close_out(out, p);
  }
  {
    const fs::path p = root / "open_loop_steps.csv";
    auto out = open_out(p);
    out << "mode,epsilon,n,repeat,k,violation_frequency\n";
    for (const auto& r : table.rows) {
      for (std::size_t k = 0; k < r.per_step_violation.size(); ++k) {
        out << to_string(r.mode) << ',' << num(r.epsilon) << ',' << r.n << ',' << r.repeat
            << ',' << k + 1 << ',' << num(r.per_step_violation[k]) << '\n';
      }
    }
    close_out(out, p);
  }
  {
    const fs::path p = root / "tube_sections.csv";
    auto out = open_out(p);
    out << "epsilon,n,k,row";
    for (int i = 1; i <= d; ++i) out << ",a" << i;
    out << ",support_X,support_robust,support_gamma\n";
    for (const auto& s : table.sections) {
      out << num(s.epsilon) << ',' << s.n << ',' << s.k << ',' << s.row;
      for (Eigen::Index i = 0; i < s.direction.size(); ++i) out << ',' << num(s.direction(i));
      out << ',' << num(s.support_X) << ',' << num(s.support_robust) << ','
          << num(s.support_gamma) << '\n';
    }
    close_out(out, p);
  }
  {
    const fs::path p = root / "closed_loop_trajectories.csv";
    auto out = open_out(p);
    out << "mode,epsilon,n,repeat,t";
    for (int i = 1; i <= d; ++i) out << ",x" << i;
    for (int i = 1; i <= m; ++i) out << ",u" << i;
    out << '\n';
    for (const auto& tr : table.trajectories) {
      out << to_string(tr.mode) << ',' << num(tr.epsilon) << ',' << tr.n << ',' << tr.repeat
          << ',' << tr.t;
      for (Eigen::Index i = 0; i < tr.x.size(); ++i) out << ',' << num(tr.x(i));
      for (int i = 0; i < m; ++i) {
        out << ',';
        if (i < tr.u.size()) out << num(tr.u(i));
      }
      out << '\n';
    }
    close_out(out, p);
  }
  {
    // Mean cost and violation per (mode, ε, n) over finished closed-loop runs.
    struct Acc {
      double violation = 0.0, cost = 0.0;
      int runs = 0, infeasible = 0;
    };
    std::map<std::tuple<int, double, int>, Acc> acc;
    for (const auto& r : table.rows) {
      if (r.experiment != "closed_loop") continue;
      Acc& a = acc[{static_cast<int>(r.mode), r.epsilon, r.n}];
      a.infeasible += r.infeasible_events;
      if (std::isnan(r.closed_loop_cost)) continue;
      a.violation += r.violation_frequency;
      a.cost += r.closed_loop_cost;
      ++a.runs;
    }
    const fs::path p = root / "tradeoff.csv";
    auto out = open_out(p);
    out << "mode,epsilon,n,runs,mean_violation_frequency,mean_closed_loop_cost,"
           "infeasible_events\n";
    for (const auto& [key, a] : acc) {
      const auto& [mode, eps, n] = key;
      const double runs = a.runs > 0 ? a.runs : std::numeric_limits<double>::quiet_NaN();
      out << to_string(static_cast<NominalMode>(mode)) << ',' << num(eps) << ',' << n << ','
          << a.runs << ',' << num(a.violation / runs) << ',' << num(a.cost / runs) << ','
          << a.infeasible << '\n';
    }
    close_out(out, p);
  }
  {
    const fs::path p = root / "diagnostics.csv";
    auto out = open_out(p);
    out << "mode,epsilon,n,repeat,t,status,objective,solve_time,c_star_0,fallback,plan_id\n";
    for (const auto& dr : table.diagnostics) {
      out << to_string(dr.mode) << ',' << num(dr.epsilon) << ',' << dr.n << ',' << dr.repeat
          << ',' << dr.t << ',' << dr.status << ',' << num(dr.objective) << ','
          << num(dr.solve_time) << ',' << num(dr.c_star_0) << ',' << (dr.fallback ? 1 : 0)
          << ',' << dr.plan_id << '\n';
    }
    close_out(out, p);
  }
  {
    const fs::path p = root / "timings.csv";
    auto out = open_out(p);
    out << "experiment,mode,epsilon,n,repeat,mean_solve_time\n";
    for (const auto& r : table.rows) {
      out << r.experiment << ',' << to_string(r.mode) << ',' << num(r.epsilon) << ',' << r.n
          << ',' << r.repeat << ',' << num(r.mean_solve_time) << '\n';
    }
    close_out(out, p);
  }
  {
    const fs::path p = root / "config_echo.json";
    nlohmann::json echo = to_json(cfg);
    echo["notes"] = {
        {"closed_loop_cost",
         "realized cost sum_{t=0}^{T-1} x_t'Q x_t + u_t'R u_t along the closed-loop trajectory"},
        {"violation_frequency",
         "open loop: fraction of realizations with x_k outside X for some k in 1..N; "
         "closed loop: fraction of steps t in 1..T with x_t outside X"},
        {"nondeterministic_files", {"diagnostics.csv", "timings.csv"}}};
    auto out = open_out(p);
    out << echo.dump(2) << '\n';
    close_out(out, p);
  }
}

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  if (count <= 0) return;
  int threads = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ConfidenceInterval paired_bootstrap(const std::vector<double>& a, const std::vector<double>& b,
                                    int resamples, double level, std::uint64_t seed) {
  if (a.size() != b.size()) throw DimensionMismatch("paired samples differ in size");
  if (a.empty()) throw EmptyInput("bootstrap of an empty sample");
  if (resamples < 1 || !(level > 0.0 && level < 1.0)) {
    throw InvalidArgument("bootstrap resamples or level out of range");
  }
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  ConfidenceInterval ci;
  ci.mean = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(n);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& mean : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += diff[pick(rng)];
    mean = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 0.5 * (1.0 - level);
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, means.size() - 1);
    return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
  };
  ci.lower = quantile(alpha);
  ci.upper = quantile(1.0 - alpha);
  return ci;
}

}  // namespace wtmpc
