#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wtmpc/ambiguity.hpp"
#include "wtmpc/geometry.hpp"
#include "wtmpc/lti.hpp"
#include "wtmpc/mpc.hpp"

namespace wtmpc {

// ---------------------------------------------------------------------------
// Configuration

struct SystemSpec {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  /// LQR gain for (Q, R) when absent.
  std::optional<Eigen::MatrixXd> K;
  Polytoped W;
  Polytoped X;
  Polytoped U;
  Eigen::VectorXd x0;
};

struct OpenLoopSpec {
  int mc_realizations = 10000;
  int center_repeats = 500;
  /// Γ_k cross sections along the rows of X for repeat 0 of every (ε, n).
  bool tube_sections = true;
};

struct ClosedLoopSpec {
  int T = 15;
  int repeats = 100;
  /// Long-format state and input logs per run.
  bool trajectories = true;
};

struct ExperimentConfig {
  SystemSpec system;
  /// Template; mode, ε and n are overridden per sweep cell.
  MpcConfig mpc;
  std::vector<double> epsilons;
  std::vector<int> ns;
  std::vector<NominalMode> modes;
  OpenLoopSpec open_loop;
  ClosedLoopSpec closed_loop;
  std::string output_dir = "results";
  std::uint64_t root_seed = 1;
  /// Worker threads; 0 picks the hardware concurrency.
  int workers = 0;
  StackingMode stacking = StackingMode::without_replacement;
  /// Pool size n₀ = pool_factor · n · N; 1 gives every trajectory fresh samples.
  int pool_factor = 1;

  /// The double-integrator study: A = [[1, 1], [0, 1]], B = [0.5, 1]ᵀ,
  /// W = [−0.15, 0.15]², X = [−10, 2] × [−2, 2], U = [−1, 1], x0 = (−5, −2),
  /// Q = I, R = 0.1, N = 10, γ = 0.2.
  static ExperimentConfig defaults();
  /// Throws ConfigInvalid.
  void validate() const;
};

/// Missing keys keep their default values. Polytopes are given as
/// {"lo": [...], "hi": [...]}, {"F": [[...]], "g": [...]} or
/// {"vertices": [[...]]}. Throws ConfigInvalid.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

// ---------------------------------------------------------------------------
// Experiment context

/// Objects shared by every sweep cell; immutable once built.
struct ExperimentContext {
  ExperimentConfig cfg;
  ConstrainedSystem plant;
  ErrorStack stack;
  TerminalSet terminal;
};

ExperimentContext make_context(const ExperimentConfig& cfg);

/// Seed of the noise dataset of (n, repeat); shared across ε and modes.
std::uint64_t dataset_seed(std::uint64_t root, int n, int repeat);
/// Seed of the evaluation noise of a repeat; shared across ε, n and modes.
std::uint64_t evaluation_seed(std::uint64_t root, int repeat, std::uint64_t stream);

NoiseDataset make_dataset(const ExperimentContext& ctx, int n, int repeat);

/// MpcConfig of one sweep cell.
MpcConfig cell_config(const ExperimentContext& ctx, NominalMode mode, double epsilon, int n);

// ---------------------------------------------------------------------------
// Results

struct ResultRow {
  std::string experiment;  // "open_loop" or "closed_loop"
  NominalMode mode = NominalMode::wt_simple;
  double epsilon = 0.0;
  int n = 0;
  int repeat = 0;
  double violation_frequency = 0.0;
  double closed_loop_cost = 0.0;  // realized cost, closed loop only
  int infeasible_events = 0;
  double mean_solve_time = 0.0;
  std::vector<double> per_step_violation;  // open loop, k = 1..N
};

struct TubeSectionRow {
  double epsilon = 0.0;
  int n = 0;
  int k = 0;
  int row = 0;
  Eigen::VectorXd direction;
  double support_X = 0.0;
  double support_robust = 0.0;  // along the row over X ⊖ E_k
  double support_gamma = 0.0;   // along the row over Γ_k
};

struct DiagnosticRow {
  NominalMode mode = NominalMode::wt_simple;
  double epsilon = 0.0;
  int n = 0;
  int repeat = 0;
  int t = 0;
  std::string status;
  double objective = 0.0;
  double solve_time = 0.0;
  double c_star_0 = 0.0;
  bool fallback = false;
  long plan_id = 0;
};

struct TrajectoryRow {
  NominalMode mode = NominalMode::wt_simple;
  double epsilon = 0.0;
  int n = 0;
  int repeat = 0;
  int t = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;  // empty at t = T
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<TubeSectionRow> sections;
  std::vector<DiagnosticRow> diagnostics;
  std::vector<TrajectoryRow> trajectories;

  void sort();
};

/// Open-loop study: one WT-MPC (or RT-MPC) plan at x0 per cell, rolled out
/// under mc_realizations fresh noise trajectories; a realization violates
/// when any x_k, k = 1..N, leaves X. Throws Infeasible with the cell key when
/// a plan does not exist.
ResultTable run_open_loop(const ExperimentContext& ctx);

/// Closed-loop study over T steps per cell. Violation frequency counts
/// x_t ∉ X for t = 1..T; the cost is Σ_{t<T} ‖x_t‖²_Q + ‖u_t‖²_R along the
/// realized trajectory.
ResultTable run_closed_loop(const ExperimentContext& ctx);

/// One closed-loop run; `log` receives the trajectory when non-null.
ResultRow run_closed_loop_cell(const ExperimentContext& ctx, NominalMode mode, double epsilon,
                               int n, int repeat, std::vector<DiagnosticRow>* diagnostics,
                               TrajectoryLog* log);

/// One open-loop cell.
ResultRow run_open_loop_cell(const ExperimentContext& ctx, NominalMode mode, double epsilon,
                             int n, int repeat);

/// Γ_k cross sections for one dataset.
std::vector<TubeSectionRow> tube_sections(const ExperimentContext& ctx, double epsilon, int n,
                                          int repeat);

/// Writes results.csv, tube_sections.csv, open_loop_steps.csv,
/// closed_loop_trajectories.csv, tradeoff.csv, diagnostics.csv and
/// config_echo.json. All files except diagnostics.csv and timings.csv are
/// deterministic functions of the configuration.
void emit_outputs(const ResultTable& table, const ExperimentConfig& cfg, const std::string& dir);

// ---------------------------------------------------------------------------
// Utilities

/// Runs body(i) for i = 0..count−1 on `workers` threads; results must be
/// written to index-owned slots. Exceptions are rethrown after all workers
/// stop (the first by index wins).
void parallel_for(int count, int workers, const std::function<void(int)>& body);

struct ConfidenceInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap for the mean of (a_i − b_i).
ConfidenceInterval paired_bootstrap(const std::vector<double>& a, const std::vector<double>& b,
                                    int resamples, double level, std::uint64_t seed);

}  // namespace wtmpc
