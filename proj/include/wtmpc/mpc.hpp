#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wtmpc/ambiguity.hpp"
#include "wtmpc/conic.hpp"
#include "wtmpc/drcvar.hpp"
#include "wtmpc/geometry.hpp"
#include "wtmpc/lti.hpp"

namespace wtmpc {

/// Plant with its state and input constraint polytopes.
struct ConstrainedSystem {
  LinearSystem sys;
  Polytoped X;
  Polytoped U;
};

/// Nominal constraint sets Z_k: Γ_k, the tightened intersection, or X ⊖ E_k.
enum class NominalMode { wt_simple, wt_tightened, robust };

std::string to_string(NominalMode mode);
/// Throws ConfigInvalid for unknown names.
NominalMode parse_mode(const std::string& name);

struct MpcConfig {
  int N = 10;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  double gamma = 0.2;
  double epsilon = 0.0;
  int n = 20;
  NominalMode mode = NominalMode::wt_simple;
  /// Computed by compute_terminal_set when absent.
  std::optional<Polytoped> terminal;
  std::uint64_t seed = 0;
  GammaOptions gamma_options;
  SolveOptions solve_options;
  /// iteration_limit outcomes with a primal residual below this are used.
  double accept_residual = 1e-6;
  /// wt_simple only: apply u = K x when the problem is infeasible.
  bool feedback_fallback = true;

  /// Throws ConfigInvalid when a field is out of range.
  void validate(int state_dim, int input_dim) const;
};

struct TerminalCertificate {
  bool input_ok = false;       // K Zf ⊆ U ⊖ K E_N
  bool invariance_ok = false;  // A_K Zf ⊕ A_K^N W ⊆ Zf
  bool inclusion_ok = false;   // Zf ⊆ X ⊖ E_N
  double input_margin = 0.0;
  double invariance_margin = 0.0;
  double inclusion_margin = 0.0;
  int iterations = 0;

  bool ok() const { return input_ok && invariance_ok && inclusion_ok; }
};

struct TerminalSet {
  Polytoped Zf;
  TerminalCertificate certificate;
};

/// Vertex checks of the three terminal conditions; passes with margins
/// ≥ −tol.
TerminalCertificate certify_terminal_set(const Polytoped& Zf, const ConstrainedSystem& plant,
                                         const ErrorStack& stack, int N, double tol = 1e-9);

/// Maximal robust positively invariant set of z⁺ = A_K z + w′, w′ ∈ A_K^N W,
/// inside {z : K z ∈ U ⊖ K E_N} ∩ (X ⊖ E_N). Throws NoInvariantSet when the
/// set is empty or the recursion has not converged after `max_iterations`.
TerminalSet compute_terminal_set(const ConstrainedSystem& plant, const ErrorStack& stack,
                                 int N, int max_iterations = 500);

/// Variable and row layout of an assembled problem.
struct MpcLayout {
  int N = 0;
  int d = 0;
  int m = 0;
  int z = 0;  // z_k at z + k d, k = 0..N
  int v = 0;  // v_k at v + k m, k = 0..N−1
  int c = 0;  // c_k at c + k m
  int initial_rows = 0;  // equality rows initial_rows..+d pin z_0 = x_t
  /// blocks[k-1][p-1] holds the aux variables of the block for z_k.
  std::vector<std::vector<GammaVars>> blocks;
};

/// The assembled conic program. Only the initial-state right-hand side
/// changes between receding-horizon steps.
struct MpcProblem {
  ConicProgram program;
  MpcLayout layout;
  NominalMode mode = NominalMode::robust;
  /// Γ data per nominal constraint: gamma_blocks[k-1][p-1] for the block on z_k.
  std::vector<std::vector<GammaBlock>> gamma_blocks;

  void set_initial_state(const Eigen::VectorXd& x);
};

/// Γ or tightened blocks per nominal step k = 1..N−1 for the configured
/// mode; empty for robust.
std::vector<std::vector<GammaBlock>> nominal_blocks(const ErrorStack& stack,
                                                    const WassersteinTube& tube,
                                                    const PwaLoss& loss, const MpcConfig& cfg);

/// Throws ConfigInvalid on an empty input tightening or inconsistent sizes.
MpcProblem build_problem(const ConstrainedSystem& plant, const ErrorStack& stack,
                         const WassersteinTube& tube, const Polytoped& Zf,
                         const MpcConfig& cfg, const Eigen::VectorXd& x_t);

struct OpenLoopPlan {
  SolveStatus status = SolveStatus::numerical_error;
  bool usable = false;
  Eigen::MatrixXd z;  // d x (N+1)
  Eigen::MatrixXd v;  // m x N
  Eigen::MatrixXd c;  // m x N
  Eigen::VectorXd primal;
  double objective = 0.0;
  double residual = 0.0;
  double solve_time = 0.0;
};

/// Solves and unpacks. `usable` holds for optimal outcomes and for
/// iteration_limit outcomes with residual below `accept_residual`.
OpenLoopPlan solve_problem(const MpcProblem& problem, const SolveOptions& options,
                           double accept_residual = 1e-6);

/// Outcome of the shifted-policy check for one disturbance.
struct ShiftCertificate {
  bool ok = true;
  double worst_violation = 0.0;
  std::string failed_check;
};

/// Builds the candidate (c_{1|t}, ..., c_{N−1|t}, 0) at x_{t+1} = z_{1|t} + w
/// and checks it against the time-(t+1) constraints. Tightened blocks
/// (k, p) reuse the aux variables of blocks (k+1, p) from the plan; the last
/// nominal step is checked through X ⊖ E_{N−1}, inputs through U ⊖ K E_k and
/// the terminal state through Zf.
ShiftCertificate verify_shifted_policy(const MpcProblem& problem, const OpenLoopPlan& plan,
                                       const ConstrainedSystem& plant, const ErrorStack& stack,
                                       const Polytoped& Zf, const Eigen::VectorXd& w,
                                       double tol = 1e-6);

/// Receding-horizon controller, built once and reused across steps.
class TubeMpcController final : public Controller {
 public:
  TubeMpcController(const ConstrainedSystem& plant, const ErrorStack& stack,
                    const WassersteinTube& tube, const Polytoped& Zf, MpcConfig cfg);

  ControlDecision control(int t, const Eigen::VectorXd& x) override;

  const MpcProblem& problem() const { return problem_; }
  const OpenLoopPlan& last_plan() const { return last_plan_; }
  int fallback_count() const { return fallbacks_; }

 private:
  MpcConfig cfg_;
  MpcProblem problem_;
  OpenLoopPlan last_plan_;
  int fallbacks_ = 0;
};

}  // namespace wtmpc
