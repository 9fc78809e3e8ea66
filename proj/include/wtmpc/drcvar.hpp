#pragma once

#include <Eigen/Dense>

#include <vector>

#include "wtmpc/ambiguity.hpp"
#include "wtmpc/conic.hpp"
#include "wtmpc/geometry.hpp"
#include "wtmpc/lti.hpp"

namespace wtmpc {

/// loss(x) = max_j a_jᵀx + b_j with one piece per row of `a`.
struct PwaLoss {
  Eigen::MatrixXd a;  // J x d
  Eigen::VectorXd b;  // J

  int pieces() const { return static_cast<int>(a.rows()); }
  int dim() const { return static_cast<int>(a.cols()); }
  double operator()(const Eigen::VectorXd& x) const;

  /// Pieces a_j = F_j, b_j = −g_j so that {loss ≤ 0} = {F x ≤ g}.
  static PwaLoss from_polytope(const Polytoped& X);
};

/// inf_τ τ + (1/γ) mean(max(0, v − τ)) evaluated exactly over the order
/// statistics. Throws EmptyInput or GammaOutOfRange (γ ∉ (0, 1]).
double cvar_empirical(const std::vector<double>& values, double gamma);

/// Smallest γ accepted by the reformulation.
inline constexpr double kMinGamma = 1e-3;

/// Which matrix realizes the dual norm in the cone rows. All three give the
/// same norm: compact is Σ Uᵀ (d x d), transpose is Dᵀ and literal is
/// D⁺((D⁺)ᵀD⁺)⁻¹ built from an explicit pseudoinverse.
enum class DualForm { compact, transpose, literal };

struct GammaOptions {
  DualForm dual_form = DualForm::compact;
  /// Drops ζ_{i,J+1} and its cone. The piece has α = 0, so ζ = 0 is always
  /// optimal there and the feasible z-set is unchanged.
  bool drop_trivial_piece = false;
  /// Tolerance for the centers-in-support precondition.
  double support_tol = 1e-7;
};

/// Data of one Γ block: the pieces ℓ_j(x, τ) = α_jᵀx + β_j(τ) for
/// j = 1..J+1 with β_j(τ) = beta_const_j + beta_tau_j τ, the center atoms ê_i,
/// slacks g − F ê_i, the support rows F and the dual factor G.
struct GammaBlock {
  int t = 0;
  int n = 0;
  int J = 0;
  int q = 0;
  double epsilon = 0.0;
  double gamma = 0.0;
  Eigen::MatrixXd alpha;       // d x (J+1)
  Eigen::VectorXd beta_const;  // J+1
  Eigen::VectorXd beta_tau;    // J+1
  Eigen::MatrixXd centers;     // d x n
  Eigen::MatrixXd slack;       // q x n
  Eigen::MatrixXd F;           // q x d
  Eigen::MatrixXd G;           // r x d
  Eigen::VectorXd offsets;     // J+1, zero unless tightened
  bool drop_trivial_piece = false;

  int dim() const { return static_cast<int>(alpha.rows()); }
  /// Pieces that carry ζ variables and cones.
  int active_pieces() const { return drop_trivial_piece ? J : J + 1; }
  int affine_rows() const { return n * (J + 1); }
  int cone_count() const { return n * active_pieces(); }
  int budget_rows() const { return 1; }
  int zeta_count() const { return n * active_pieces() * q; }
};

GammaBlock build_gamma_block(const TubeStep& step, const PwaLoss& loss, double gamma,
                             const GammaOptions& options = {});

/// Nominal state argument of an appended block: decision variables when
/// `vars` is nonempty, otherwise the fixed point `value`.
struct StateRef {
  std::vector<int> vars;
  Eigen::VectorXd value;

  static StateRef variables(std::vector<int> v) { return StateRef{std::move(v), {}}; }
  static StateRef fixed(Eigen::VectorXd x) { return StateRef{{}, std::move(x)}; }
};

/// Variable indices of one appended block.
struct GammaVars {
  int tau = -1;
  int lambda = -1;
  int s = -1;     // s_i at s + i
  int zeta = -1;  // ζ_ij at zeta + (i * active_pieces + j) * q
};

/// Adds τ, λ, s, ζ and the block's rows to `builder`. The budget row
/// λεn + Σ s_i ≤ 0 is added when `with_budget` holds.
GammaVars append_gamma_block(ConicBuilder& builder, const GammaBlock& block,
                             const StateRef& z, bool with_budget = true);

/// Whether z ∈ Γ_t, decided by a conic feasibility solve.
bool gamma_feasible(const GammaBlock& block, const Eigen::VectorXd& z,
                    const SolveOptions& options = {});

/// sup over the ambiguity set of CVaR_{1−γ}(loss(z + e)), obtained as
/// min λε + (1/n) Σ s_i over the block rows without the budget row.
/// iteration_limit outcomes with a primal residual below `accept_residual`
/// count as solved; any other non-optimal outcome throws SolverFailure.
double worst_case_cvar(const GammaBlock& block, const Eigen::VectorXd& z,
                       const SolveOptions& options = {}, double accept_residual = 1e-6);

/// max over z ∈ Γ_t (∩ `bounds` when given) of cᵀz; the block is evaluated
/// with its own offsets. Returns −inf when infeasible, +inf when unbounded;
/// iteration_limit outcomes are accepted as in worst_case_cvar.
double gamma_support(const GammaBlock& block, const Eigen::VectorXd& c,
                     const Polytoped* bounds = nullptr, const SolveOptions& options = {},
                     double accept_residual = 1e-6);

/// Offset cache for the tightening: support values of A_K^r W along each
/// direction, summed over r on demand. Write-once at construction.
class TighteningOffsets {
 public:
  TighteningOffsets(const ErrorStack& stack, const Eigen::MatrixXd& directions);

  /// Σ_{r=p}^{k−1} h(A_K^r W, direction j); zero when p ≥ k.
  double offset(int p, int k, int j) const;
  Eigen::VectorXd offsets(int p, int k) const;
  int directions() const { return static_cast<int>(per_power_.cols()); }

 private:
  Eigen::MatrixXd per_power_;  // (horizon + 1) x directions
};

struct TightenedSetSpec {
  int k = 0;
  /// blocks[p-1] built on tube step p, offsets h_p(α_j).
  std::vector<GammaBlock> blocks;
};

TightenedSetSpec build_tightened_spec(const ErrorStack& stack, const WassersteinTube& tube,
                                      const PwaLoss& loss, double gamma, int k,
                                      const GammaOptions& options = {});

/// Same as above with a prebuilt offset cache whose directions are the α_j.
TightenedSetSpec build_tightened_spec(const TighteningOffsets& offsets,
                                      const WassersteinTube& tube, const PwaLoss& loss,
                                      double gamma, int k, const GammaOptions& options = {});

}  // namespace wtmpc
