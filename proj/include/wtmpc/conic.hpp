#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wtmpc/errors.hpp"

namespace wtmpc {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<double>;

struct ConeBlock {
  enum class Kind { nonneg, soc };
  Kind kind = Kind::nonneg;
  int size = 0;
};

/// minimize ½ xᵀPx + qᵀx + q0
/// subject to A_eq x = b_eq and b_in − A_in x ∈ K_1 × ... × K_r, where the
/// cone blocks partition the rows of A_in in order. For a second-order block
/// of size s on slack (s_0, s_1..s_{s-1}) membership means ‖s_{1:}‖₂ ≤ s_0.
struct ConicProgram {
  int num_vars = 0;
  std::optional<SparseMatrix> P;
  Eigen::VectorXd q;
  double q0 = 0.0;
  SparseMatrix A_eq;
  Eigen::VectorXd b_eq;
  SparseMatrix A_in;
  Eigen::VectorXd b_in;
  std::vector<ConeBlock> cones;

  int num_eq() const { return static_cast<int>(A_eq.rows()); }
  int num_in() const { return static_cast<int>(A_in.rows()); }
  /// Throws MalformedProgram on inconsistent sizes, SOCs smaller than 2,
  /// non-finite data or a non-symmetric P.
  void validate() const;
};

/// Accumulates variables and rows; one shared instance per program.
class ConicBuilder {
 public:
  /// Returns the index of the first new variable.
  int add_variables(int count);
  int num_vars() const { return num_vars_; }

  /// Σ coeffs·x = rhs; returns the row index.
  int add_equality(const std::vector<std::pair<int, double>>& coeffs, double rhs);
  /// Σ coeffs·x ≤ rhs; returns the row index among inequality rows.
  int add_less_equal(const std::vector<std::pair<int, double>>& coeffs, double rhs);
  /// x_i ≥ 0.
  void add_nonneg(int var);
  /// ‖(rhs_k − a_kᵀx)_{k≥1}‖₂ ≤ rhs_0 − a_0ᵀx with rows (a_k, rhs_k).
  void add_soc(const std::vector<std::vector<std::pair<int, double>>>& rows,
               const std::vector<double>& rhs);

  void add_linear_cost(int var, double coeff);
  void add_constant_cost(double c) { q0_ += c; }
  /// Adds ½ x_i P_ij x_j contributions; both triangles must be supplied.
  void add_quadratic_cost(int i, int j, double value);

  int num_eq() const { return eq_rows_; }
  int num_in() const { return in_rows_; }

  ConicProgram build() const;

 private:
  int num_vars_ = 0;
  int eq_rows_ = 0;
  int in_rows_ = 0;
  std::vector<Triplet> eq_, in_, P_;
  std::vector<double> b_eq_, b_in_;
  std::vector<ConeBlock> cones_;
  std::vector<std::pair<int, double>> q_;
  double q0_ = 0.0;
  void push_cone(ConeBlock::Kind kind, int size);
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_error, iteration_limit };

std::string to_string(SolveStatus status);

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_error;
  /// Present iff status is optimal.
  Eigen::VectorXd primal;
  /// Last iterate for iteration_limit outcomes, otherwise empty.
  Eigen::VectorXd candidate;
  double objective_value = 0.0;
  double solve_time = 0.0;
  /// Primal residual of primal (or candidate) in the program's own rows.
  double primal_residual = 0.0;
  int iterations = 0;
  int solver_code = 0;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iterations = 200;
  std::string adapter = "ecos";
  /// Forces the epigraph path even when an adapter handles P natively.
  bool force_epigraph = false;
};

class ConicSolver {
 public:
  virtual ~ConicSolver() = default;
  virtual std::string name() const = 0;
  virtual bool supports_quadratic() const = 0;
  /// Only called with validated programs; P is absent unless
  /// supports_quadratic() returns true.
  virtual SolveResult solve(const ConicProgram& program,
                            const SolveOptions& options) = 0;
};

using SolverFactory = std::function<std::unique_ptr<ConicSolver>()>;

void register_solver(const std::string& name, SolverFactory factory);
/// Throws AdapterUnavailable for unknown names.
std::unique_ptr<ConicSolver> make_solver(const std::string& name);
std::vector<std::string> registered_solvers();

/// Interior-point SOCP adapter backed by ECOS, registered as "ecos".
std::unique_ptr<ConicSolver> make_ecos_solver();

/// Returns an equivalent program without P: one extra variable t (the last
/// one) with objective qᵀx + t + q0 and a single cone ‖(Lx, t − ½)‖₂ ≤ t + ½,
/// where L stacks square roots of the connected blocks of P (LᵀL = P).
ConicProgram epigraph_reformulation(const ConicProgram& program);

/// max(‖A_eq x − b_eq‖∞, worst cone violation of b_in − A_in x).
double primal_residual(const ConicProgram& program, const Eigen::VectorXd& x);

double objective_value(const ConicProgram& program, const Eigen::VectorXd& x);

/// Validates, reformulates P when needed and dispatches to the adapter.
SolveResult solve(const ConicProgram& program, const SolveOptions& options = {});

/// Solves with the objective removed; true iff the status is optimal.
bool feasibility(const ConicProgram& program, const SolveOptions& options = {});

/// Sparse triplet text format; floats are written as hexadecimal literals.
std::string dump_program(const ConicProgram& program);
ConicProgram parse_program(const std::string& text);

}  // namespace wtmpc
