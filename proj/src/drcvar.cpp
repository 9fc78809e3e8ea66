#include "wtmpc/drcvar.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace wtmpc {

double PwaLoss::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw DimensionMismatch("loss argument size");
  return (a * x + b).maxCoeff();
}

PwaLoss PwaLoss::from_polytope(const Polytoped& X) {
  return PwaLoss{X.F(), -X.g()};
}

double cvar_empirical(const std::vector<double>& values, double gamma) {
  if (values.empty()) throw EmptyInput("CVaR of an empty sample");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw GammaOutOfRange("gamma must lie in (0, 1]");
  std::vector<double> v = values;
  std::sort(v.begin(), v.end(), std::greater<>());
  const double n = static_cast<double>(v.size());
  // f(τ) = τ + (1/(γ n)) Σ max(0, v_i − τ) is convex and piecewise linear with
  // kinks at the samples, so its minimum sits at one of them.
  double best = std::numeric_limits<double>::infinity();
  double prefix = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double tau = v[k];
    // Samples strictly above τ are v[0..k-1]; ties contribute zero.
    const double excess = prefix - static_cast<double>(k) * tau;
    best = std::min(best, tau + excess / (gamma * n));
    prefix += v[k];
  }
  return best;
}

GammaBlock build_gamma_block(const TubeStep& step, const PwaLoss& loss, double gamma,
                             const GammaOptions& options) {
  if (!(gamma >= kMinGamma && gamma < 1.0)) {
    throw GammaOutOfRange("gamma must lie in [1e-3, 1)");
  }
  const int d = step.center.dim();
  if (loss.dim() != d) throw DimensionMismatch("loss dimension differs from the tube");
  GammaBlock block;
  block.t = step.t;
  block.n = step.center.count();
  block.J = loss.pieces();
  block.epsilon = step.radius;
  block.gamma = gamma;
  block.drop_trivial_piece = options.drop_trivial_piece;
  block.F = step.support.F();
  block.q = static_cast<int>(block.F.rows());
  block.centers = step.center.atoms;
  block.slack = (-(block.F * block.centers)).colwise() + step.support.g();
  if (block.n > 0 && block.slack.minCoeff() < -options.support_tol) {
    throw CenterOutsideSupport("center atom violates the support rows of E_" +
                               std::to_string(step.t));
  }
  block.alpha = Eigen::MatrixXd::Zero(d, block.J + 1);
  block.beta_const = Eigen::VectorXd::Zero(block.J + 1);
  block.beta_tau = Eigen::VectorXd::Zero(block.J + 1);
  for (int j = 0; j < block.J; ++j) {
    block.alpha.col(j) = loss.a.row(j).transpose() / gamma;
    block.beta_const(j) = loss.b(j) / gamma;
    block.beta_tau(j) = (gamma - 1.0) / gamma;
  }
  block.beta_tau(block.J) = 1.0;
  block.offsets = Eigen::VectorXd::Zero(block.J + 1);
  switch (options.dual_form) {
    case DualForm::compact: block.G = step.cost.dual_factor(); break;
    case DualForm::transpose: block.G = dual_norm_matrix(step.cost.D()); break;
    case DualForm::literal: block.G = literal_dual_norm_matrix(step.cost.D()); break;
  }
  return block;
}

GammaVars append_gamma_block(ConicBuilder& builder, const GammaBlock& block,
                             const StateRef& z, bool with_budget) {
  const int d = block.dim();
  const bool fixed = z.vars.empty();
  if (fixed ? z.value.size() != d : static_cast<int>(z.vars.size()) != d) {
    throw DimensionMismatch("nominal state size differs from the block");
  }
  const int pieces = block.active_pieces();
  GammaVars v;
  v.tau = builder.add_variables(1);
  v.lambda = builder.add_variables(1);
  v.s = builder.add_variables(block.n);
  v.zeta = builder.add_variables(block.n * pieces * block.q);
  builder.add_nonneg(v.lambda);
  for (int k = 0; k < block.n * pieces * block.q; ++k) builder.add_nonneg(v.zeta + k);

  if (with_budget) {
    std::vector<std::pair<int, double>> row{{v.lambda, block.epsilon * block.n}};
    for (int i = 0; i < block.n; ++i) row.emplace_back(v.s + i, 1.0);
    builder.add_less_equal(row, 0.0);
  }

  const Eigen::MatrixXd GFt = block.G * block.F.transpose();  // r x q
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < block.n; ++i) {
    for (int j = 0; j <= block.J; ++j) {
      const Eigen::VectorXd alpha = block.alpha.col(j);
      row.clear();
      double rhs = -block.offsets(j) - alpha.dot(block.centers.col(i)) - block.beta_const(j);
      if (fixed) {
        rhs -= alpha.dot(z.value);
      } else {
        for (int c = 0; c < d; ++c) {
          if (alpha(c) != 0.0) row.emplace_back(z.vars[c], alpha(c));
        }
      }
      row.emplace_back(v.tau, block.beta_tau(j));
      row.emplace_back(v.s + i, -1.0);
      if (j < pieces) {
        const int base = v.zeta + (i * pieces + j) * block.q;
        for (int r = 0; r < block.q; ++r) {
          if (block.slack(r, i) != 0.0) row.emplace_back(base + r, block.slack(r, i));
        }
      }
      builder.add_less_equal(row, rhs);
    }
  }

  // ‖G(Fᵀζ_ij − α_j)‖₂ ≤ λ.
  std::vector<std::vector<std::pair<int, double>>> cone_rows;
  std::vector<double> cone_rhs;
  for (int i = 0; i < block.n; ++i) {
    for (int j = 0; j < pieces; ++j) {
      const int base = v.zeta + (i * pieces + j) * block.q;
      const Eigen::VectorXd Galpha = block.G * block.alpha.col(j);
      cone_rows.assign(1, {{v.lambda, -1.0}});
      cone_rhs.assign(1, 0.0);
      for (Eigen::Index r = 0; r < GFt.rows(); ++r) {
        std::vector<std::pair<int, double>> entries;
        for (int c = 0; c < block.q; ++c) {
          if (GFt(r, c) != 0.0) entries.emplace_back(base + c, -GFt(r, c));
        }
        cone_rows.push_back(std::move(entries));
        cone_rhs.push_back(-Galpha(r));
      }
      builder.add_soc(cone_rows, cone_rhs);
    }
  }
  return v;
}

bool gamma_feasible(const GammaBlock& block, const Eigen::VectorXd& z,
                    const SolveOptions& options) {
  ConicBuilder builder;
  append_gamma_block(builder, block, StateRef::fixed(z), true);
  return feasibility(builder.build(), options);
}

namespace {

bool settled(const SolveResult& r, double accept_residual) {
  return r.status == SolveStatus::optimal ||
         (r.status == SolveStatus::iteration_limit && r.candidate.size() > 0 &&
          r.primal_residual <= accept_residual);
}

}  // namespace

double worst_case_cvar(const GammaBlock& block, const Eigen::VectorXd& z,
                       const SolveOptions& options, double accept_residual) {
  ConicBuilder builder;
  const GammaVars v = append_gamma_block(builder, block, StateRef::fixed(z), false);
  builder.add_linear_cost(v.lambda, block.epsilon);
  for (int i = 0; i < block.n; ++i) builder.add_linear_cost(v.s + i, 1.0 / block.n);
  const SolveResult r = solve(builder.build(), options);
  if (!settled(r, accept_residual)) {
    throw SolverFailure("worst-case CVaR solve ended " + to_string(r.status));
  }
  return r.objective_value;
}

double gamma_support(const GammaBlock& block, const Eigen::VectorXd& c,
                     const Polytoped* bounds, const SolveOptions& options,
                     double accept_residual) {
  const int d = block.dim();
  if (c.size() != d) throw DimensionMismatch("direction size");
  ConicBuilder builder;
  const int z = builder.add_variables(d);
  std::vector<int> zv(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) zv[static_cast<std::size_t>(k)] = z + k;
  append_gamma_block(builder, block, StateRef::variables(zv), true);
  if (bounds) {
    for (Eigen::Index r = 0; r < bounds->F().rows(); ++r) {
      std::vector<std::pair<int, double>> row;
      for (int k = 0; k < d; ++k) row.emplace_back(z + k, bounds->F()(r, k));
      builder.add_less_equal(row, bounds->g()(r));
    }
  }
  for (int k = 0; k < d; ++k) builder.add_linear_cost(z + k, -c(k));
  const SolveResult r = solve(builder.build(), options);
  if (settled(r, accept_residual)) return -r.objective_value;
  switch (r.status) {
    case SolveStatus::infeasible: return -std::numeric_limits<double>::infinity();
    case SolveStatus::unbounded: return std::numeric_limits<double>::infinity();
    default: throw SolverFailure("support solve over Γ ended " + to_string(r.status));
  }
}

TighteningOffsets::TighteningOffsets(const ErrorStack& stack,
                                     const Eigen::MatrixXd& directions) {
  const int powers = static_cast<int>(stack.AK_pow_W.size());
  per_power_.resize(powers, directions.cols());
  for (int r = 0; r < powers; ++r) {
    for (Eigen::Index j = 0; j < directions.cols(); ++j) {
      per_power_(r, j) = support(stack.AK_pow_W[static_cast<std::size_t>(r)],
                                 directions.col(j));
    }
  }
}

double TighteningOffsets::offset(int p, int k, int j) const {
  double total = 0.0;
  for (int r = p; r < k; ++r) total += per_power_(r, j);
  return total;
}

Eigen::VectorXd TighteningOffsets::offsets(int p, int k) const {
  Eigen::VectorXd out(directions());
  for (int j = 0; j < directions(); ++j) out(j) = offset(p, k, j);
  return out;
}

TightenedSetSpec build_tightened_spec(const TighteningOffsets& offsets,
                                      const WassersteinTube& tube, const PwaLoss& loss,
                                      double gamma, int k, const GammaOptions& options) {
  if (k < 1 || k > tube.horizon()) throw InvalidArgument("tightened step out of range");
  if (offsets.directions() != loss.pieces() + 1) {
    throw DimensionMismatch("offset cache directions differ from the loss pieces");
  }
  TightenedSetSpec spec;
  spec.k = k;
  for (int p = 1; p <= k; ++p) {
    GammaBlock block = build_gamma_block(tube.at(p), loss, gamma, options);
    block.offsets = offsets.offsets(p, k);
    spec.blocks.push_back(std::move(block));
  }
  return spec;
}

TightenedSetSpec build_tightened_spec(const ErrorStack& stack, const WassersteinTube& tube,
                                      const PwaLoss& loss, double gamma, int k,
                                      const GammaOptions& options) {
  if (!(gamma >= kMinGamma && gamma < 1.0)) {
    throw GammaOutOfRange("gamma must lie in [1e-3, 1)");
  }
  Eigen::MatrixXd directions = Eigen::MatrixXd::Zero(loss.dim(), loss.pieces() + 1);
  directions.leftCols(loss.pieces()) = loss.a.transpose() / gamma;
  return build_tightened_spec(TighteningOffsets(stack, directions), tube, loss, gamma, k,
                              options);
}

}  // namespace wtmpc
