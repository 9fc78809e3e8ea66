#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "wtmpc/geometry.hpp"
#include "wtmpc/lti.hpp"

namespace wtmpc {

/// Uniform empirical distribution; atoms are columns and each carries 1/n.
struct EmpiricalDistribution {
  Eigen::MatrixXd atoms;

  int count() const { return static_cast<int>(atoms.cols()); }
  int dim() const { return static_cast<int>(atoms.rows()); }
  double weight() const { return 1.0 / static_cast<double>(count()); }
  Eigen::VectorXd mean() const { return atoms.rowwise().mean(); }
};

/// Atoms {M a_i} with unchanged weights.
EmpiricalDistribution pushforward_empirical(const EmpiricalDistribution& P,
                                            const Eigen::MatrixXd& M);

/// c(ξ) = ‖ξ‖₂ or c(ξ) = ‖D⁺ξ‖₂ for a full row-rank D.
class TransportCost {
 public:
  enum class Kind { euclidean, pinv_weighted };

  static TransportCost euclidean(int dim);
  static TransportCost pinv_weighted(const Eigen::MatrixXd& D);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// Empty for the euclidean kind.
  const Eigen::MatrixXd& D() const { return D_; }
  const Svd& svd() const { return svd_; }

  /// sqrt(Σ (u_iᵀξ)² / σ_i²) for pinv_weighted.
  double operator()(const Eigen::VectorXd& xi) const;
  /// ‖G y‖₂ with G the dual factor.
  double dual(const Eigen::VectorXd& y) const;
  /// d x d factor G = Σ Uᵀ with ‖G y‖₂ = ‖Dᵀ y‖₂ (identity for euclidean).
  const Eigen::MatrixXd& dual_factor() const { return G_; }

 private:
  Kind kind_ = Kind::euclidean;
  int dim_ = 0;
  Eigen::MatrixXd D_;
  Svd svd_;
  Eigen::MatrixXd G_;
};

/// ‖D⁺ξ‖₂ evaluated with an explicit pseudoinverse.
double pinv_cost_direct(const Eigen::MatrixXd& D, const Eigen::VectorXd& xi);

/// G = Dᵀ, the matrix whose 2-norm image is the dual of ‖D⁺ ·‖₂.
/// Throws RankDeficient when σ_min(D) < 1e-10 σ_max(D).
Eigen::MatrixXd dual_norm_matrix(const Eigen::MatrixXd& D);

/// D⁺((D⁺)ᵀD⁺)⁻¹ built from an SVD pseudoinverse, for cross-validation.
Eigen::MatrixXd literal_dual_norm_matrix(const Eigen::MatrixXd& D);

/// One step of the tube: the ball of radius ε around the empirical error
/// distribution with the D⁺-weighted cost, supported on E_t.
struct TubeStep {
  int t = 0;
  EmpiricalDistribution center;
  double radius = 0.0;
  TransportCost cost;
  Polytoped support;
};

struct WassersteinTube {
  double radius = 0.0;
  std::vector<TubeStep> steps;  // steps[t-1] for t = 1..N

  int horizon() const { return static_cast<int>(steps.size()); }
  const TubeStep& at(int t) const { return steps.at(static_cast<std::size_t>(t - 1)); }
};

/// Empirical error centers ê_t = D_{t-1} ŵ_[t-1] for t = 1..N.
/// Atoms outside E_t by more than 1e-7 raise CenterOutsideSupport.
WassersteinTube propagate_tube(const ErrorStack& stack, const NoiseDataset& data,
                               double epsilon, int N);

/// max over vertex pairs of E_t of the step's transport cost.
double support_diameter(const TubeStep& step);

/// Writes tube_step_<t>.csv (center atoms as rows) for every step and a
/// tube_manifest.json with ε, t, q_t and σ_i per step.
void write_tube(const WassersteinTube& tube, const std::string& dir);

}  // namespace wtmpc
