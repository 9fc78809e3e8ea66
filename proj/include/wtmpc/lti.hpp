#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wtmpc/geometry.hpp"

namespace wtmpc {

/// x+ = A x + B u + w with u = K x + c, A_K = A + B K Schur stable, 0 ∈ W.
class LinearSystem {
 public:
  LinearSystem(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd K,
               Polytoped W);

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& K() const { return K_; }
  const Eigen::MatrixXd& AK() const { return AK_; }
  const Polytoped& W() const { return W_; }
  int state_dim() const { return static_cast<int>(A_.rows()); }
  int input_dim() const { return static_cast<int>(B_.cols()); }
  double spectral_radius() const { return rho_; }

 private:
  Eigen::MatrixXd A_, B_, K_, AK_;
  Polytoped W_;
  double rho_ = 0.0;
};

double spectral_radius(const Eigen::MatrixXd& M);

struct RiccatiOptions {
  double tolerance = 1e-12;
  int max_iterations = 100000;
};

/// Stabilizing solution of the discrete algebraic Riccati equation by
/// fixed-point iteration from P = Q.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           const RiccatiOptions& options = {});

/// K = -(R + Bᵀ P B)⁻¹ Bᵀ P A.
Eigen::MatrixXd make_lqr_gain(const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& Q,
                              const Eigen::MatrixXd& R,
                              const RiccatiOptions& options = {});

struct Svd {
  Eigen::MatrixXd U;      // d x d
  Eigen::VectorXd sigma;  // d, descending
  Eigen::MatrixXd V;      // td x d (thin)
};

Svd thin_svd(const Eigen::MatrixXd& D);

/// D_{t-1} = [I, A_K, ..., A_K^{t-1}]  (d x td).
Eigen::MatrixXd stacked_error_matrix(const Eigen::MatrixXd& AK, int t);

/// Stacked error matrices, their SVDs and the robust tube E_0..E_horizon
/// for one system. Index t refers to the error e_t.
struct ErrorStack {
  int horizon = 0;
  std::vector<Eigen::MatrixXd> D;   // D[t-1] = D_{t-1}, t = 1..horizon
  std::vector<Svd> svd;             // svd[t-1] of D_{t-1}
  std::vector<Polytoped> E;         // E[0] = {0}, E[t] = A_K E[t-1] ⊕ W
  std::vector<Polytoped> AK_pow_W;  // A_K^r W, r = 0..horizon

  const Eigen::MatrixXd& D_of(int t) const { return D.at(static_cast<std::size_t>(t - 1)); }
  const Svd& svd_of(int t) const { return svd.at(static_cast<std::size_t>(t - 1)); }
  const Polytoped& E_of(int t) const { return E.at(static_cast<std::size_t>(t)); }
  /// q_t, the number of H-rep rows of E_t.
  int facet_count(int t) const { return static_cast<int>(E_of(t).num_rows()); }
};

ErrorStack error_stack(const LinearSystem& sys, int horizon);

/// ⊕_{r=first}^{last-1} A_K^r W; {0} when the range is empty.
Polytoped partial_tube_sum(const ErrorStack& stack, int first, int last);

// ---------------------------------------------------------------------------
// Noise data

/// SplitMix64 finalizer; child seeds are derived by folding keys into the
/// root seed one at a time: s <- mix(s ^ mix(key + golden)).
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root,
                          std::initializer_list<std::uint64_t> keys);

/// Uniform samples on W as columns. Boxes are sampled coordinate-wise;
/// other polytopes by rejection from their bounding box.
Eigen::MatrixXd sample_uniform(const Polytoped& W, int count,
                               std::mt19937_64& rng);

enum class StackingMode { with_replacement, without_replacement };

/// n stacked trajectories of length t drawn from the pool (columns). Each
/// column is [w_{t-1}; ...; w_0].
Eigen::MatrixXd stack_trajectories(const Eigen::MatrixXd& pool, int n, int t,
                                   std::uint64_t seed,
                                   StackingMode mode = StackingMode::with_replacement);

struct NoiseDataset {
  Eigen::MatrixXd pool;          // d x n0
  Eigen::MatrixXd trajectories;  // (horizon d) x n
  int horizon = 0;
  std::uint64_t rng_seed = 0;

  int state_dim() const { return static_cast<int>(pool.rows()); }
  int count() const { return static_cast<int>(trajectories.cols()); }
  /// ŵ_[t-1] for every trajectory: the last t blocks, (t d) x n.
  Eigen::MatrixXd truncated(int t) const;

  static NoiseDataset draw(const Polytoped& W, int pool_size, int n,
                           int horizon, std::uint64_t seed,
                           StackingMode mode = StackingMode::with_replacement);
  static NoiseDataset from_pool(Eigen::MatrixXd pool, int n, int horizon,
                                std::uint64_t seed, StackingMode mode);
};

/// One row per sample column, header w1..wd.
void write_samples_csv(const std::string& path, const Eigen::MatrixXd& samples);
Eigen::MatrixXd read_samples_csv(const std::string& path);
/// One row per trajectory column with t d entries, header w<k>_<i> for time k.
void write_trajectories_csv(const std::string& path,
                            const Eigen::MatrixXd& trajectories, int state_dim);
Eigen::MatrixXd read_trajectories_csv(const std::string& path);

// ---------------------------------------------------------------------------
// Closed loop

struct ControlDecision {
  Eigen::VectorXd c;
  std::string status = "optimal";
  bool fallback = false;
  double objective = 0.0;
  double solve_time = 0.0;
};

class Controller {
 public:
  virtual ~Controller() = default;
  /// Feedforward term c_t for the measured state x_t. Throws Infeasible when
  /// no admissible input exists.
  virtual ControlDecision control(int t, const Eigen::VectorXd& x) = 0;
};

struct StageWeights {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
};

struct TrajectoryLog {
  Eigen::MatrixXd x;  // d x (T+1)
  Eigen::MatrixXd u;  // m x T
  Eigen::MatrixXd c;  // m x T
  Eigen::MatrixXd w;  // d x T, the noise actually injected
  std::vector<ControlDecision> decisions;
  Eigen::VectorXd stage_cost;  // ‖x_t‖²_Q + ‖u_t‖²_R, t = 0..T-1

  int steps() const { return static_cast<int>(u.cols()); }
  double total_cost() const { return stage_cost.sum(); }
};

TrajectoryLog simulate_closed_loop(const LinearSystem& sys,
                                   Controller& controller,
                                   const Eigen::VectorXd& x0, int T,
                                   const Eigen::MatrixXd& noise_seq,
                                   const StageWeights& weights);

}  // namespace wtmpc
