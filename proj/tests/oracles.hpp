#pragma once

// Independent reference computations for the tests. None of these call the
// library routine they are used to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "wtmpc/conic.hpp"
#include "wtmpc/geometry.hpp"
#include "wtmpc/harness.hpp"

namespace oracle {

/// Extreme points of a planar point set by gift wrapping, counterclockwise
/// from the lowest-leftmost point. Collinear boundary points are dropped.
inline Eigen::MatrixXd jarvis_hull(const Eigen::MatrixXd& pts, double tol = 1e-9) {
  const Eigen::Index n = pts.cols();
  if (n == 0) return Eigen::MatrixXd(2, 0);
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (pts(1, i) < pts(1, start) - tol ||
        (std::abs(pts(1, i) - pts(1, start)) <= tol && pts(0, i) < pts(0, start))) {
      start = i;
    }
  }
  std::vector<Eigen::Index> hull;
  Eigen::Index cur = start;
  for (Eigen::Index guard = 0; guard <= n; ++guard) {
    hull.push_back(cur);
    Eigen::Index next = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if ((pts.col(j) - pts.col(cur)).norm() <= tol) continue;
      if (next < 0) {
        next = j;
        continue;
      }
      const Eigen::Vector2d a = pts.col(next) - pts.col(cur);
      const Eigen::Vector2d b = pts.col(j) - pts.col(cur);
      const double cross = a.x() * b.y() - a.y() * b.x();
      // Pick the most clockwise candidate; on ties keep the farthest.
      if (cross < -tol * std::max(1.0, a.norm() * b.norm()) ||
          (std::abs(cross) <= tol * std::max(1.0, a.norm() * b.norm()) &&
           b.squaredNorm() > a.squaredNorm())) {
        next = j;
      }
    }
    if (next < 0 || (pts.col(next) - pts.col(start)).norm() <= tol) break;
    cur = next;
  }
  Eigen::MatrixXd out(2, static_cast<Eigen::Index>(hull.size()));
  for (std::size_t k = 0; k < hull.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = pts.col(hull[k]);
  }
  return out;
}

/// All pairwise sums of columns.
inline Eigen::MatrixXd pair_sums(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q) {
  Eigen::MatrixXd out(P.rows(), P.cols() * Q.cols());
  for (Eigen::Index i = 0; i < P.cols(); ++i) {
    for (Eigen::Index j = 0; j < Q.cols(); ++j) out.col(i * Q.cols() + j) = P.col(i) + Q.col(j);
  }
  return out;
}

inline double max_dot(const Eigen::MatrixXd& pts, const Eigen::VectorXd& a) {
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < pts.cols(); ++i) best = std::max(best, a.dot(pts.col(i)));
  return best;
}

/// Corners of the box [lo, hi].
inline Eigen::MatrixXd box_corners(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const auto d = lo.size();
  const Eigen::Index count = Eigen::Index(1) << d;
  Eigen::MatrixXd out(d, count);
  for (Eigen::Index mask = 0; mask < count; ++mask) {
    for (Eigen::Index k = 0; k < d; ++k) out(k, mask) = (mask >> k) & 1 ? hi(k) : lo(k);
  }
  return out;
}

/// Σ_{r} M^r w_r over every combination of the given vertex sets of W.
inline Eigen::MatrixXd tube_vertex_combinations(const Eigen::MatrixXd& AK,
                                                const Eigen::MatrixXd& Wv, int t) {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(AK.rows(), 1);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(AK.rows(), AK.cols());
  for (int r = 0; r < t; ++r) {
    pts = pair_sums(pts, power * Wv);
    power = AK * power;
  }
  return pts;
}

/// Stabilizing DARE solution by the structured doubling algorithm.
inline Eigen::MatrixXd doubling_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const auto d = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd Ak = A;
  Eigen::MatrixXd Gk = B * R.inverse() * B.transpose();
  Eigen::MatrixXd Hk = Q;
  for (int it = 0; it < 200; ++it) {
    const Eigen::MatrixXd W = (I + Gk * Hk).inverse();
    const Eigen::MatrixXd A1 = Ak * W * Ak;
    const Eigen::MatrixXd G1 = Gk + Ak * W * Gk * Ak.transpose();
    const Eigen::MatrixXd H1 = Hk + Ak.transpose() * Hk * W * Ak;
    const double change = (H1 - Hk).norm();
    Ak = A1;
    Gk = G1;
    Hk = H1;
    if (change <= 1e-14 * std::max(1.0, Hk.norm())) break;
  }
  return 0.5 * (Hk + Hk.transpose());
}

/// Moore-Penrose pseudoinverse by complete orthogonal decomposition.
inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& D) {
  return D.completeOrthogonalDecomposition().pseudoInverse();
}

/// min over a τ grid of τ + (1/γ) mean max(0, v − τ).
inline double cvar_grid(const std::vector<double>& v, double gamma, int points = 20001) {
  const double lo = *std::min_element(v.begin(), v.end()) - 1.0;
  const double hi = *std::max_element(v.begin(), v.end()) + 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < points; ++k) {
    const double tau = lo + (hi - lo) * k / (points - 1);
    double excess = 0.0;
    for (double x : v) excess += std::max(0.0, x - tau);
    best = std::min(best, tau + excess / (gamma * static_cast<double>(v.size())));
  }
  return best;
}

/// e_t from e_{k+1} = A_K e_k + w_k, e_0 = 0; `stacked` is [w_{t-1}; ...; w_0].
inline Eigen::VectorXd error_rollout(const Eigen::MatrixXd& AK, const Eigen::VectorXd& stacked,
                                     int t) {
  const auto d = AK.rows();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < t; ++k) e = AK * e + stacked.segment((t - 1 - k) * d, d);
  return e;
}

/// min ½xᵀPx + qᵀx over lo ≤ x ≤ hi by active-set enumeration (P ≻ 0).
inline double box_qp(const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::VectorXd& lo,
                     const Eigen::VectorXd& hi, Eigen::VectorXd* argmin = nullptr) {
  const auto n = q.size();
  long total = 1;
  for (Eigen::Index i = 0; i < n; ++i) total *= 3;
  double best = std::numeric_limits<double>::infinity();
  for (long code = 0; code < total; ++code) {
    long c = code;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int s = static_cast<int>(c % 3);
      c /= 3;
      if (s == 0) x(i) = lo(i);
      if (s == 1) x(i) = hi(i);
      if (s == 2) free.push_back(i);
    }
    if (!free.empty()) {
      const auto f = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd Pff(f, f);
      Eigen::VectorXd rhs(f);
      for (Eigen::Index a = 0; a < f; ++a) {
        rhs(a) = -q(free[a]);
        for (Eigen::Index i = 0; i < n; ++i) {
          if (std::find(free.begin(), free.end(), i) == free.end()) rhs(a) -= P(free[a], i) * x(i);
        }
        for (Eigen::Index b = 0; b < f; ++b) Pff(a, b) = P(free[a], free[b]);
      }
      const Eigen::VectorXd xf = Pff.ldlt().solve(rhs);
      for (Eigen::Index a = 0; a < f; ++a) x(free[a]) = xf(a);
    }
    if (((x - lo).array() < -1e-12).any() || ((hi - x).array() < -1e-12).any()) continue;
    const double val = 0.5 * x.dot(P * x) + q.dot(x);
    if (val < best) {
      best = val;
      if (argmin) *argmin = x;
    }
  }
  return best;
}

/// Nominal MPC whose step constraints are the empirical CVaR rows
///   τ_k + (1/(γ n)) Σ_i u_ik ≤ 0,  u_ik ≥ a_jᵀ(z_k + ê_k^i) + b_j − τ_k,  u_ik ≥ 0,
/// written directly from the CVaR definition. Returns whether it is feasible at x.
inline bool saa_cvar_mpc_feasible(const wtmpc::ExperimentContext& ctx,
                                  const wtmpc::WassersteinTube& tube, const Eigen::VectorXd& x,
                                  const wtmpc::SolveOptions& opts = {}) {
  const auto& sys = ctx.plant.sys;
  const int N = ctx.cfg.mpc.N;
  const int d = sys.state_dim();
  const int m = sys.input_dim();
  const double gamma = ctx.cfg.mpc.gamma;
  const Eigen::MatrixXd& a = ctx.plant.X.F();
  const Eigen::VectorXd b = -ctx.plant.X.g();
  wtmpc::ConicBuilder B;
  const int z = B.add_variables(d * (N + 1));
  const int c = B.add_variables(m * N);
  auto zi = [&](int k, int i) { return z + k * d + i; };
  auto ci = [&](int k, int i) { return c + k * m + i; };
  for (int i = 0; i < d; ++i) B.add_equality({{zi(0, i), 1.0}}, x(i));
  const Eigen::MatrixXd AK = sys.AK();
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < d; ++i) {
      std::vector<std::pair<int, double>> row{{zi(k + 1, i), 1.0}};
      for (int j = 0; j < d; ++j) row.emplace_back(zi(k, j), -AK(i, j));
      for (int j = 0; j < m; ++j) row.emplace_back(ci(k, j), -sys.B()(i, j));
      B.add_equality(row, 0.0);
    }
  }
  // Input tightening U ⊖ K E_k on v_k = K z_k + c_k.
  const Eigen::MatrixXd& FU = ctx.plant.U.F();
  for (int k = 0; k < N; ++k) {
    const wtmpc::Polytoped KE = wtmpc::linear_image(ctx.stack.E_of(k), sys.K());
    for (Eigen::Index r = 0; r < FU.rows(); ++r) {
      const Eigen::RowVectorXd FK = FU.row(r) * sys.K();
      std::vector<std::pair<int, double>> row;
      for (int j = 0; j < d; ++j) row.emplace_back(zi(k, j), FK(j));
      for (int j = 0; j < m; ++j) row.emplace_back(ci(k, j), FU(r, j));
      B.add_less_equal(row, ctx.plant.U.g()(r) - wtmpc::support(KE, FU.row(r).transpose()));
    }
  }
  for (int k = 1; k < N; ++k) {
    const Eigen::MatrixXd& atoms = tube.at(k).center.atoms;
    const int n = static_cast<int>(atoms.cols());
    const int tau = B.add_variables(1);
    const int u = B.add_variables(n);
    std::vector<std::pair<int, double>> budget{{tau, 1.0}};
    for (int i = 0; i < n; ++i) {
      budget.emplace_back(u + i, 1.0 / (gamma * n));
      B.add_nonneg(u + i);
      for (Eigen::Index j = 0; j < a.rows(); ++j) {
        std::vector<std::pair<int, double>> row{{u + i, -1.0}, {tau, -1.0}};
        for (int s = 0; s < d; ++s) row.emplace_back(zi(k, s), a(j, s));
        B.add_less_equal(row, -b(j) - a.row(j).dot(atoms.col(i)));
      }
    }
    B.add_less_equal(budget, 0.0);
  }
  const auto& Zf = ctx.terminal.Zf;
  for (Eigen::Index r = 0; r < Zf.F().rows(); ++r) {
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < d; ++j) row.emplace_back(zi(N, j), Zf.F()(r, j));
    B.add_less_equal(row, Zf.g()(r));
  }
  return wtmpc::feasibility(B.build(), opts);
}

/// Uniform random point in a box.
inline Eigen::VectorXd uniform_in(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * u(rng);
  return x;
}

}  // namespace oracle
