#include "wtmpc/lti.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>

namespace wtmpc {

double spectral_radius(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

LinearSystem::LinearSystem(Eigen::MatrixXd A, Eigen::MatrixXd B,
                           Eigen::MatrixXd K, Polytoped W)
    : A_(std::move(A)), B_(std::move(B)), K_(std::move(K)), W_(std::move(W)) {
  const auto d = A_.rows();
  if (A_.cols() != d || B_.rows() != d || K_.rows() != B_.cols() ||
      K_.cols() != d) {
    throw DimensionMismatch("inconsistent A, B, K dimensions");
  }
  if (W_.dim() != d) throw DimensionMismatch("noise support dimension");
  AK_ = A_ + B_ * K_;
  rho_ = wtmpc::spectral_radius(AK_);
  if (!(rho_ < 1.0)) {
    throw NotSchurStable("A + BK has spectral radius " + std::to_string(rho_));
  }
  if (W_.is_empty() || !contains(W_, Eigen::VectorXd::Zero(d), 1e-12)) {
    throw OriginNotInSupport("the origin must belong to W");
  }
}

Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           const RiccatiOptions& options) {
  const auto d = A.rows();
  if (A.cols() != d || B.rows() != d || Q.rows() != d || Q.cols() != d ||
      R.rows() != B.cols() || R.cols() != B.cols()) {
    throw DimensionMismatch("DARE operand dimensions");
  }
  Eigen::MatrixXd P = Q;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd S = R + BtP * B;
    const Eigen::MatrixXd gain = S.ldlt().solve(BtP * A);
    Eigen::MatrixXd next = Q + A.transpose() * P * A - A.transpose() * P * B * gain;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) break;
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (change <= options.tolerance * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      return P;
    }
  }
  throw RiccatiDivergence("Riccati iteration did not converge");
}

Eigen::MatrixXd make_lqr_gain(const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& Q,
                              const Eigen::MatrixXd& R,
                              const RiccatiOptions& options) {
  const Eigen::MatrixXd P = solve_dare(A, B, Q, R, options);
  const Eigen::MatrixXd S = R + B.transpose() * P * B;
  Eigen::MatrixXd K = -S.ldlt().solve(B.transpose() * P * A);
  if (!(spectral_radius(A + B * K) < 1.0)) {
    throw RiccatiDivergence("Riccati solution is not stabilizing");
  }
  return K;
}

Svd thin_svd(const Eigen::MatrixXd& D) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return Svd{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Eigen::MatrixXd stacked_error_matrix(const Eigen::MatrixXd& AK, int t) {
  if (t < 1) throw InvalidArgument("horizon must be >= 1");
  const auto d = AK.rows();
  Eigen::MatrixXd D(d, d * t);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(d, d);
  for (int r = 0; r < t; ++r) {
    D.middleCols(r * d, d) = power;
    power = AK * power;
  }
  return D;
}

ErrorStack error_stack(const LinearSystem& sys, int horizon) {
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  ErrorStack stack;
  stack.horizon = horizon;
  const Eigen::MatrixXd full = stacked_error_matrix(sys.AK(), horizon);
  const int d = sys.state_dim();
  for (int t = 1; t <= horizon; ++t) {
    stack.D.push_back(full.leftCols(t * d));
    stack.svd.push_back(thin_svd(stack.D.back()));
  }
  stack.E.push_back(Polytoped::origin(d));
  for (int t = 1; t <= horizon; ++t) {
    stack.E.push_back(
        minkowski_sum(linear_image(stack.E.back(), sys.AK()), sys.W()));
  }
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(d, d);
  for (int r = 0; r <= horizon; ++r) {
    stack.AK_pow_W.push_back(linear_image(sys.W(), power));
    power = sys.AK() * power;
  }
  return stack;
}

Polytoped partial_tube_sum(const ErrorStack& stack, int first, int last) {
  const int d = stack.E.front().dim();
  Polytoped sum = Polytoped::origin(d);
  for (int r = first; r < last; ++r) {
    sum = minkowski_sum(sum, stack.AK_pow_W.at(static_cast<std::size_t>(r)));
  }
  return sum;
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root,
                          std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = mix_seed(root);
  for (std::uint64_t k : keys) s = mix_seed(s ^ mix_seed(k));
  return s;
}

Eigen::MatrixXd sample_uniform(const Polytoped& W, int count,
                               std::mt19937_64& rng) {
  const int d = W.dim();
  Eigen::MatrixXd out(d, count);
  const auto [lo, hi] = bounding_box(W);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool box = is_axis_aligned_box(W);
  for (int j = 0; j < count; ++j) {
    for (int attempt = 0;; ++attempt) {
      Eigen::VectorXd x(d);
      for (int i = 0; i < d; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
      if (box || contains(W, x, 0.0)) {
        out.col(j) = x;
        break;
      }
      if (attempt > 1000000) throw InvalidArgument("rejection sampling stalled");
    }
  }
  return out;
}

Eigen::MatrixXd stack_trajectories(const Eigen::MatrixXd& pool, int n, int t,
                                   std::uint64_t seed, StackingMode mode) {
  if (pool.cols() == 0) throw EmptyPool("noise pool is empty");
  if (n < 0 || t < 1) throw InvalidArgument("need n >= 0 and t >= 1");
  const auto d = pool.rows();
  const auto n0 = pool.cols();
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd out(d * t, n);
  if (mode == StackingMode::with_replacement) {
    std::uniform_int_distribution<Eigen::Index> pick(0, n0 - 1);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < t; ++k) out.block(k * d, i, d, 1) = pool.col(pick(rng));
    }
    return out;
  }
  if (static_cast<Eigen::Index>(n) * t > n0) {
    throw InvalidArgument("sampling without replacement needs n t <= pool size");
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n0));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::size_t next = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < t; ++k) out.block(k * d, i, d, 1) = pool.col(perm[next++]);
  }
  return out;
}

Eigen::MatrixXd NoiseDataset::truncated(int t) const {
  if (t < 1 || t > horizon) throw InvalidArgument("trajectory length out of range");
  const int d = state_dim();
  return trajectories.bottomRows(t * d);
}

NoiseDataset NoiseDataset::from_pool(Eigen::MatrixXd pool, int n, int horizon,
                                     std::uint64_t seed, StackingMode mode) {
  NoiseDataset data;
  data.trajectories = stack_trajectories(pool, n, horizon, mix_seed(seed), mode);
  data.pool = std::move(pool);
  data.horizon = horizon;
  data.rng_seed = seed;
  return data;
}

NoiseDataset NoiseDataset::draw(const Polytoped& W, int pool_size, int n,
                                int horizon, std::uint64_t seed,
                                StackingMode mode) {
  std::mt19937_64 rng(seed);
  return from_pool(sample_uniform(W, pool_size, rng), n, horizon, seed, mode);
}

namespace {

void write_rows(const std::string& path, const std::vector<std::string>& header,
                const Eigen::MatrixXd& columns_as_rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (std::size_t k = 0; k < header.size(); ++k) {
    out << (k ? "," : "") << header[k];
  }
  out << '\n';
  out.precision(17);
  for (Eigen::Index j = 0; j < columns_as_rows.cols(); ++j) {
    for (Eigen::Index i = 0; i < columns_as_rows.rows(); ++i) {
      out << (i ? "," : "") << columns_as_rows(i, j);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

Eigen::MatrixXd read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + " is empty");
  const auto width = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Eigen::Index count = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("bad number '" + cell + "' in " + path);
      }
      ++count;
    }
    if (count != width) throw IoError("ragged row in " + path);
    ++rows;
  }
  Eigen::MatrixXd out(width, rows);
  for (Eigen::Index j = 0; j < rows; ++j) {
    for (Eigen::Index i = 0; i < width; ++i) {
      out(i, j) = values[static_cast<std::size_t>(j * width + i)];
    }
  }
  return out;
}

}  // namespace

void write_samples_csv(const std::string& path, const Eigen::MatrixXd& samples) {
  std::vector<std::string> header;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) header.push_back("w" + std::to_string(i + 1));
  write_rows(path, header, samples);
}

Eigen::MatrixXd read_samples_csv(const std::string& path) { return read_rows(path); }

void write_trajectories_csv(const std::string& path,
                            const Eigen::MatrixXd& trajectories, int state_dim) {
  const auto t = trajectories.rows() / state_dim;
  std::vector<std::string> header;
  for (Eigen::Index k = 0; k < t; ++k) {
    for (int i = 0; i < state_dim; ++i) {
      header.push_back("w" + std::to_string(t - 1 - k) + "_" + std::to_string(i + 1));
    }
  }
  write_rows(path, header, trajectories);
}

Eigen::MatrixXd read_trajectories_csv(const std::string& path) { return read_rows(path); }

TrajectoryLog simulate_closed_loop(const LinearSystem& sys,
                                   Controller& controller,
                                   const Eigen::VectorXd& x0, int T,
                                   const Eigen::MatrixXd& noise_seq,
                                   const StageWeights& weights) {
  const int d = sys.state_dim();
  const int m = sys.input_dim();
  if (T < 0) throw InvalidArgument("negative simulation length");
  if (noise_seq.cols() < T || (T > 0 && noise_seq.rows() != d)) {
    throw DimensionMismatch("noise sequence shorter than T or wrong size");
  }
  TrajectoryLog log;
  log.x.resize(d, T + 1);
  log.u.resize(m, T);
  log.c.resize(m, T);
  log.w = noise_seq.leftCols(T);
  log.stage_cost.resize(T);
  log.x.col(0) = x0;
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd x = log.x.col(t);
    ControlDecision decision;
    try {
      decision = controller.control(t, x);
    } catch (const Infeasible& e) {
      throw ControllerInfeasible(t, e.what());
    }
    const Eigen::VectorXd u = sys.K() * x + decision.c;
    log.c.col(t) = decision.c;
    log.u.col(t) = u;
    log.stage_cost(t) = x.dot(weights.Q * x) + u.dot(weights.R * u);
    log.x.col(t + 1) = sys.A() * x + sys.B() * u + noise_seq.col(t);
    log.decisions.push_back(std::move(decision));
  }
  return log;
}

}  // namespace wtmpc
