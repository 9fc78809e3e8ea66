#pragma once

// Randomized geometry properties. Each returns the number of failing
// instances out of `instances`; `worst` receives the largest deviation seen.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wtmpc/geometry.hpp"

namespace geometry_properties {

using wtmpc::Polytoped;

constexpr double kExact = 1e-9;

/// (P ⊖ Q) ⊕ Q ⊆ P, checked on vertices and 1000 sampled points.
inline int pontryagin_then_minkowski(int instances, std::uint64_t seed, double* worst) {
  std::mt19937_64 rng(seed);
  int failures = 0;
  *worst = 0.0;
  for (int it = 0; it < instances;) {
    const Polytoped P = fixture::random_shape(rng, 1.5);
    const Polytoped Q = fixture::random_shape(rng, 0.3);
    const Polytoped diff = wtmpc::pontryagin_diff(P, Q);
    if (diff.is_empty()) continue;
    ++it;
    const Polytoped left = wtmpc::minkowski_sum(diff, Q);
    double dev = std::max(0.0, -wtmpc::inclusion_margin(left, P));
    const Eigen::MatrixXd pts = wtmpc::sample_uniform(left, 1000, rng);
    for (Eigen::Index k = 0; k < pts.cols(); ++k) {
      dev = std::max(dev, -wtmpc::membership_margin(P, pts.col(k)));
    }
    *worst = std::max(*worst, dev);
    if (dev > kExact) ++failures;
  }
  return failures;
}

/// h_{P⊕Q}(a) = h_P(a) + h_Q(a), with each side also checked against the
/// brute-force maximum over vertex sums.
inline int support_additivity(int instances, std::uint64_t seed, double* worst) {
  std::mt19937_64 rng(seed);
  int failures = 0;
  *worst = 0.0;
  for (int it = 0; it < instances; ++it) {
    const Polytoped P = fixture::random_shape(rng);
    const Polytoped Q = fixture::random_shape(rng);
    const Polytoped S = wtmpc::minkowski_sum(P, Q);
    double dev = 0.0;
    for (int k = 0; k < 8; ++k) {
      const Eigen::VectorXd a = fixture::random_direction(2, rng);
      const double lhs = wtmpc::support(S, a);
      const double rhs = wtmpc::support(P, a) + wtmpc::support(Q, a);
      const double brute = oracle::max_dot(oracle::pair_sums(P.vertices(), Q.vertices()), a);
      dev = std::max({dev, std::abs(lhs - rhs), std::abs(lhs - brute)});
    }
    *worst = std::max(*worst, dev);
    if (dev > kExact) ++failures;
  }
  return failures;
}

/// M(P ⊕ Q) = MP ⊕ MQ as vertex sets, and both equal the gift-wrapping hull
/// of all mapped vertex sums.
inline int image_distributes(int instances, std::uint64_t seed, double* worst) {
  std::mt19937_64 rng(seed);
  int failures = 0;
  *worst = 0.0;
  for (int it = 0; it < instances;) {
    const Eigen::MatrixXd M = fixture::random_matrix(2, 2, rng);
    if (std::abs(M.determinant()) < 0.2) continue;
    ++it;
    const Polytoped P = fixture::random_shape(rng);
    const Polytoped Q = fixture::random_shape(rng);
    const Polytoped lhs = wtmpc::linear_image(wtmpc::minkowski_sum(P, Q), M);
    const Polytoped rhs =
        wtmpc::minkowski_sum(wtmpc::linear_image(P, M), wtmpc::linear_image(Q, M));
    const Eigen::MatrixXd brute =
        oracle::jarvis_hull(M * oracle::pair_sums(P.vertices(), Q.vertices()));
    const bool ok = wtmpc::same_vertex_set(lhs.vertices(), rhs.vertices(), kExact) &&
                    wtmpc::same_vertex_set(lhs.vertices(), brute, kExact);
    if (!ok) ++failures;
    if (lhs.num_vertices() == rhs.num_vertices()) {
      for (Eigen::Index j = 0; j < lhs.vertices().cols(); ++j) {
        *worst = std::max(
            *worst, (rhs.vertices().colwise() - lhs.vertices().col(j)).colwise().norm().minCoeff());
      }
    } else {
      *worst = std::max(*worst, 1.0);
    }
  }
  return failures;
}

/// hull(hull(V)) = hull(V), and hull(V) matches gift wrapping.
inline int hull_idempotent(int instances, std::uint64_t seed, double* worst) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(3, 40);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int failures = 0;
  *worst = 0.0;
  for (int it = 0; it < instances; ++it) {
    const int k = count(rng);
    Eigen::MatrixXd pts(2, k);
    for (int i = 0; i < k; ++i) pts.col(i) = Eigen::Vector2d(u(rng), u(rng));
    const Polytoped once = Polytoped::from_vertices(pts);
    const Polytoped twice = Polytoped::from_vertices(once.vertices());
    const Eigen::MatrixXd brute = oracle::jarvis_hull(pts);
    const bool ok = wtmpc::same_vertex_set(once.vertices(), twice.vertices(), kExact) &&
                    wtmpc::same_vertex_set(once.vertices(), brute, kExact);
    if (!ok) {
      ++failures;
      *worst = std::max(*worst, 1.0);
    }
  }
  return failures;
}

/// x ∈ P ⊖ Q agrees with x + v ∈ P for every vertex v of Q on random x
/// outside a 1e-9 boundary band.
inline int pontryagin_membership(int instances, std::uint64_t seed, double* worst) {
  std::mt19937_64 rng(seed);
  int failures = 0;
  *worst = 0.0;
  for (int it = 0; it < instances; ++it) {
    const Polytoped P = fixture::random_shape(rng, 1.5);
    const Polytoped Q = fixture::random_shape(rng, 0.3);
    const Polytoped diff = wtmpc::pontryagin_diff(P, Q);
    const auto [lo, hi] = wtmpc::bounding_box(P);
    bool ok = true;
    for (int k = 0; k < 50; ++k) {
      const Eigen::VectorXd x = oracle::uniform_in(lo, hi, rng);
      double margin = std::numeric_limits<double>::infinity();
      for (Eigen::Index v = 0; v < Q.vertices().cols(); ++v) {
        margin = std::min(margin,
                          wtmpc::membership_margin(P, Eigen::VectorXd(x + Q.vertices().col(v))));
      }
      if (std::abs(margin) <= kExact) continue;
      const bool inside = diff.is_empty() ? false : wtmpc::contains(diff, x, 0.0);
      if (inside != (margin > 0.0)) ok = false;
    }
    if (!ok) {
      ++failures;
      *worst = 1.0;
    }
  }
  return failures;
}

}  // namespace geometry_properties
