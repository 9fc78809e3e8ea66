#pragma once

// Shared fixtures and hand-rolled random generators for property tests.

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "wtmpc/geometry.hpp"
#include "wtmpc/harness.hpp"

namespace fixture {

/// Context of the double-integrator study; built once per process.
inline const wtmpc::ExperimentContext& study() {
  static const wtmpc::ExperimentContext ctx =
      wtmpc::make_context(wtmpc::ExperimentConfig::defaults());
  return ctx;
}

inline Eigen::Vector2d vec2(double a, double b) { return Eigen::Vector2d(a, b); }

inline Eigen::VectorXd random_direction(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd a(d);
  for (int i = 0; i < d; ++i) a(i) = n(rng);
  return a;
}

/// Random convex polygon: hull of 3..10 points in a box around a center.
inline wtmpc::Polytoped random_polygon(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_int_distribution<int> count(3, 10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const int k = count(rng);
    Eigen::MatrixXd pts(2, k);
    const Eigen::Vector2d center(0.5 * u(rng), 0.5 * u(rng));
    for (int i = 0; i < k; ++i) pts.col(i) = center + scale * Eigen::Vector2d(u(rng), u(rng));
    auto P = wtmpc::Polytoped::from_vertices(pts);
    // Keep full-dimensional samples only.
    if (P.has_hrep() && P.num_vertices() >= 3) return P;
  }
}

/// Random axis-aligned box with half widths in [0.05, 1.5] around the origin
/// shifted by at most `shift`.
inline wtmpc::Polytoped random_box(std::mt19937_64& rng, double shift = 0.3) {
  std::uniform_real_distribution<double> w(0.05, 1.5);
  std::uniform_real_distribution<double> s(-shift, shift);
  const Eigen::Vector2d c(s(rng), s(rng));
  const Eigen::Vector2d h(w(rng), w(rng));
  return wtmpc::Polytoped::box(c - h, c + h);
}

/// Random polygon or box with equal probability.
inline wtmpc::Polytoped random_shape(std::mt19937_64& rng, double scale = 1.0) {
  std::bernoulli_distribution coin(0.5);
  return coin(rng) ? random_polygon(rng, scale) : random_box(rng);
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) M(i, j) = u(rng);
  }
  return M;
}

/// Uniform samples from the convex hull of the vertices (rejection from the box).
inline Eigen::VectorXd sample_in(const wtmpc::Polytoped& P, std::mt19937_64& rng) {
  return wtmpc::sample_uniform(P, 1, rng).col(0);
}

}  // namespace fixture
