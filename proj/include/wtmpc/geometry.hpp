#pragma once

// Compact convex polytopes in low dimension (d <= 3 for hull, facet and
// vertex enumeration). All operations are pure; a Polytope never changes
// after construction.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wtmpc/errors.hpp"

namespace wtmpc {

template <typename Scalar>
struct GeometryTolerances {
  /// Absolute tolerance for coincident points, collinearity and tight rows.
  static constexpr Scalar coincidence = Scalar(1e-9);
  /// Default slack for point-in-polytope tests.
  static constexpr Scalar membership = Scalar(1e-7);
};

inline constexpr int kMaxExactDimension = 3;

namespace internal {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Hull of a point set expressed in some k-dimensional coordinate frame.
template <typename Scalar>
struct LocalHull {
  std::vector<int> vertex_ids;  // indices into the input columns
  MatX<Scalar> normals;         // k x m, unit outward normals
};

template <typename Scalar>
bool lex_less(const Eigen::Ref<const VecX<Scalar>>& a,
              const Eigen::Ref<const VecX<Scalar>>& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

/// Removes duplicate columns (infinity-norm distance <= tol), keeping first
/// occurrences.
template <typename Scalar>
MatX<Scalar> unique_columns(const MatX<Scalar>& points, Scalar tol) {
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    bool duplicate = false;
    for (Eigen::Index k : kept) {
      if ((points.col(j) - points.col(k)).cwiseAbs().maxCoeff() <= tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(j);
  }
  MatX<Scalar> out(points.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.col(j) = points.col(kept[j]);
  return out;
}

template <typename Scalar>
std::vector<int> lex_order(const MatX<Scalar>& pts) {
  std::vector<int> order(static_cast<std::size_t>(pts.cols()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (lex_less<Scalar>(pts.col(a), pts.col(b))) return true;
    if (lex_less<Scalar>(pts.col(b), pts.col(a))) return false;
    return a < b;
  });
  return order;
}

template <typename Scalar>
LocalHull<Scalar> hull_1d(const MatX<Scalar>& pts) {
  Eigen::Index lo = 0, hi = 0;
  for (Eigen::Index j = 1; j < pts.cols(); ++j) {
    if (pts(0, j) < pts(0, lo)) lo = j;
    if (pts(0, j) > pts(0, hi)) hi = j;
  }
  LocalHull<Scalar> out;
  out.vertex_ids = {static_cast<int>(lo), static_cast<int>(hi)};
  out.normals.resize(1, 2);
  out.normals << Scalar(-1), Scalar(1);
  return out;
}

/// Andrew's monotone chain; vertices returned counter-clockwise starting from
/// the lexicographically smallest point, collinear points dropped.
template <typename Scalar>
LocalHull<Scalar> hull_2d(const MatX<Scalar>& pts, Scalar tol) {
  const std::vector<int> order = lex_order(pts);
  auto cross = [&](int o, int a, int b) {
    const Scalar ax = pts(0, a) - pts(0, o), ay = pts(1, a) - pts(1, o);
    const Scalar bx = pts(0, b) - pts(0, o), by = pts(1, b) - pts(1, o);
    return ax * by - ay * bx;
  };
  auto turn_tol = [&](int o, int a, int b) {
    const Scalar la = (pts.col(a) - pts.col(o)).norm();
    const Scalar lb = (pts.col(b) - pts.col(o)).norm();
    return tol * std::max(Scalar(1), std::max(la, lb));
  };
  std::vector<int> chain(2 * order.size());
  std::size_t k = 0;
  for (int idx : order) {
    while (k >= 2 && cross(chain[k - 2], chain[k - 1], idx) <=
                         turn_tol(chain[k - 2], chain[k - 1], idx)) {
      --k;
    }
    chain[k++] = idx;
  }
  const std::size_t lower = k + 1;
  for (auto it = order.rbegin() + 1; it != order.rend(); ++it) {
    while (k >= lower && cross(chain[k - 2], chain[k - 1], *it) <=
                             turn_tol(chain[k - 2], chain[k - 1], *it)) {
      --k;
    }
    chain[k++] = *it;
  }
  chain.resize(k > 1 ? k - 1 : k);

  LocalHull<Scalar> out;
  out.vertex_ids = chain;
  const auto m = static_cast<Eigen::Index>(chain.size());
  out.normals.resize(2, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& a = pts.col(chain[static_cast<std::size_t>(i)]);
    const auto& b = pts.col(chain[static_cast<std::size_t>((i + 1) % m)]);
    VecX<Scalar> n(2);
    n << b[1] - a[1], a[0] - b[0];
    out.normals.col(i) = n / n.norm();
  }
  return out;
}

/// Incremental 3D hull. Coplanar triangles are merged into facets; vertices
/// are the hull points with at least three independent tight facets.
template <typename Scalar>
LocalHull<Scalar> hull_3d(const MatX<Scalar>& pts, Scalar tol) {
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  const int n = static_cast<int>(pts.cols());
  auto P = [&](int i) -> Vec3 { return pts.col(i).template head<3>(); };

  const std::vector<int> order = lex_order(pts);
  const int i0 = order.front();
  int i1 = -1, i2 = -1, i3 = -1;
  Scalar best = -1;
  for (int j = 0; j < n; ++j) {
    const Scalar dist = (P(j) - P(i0)).norm();
    if (dist > best) best = dist, i1 = j;
  }
  const Vec3 axis = (P(i1) - P(i0)).normalized();
  best = -1;
  for (int j = 0; j < n; ++j) {
    const Vec3 r = P(j) - P(i0);
    const Scalar dist = (r - axis * axis.dot(r)).norm();
    if (dist > best) best = dist, i2 = j;
  }
  const Vec3 plane_n = (P(i1) - P(i0)).cross(P(i2) - P(i0)).normalized();
  best = -1;
  for (int j = 0; j < n; ++j) {
    const Scalar dist = std::abs(plane_n.dot(P(j) - P(i0)));
    if (dist > best) best = dist, i3 = j;
  }
  const Vec3 interior = (P(i0) + P(i1) + P(i2) + P(i3)) / Scalar(4);

  struct Face {
    std::array<int, 3> v;
    Vec3 normal;
    Scalar offset;
    bool alive;
  };
  std::vector<Face> faces;
  auto make_face = [&](int a, int b, int c) {
    Vec3 nrm = (P(b) - P(a)).cross(P(c) - P(a));
    if (nrm.dot(interior - P(a)) > 0) {
      std::swap(b, c);
      nrm = -nrm;
    }
    nrm.normalize();
    faces.push_back(Face{{a, b, c}, nrm, nrm.dot(P(a)), true});
  };
  make_face(i0, i1, i2);
  make_face(i0, i1, i3);
  make_face(i0, i2, i3);
  make_face(i1, i2, i3);

  for (int idx : order) {
    if (idx == i0 || idx == i1 || idx == i2 || idx == i3) continue;
    const Vec3 p = P(idx);
    std::set<std::pair<int, int>> edges;
    std::vector<std::size_t> visible;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && faces[f].normal.dot(p) - faces[f].offset > tol) {
        visible.push_back(f);
      }
    }
    if (visible.empty()) continue;
    for (std::size_t f : visible) {
      faces[f].alive = false;
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) edges.emplace(v[e], v[(e + 1) % 3]);
    }
    for (const auto& [a, b] : edges) {
      if (!edges.count({b, a})) make_face(a, b, idx);
    }
  }

  // Merge coplanar triangles into facets.
  std::vector<Vec3> normals;
  std::vector<Scalar> offsets;
  std::set<int> hull_points;
  for (const Face& f : faces) {
    if (!f.alive) continue;
    for (int v : f.v) hull_points.insert(v);
    bool merged = false;
    for (std::size_t k = 0; k < normals.size(); ++k) {
      if ((normals[k] - f.normal).norm() <= std::sqrt(tol) * Scalar(1e-2) &&
          std::abs(offsets[k] - f.offset) <= std::sqrt(tol) * Scalar(1e-2)) {
        merged = true;
        break;
      }
    }
    if (!merged) {
      normals.push_back(f.normal);
      offsets.push_back(f.offset);
    }
  }

  LocalHull<Scalar> out;
  for (int v : hull_points) {
    MatX<Scalar> tight(3, 0);
    for (std::size_t k = 0; k < normals.size(); ++k) {
      if (std::abs(normals[k].dot(P(v)) - offsets[k]) <= Scalar(10) * tol) {
        tight.conservativeResize(3, tight.cols() + 1);
        tight.col(tight.cols() - 1) = normals[k];
      }
    }
    if (tight.cols() >= 3) {
      Eigen::JacobiSVD<MatX<Scalar>> svd(tight);
      if (svd.singularValues()(2) > Scalar(1e-6)) out.vertex_ids.push_back(v);
    }
  }
  std::sort(out.vertex_ids.begin(), out.vertex_ids.end(), [&](int a, int b) {
    return lex_less<Scalar>(pts.col(a), pts.col(b));
  });
  out.normals.resize(3, static_cast<Eigen::Index>(normals.size()));
  for (std::size_t k = 0; k < normals.size(); ++k) {
    out.normals.col(static_cast<Eigen::Index>(k)) = normals[k];
  }
  return out;
}

/// Extreme points and facets of conv(points), handling lower-dimensional
/// affine hulls by working in an orthonormal frame of the affine span.
template <typename Scalar>
struct HullResult {
  MatX<Scalar> vertices;  // d x nv
  MatX<Scalar> F;         // q x d
  VecX<Scalar> g;         // q
};

template <typename Scalar>
HullResult<Scalar> convex_hull(const MatX<Scalar>& raw_points, Scalar tol) {
  const Eigen::Index d = raw_points.rows();
  if (d > kMaxExactDimension) {
    throw UnsupportedDimension("convex hull requested in dimension " +
                               std::to_string(d));
  }
  const MatX<Scalar> points = unique_columns<Scalar>(raw_points, tol);
  const VecX<Scalar> origin = points.rowwise().mean();
  const MatX<Scalar> centered = points.colwise() - origin;
  const Scalar scale = std::max(Scalar(1), centered.cwiseAbs().maxCoeff());

  Eigen::Index rank = 0;
  MatX<Scalar> U = MatX<Scalar>::Identity(d, d);
  if (points.cols() > 1) {
    Eigen::JacobiSVD<MatX<Scalar>> svd(centered, Eigen::ComputeFullU);
    U = svd.matrixU();
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > tol * scale) ++rank;
    }
  }
  const MatX<Scalar> basis = U.leftCols(rank);
  const MatX<Scalar> complement = U.rightCols(d - rank);

  LocalHull<Scalar> local;
  if (rank == 0) {
    local.vertex_ids = {0};
    local.normals.resize(0, 0);
  } else {
    const MatX<Scalar> coords = basis.transpose() * centered;
    if (rank == 1) {
      local = hull_1d<Scalar>(coords);
    } else if (rank == 2) {
      local = hull_2d<Scalar>(coords, tol);
    } else {
      local = hull_3d<Scalar>(coords, tol);
    }
  }

  HullResult<Scalar> out;
  out.vertices.resize(d, static_cast<Eigen::Index>(local.vertex_ids.size()));
  for (std::size_t j = 0; j < local.vertex_ids.size(); ++j) {
    out.vertices.col(static_cast<Eigen::Index>(j)) =
        points.col(local.vertex_ids[j]);
  }
  const Eigen::Index facet_rows = rank > 0 ? local.normals.cols() : 0;
  const Eigen::Index q = facet_rows + 2 * (d - rank);
  out.F.resize(q, d);
  out.g.resize(q);
  Eigen::Index row = 0;
  for (Eigen::Index k = 0; k < facet_rows; ++k, ++row) {
    const VecX<Scalar> nrm = basis * local.normals.col(k);
    out.F.row(row) = nrm.transpose();
    out.g(row) = (nrm.transpose() * out.vertices).maxCoeff();
  }
  for (Eigen::Index k = 0; k < d - rank; ++k) {
    const VecX<Scalar> u = complement.col(k);
    const auto proj = (u.transpose() * out.vertices).eval();
    out.F.row(row) = u.transpose();
    out.g(row++) = proj.maxCoeff();
    out.F.row(row) = -u.transpose();
    out.g(row++) = -proj.minCoeff();
  }
  return out;
}

/// Returns a nonzero recession direction of {x : F x <= 0} if one exists.
template <typename Scalar>
bool find_recession_direction(const MatX<Scalar>& F, VecX<Scalar>& ray,
                              Scalar tol) {
  const Eigen::Index d = F.cols();
  const Eigen::Index q = F.rows();
  auto is_ray = [&](const VecX<Scalar>& r) {
    return (F * r).maxCoeff() <= tol * F.cwiseAbs().maxCoeff();
  };
  if (q == 0) {
    ray = VecX<Scalar>::Unit(d, 0);
    return true;
  }
  Eigen::FullPivLU<MatX<Scalar>> lu(F);
  lu.setThreshold(tol);
  if (lu.rank() < d) {
    ray = lu.kernel().col(0);
    return true;
  }
  if (d == 1) {
    const VecX<Scalar> plus = VecX<Scalar>::Ones(1);
    if (is_ray(plus)) return ray = plus, true;
    if (is_ray(-plus)) return ray = -plus, true;
    return false;
  }
  std::vector<VecX<Scalar>> candidates;
  if (d == 2) {
    for (Eigen::Index i = 0; i < q; ++i) {
      VecX<Scalar> r(2);
      r << -F(i, 1), F(i, 0);
      if (r.norm() > tol) candidates.push_back(r.normalized());
    }
  } else {
    for (Eigen::Index i = 0; i < q; ++i) {
      for (Eigen::Index j = i + 1; j < q; ++j) {
        const Eigen::Matrix<Scalar, 3, 1> a = F.row(i).transpose();
        const Eigen::Matrix<Scalar, 3, 1> b = F.row(j).transpose();
        const Eigen::Matrix<Scalar, 3, 1> c = a.cross(b);
        if (c.norm() > tol) candidates.push_back(c.normalized());
      }
    }
  }
  for (const auto& r : candidates) {
    if (is_ray(r)) return ray = r, true;
    if (is_ray(-r)) return ray = -r, true;
  }
  return false;
}

/// Vertices of {x : F x <= g} by enumerating all d-subsets of rows.
template <typename Scalar>
MatX<Scalar> enumerate_vertices(const MatX<Scalar>& F, const VecX<Scalar>& g,
                                Scalar tol) {
  const auto d = static_cast<int>(F.cols());
  const auto q = static_cast<int>(F.rows());
  std::vector<VecX<Scalar>> found;
  std::vector<int> idx(static_cast<std::size_t>(d));
  const Scalar slack = tol * std::max(Scalar(1), g.cwiseAbs().maxCoeff());
  auto visit = [&]() {
    MatX<Scalar> M(d, d);
    VecX<Scalar> rhs(d);
    for (int r = 0; r < d; ++r) {
      M.row(r) = F.row(idx[static_cast<std::size_t>(r)]);
      rhs(r) = g(idx[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<MatX<Scalar>> lu(M);
    lu.setThreshold(Scalar(1e-10));
    if (lu.rank() < d) return;
    const VecX<Scalar> x = lu.solve(rhs);
    if (((F * x) - g).maxCoeff() <= slack) found.push_back(x);
  };
  // Lexicographic d-combinations of [0, q).
  if (q < d) return MatX<Scalar>(d, 0);
  for (int r = 0; r < d; ++r) idx[static_cast<std::size_t>(r)] = r;
  while (true) {
    visit();
    int r = d - 1;
    while (r >= 0 && idx[static_cast<std::size_t>(r)] == q - d + r) --r;
    if (r < 0) break;
    ++idx[static_cast<std::size_t>(r)];
    for (int s = r + 1; s < d; ++s) {
      idx[static_cast<std::size_t>(s)] = idx[static_cast<std::size_t>(s - 1)] + 1;
    }
  }
  MatX<Scalar> out(d, static_cast<Eigen::Index>(found.size()));
  for (std::size_t j = 0; j < found.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = found[j];
  }
  return out;
}

}  // namespace internal

/// A compact convex polytope holding an H-representation {x : F x <= g}
/// and/or a V-representation (columns of `vertices()`). For d <= 3 both
/// representations are always available; above that only the one supplied
/// at construction is.
template <typename Scalar_>
class Polytope {
 public:
  using Scalar = Scalar_;
  using Matrix = internal::MatX<Scalar>;
  using Vector = internal::VecX<Scalar>;
  using Tol = GeometryTolerances<Scalar>;

  Polytope() = default;

  static Polytope from_hrep(Matrix F, Vector g) {
    if (F.rows() != g.size()) {
      throw DimensionMismatch("H-rep row count differs from offset count");
    }
    if (F.cols() < 1) throw InvalidArgument("polytope dimension must be >= 1");
    if (!F.allFinite() || !g.allFinite()) {
      throw InvalidArgument("H-rep entries must be finite");
    }
    Polytope p;
    p.dim_ = static_cast<int>(F.cols());
    if (p.dim_ > kMaxExactDimension) {
      p.F_ = std::move(F);
      p.g_ = std::move(g);
      p.has_hrep_ = true;
      return p;
    }
    const Matrix candidates =
        internal::enumerate_vertices<Scalar>(F, g, Tol::coincidence);
    p.F_ = std::move(F);
    p.g_ = std::move(g);
    p.has_hrep_ = true;
    p.has_vrep_ = true;
    if (candidates.cols() == 0) {
      Vector ray;
      Eigen::FullPivLU<Matrix> lu(p.F_);
      lu.setThreshold(Tol::coincidence);
      if (lu.rank() < p.dim_) {
        internal::find_recession_direction<Scalar>(p.F_, ray, Tol::coincidence);
        throw UnboundedDirection("H-rep is not bounded (rank-deficient rows)");
      }
      p.empty_ = true;
      p.vertices_.resize(p.dim_, 0);
      return p;
    }
    Vector ray;
    if (internal::find_recession_direction<Scalar>(p.F_, ray,
                                                   Tol::coincidence)) {
      throw UnboundedDirection("H-rep is unbounded along a recession ray");
    }
    p.vertices_ =
        internal::convex_hull<Scalar>(candidates, Tol::coincidence).vertices;
    return p;
  }

  /// Convex hull of the given points (columns); keeps only extreme points and
  /// builds the facet H-rep with unit-norm rows.
  static Polytope from_vertices(const Matrix& points) {
    if (points.rows() < 1) throw InvalidArgument("dimension must be >= 1");
    if (points.cols() == 0) return empty(static_cast<int>(points.rows()));
    if (!points.allFinite()) throw InvalidArgument("vertices must be finite");
    if (points.rows() > kMaxExactDimension) {
      throw UnsupportedDimension("vertex hull pruning requires d <= 3");
    }
    auto hull = internal::convex_hull<Scalar>(points, Tol::coincidence);
    Polytope p;
    p.dim_ = static_cast<int>(points.rows());
    p.vertices_ = std::move(hull.vertices);
    p.F_ = std::move(hull.F);
    p.g_ = std::move(hull.g);
    p.has_hrep_ = p.has_vrep_ = true;
    return p;
  }

  /// Rebuilds a polytope from stored representations without recomputation.
  /// At least one of the two must be present.
  static Polytope from_representations(int dim, std::optional<Matrix> F,
                                       std::optional<Vector> g,
                                       std::optional<Matrix> vertices,
                                       bool is_empty) {
    Polytope p;
    p.dim_ = dim;
    if (F.has_value() != g.has_value()) {
      throw InvalidArgument("F and g must be given together");
    }
    if (F) {
      if (F->cols() != dim || F->rows() != g->size()) {
        throw DimensionMismatch("stored H-rep does not match dimension");
      }
      p.F_ = std::move(*F);
      p.g_ = std::move(*g);
      p.has_hrep_ = true;
    }
    if (vertices) {
      if (vertices->rows() != dim) {
        throw DimensionMismatch("stored vertices do not match dimension");
      }
      p.vertices_ = std::move(*vertices);
      p.has_vrep_ = true;
    }
    if (!p.has_hrep_ && !p.has_vrep_) {
      throw InvalidArgument("polytope needs an H-rep or a V-rep");
    }
    p.empty_ = is_empty;
    return p;
  }

  static Polytope box(const Vector& lo, const Vector& hi) {
    if (lo.size() != hi.size()) throw DimensionMismatch("box bounds differ");
    const Eigen::Index d = lo.size();
    Matrix F(2 * d, d);
    Vector g(2 * d);
    F.setZero();
    for (Eigen::Index i = 0; i < d; ++i) {
      F(2 * i, i) = Scalar(1);
      g(2 * i) = hi(i);
      F(2 * i + 1, i) = Scalar(-1);
      g(2 * i + 1) = -lo(i);
    }
    return from_hrep(std::move(F), std::move(g));
  }

  static Polytope symmetric_box(const Vector& half_widths) {
    return box(-half_widths, half_widths);
  }

  static Polytope singleton(const Vector& x) {
    return from_vertices(Matrix(x));
  }

  static Polytope origin(int dim) { return singleton(Vector::Zero(dim)); }

  static Polytope empty(int dim) {
    Polytope p;
    p.dim_ = dim;
    p.empty_ = true;
    p.has_vrep_ = true;
    p.vertices_.resize(dim, 0);
    p.has_hrep_ = true;
    p.F_ = Matrix::Zero(1, dim);
    p.g_ = Vector::Constant(1, Scalar(-1));
    return p;
  }

  int dim() const { return dim_; }
  bool is_empty() const { return empty_; }
  bool has_hrep() const { return has_hrep_; }
  bool has_vrep() const { return has_vrep_; }

  const Matrix& F() const {
    require_hrep();
    return F_;
  }
  const Vector& g() const {
    require_hrep();
    return g_;
  }
  const Matrix& vertices() const {
    require_vrep();
    return vertices_;
  }
  Eigen::Index num_rows() const { return has_hrep_ ? F_.rows() : 0; }
  Eigen::Index num_vertices() const { return has_vrep_ ? vertices_.cols() : 0; }

  /// Checks that both representations (when present) describe the same set.
  bool representations_agree(Scalar tol = Tol::membership) const {
    if (!has_hrep_ || !has_vrep_ || empty_) return true;
    if (((F_ * vertices_).colwise() - g_).maxCoeff() > tol) return false;
    if (dim_ > kMaxExactDimension) return true;
    const Matrix from_rows =
        internal::enumerate_vertices<Scalar>(F_, g_, Tol::coincidence);
    for (Eigen::Index j = 0; j < from_rows.cols(); ++j) {
      const Scalar dist =
          (vertices_.colwise() - from_rows.col(j)).colwise().norm().minCoeff();
      // Every vertex of the H-rep set must lie in the stored hull.
      if (dist > tol) {
        const Polytope hull = from_vertices(vertices_);
        if (((hull.F_ * from_rows.col(j)) - hull.g_).maxCoeff() > tol) {
          return false;
        }
      }
    }
    return true;
  }

 private:
  void require_hrep() const {
    if (!has_hrep_) throw UnsupportedDimension("polytope has no H-rep");
  }
  void require_vrep() const {
    if (!has_vrep_) throw UnsupportedDimension("polytope has no V-rep");
  }

  int dim_ = 0;
  bool empty_ = false;
  bool has_hrep_ = false;
  bool has_vrep_ = false;
  Matrix F_;
  Vector g_;
  Matrix vertices_;
};

using Polytoped = Polytope<double>;

/// h_P(a) = sup over P of <a, x>; -inf for the empty set.
template <typename Scalar, typename Derived>
Scalar support(const Polytope<Scalar>& P, const Eigen::MatrixBase<Derived>& a) {
  if (a.size() != P.dim()) throw DimensionMismatch("support direction size");
  if (P.is_empty()) return -std::numeric_limits<Scalar>::infinity();
  if (!P.has_vrep()) {
    throw UnsupportedDimension(
        "support of an H-rep-only polytope requires d <= 3");
  }
  return (a.transpose().template cast<Scalar>() * P.vertices()).maxCoeff();
}

/// Support values for a batch of directions.
template <typename Scalar>
struct SupportFunctionTable {
  std::vector<internal::VecX<Scalar>> directions;
  std::vector<Scalar> values;
};

template <typename Scalar>
SupportFunctionTable<Scalar> support_table(
    const Polytope<Scalar>& P,
    const std::vector<internal::VecX<Scalar>>& directions) {
  SupportFunctionTable<Scalar> table;
  table.directions = directions;
  table.values.reserve(directions.size());
  for (const auto& a : directions) table.values.push_back(support(P, a));
  return table;
}

template <typename Scalar>
Polytope<Scalar> minkowski_sum(const Polytope<Scalar>& P,
                               const Polytope<Scalar>& Q) {
  if (P.dim() != Q.dim()) throw DimensionMismatch("Minkowski sum dimensions");
  if (P.is_empty() || Q.is_empty()) return Polytope<Scalar>::empty(P.dim());
  const auto& VP = P.vertices();
  const auto& VQ = Q.vertices();
  internal::MatX<Scalar> sums(P.dim(), VP.cols() * VQ.cols());
  for (Eigen::Index i = 0; i < VP.cols(); ++i) {
    for (Eigen::Index j = 0; j < VQ.cols(); ++j) {
      sums.col(i * VQ.cols() + j) = VP.col(i) + VQ.col(j);
    }
  }
  return Polytope<Scalar>::from_vertices(sums);
}

/// P ⊖ Q = {x : x + Q ⊆ P}, obtained by shifting every row of P's H-rep by
/// the support of Q along its normal. The result may be empty.
template <typename Scalar>
Polytope<Scalar> pontryagin_diff(const Polytope<Scalar>& P,
                                 const Polytope<Scalar>& Q) {
  if (P.dim() != Q.dim()) throw DimensionMismatch("Pontryagin dimensions");
  const auto& F = P.F();
  internal::VecX<Scalar> g = P.g();
  if (Q.is_empty()) throw InvalidArgument("Pontryagin difference by empty set");
  for (Eigen::Index i = 0; i < F.rows(); ++i) {
    g(i) -= support(Q, F.row(i).transpose());
  }
  return Polytope<Scalar>::from_hrep(F, std::move(g));
}

/// Image {M x : x ∈ P}.
template <typename Scalar, typename Derived>
Polytope<Scalar> linear_image(const Polytope<Scalar>& P,
                              const Eigen::MatrixBase<Derived>& M) {
  if (M.cols() != P.dim()) throw DimensionMismatch("linear image columns");
  const auto rows = static_cast<int>(M.rows());
  if (P.is_empty()) return Polytope<Scalar>::empty(rows);
  return Polytope<Scalar>::from_vertices(M.template cast<Scalar>() *
                                         P.vertices());
}

template <typename Scalar, typename Derived>
bool contains(const Polytope<Scalar>& P, const Eigen::MatrixBase<Derived>& x,
              Scalar tol = GeometryTolerances<Scalar>::membership) {
  if (x.size() != P.dim()) return false;
  if (P.is_empty()) return false;
  return ((P.F() * x.template cast<Scalar>()) - P.g()).maxCoeff() <= tol;
}

/// Smallest slack min_i (g_i - F_i x); negative when x is outside.
template <typename Scalar, typename Derived>
Scalar membership_margin(const Polytope<Scalar>& P,
                         const Eigen::MatrixBase<Derived>& x) {
  if (P.is_empty()) return -std::numeric_limits<Scalar>::infinity();
  return (P.g() - P.F() * x.template cast<Scalar>()).minCoeff();
}

/// True when every vertex of `inner` lies in `outer` (H-rep) within tol.
template <typename Scalar>
bool is_subset(const Polytope<Scalar>& inner, const Polytope<Scalar>& outer,
               Scalar tol = GeometryTolerances<Scalar>::membership) {
  if (inner.is_empty()) return true;
  if (outer.is_empty()) return false;
  const auto& V = inner.vertices();
  return ((outer.F() * V).colwise() - outer.g()).maxCoeff() <= tol;
}

/// Minimum over vertices of `inner` of the membership margin in `outer`.
template <typename Scalar>
Scalar inclusion_margin(const Polytope<Scalar>& inner,
                        const Polytope<Scalar>& outer) {
  if (inner.is_empty()) return std::numeric_limits<Scalar>::infinity();
  if (outer.is_empty()) return -std::numeric_limits<Scalar>::infinity();
  return (-((outer.F() * inner.vertices()).colwise() - outer.g()))
      .minCoeff();
}

/// True when the two vertex sets coincide up to ordering (tolerance tol).
template <typename Scalar>
bool same_vertex_set(const internal::MatX<Scalar>& A,
                     const internal::MatX<Scalar>& B, Scalar tol) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) return false;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    if ((B.colwise() - A.col(j)).colwise().norm().minCoeff() > tol) {
      return false;
    }
  }
  return true;
}

/// Scalar multiple {s x : x ∈ P}.
template <typename Scalar>
Polytope<Scalar> scaled(const Polytope<Scalar>& P, Scalar s) {
  return linear_image(P, internal::MatX<Scalar>::Identity(P.dim(), P.dim()) * s);
}

/// Axis-aligned bounding box as (lower, upper).
template <typename Scalar>
std::pair<internal::VecX<Scalar>, internal::VecX<Scalar>> bounding_box(
    const Polytope<Scalar>& P) {
  const auto& V = P.vertices();
  return {V.rowwise().minCoeff(), V.rowwise().maxCoeff()};
}

/// True when P equals its bounding box.
template <typename Scalar>
bool is_axis_aligned_box(const Polytope<Scalar>& P,
                         Scalar tol = GeometryTolerances<Scalar>::coincidence) {
  if (P.is_empty() || !P.has_vrep()) return false;
  const auto [lo, hi] = bounding_box(P);
  const Polytope<Scalar> bb = Polytope<Scalar>::box(lo, hi);
  return is_subset(bb, P, tol);
}

}  // namespace wtmpc
