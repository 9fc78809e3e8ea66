#include "wtmpc/conic.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

namespace wtmpc {

void ConicProgram::validate() const {
  auto fail = [](const std::string& why) { throw MalformedProgram(why); };
  if (num_vars < 0) fail("negative variable count");
  if (q.size() != num_vars) fail("objective vector size");
  if (!q.allFinite() || !std::isfinite(q0)) fail("objective not finite");
  if (A_eq.cols() != num_vars || A_eq.rows() != b_eq.size()) fail("equality block size");
  if (A_in.cols() != num_vars || A_in.rows() != b_in.size()) fail("cone block size");
  if (!b_eq.allFinite() || !b_in.allFinite()) fail("right-hand side not finite");
  for (const auto* M : {&A_eq, &A_in}) {
    for (Eigen::Index k = 0; k < M->nonZeros(); ++k) {
      if (!std::isfinite(M->valuePtr()[k])) fail("matrix entry not finite");
    }
  }
  long total = 0;
  for (const auto& c : cones) {
    if (c.kind == ConeBlock::Kind::soc && c.size < 2) fail("second-order cone of size < 2");
    if (c.size < 0) fail("negative cone size");
    total += c.size;
  }
  if (total != A_in.rows()) fail("cone sizes do not cover the inequality rows");
  if (P) {
    if (P->rows() != num_vars || P->cols() != num_vars) fail("quadratic term size");
    const SparseMatrix asym = SparseMatrix(P->transpose()) - *P;
    for (Eigen::Index k = 0; k < asym.nonZeros(); ++k) {
      if (std::abs(asym.valuePtr()[k]) > 1e-12) fail("quadratic term not symmetric");
    }
  }
}

int ConicBuilder::add_variables(int count) {
  if (count < 0) throw InvalidArgument("negative variable count");
  const int first = num_vars_;
  num_vars_ += count;
  return first;
}

int ConicBuilder::add_equality(const std::vector<std::pair<int, double>>& coeffs,
                               double rhs) {
  for (const auto& [j, v] : coeffs) eq_.emplace_back(eq_rows_, j, v);
  b_eq_.push_back(rhs);
  return eq_rows_++;
}

void ConicBuilder::push_cone(ConeBlock::Kind kind, int size) {
  if (kind == ConeBlock::Kind::nonneg && !cones_.empty() &&
      cones_.back().kind == ConeBlock::Kind::nonneg) {
    cones_.back().size += size;
  } else {
    cones_.push_back(ConeBlock{kind, size});
  }
}

int ConicBuilder::add_less_equal(const std::vector<std::pair<int, double>>& coeffs,
                                 double rhs) {
  for (const auto& [j, v] : coeffs) in_.emplace_back(in_rows_, j, v);
  b_in_.push_back(rhs);
  push_cone(ConeBlock::Kind::nonneg, 1);
  return in_rows_++;
}

void ConicBuilder::add_nonneg(int var) { add_less_equal({{var, -1.0}}, 0.0); }

void ConicBuilder::add_soc(const std::vector<std::vector<std::pair<int, double>>>& rows,
                           const std::vector<double>& rhs) {
  if (rows.size() != rhs.size() || rows.size() < 2) {
    throw MalformedProgram("second-order cone needs matching rows, size >= 2");
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (const auto& [j, v] : rows[k]) in_.emplace_back(in_rows_, j, v);
    b_in_.push_back(rhs[k]);
    ++in_rows_;
  }
  push_cone(ConeBlock::Kind::soc, static_cast<int>(rows.size()));
}

void ConicBuilder::add_linear_cost(int var, double coeff) { q_.emplace_back(var, coeff); }

void ConicBuilder::add_quadratic_cost(int i, int j, double value) {
  P_.emplace_back(i, j, value);
}

ConicProgram ConicBuilder::build() const {
  ConicProgram p;
  p.num_vars = num_vars_;
  p.q = Eigen::VectorXd::Zero(num_vars_);
  for (const auto& [j, v] : q_) p.q(j) += v;
  p.q0 = q0_;
  p.A_eq.resize(eq_rows_, num_vars_);
  p.A_eq.setFromTriplets(eq_.begin(), eq_.end());
  p.b_eq = Eigen::Map<const Eigen::VectorXd>(b_eq_.data(), eq_rows_);
  p.A_in.resize(in_rows_, num_vars_);
  p.A_in.setFromTriplets(in_.begin(), in_.end());
  p.b_in = Eigen::Map<const Eigen::VectorXd>(b_in_.data(), in_rows_);
  p.cones = cones_;
  if (!P_.empty()) {
    SparseMatrix P(num_vars_, num_vars_);
    P.setFromTriplets(P_.begin(), P_.end());
    p.P = std::move(P);
  }
  return p;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_error: return "numerical_error";
    case SolveStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, SolverFactory>& registry() {
  static std::map<std::string, SolverFactory> r{{"ecos", [] { return make_ecos_solver(); }}};
  return r;
}

}  // namespace

void register_solver(const std::string& name, SolverFactory factory) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(factory);
}

std::unique_ptr<ConicSolver> make_solver(const std::string& name) {
  SolverFactory factory;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end()) throw AdapterUnavailable("no conic solver named " + name);
    factory = it->second;
  }
  return factory();
}

std::vector<std::string> registered_solvers() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

ConicProgram epigraph_reformulation(const ConicProgram& program) {
  ConicProgram out = program;
  out.P.reset();
  const int n = program.num_vars;
  const int t = n;
  out.num_vars = n + 1;
  out.q.conservativeResize(n + 1);
  out.q(t) = 1.0;
  out.A_eq.conservativeResize(out.A_eq.rows(), n + 1);
  if (!program.P || program.P->nonZeros() == 0) {
    // t ≥ 0 keeps the objective bounded.
    std::vector<Triplet> trip;
    for (int k = 0; k < out.A_in.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(out.A_in, k); it; ++it) {
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      }
    }
    const int row = static_cast<int>(out.A_in.rows());
    trip.emplace_back(row, t, -1.0);
    out.A_in.resize(row + 1, n + 1);
    out.A_in.setFromTriplets(trip.begin(), trip.end());
    out.b_in.conservativeResize(row + 1);
    out.b_in(row) = 0.0;
    out.cones.push_back(ConeBlock{ConeBlock::Kind::nonneg, 1});
    return out;
  }
  const SparseMatrix& P = *program.P;
  // Connected components of the sparsity graph of P.
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int k = 0; k < P.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(P, k); it; ++it) {
      if (it.value() == 0.0) continue;
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      used[r] = used[c] = true;
      parent[find(r)] = find(c);
    }
  }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) {
    if (used[i]) groups[find(i)].push_back(i);
  }
  std::vector<Triplet> trip;
  for (int k = 0; k < program.A_in.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(program.A_in, k); it; ++it) {
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  std::vector<double> rhs(program.b_in.data(), program.b_in.data() + program.b_in.size());
  int row = static_cast<int>(program.A_in.rows());
  const int cone_start = row;
  // s_0 = t + ½.
  trip.emplace_back(row++, t, -1.0);
  rhs.push_back(0.5);
  std::vector<Eigen::Index> local(static_cast<std::size_t>(n), -1);
  for (const auto& [root, idx] : groups) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    for (Eigen::Index a = 0; a < m; ++a) local[idx[a]] = a;
    Eigen::MatrixXd sub = Eigen::MatrixXd::Zero(m, m);
    for (const int col : idx) {
      for (SparseMatrix::InnerIterator it(P, col); it; ++it) {
        sub(local[it.row()], local[col]) += it.value();
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index e = 0; e < m; ++e) {
      const double lambda = es.eigenvalues()(e);
      if (lambda < -1e-9 * top) throw MalformedProgram("quadratic term not PSD");
      if (lambda <= 1e-14 * top) continue;
      const double s = std::sqrt(lambda);
      for (Eigen::Index a = 0; a < m; ++a) {
        const double v = s * es.eigenvectors()(a, e);
        if (v != 0.0) trip.emplace_back(row, idx[a], -v);
      }
      rhs.push_back(0.0);
      ++row;
    }
  }
  // s_last = t − ½.
  trip.emplace_back(row++, t, -1.0);
  rhs.push_back(-0.5);
  out.A_in.resize(row, n + 1);
  out.A_in.setFromTriplets(trip.begin(), trip.end());
  out.b_in = Eigen::Map<const Eigen::VectorXd>(rhs.data(), row);
  out.cones.push_back(ConeBlock{ConeBlock::Kind::soc, row - cone_start});
  return out;
}

double primal_residual(const ConicProgram& program, const Eigen::VectorXd& x) {
  double worst = 0.0;
  if (program.num_eq() > 0) {
    worst = (program.A_eq * x - program.b_eq).cwiseAbs().maxCoeff();
  }
  const Eigen::VectorXd s = program.b_in - program.A_in * x;
  Eigen::Index row = 0;
  for (const auto& c : program.cones) {
    if (c.kind == ConeBlock::Kind::nonneg) {
      if (c.size > 0) worst = std::max(worst, -s.segment(row, c.size).minCoeff());
    } else {
      worst = std::max(worst, s.segment(row + 1, c.size - 1).norm() - s(row));
    }
    row += c.size;
  }
  return std::max(worst, 0.0);
}

double objective_value(const ConicProgram& program, const Eigen::VectorXd& x) {
  double v = program.q.dot(x) + program.q0;
  if (program.P) v += 0.5 * x.dot(*program.P * x);
  return v;
}

SolveResult solve(const ConicProgram& program, const SolveOptions& options) {
  program.validate();
  auto solver = make_solver(options.adapter);
  const bool native = program.P && solver->supports_quadratic() && !options.force_epigraph;
  if (!program.P || native) {
    SolveResult r = solver->solve(program, options);
    const Eigen::VectorXd& x = r.status == SolveStatus::optimal ? r.primal : r.candidate;
    if (x.size() == program.num_vars) {
      r.objective_value = objective_value(program, x);
      r.primal_residual = primal_residual(program, x);
    }
    return r;
  }
  const ConicProgram lifted = epigraph_reformulation(program);
  SolveResult r = solver->solve(lifted, options);
  auto shrink = [&](Eigen::VectorXd& v) {
    if (v.size() == lifted.num_vars) v.conservativeResize(program.num_vars);
  };
  shrink(r.primal);
  shrink(r.candidate);
  const Eigen::VectorXd& x = r.status == SolveStatus::optimal ? r.primal : r.candidate;
  if (x.size() == program.num_vars) {
    r.objective_value = objective_value(program, x);
    r.primal_residual = primal_residual(program, x);
  }
  return r;
}

bool feasibility(const ConicProgram& program, const SolveOptions& options) {
  ConicProgram p = program;
  p.P.reset();
  p.q.setZero();
  p.q0 = 0.0;
  return solve(p, options).status == SolveStatus::optimal;
}

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

void dump_matrix(std::ostringstream& out, const char* tag, const SparseMatrix& M) {
  out << tag << ' ' << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
  for (int k = 0; k < M.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << hex(it.value()) << '\n';
    }
  }
}

void dump_vector(std::ostringstream& out, const char* tag, const Eigen::VectorXd& v) {
  out << tag << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << hex(v(i)) << '\n';
}

struct Reader {
  std::istringstream in;
  void expect(const std::string& tag) {
    std::string word;
    if (!(in >> word) || word != tag) {
      throw MalformedProgram("expected '" + tag + "' in program text");
    }
  }
  long integer() {
    long v;
    if (!(in >> v)) throw MalformedProgram("expected an integer in program text");
    return v;
  }
  double real() {
    std::string word;
    if (!(in >> word)) throw MalformedProgram("expected a number in program text");
    char* end = nullptr;
    const double v = std::strtod(word.c_str(), &end);
    if (end == word.c_str() || *end != '\0') throw MalformedProgram("bad number " + word);
    return v;
  }
  SparseMatrix matrix(const std::string& tag) {
    expect(tag);
    const long rows = integer(), cols = integer(), nnz = integer();
    if (rows < 0 || cols < 0 || nnz < 0) throw MalformedProgram("negative size");
    std::vector<Triplet> trip;
    for (long k = 0; k < nnz; ++k) {
      const long r = integer(), c = integer();
      const double v = real();
      if (r < 0 || r >= rows || c < 0 || c >= cols) throw MalformedProgram("index out of range");
      trip.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    }
    SparseMatrix M(rows, cols);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
  }
  Eigen::VectorXd vector(const std::string& tag) {
    expect(tag);
    const long n = integer();
    if (n < 0) throw MalformedProgram("negative size");
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v(i) = real();
    return v;
  }
};

}  // namespace

std::string dump_program(const ConicProgram& program) {
  std::ostringstream out;
  out << "conic-program 1\n";
  out << "vars " << program.num_vars << '\n';
  dump_vector(out, "q", program.q);
  out << "q0 " << hex(program.q0) << '\n';
  if (program.P) {
    dump_matrix(out, "P", *program.P);
  } else {
    out << "P none\n";
  }
  dump_matrix(out, "A_eq", program.A_eq);
  dump_vector(out, "b_eq", program.b_eq);
  dump_matrix(out, "A_in", program.A_in);
  dump_vector(out, "b_in", program.b_in);
  out << "cones " << program.cones.size() << '\n';
  for (const auto& c : program.cones) {
    out << (c.kind == ConeBlock::Kind::nonneg ? "nonneg " : "soc ") << c.size << '\n';
  }
  return out.str();
}

ConicProgram parse_program(const std::string& text) {
  Reader r{std::istringstream(text)};
  r.expect("conic-program");
  if (r.integer() != 1) throw MalformedProgram("unknown program format version");
  ConicProgram p;
  r.expect("vars");
  p.num_vars = static_cast<int>(r.integer());
  p.q = r.vector("q");
  r.expect("q0");
  p.q0 = r.real();
  {
    const auto pos = r.in.tellg();
    std::string tag, next;
    r.in >> tag >> next;
    if (tag != "P") throw MalformedProgram("expected 'P' in program text");
    if (next != "none") {
      r.in.seekg(pos);
      p.P = r.matrix("P");
    }
  }
  p.A_eq = r.matrix("A_eq");
  p.b_eq = r.vector("b_eq");
  p.A_in = r.matrix("A_in");
  p.b_in = r.vector("b_in");
  r.expect("cones");
  const long count = r.integer();
  for (long k = 0; k < count; ++k) {
    std::string kind;
    r.in >> kind;
    ConeBlock c;
    if (kind == "nonneg") {
      c.kind = ConeBlock::Kind::nonneg;
    } else if (kind == "soc") {
      c.kind = ConeBlock::Kind::soc;
    } else {
      throw MalformedProgram("unknown cone kind " + kind);
    }
    c.size = static_cast<int>(r.integer());
    p.cones.push_back(c);
  }
  p.validate();
  return p;
}

}  // namespace wtmpc
