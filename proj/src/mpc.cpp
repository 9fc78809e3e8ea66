#include "wtmpc/mpc.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace wtmpc {

std::string to_string(NominalMode mode) {
  switch (mode) {
    case NominalMode::wt_simple: return "wt_simple";
    case NominalMode::wt_tightened: return "wt_tightened";
    case NominalMode::robust: return "robust";
  }
  return "unknown";
}

NominalMode parse_mode(const std::string& name) {
  if (name == "wt_simple") return NominalMode::wt_simple;
  if (name == "wt_tightened") return NominalMode::wt_tightened;
  if (name == "robust") return NominalMode::robust;
  throw ConfigInvalid("unknown mode '" + name + "'");
}

void MpcConfig::validate(int state_dim, int input_dim) const {
  if (N < 1) throw ConfigInvalid("horizon N must be >= 1");
  if (Q.rows() != state_dim || Q.cols() != state_dim) throw ConfigInvalid("Q must be d x d");
  if (R.rows() != input_dim || R.cols() != input_dim) throw ConfigInvalid("R must be m x m");
  if (!(gamma >= kMinGamma && gamma < 1.0)) throw ConfigInvalid("gamma must lie in [1e-3, 1)");
  if (!(epsilon >= 0.0)) throw ConfigInvalid("epsilon must be >= 0");
  if (n < 1) throw ConfigInvalid("trajectory count n must be >= 1");
  if (terminal && terminal->dim() != state_dim) throw ConfigInvalid("terminal set dimension");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(0.5 * (Q + Q.transpose()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> re(0.5 * (R + R.transpose()));
  if (qe.eigenvalues().minCoeff() < -1e-12) throw ConfigInvalid("Q must be PSD");
  if (re.eigenvalues().minCoeff() <= 0.0) throw ConfigInvalid("R must be PD");
}

namespace {

Polytoped input_tightening(const ConstrainedSystem& plant, const ErrorStack& stack, int k) {
  return pontryagin_diff(plant.U, linear_image(stack.E_of(k), plant.sys.K()));
}

Polytoped state_tightening(const ConstrainedSystem& plant, const ErrorStack& stack, int k) {
  return pontryagin_diff(plant.X, stack.E_of(k));
}

double vertex_margin(const Polytoped& inner, const Polytoped& outer) {
  return inclusion_margin(inner, outer);
}

void add_membership_rows(ConicBuilder& builder, const Polytoped& P, int first_var) {
  for (Eigen::Index r = 0; r < P.F().rows(); ++r) {
    std::vector<std::pair<int, double>> row;
    for (Eigen::Index c = 0; c < P.F().cols(); ++c) {
      if (P.F()(r, c) != 0.0) row.emplace_back(first_var + static_cast<int>(c), P.F()(r, c));
    }
    builder.add_less_equal(row, P.g()(r));
  }
}

}  // namespace

TerminalCertificate certify_terminal_set(const Polytoped& Zf, const ConstrainedSystem& plant,
                                         const ErrorStack& stack, int N, double tol) {
  const LinearSystem& sys = plant.sys;
  TerminalCertificate cert;
  const Polytoped UN = input_tightening(plant, stack, N);
  const Polytoped XN = state_tightening(plant, stack, N);
  cert.input_margin = vertex_margin(linear_image(Zf, sys.K()), UN);
  cert.invariance_margin = vertex_margin(
      minkowski_sum(linear_image(Zf, sys.AK()), stack.AK_pow_W.at(static_cast<std::size_t>(N))),
      Zf);
  cert.inclusion_margin = vertex_margin(Zf, XN);
  cert.input_ok = cert.input_margin >= -tol;
  cert.invariance_ok = cert.invariance_margin >= -tol;
  cert.inclusion_ok = cert.inclusion_margin >= -tol;
  return cert;
}

TerminalSet compute_terminal_set(const ConstrainedSystem& plant, const ErrorStack& stack, int N,
                                 int max_iterations) {
  if (N < 1 || N > stack.horizon) throw InvalidArgument("terminal horizon out of range");
  const LinearSystem& sys = plant.sys;
  const int d = sys.state_dim();
  const Polytoped UN = input_tightening(plant, stack, N);
  const Polytoped XN = state_tightening(plant, stack, N);
  if (UN.is_empty() || XN.is_empty()) throw NoInvariantSet("tightened constraints are empty");
  Eigen::MatrixXd H(UN.num_rows() + XN.num_rows(), d);
  Eigen::VectorXd h(H.rows());
  H << UN.F() * sys.K(), XN.F();
  h << UN.g(), XN.g();
  const Polytoped& Wn = stack.AK_pow_W.at(static_cast<std::size_t>(N));
  const double tol = 1e-10;

  auto intersect = [&](const Eigen::MatrixXd& F, const Eigen::VectorXd& g) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < F.rows(); ++r) {
      if (F.row(r).norm() > tol) {
        keep.push_back(r);
      } else if (g(r) < -tol) {
        throw NoInvariantSet("terminal recursion produced an empty set");
      }
    }
    Eigen::MatrixXd Fk(static_cast<Eigen::Index>(keep.size()), d);
    Eigen::VectorXd gk(Fk.rows());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      Fk.row(static_cast<Eigen::Index>(k)) = F.row(keep[k]);
      gk(static_cast<Eigen::Index>(k)) = g(keep[k]);
    }
    Polytoped P = Polytoped::from_hrep(Fk, gk);
    if (P.is_empty()) throw NoInvariantSet("terminal recursion produced an empty set");
    return Polytoped::from_vertices(P.vertices());
  };

  Polytoped current = intersect(H, h);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(d, d);  // A_K^{i-1}
  Eigen::VectorXd accumulated = Eigen::VectorXd::Zero(H.rows());
  for (int i = 1; i <= max_iterations; ++i) {
    // Σ_{s=0}^{i-1} h_{W'}((H_j A_K^s)ᵀ).
    for (Eigen::Index j = 0; j < H.rows(); ++j) {
      accumulated(j) += support(Wn, (H.row(j) * power).transpose());
    }
    power = sys.AK() * power;
    const Eigen::MatrixXd rows = H * power;
    const Eigen::VectorXd rhs = h - accumulated;
    const Eigen::MatrixXd slack = (rows * current.vertices()).colwise() - rhs;
    if (slack.maxCoeff() <= tol) {
      TerminalSet out{current, certify_terminal_set(current, plant, stack, N)};
      out.certificate.iterations = i;
      return out;
    }
    Eigen::MatrixXd F(current.num_rows() + rows.rows(), d);
    Eigen::VectorXd g(F.rows());
    F << current.F(), rows;
    g << current.g(), rhs;
    current = intersect(F, g);
  }
  throw NoInvariantSet("terminal recursion did not converge; the horizon may be too short");
}

void MpcProblem::set_initial_state(const Eigen::VectorXd& x) {
  if (x.size() != layout.d) throw DimensionMismatch("initial state size");
  program.b_eq.segment(layout.initial_rows, layout.d) = x;
}

std::vector<std::vector<GammaBlock>> nominal_blocks(const ErrorStack& stack,
                                                    const WassersteinTube& tube,
                                                    const PwaLoss& loss, const MpcConfig& cfg) {
  std::vector<std::vector<GammaBlock>> out;
  if (cfg.mode == NominalMode::robust) return out;
  if (tube.horizon() < cfg.N - 1) throw ConfigInvalid("tube shorter than the horizon");
  if (cfg.mode == NominalMode::wt_simple) {
    for (int k = 1; k <= cfg.N - 1; ++k) {
      out.push_back({build_gamma_block(tube.at(k), loss, cfg.gamma, cfg.gamma_options)});
    }
    return out;
  }
  Eigen::MatrixXd directions = Eigen::MatrixXd::Zero(loss.dim(), loss.pieces() + 1);
  directions.leftCols(loss.pieces()) = loss.a.transpose() / cfg.gamma;
  const TighteningOffsets offsets(stack, directions);
  for (int k = 1; k <= cfg.N - 1; ++k) {
    out.push_back(
        build_tightened_spec(offsets, tube, loss, cfg.gamma, k, cfg.gamma_options).blocks);
  }
  return out;
}

MpcProblem build_problem(const ConstrainedSystem& plant, const ErrorStack& stack,
                         const WassersteinTube& tube, const Polytoped& Zf,
                         const MpcConfig& cfg, const Eigen::VectorXd& x_t) {
  const LinearSystem& sys = plant.sys;
  const int d = sys.state_dim();
  const int m = sys.input_dim();
  cfg.validate(d, m);
  const int N = cfg.N;
  if (stack.horizon < N) throw ConfigInvalid("error stack shorter than the horizon");
  if (plant.X.dim() != d || plant.U.dim() != m || Zf.dim() != d) {
    throw ConfigInvalid("constraint set dimensions");
  }
  if (x_t.size() != d) throw ConfigInvalid("initial state dimension");
  if (Zf.is_empty()) throw ConfigInvalid("terminal set is empty");

  MpcProblem problem;
  problem.mode = cfg.mode;
  MpcLayout& L = problem.layout;
  L.N = N;
  L.d = d;
  L.m = m;
  ConicBuilder b;
  L.z = b.add_variables((N + 1) * d);
  L.v = b.add_variables(N * m);
  L.c = b.add_variables(N * m);
  auto z = [&](int k, int i) { return L.z + k * d + i; };
  auto v = [&](int k, int i) { return L.v + k * m + i; };
  auto c = [&](int k, int i) { return L.c + k * m + i; };

  L.initial_rows = b.num_eq();
  for (int i = 0; i < d; ++i) b.add_equality({{z(0, i), 1.0}}, x_t(i));
  const auto& A = sys.A();
  const auto& B = sys.B();
  const auto& K = sys.K();
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < d; ++i) {
      std::vector<std::pair<int, double>> row{{z(k + 1, i), 1.0}};
      for (int j = 0; j < d; ++j) {
        if (A(i, j) != 0.0) row.emplace_back(z(k, j), -A(i, j));
      }
      for (int j = 0; j < m; ++j) {
        if (B(i, j) != 0.0) row.emplace_back(v(k, j), -B(i, j));
      }
      b.add_equality(row, 0.0);
    }
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, double>> row{{v(k, i), 1.0}, {c(k, i), -1.0}};
      for (int j = 0; j < d; ++j) {
        if (K(i, j) != 0.0) row.emplace_back(z(k, j), -K(i, j));
      }
      b.add_equality(row, 0.0);
    }
  }

  for (int k = 0; k < N; ++k) {
    const Polytoped Uk = input_tightening(plant, stack, k);
    if (Uk.is_empty()) throw ConfigInvalid("U ⊖ K E_" + std::to_string(k) + " is empty");
    add_membership_rows(b, Uk, v(k, 0));
  }

  const PwaLoss loss = PwaLoss::from_polytope(plant.X);
  if (cfg.mode == NominalMode::robust) {
    for (int k = 1; k <= N - 1; ++k) {
      const Polytoped Xk = state_tightening(plant, stack, k);
      if (Xk.is_empty()) throw ConfigInvalid("X ⊖ E_" + std::to_string(k) + " is empty");
      add_membership_rows(b, Xk, z(k, 0));
    }
  } else {
    problem.gamma_blocks = nominal_blocks(stack, tube, loss, cfg);
    for (int k = 1; k <= N - 1; ++k) {
      std::vector<int> zk(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) zk[static_cast<std::size_t>(i)] = z(k, i);
      std::vector<GammaVars> vars;
      for (const auto& block : problem.gamma_blocks[static_cast<std::size_t>(k - 1)]) {
        vars.push_back(append_gamma_block(b, block, StateRef::variables(zk), true));
      }
      L.blocks.push_back(std::move(vars));
    }
  }

  add_membership_rows(b, Zf, z(N, 0));

  const Eigen::MatrixXd Qs = 0.5 * (cfg.Q + cfg.Q.transpose());
  const Eigen::MatrixXd Rs = 0.5 * (cfg.R + cfg.R.transpose());
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (Qs(i, j) != 0.0) b.add_quadratic_cost(z(k, i), z(k, j), 2.0 * Qs(i, j));
      }
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (Rs(i, j) != 0.0) b.add_quadratic_cost(v(k, i), v(k, j), 2.0 * Rs(i, j));
      }
    }
  }
  problem.program = b.build();
  return problem;
}

OpenLoopPlan solve_problem(const MpcProblem& problem, const SolveOptions& options,
                           double accept_residual) {
  const SolveResult r = solve(problem.program, options);
  OpenLoopPlan plan;
  plan.status = r.status;
  plan.solve_time = r.solve_time;
  plan.residual = r.primal_residual;
  const Eigen::VectorXd* x = nullptr;
  if (r.status == SolveStatus::optimal) {
    x = &r.primal;
  } else if (r.status == SolveStatus::iteration_limit && r.candidate.size() > 0 &&
             r.primal_residual < accept_residual) {
    x = &r.candidate;
  }
  if (x == nullptr) return plan;
  const MpcLayout& L = problem.layout;
  plan.usable = true;
  plan.primal = *x;
  plan.objective = r.objective_value;
  plan.z = Eigen::Map<const Eigen::MatrixXd>(x->data() + L.z, L.d, L.N + 1);
  plan.v = Eigen::Map<const Eigen::MatrixXd>(x->data() + L.v, L.m, L.N);
  plan.c = Eigen::Map<const Eigen::MatrixXd>(x->data() + L.c, L.m, L.N);
  return plan;
}

ShiftCertificate verify_shifted_policy(const MpcProblem& problem, const OpenLoopPlan& plan,
                                       const ConstrainedSystem& plant, const ErrorStack& stack,
                                       const Polytoped& Zf, const Eigen::VectorXd& w,
                                       double tol) {
  if (problem.mode == NominalMode::wt_simple) {
    throw InvalidArgument("the shifted-policy certificate needs tightened or robust sets");
  }
  if (!plan.usable) throw InvalidArgument("plan has no solution to shift");
  const LinearSystem& sys = plant.sys;
  const MpcLayout& L = problem.layout;
  const int N = L.N;
  ShiftCertificate cert;
  auto record = [&](double violation, const std::string& what) {
    if (violation > cert.worst_violation) cert.worst_violation = violation;
    if (violation > tol && cert.ok) {
      cert.ok = false;
      cert.failed_check = what;
    }
  };

  Eigen::MatrixXd zs(L.d, N + 1);
  Eigen::MatrixXd cs = Eigen::MatrixXd::Zero(L.m, N);
  Eigen::VectorXd drift = w;  // A_K^k w
  for (int k = 0; k < N; ++k) {
    zs.col(k) = plan.z.col(k + 1) + drift;
    if (k + 1 < N) cs.col(k) = plan.c.col(k + 1);
    drift = sys.AK() * drift;
  }
  zs.col(N) = sys.AK() * zs.col(N - 1);

  // Plan consistency of the candidate with the nominal dynamics.
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd vk = sys.K() * zs.col(k) + cs.col(k);
    const Eigen::VectorXd next = sys.A() * zs.col(k) + sys.B() * vk;
    record((next - zs.col(k + 1)).cwiseAbs().maxCoeff(), "nominal dynamics");
    record(-membership_margin(input_tightening(plant, stack, k), vk),
           "input set at k=" + std::to_string(k));
  }

  for (int k = 1; k <= N - 1; ++k) {
    const std::string where = "nominal set at k=" + std::to_string(k);
    if (problem.mode == NominalMode::robust || k == N - 1) {
      record(-membership_margin(state_tightening(plant, stack, k), zs.col(k)), where);
      continue;
    }
    const auto& blocks = problem.gamma_blocks[static_cast<std::size_t>(k - 1)];
    const auto& donors = L.blocks[static_cast<std::size_t>(k)];
    for (std::size_t p = 0; p < blocks.size(); ++p) {
      const GammaBlock& block = blocks[p];
      const GammaVars& from = donors[p];
      ConicBuilder builder;
      append_gamma_block(builder, block, StateRef::fixed(zs.col(k)), true);
      const ConicProgram check = builder.build();
      const Eigen::VectorXd aux = plan.primal.segment(from.tau, check.num_vars);
      record(primal_residual(check, aux), where + ", p=" + std::to_string(p + 1));
    }
  }
  record(-membership_margin(Zf, zs.col(N)), "terminal set");
  return cert;
}

TubeMpcController::TubeMpcController(const ConstrainedSystem& plant, const ErrorStack& stack,
                                     const WassersteinTube& tube, const Polytoped& Zf,
                                     MpcConfig cfg)
    : cfg_(std::move(cfg)),
      problem_(build_problem(plant, stack, tube, Zf, cfg_,
                             Eigen::VectorXd::Zero(plant.sys.state_dim()))) {}

ControlDecision TubeMpcController::control(int t, const Eigen::VectorXd& x) {
  problem_.set_initial_state(x);
  last_plan_ = solve_problem(problem_, cfg_.solve_options, cfg_.accept_residual);
  ControlDecision decision;
  decision.status = to_string(last_plan_.status);
  decision.solve_time = last_plan_.solve_time;
  if (last_plan_.usable) {
    decision.c = last_plan_.c.col(0);
    decision.objective = last_plan_.objective;
    return decision;
  }
  if (cfg_.mode == NominalMode::wt_simple && cfg_.feedback_fallback) {
    ++fallbacks_;
    decision.c = Eigen::VectorXd::Zero(problem_.layout.m);
    decision.fallback = true;
    decision.objective = std::numeric_limits<double>::quiet_NaN();
    return decision;
  }
  throw Infeasible("no admissible plan at step " + std::to_string(t) + " (" +
                   decision.status + ")");
}

}  // namespace wtmpc
