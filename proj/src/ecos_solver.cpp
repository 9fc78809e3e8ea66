#include <chrono>
#include <vector>

#include "wtmpc/conic.hpp"

extern "C" {
#include "ecos.h"
}

namespace wtmpc {

namespace {

struct CcsArrays {
  std::vector<pfloat> pr;
  std::vector<idxint> jc, ir;
};

CcsArrays to_ccs(const SparseMatrix& M) {
  SparseMatrix C = M;
  C.prune(0.0);
  C.makeCompressed();
  CcsArrays out;
  out.pr.assign(C.valuePtr(), C.valuePtr() + C.nonZeros());
  out.ir.assign(C.innerIndexPtr(), C.innerIndexPtr() + C.nonZeros());
  out.jc.assign(C.outerIndexPtr(), C.outerIndexPtr() + C.cols() + 1);
  return out;
}

class EcosSolver final : public ConicSolver {
 public:
  std::string name() const override { return "ecos"; }
  bool supports_quadratic() const override { return false; }

  SolveResult solve(const ConicProgram& program,
                    const SolveOptions& options) override {
    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    const idxint n = program.num_vars;

    // ECOS expects all nonnegative rows before the second-order cones.
    std::vector<int> order;
    std::vector<idxint> soc_sizes;
    idxint l = 0;
    {
      int row = 0;
      for (const auto& c : program.cones) {
        if (c.kind == ConeBlock::Kind::nonneg) {
          for (int k = 0; k < c.size; ++k) order.push_back(row + k);
          l += c.size;
        }
        row += c.size;
      }
      row = 0;
      for (const auto& c : program.cones) {
        if (c.kind == ConeBlock::Kind::soc) {
          for (int k = 0; k < c.size; ++k) order.push_back(row + k);
          soc_sizes.push_back(c.size);
        }
        row += c.size;
      }
    }
    std::vector<int> position(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = static_cast<int>(k);
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(program.A_in.nonZeros()));
    for (int k = 0; k < program.A_in.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(program.A_in, k); it; ++it) {
        trip.emplace_back(position[it.row()], static_cast<int>(it.col()), it.value());
      }
    }
    std::vector<pfloat> h(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) h[k] = program.b_in(order[k]);
    idxint m = static_cast<idxint>(order.size());
    if (m == 0) {
      // ECOS needs at least one cone row; 0 ≤ 1 is always satisfied.
      h.push_back(1.0);
      m = l = 1;
    }
    SparseMatrix G(m, n);
    G.setFromTriplets(trip.begin(), trip.end());
    CcsArrays g = to_ccs(G);
    if (g.pr.empty()) {
      g.pr.push_back(0.0);
      g.ir.push_back(0);
    }
    const idxint p = program.num_eq();
    CcsArrays a;
    if (p > 0) a = to_ccs(program.A_eq);
    std::vector<pfloat> c(program.q.data(), program.q.data() + n);
    std::vector<pfloat> b(program.b_eq.data(), program.b_eq.data() + p);

    pwork* work = ECOS_setup(n, m, p, l, static_cast<idxint>(soc_sizes.size()),
                             soc_sizes.empty() ? nullptr : soc_sizes.data(), 0,
                             g.pr.data(), g.jc.data(), g.ir.data(),
                             p > 0 ? a.pr.data() : nullptr,
                             p > 0 ? a.jc.data() : nullptr,
                             p > 0 ? a.ir.data() : nullptr, c.data(), h.data(),
                             p > 0 ? b.data() : nullptr);
    if (work == nullptr) {
      result.status = SolveStatus::numerical_error;
      result.solver_code = ECOS_FATAL;
      result.solve_time = elapsed(start);
      return result;
    }
    work->stgs->feastol = options.tol;
    work->stgs->abstol = options.tol;
    work->stgs->reltol = options.tol;
    work->stgs->maxit = options.max_iterations;
    work->stgs->verbose = 0;
    const idxint code = ECOS_solve(work);
    result.solver_code = static_cast<int>(code);
    result.iterations = static_cast<int>(work->info->iter);
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(work->x, n);
    ECOS_cleanup(work, 0);

    switch (code) {
      case ECOS_OPTIMAL: {
        const double scale =
            1.0 + std::max(program.b_in.size() ? program.b_in.cwiseAbs().maxCoeff() : 0.0,
                           program.b_eq.size() ? program.b_eq.cwiseAbs().maxCoeff() : 0.0);
        if (primal_residual(program, x) <= options.tol * scale) {
          result.status = SolveStatus::optimal;
          result.primal = std::move(x);
        } else {
          result.status = SolveStatus::iteration_limit;
          result.candidate = std::move(x);
        }
        break;
      }
      case ECOS_PINF:
      case ECOS_PINF + ECOS_INACC_OFFSET:
        result.status = SolveStatus::infeasible;
        break;
      case ECOS_DINF:
      case ECOS_DINF + ECOS_INACC_OFFSET:
        result.status = SolveStatus::unbounded;
        break;
      case ECOS_OPTIMAL + ECOS_INACC_OFFSET:
      case ECOS_MAXIT:
        result.status = SolveStatus::iteration_limit;
        result.candidate = std::move(x);
        break;
      default:
        result.status = SolveStatus::numerical_error;
        if (x.allFinite()) result.candidate = std::move(x);
        break;
    }
    result.solve_time = elapsed(start);
    return result;
  }

 private:
  static double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

}  // namespace

std::unique_ptr<ConicSolver> make_ecos_solver() { return std::make_unique<EcosSolver>(); }

}  // namespace wtmpc
