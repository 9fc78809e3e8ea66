#include "wtmpc/ambiguity.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace wtmpc {

EmpiricalDistribution pushforward_empirical(const EmpiricalDistribution& P,
                                            const Eigen::MatrixXd& M) {
  if (M.cols() != P.atoms.rows()) {
    throw DimensionMismatch("pushforward matrix columns differ from atom size");
  }
  return EmpiricalDistribution{M * P.atoms};
}

namespace {

void require_full_row_rank(const Svd& svd) {
  const double smax = svd.sigma.maxCoeff();
  const double smin = svd.sigma.minCoeff();
  if (!(smax > 0.0) || smin < 1e-10 * smax) {
    throw RankDeficient("D is not full row-rank");
  }
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& D) {
  const Svd svd = thin_svd(D);
  require_full_row_rank(svd);
  return svd.V * svd.sigma.cwiseInverse().asDiagonal() * svd.U.transpose();
}

}  // namespace

TransportCost TransportCost::euclidean(int dim) {
  TransportCost c;
  c.kind_ = Kind::euclidean;
  c.dim_ = dim;
  c.G_ = Eigen::MatrixXd::Identity(dim, dim);
  return c;
}

TransportCost TransportCost::pinv_weighted(const Eigen::MatrixXd& D) {
  TransportCost c;
  c.kind_ = Kind::pinv_weighted;
  c.dim_ = static_cast<int>(D.rows());
  c.D_ = D;
  c.svd_ = thin_svd(D);
  require_full_row_rank(c.svd_);
  c.G_ = c.svd_.sigma.asDiagonal() * c.svd_.U.transpose();
  return c;
}

double TransportCost::operator()(const Eigen::VectorXd& xi) const {
  if (xi.size() != dim_) throw DimensionMismatch("transport cost argument size");
  if (kind_ == Kind::euclidean) return xi.norm();
  return (svd_.U.transpose() * xi).cwiseQuotient(svd_.sigma).norm();
}

double TransportCost::dual(const Eigen::VectorXd& y) const {
  if (y.size() != dim_) throw DimensionMismatch("dual norm argument size");
  return (G_ * y).norm();
}

double pinv_cost_direct(const Eigen::MatrixXd& D, const Eigen::VectorXd& xi) {
  if (xi.size() != D.rows()) throw DimensionMismatch("cost argument size");
  return (pseudo_inverse(D) * xi).norm();
}

Eigen::MatrixXd dual_norm_matrix(const Eigen::MatrixXd& D) {
  require_full_row_rank(thin_svd(D));
  return D.transpose();
}

Eigen::MatrixXd literal_dual_norm_matrix(const Eigen::MatrixXd& D) {
  const Eigen::MatrixXd Dp = pseudo_inverse(D);
  const Eigen::MatrixXd gram = Dp.transpose() * Dp;
  return Dp * gram.inverse();
}

WassersteinTube propagate_tube(const ErrorStack& stack, const NoiseDataset& data,
                               double epsilon, int N) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("radius must be nonnegative");
  if (N < 1 || N > stack.horizon) throw InvalidArgument("horizon exceeds error stack");
  if (data.horizon < N) throw InvalidArgument("trajectories shorter than horizon");
  WassersteinTube tube;
  tube.radius = epsilon;
  for (int t = 1; t <= N; ++t) {
    TubeStep step;
    step.t = t;
    step.radius = epsilon;
    const EmpiricalDistribution noise{data.truncated(t)};
    step.center = pushforward_empirical(noise, stack.D_of(t));
    step.cost = TransportCost::pinv_weighted(stack.D_of(t));
    step.support = stack.E_of(t);
    const Eigen::MatrixXd slack =
        (step.support.F() * step.center.atoms).colwise() - step.support.g();
    if (slack.size() > 0 && slack.maxCoeff() > 1e-7) {
      throw CenterOutsideSupport("tube center atom leaves E_" + std::to_string(t));
    }
    tube.steps.push_back(std::move(step));
  }
  return tube;
}

double support_diameter(const TubeStep& step) {
  const auto& V = step.support.vertices();
  double best = 0.0;
  for (Eigen::Index i = 0; i < V.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < V.cols(); ++j) {
      best = std::max(best, step.cost(V.col(i) - V.col(j)));
    }
  }
  return best;
}

void write_tube(const WassersteinTube& tube, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir);
  nlohmann::ordered_json manifest;
  manifest["epsilon"] = tube.radius;
  manifest["steps"] = nlohmann::ordered_json::array();
  for (const auto& step : tube.steps) {
    const std::string name = "tube_step_" + std::to_string(step.t) + ".csv";
    std::ofstream out(dir + "/" + name);
    if (!out) throw IoError("cannot write " + dir + "/" + name);
    out.precision(17);
    for (int i = 0; i < step.center.dim(); ++i) out << (i ? "," : "") << "e" << i + 1;
    out << '\n';
    for (int k = 0; k < step.center.count(); ++k) {
      for (int i = 0; i < step.center.dim(); ++i) {
        out << (i ? "," : "") << step.center.atoms(i, k);
      }
      out << '\n';
    }
    nlohmann::ordered_json entry;
    entry["t"] = step.t;
    entry["q_t"] = step.support.num_rows();
    entry["sigma"] = std::vector<double>(step.cost.svd().sigma.data(),
                                         step.cost.svd().sigma.data() + step.cost.svd().sigma.size());
    entry["centers"] = name;
    manifest["steps"].push_back(entry);
  }
  std::ofstream out(dir + "/tube_manifest.json");
  if (!out) throw IoError("cannot write tube manifest");
  out << manifest.dump(2) << '\n';
}

}  // namespace wtmpc
