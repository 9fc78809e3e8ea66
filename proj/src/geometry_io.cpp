#include "wtmpc/geometry_io.hpp"

namespace wtmpc {

using nlohmann::json;

json to_json(const Polytoped& P) {
  json j;
  j["dim"] = P.dim();
  j["empty"] = P.is_empty();
  if (P.has_hrep()) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < P.F().rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < P.F().cols(); ++k) row.push_back(P.F()(i, k));
      rows.push_back(row);
    }
    j["F"] = rows;
    j["g"] = std::vector<double>(P.g().data(), P.g().data() + P.g().size());
  }
  if (P.has_vrep()) {
    json verts = json::array();
    for (Eigen::Index c = 0; c < P.vertices().cols(); ++c) {
      json v = json::array();
      for (Eigen::Index k = 0; k < P.vertices().rows(); ++k) {
        v.push_back(P.vertices()(k, c));
      }
      verts.push_back(v);
    }
    j["vertices"] = verts;
  }
  return j;
}

Polytoped polytope_from_json(const json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    const bool is_empty = j.value("empty", false);
    std::optional<Eigen::MatrixXd> F;
    std::optional<Eigen::VectorXd> g;
    std::optional<Eigen::MatrixXd> V;
    if (j.contains("F")) {
      const auto& rows = j.at("F");
      Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), dim);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != static_cast<std::size_t>(dim)) {
          throw DimensionMismatch("F row has wrong length");
        }
        for (int k = 0; k < dim; ++k) {
          M(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)].get<double>();
        }
      }
      const auto gv = j.at("g").get<std::vector<double>>();
      F = std::move(M);
      g = Eigen::Map<const Eigen::VectorXd>(gv.data(), static_cast<Eigen::Index>(gv.size()));
    }
    if (j.contains("vertices")) {
      const auto& verts = j.at("vertices");
      Eigen::MatrixXd M(dim, static_cast<Eigen::Index>(verts.size()));
      for (std::size_t c = 0; c < verts.size(); ++c) {
        if (verts[c].size() != static_cast<std::size_t>(dim)) {
          throw DimensionMismatch("vertex has wrong length");
        }
        for (int k = 0; k < dim; ++k) {
          M(k, static_cast<Eigen::Index>(c)) = verts[c][static_cast<std::size_t>(k)].get<double>();
        }
      }
      V = std::move(M);
    }
    if (!F && V && dim <= kMaxExactDimension && !is_empty) {
      return Polytoped::from_vertices(*V);
    }
    if (F && !V && dim <= kMaxExactDimension) {
      return Polytoped::from_hrep(*F, *g);
    }
    return Polytoped::from_representations(dim, std::move(F), std::move(g),
                                           std::move(V), is_empty);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed polytope: ") + e.what());
  }
}

std::string serialize(const Polytoped& P) { return to_json(P).dump(); }

Polytoped deserialize_polytope(const std::string& text) {
  try {
    return polytope_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("malformed polytope text: ") + e.what());
  }
}

}  // namespace wtmpc
