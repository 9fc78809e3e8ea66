#include <fstream>
#include <set>
#include <sstream>

#include "wtmpc/geometry_io.hpp"
#include "wtmpc/harness.hpp"

namespace wtmpc {

using nlohmann::json;

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  SystemSpec& s = cfg.system;
  s.A.resize(2, 2);
  s.A << 1.0, 1.0, 0.0, 1.0;
  s.B.resize(2, 1);
  s.B << 0.5, 1.0;
  s.W = Polytoped::symmetric_box(Eigen::Vector2d(0.15, 0.15));
  s.X = Polytoped::box(Eigen::Vector2d(-10.0, -2.0), Eigen::Vector2d(2.0, 2.0));
  s.U = Polytoped::symmetric_box(Eigen::VectorXd::Constant(1, 1.0));
  s.x0 = Eigen::Vector2d(-5.0, -2.0);
  cfg.mpc.N = 10;
  cfg.mpc.Q = Eigen::MatrixXd::Identity(2, 2);
  cfg.mpc.R = Eigen::MatrixXd::Constant(1, 1, 0.1);
  cfg.mpc.gamma = 0.2;
  cfg.epsilons = {0.0, 0.01, 0.1, 1.0};
  cfg.ns = {10, 20, 50};
  cfg.modes = {NominalMode::wt_simple, NominalMode::robust};
  return cfg;
}

void ExperimentConfig::validate() const {
  const SystemSpec& s = system;
  const auto d = s.A.rows();
  if (d < 1 || s.A.cols() != d) throw ConfigInvalid("A must be square");
  if (s.B.rows() != d || s.B.cols() < 1) throw ConfigInvalid("B must have d rows");
  const auto m = s.B.cols();
  if (s.K && (s.K->rows() != m || s.K->cols() != d)) throw ConfigInvalid("K must be m x d");
  if (s.W.dim() != d || s.X.dim() != d || s.U.dim() != m) {
    throw ConfigInvalid("W, X, U dimensions must match A and B");
  }
  if (s.x0.size() != d) throw ConfigInvalid("x0 must have d entries");
  mpc.validate(static_cast<int>(d), static_cast<int>(m));
  for (double e : epsilons) {
    if (!(e >= 0.0)) throw ConfigInvalid("sweep radii must be >= 0");
  }
  for (int n : ns) {
    if (n < 1) throw ConfigInvalid("sweep trajectory counts must be >= 1");
  }
  if (open_loop.mc_realizations < 1 || open_loop.center_repeats < 0) {
    throw ConfigInvalid("open-loop counts out of range");
  }
  if (closed_loop.T < 1 || closed_loop.repeats < 0) {
    throw ConfigInvalid("closed-loop counts out of range");
  }
  if (workers < 0) throw ConfigInvalid("workers must be >= 0");
  if (pool_factor < 1) throw ConfigInvalid("pool_factor must be >= 1");
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigInvalid(where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigInvalid("unknown key '" + item.key() + "' in " + where);
    }
  }
}

Eigen::MatrixXd matrix_from(const json& j, const std::string& what) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ConfigInvalid(what + " must be a nonempty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 1);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (row.is_number() && cols == 1) {
      M(r, 0) = row.get<double>();
      continue;
    }
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigInvalid(what + " has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return M;
}

Eigen::VectorXd vector_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigInvalid(what + " must be a list");
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json matrix_to(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_to(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Polytoped polytope_from(const json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigInvalid(what + " must be an object");
  try {
    if (j.contains("lo") || j.contains("hi")) {
      check_keys(j, {"lo", "hi"}, what);
      return Polytoped::box(vector_from(j.at("lo"), what), vector_from(j.at("hi"), what));
    }
    json full = j;
    if (!full.contains("dim")) {
      if (full.contains("F")) {
        full["dim"] = full["F"].at(0).size();
      } else if (full.contains("vertices")) {
        full["dim"] = full["vertices"].at(0).size();
      }
    }
    return polytope_from_json(full);
  } catch (const json::exception& e) {
    throw ConfigInvalid(what + ": " + e.what());
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const Error& e) {
    throw ConfigInvalid(what + ": " + e.what());
  }
}

std::string stacking_name(StackingMode m) {
  return m == StackingMode::with_replacement ? "with_replacement" : "without_replacement";
}

std::string dual_form_name(DualForm f) {
  switch (f) {
    case DualForm::compact: return "compact";
    case DualForm::transpose: return "transpose";
    case DualForm::literal: return "literal";
  }
  return "compact";
}

DualForm parse_dual_form(const std::string& s) {
  if (s == "compact") return DualForm::compact;
  if (s == "transpose") return DualForm::transpose;
  if (s == "literal") return DualForm::literal;
  throw ConfigInvalid("unknown dual_form '" + s + "'");
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  try {
    check_keys(j, {"system", "mpc", "sweep", "open_loop", "closed_loop", "outputs", "root_seed",
                   "workers", "stacking", "pool_factor"},
               "config");
    if (j.contains("system")) {
      const json& s = j["system"];
      check_keys(s, {"A", "B", "K", "W", "X", "U", "x0"}, "system");
      if (s.contains("A")) cfg.system.A = matrix_from(s["A"], "A");
      if (s.contains("B")) cfg.system.B = matrix_from(s["B"], "B");
      if (s.contains("K") && !s["K"].is_null()) cfg.system.K = matrix_from(s["K"], "K");
      if (s.contains("W")) cfg.system.W = polytope_from(s["W"], "W");
      if (s.contains("X")) cfg.system.X = polytope_from(s["X"], "X");
      if (s.contains("U")) cfg.system.U = polytope_from(s["U"], "U");
      if (s.contains("x0")) cfg.system.x0 = vector_from(s["x0"], "x0");
    }
    if (j.contains("mpc")) {
      const json& m = j["mpc"];
      check_keys(m, {"N", "Q", "R", "gamma", "terminal", "tol", "max_iterations",
                     "accept_residual", "feedback_fallback", "drop_trivial_piece", "dual_form"},
                 "mpc");
      MpcConfig& c = cfg.mpc;
      c.N = m.value("N", c.N);
      if (m.contains("Q")) c.Q = matrix_from(m["Q"], "Q");
      if (m.contains("R")) c.R = matrix_from(m["R"], "R");
      c.gamma = m.value("gamma", c.gamma);
      if (m.contains("terminal") && !m["terminal"].is_null()) {
        c.terminal = polytope_from(m["terminal"], "terminal");
      }
      c.solve_options.tol = m.value("tol", c.solve_options.tol);
      c.solve_options.max_iterations = m.value("max_iterations", c.solve_options.max_iterations);
      c.accept_residual = m.value("accept_residual", c.accept_residual);
      c.feedback_fallback = m.value("feedback_fallback", c.feedback_fallback);
      c.gamma_options.drop_trivial_piece =
          m.value("drop_trivial_piece", c.gamma_options.drop_trivial_piece);
      if (m.contains("dual_form")) {
        c.gamma_options.dual_form = parse_dual_form(m["dual_form"].get<std::string>());
      }
    }
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      check_keys(s, {"epsilons", "ns", "modes"}, "sweep");
      if (s.contains("epsilons")) cfg.epsilons = s["epsilons"].get<std::vector<double>>();
      if (s.contains("ns")) cfg.ns = s["ns"].get<std::vector<int>>();
      if (s.contains("modes")) {
        cfg.modes.clear();
        for (const auto& name : s["modes"]) cfg.modes.push_back(parse_mode(name.get<std::string>()));
      }
    }
    if (j.contains("open_loop")) {
      const json& o = j["open_loop"];
      check_keys(o, {"mc_realizations", "center_repeats", "tube_sections"}, "open_loop");
      cfg.open_loop.mc_realizations = o.value("mc_realizations", cfg.open_loop.mc_realizations);
      cfg.open_loop.center_repeats = o.value("center_repeats", cfg.open_loop.center_repeats);
      cfg.open_loop.tube_sections = o.value("tube_sections", cfg.open_loop.tube_sections);
    }
    if (j.contains("closed_loop")) {
      const json& c = j["closed_loop"];
      check_keys(c, {"T", "repeats", "trajectories"}, "closed_loop");
      cfg.closed_loop.T = c.value("T", cfg.closed_loop.T);
      cfg.closed_loop.repeats = c.value("repeats", cfg.closed_loop.repeats);
      cfg.closed_loop.trajectories = c.value("trajectories", cfg.closed_loop.trajectories);
    }
    if (j.contains("outputs")) {
      const json& o = j["outputs"];
      check_keys(o, {"directory"}, "outputs");
      cfg.output_dir = o.value("directory", cfg.output_dir);
    }
    cfg.root_seed = j.value("root_seed", cfg.root_seed);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.pool_factor = j.value("pool_factor", cfg.pool_factor);
    if (j.contains("stacking")) {
      const std::string s = j["stacking"].get<std::string>();
      if (s == "with_replacement") {
        cfg.stacking = StackingMode::with_replacement;
      } else if (s == "without_replacement") {
        cfg.stacking = StackingMode::without_replacement;
      } else {
        throw ConfigInvalid("unknown stacking '" + s + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  json s;
  s["A"] = matrix_to(cfg.system.A);
  s["B"] = matrix_to(cfg.system.B);
  s["K"] = cfg.system.K ? matrix_to(*cfg.system.K) : json(nullptr);
  s["W"] = to_json(cfg.system.W);
  s["X"] = to_json(cfg.system.X);
  s["U"] = to_json(cfg.system.U);
  s["x0"] = vector_to(cfg.system.x0);
  j["system"] = s;
  json m;
  m["N"] = cfg.mpc.N;
  m["Q"] = matrix_to(cfg.mpc.Q);
  m["R"] = matrix_to(cfg.mpc.R);
  m["gamma"] = cfg.mpc.gamma;
  m["terminal"] = cfg.mpc.terminal ? to_json(*cfg.mpc.terminal) : json(nullptr);
  m["tol"] = cfg.mpc.solve_options.tol;
  m["max_iterations"] = cfg.mpc.solve_options.max_iterations;
  m["accept_residual"] = cfg.mpc.accept_residual;
  m["feedback_fallback"] = cfg.mpc.feedback_fallback;
  m["drop_trivial_piece"] = cfg.mpc.gamma_options.drop_trivial_piece;
  m["dual_form"] = dual_form_name(cfg.mpc.gamma_options.dual_form);
  j["mpc"] = m;
  json modes = json::array();
  for (auto mode : cfg.modes) modes.push_back(to_string(mode));
  j["sweep"] = {{"epsilons", cfg.epsilons}, {"ns", cfg.ns}, {"modes", modes}};
  j["open_loop"] = {{"mc_realizations", cfg.open_loop.mc_realizations},
                    {"center_repeats", cfg.open_loop.center_repeats},
                    {"tube_sections", cfg.open_loop.tube_sections}};
  j["closed_loop"] = {{"T", cfg.closed_loop.T},
                      {"repeats", cfg.closed_loop.repeats},
                      {"trajectories", cfg.closed_loop.trajectories}};
  j["outputs"] = {{"directory", cfg.output_dir}};
  j["root_seed"] = cfg.root_seed;
  j["workers"] = cfg.workers;
  j["stacking"] = stacking_name(cfg.stacking);
  j["pool_factor"] = cfg.pool_factor;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ConfigInvalid("config " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace wtmpc
