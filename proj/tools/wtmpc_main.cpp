#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "wtmpc/conic.hpp"
#include "wtmpc/drcvar.hpp"
#include "wtmpc/errors.hpp"
#include "wtmpc/harness.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;
constexpr int kInfeasibleAtStart = 4;

wtmpc::ExperimentConfig config_or_defaults(const std::string& path) {
  return path.empty() ? wtmpc::ExperimentConfig::defaults() : wtmpc::load_config(path);
}

int run_open_loop(const std::string& config, const std::string& out) {
  const auto cfg = config_or_defaults(config);
  const auto ctx = wtmpc::make_context(cfg);
  const auto table = wtmpc::run_open_loop(ctx);
  wtmpc::emit_outputs(table, cfg, out.empty() ? cfg.output_dir : out);
  return 0;
}

int run_closed_loop(const std::string& config, const std::string& out) {
  const auto cfg = config_or_defaults(config);
  const auto ctx = wtmpc::make_context(cfg);
  const auto table = wtmpc::run_closed_loop(ctx);
  wtmpc::emit_outputs(table, cfg, out.empty() ? cfg.output_dir : out);
  return 0;
}

int run_tube(const std::string& config, const std::string& out, double epsilon, int n,
             int repeat) {
  const auto cfg = config_or_defaults(config);
  const auto ctx = wtmpc::make_context(cfg);
  const auto data = wtmpc::make_dataset(ctx, n, repeat);
  const auto tube = wtmpc::propagate_tube(ctx.stack, data, epsilon, cfg.mpc.N);
  const std::string dir = out.empty() ? cfg.output_dir + "/tube" : out;
  std::filesystem::create_directories(dir);
  wtmpc::write_tube(tube, dir);
  wtmpc::write_trajectories_csv(dir + "/noise_trajectories.csv", data.trajectories,
                                data.state_dim());
  return 0;
}

int run_dump_gamma(const std::string& config, const std::string& program_path, int step,
                   double epsilon, int n, bool tightened) {
  const auto cfg = config_or_defaults(config);
  if (step < 1 || step >= cfg.mpc.N) {
    throw wtmpc::ConfigInvalid("--step must lie in 1..N-1");
  }
  const auto ctx = wtmpc::make_context(cfg);
  const auto data = wtmpc::make_dataset(ctx, n, 0);
  const auto tube = wtmpc::propagate_tube(ctx.stack, data, epsilon, cfg.mpc.N);
  const auto loss = wtmpc::PwaLoss::from_polytope(ctx.plant.X);
  std::vector<wtmpc::GammaBlock> blocks;
  if (tightened) {
    blocks = wtmpc::build_tightened_spec(ctx.stack, tube, loss, cfg.mpc.gamma, step,
                                         cfg.mpc.gamma_options)
                 .blocks;
  } else {
    blocks.push_back(
        wtmpc::build_gamma_block(tube.at(step), loss, cfg.mpc.gamma, cfg.mpc.gamma_options));
  }
  nlohmann::json out = nlohmann::json::array();
  wtmpc::ConicBuilder builder;
  const int z = builder.add_variables(ctx.plant.sys.state_dim());
  std::vector<int> zv;
  for (int k = 0; k < ctx.plant.sys.state_dim(); ++k) zv.push_back(z + k);
  for (const auto& b : blocks) {
    out.push_back({{"t", b.t},
                   {"n", b.n},
                   {"J", b.J},
                   {"q", b.q},
                   {"epsilon", b.epsilon},
                   {"gamma", b.gamma},
                   {"affine_rows", b.affine_rows()},
                   {"cone_count", b.cone_count()},
                   {"zeta_count", b.zeta_count()},
                   {"offsets", std::vector<double>(b.offsets.data(),
                                                   b.offsets.data() + b.offsets.size())}});
    wtmpc::append_gamma_block(builder, b, wtmpc::StateRef::variables(zv), true);
  }
  std::cout << out.dump(2) << '\n';
  if (!program_path.empty()) {
    std::ofstream f(program_path);
    if (!f) throw wtmpc::IoError("cannot write " + program_path);
    f << wtmpc::dump_program(builder.build());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein tube MPC experiments"};
  app.require_subcommand(1);
  std::string config;
  std::string out;
  double epsilon = 0.1;
  int n = 20;
  int repeat = 0;
  int step = 1;
  bool tightened = false;
  std::string program_path;

  auto* open = app.add_subcommand("run-open-loop", "open-loop violation study");
  auto* closed = app.add_subcommand("run-closed-loop", "closed-loop violation and cost study");
  auto* tube = app.add_subcommand("tube", "export the Wasserstein tube of one dataset");
  auto* dump = app.add_subcommand("dump-gamma", "print the conic block of one nominal step");
  for (auto* sub : {open, closed, tube, dump}) {
    sub->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
  }
  for (auto* sub : {open, closed, tube}) {
    sub->add_option("--out", out, "output directory (overrides the config)");
  }
  for (auto* sub : {tube, dump}) {
    sub->add_option("--epsilon", epsilon, "Wasserstein radius");
    sub->add_option("-n,--samples", n, "number of noise trajectories");
  }
  tube->add_option("--repeat", repeat, "dataset repeat index");
  dump->add_option("--step", step, "nominal step k")->required();
  dump->add_flag("--tightened", tightened, "emit the k blocks of the tightened set");
  dump->add_option("--program", program_path, "also write the conic program to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*open) return run_open_loop(config, out);
    if (*closed) return run_closed_loop(config, out);
    if (*tube) return run_tube(config, out, epsilon, n, repeat);
    if (*dump) return run_dump_gamma(config, program_path, step, epsilon, n, tightened);
  } catch (const wtmpc::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const wtmpc::Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasibleAtStart;
  } catch (const wtmpc::Error& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
  return 0;
}
