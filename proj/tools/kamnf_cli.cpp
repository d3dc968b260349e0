#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <kamnf/pipelines.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string &command, kamnf::JobConfig cfg,
        const std::string &config_path, const std::string &out_dir) {
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config file " << config_path << "\n";
      return kamnf::kExitUsage;
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception &e) {
      std::cerr << "error: bad config JSON: " << e.what() << "\n";
      return kamnf::kExitUsage;
    }
    cfg.overlay(j);  // config file overrides flags
  }
  kamnf::PipelineOutcome out = kamnf::run_pipeline(command, cfg);
  (out.exit_code == kamnf::kExitOk ? std::cout : std::cerr) << out.summary;
  if (!out_dir.empty() && !out.files.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
      std::cerr << "error: cannot create output directory " << out_dir << "\n";
      return kamnf::kExitUsage;
    }
    for (const auto &[name, bytes] : out.files) {
      std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
      f << bytes;
      if (!f) {
        std::cerr << "error: failed writing " << name << "\n";
        return kamnf::kExitUsage;
      }
    }
  }
  return out.exit_code;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Normal forms, frequency spaces, and arithmetic tests for "
               "polynomial Hamiltonians near an elliptic equilibrium"};
  app.require_subcommand(1);

  kamnf::JobConfig cfg;
  std::string config_path, out_dir;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path,
                    "JSON config file; its fields override flags");
    sub->add_option("--out", out_dir, "directory for report files");
    sub->add_option("-n,--dof", cfg.n, "degrees of freedom");
    sub->add_option("--alpha", cfg.alpha,
                    "frequency vector, decimal strings");
    sub->add_option("--seed", cfg.seed, "RNG seed");
  };
  auto add_series = [&](CLI::App *sub) {
    sub->add_option("-H,--hamiltonian", cfg.hamiltonian,
                    "Hamiltonian, e.g. 'q1*p1 + q1^4 + 2*q1^2*p1^2'");
    sub->add_option("-N,--max-degree", cfg.N, "series truncation degree");
    sub->add_option("--Nt", cfg.N_t, "parameter truncation (default N/2)");
    sub->add_option("-k,--order", cfg.k, "normal-form order");
    sub->add_option("--precision-bits", cfg.precision_bits,
                    "53 (double) or 113 (quad)");
    sub->add_option("--divisor-threshold", cfg.divisor_threshold,
                    "small-divisor abort threshold (0 = default)");
  };

  CLI::App *nf = app.add_subcommand("nf", "parametric normal form");
  add_common(nf);
  add_series(nf);

  CLI::App *freq = app.add_subcommand("freq", "frequency map and space");
  add_common(freq);
  add_series(freq);

  CLI::App *bruno = app.add_subcommand("bruno", "Bruno sequence and sum");
  add_common(bruno);
  bruno->add_option("-K,--levels", cfg.K, "dyadic levels");

  CLI::App *density =
      app.add_subcommand("density", "invariant-torus density estimate");
  add_common(density);
  add_series(density);
  density->add_option("-K,--levels", cfg.K, "dyadic levels");
  density->add_option("--tau", cfg.tau, "diophantine exponent");
  density->add_option("--radii", cfg.radii, "action-ball radii, decreasing");
  density->add_option("--samples", cfg.samples, "samples per radius");
  density->add_option("--mode", cfg.density_mode, "mc or grid");

  CLI::App *verify =
      app.add_subcommand("verify", "symplectic action-drift check");
  add_common(verify);
  add_series(verify);
  verify->add_option("--radii", cfg.radii, "torus radii");
  verify->add_option("-T,--time", cfg.T, "integration time");
  verify->add_option("--dt", cfg.dt, "time step");
  verify->add_option("--method", cfg.method, "midpoint or gauss2");
  verify->add_option("--lambda0", cfg.lambda0, "base action (default ones)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kamnf::kExitUsage;
  }
  return run(app.get_subcommands().front()->get_name(), cfg, config_path,
             out_dir);
}
