#ifndef KAMNF_PIPELINES_HPP
#define KAMNF_PIPELINES_HPP

#include <map>

#include <kamnf/io.hpp>

namespace kamnf {

// Exit codes: 0 success, 1 usage/config error, 2 mathematical abort
// (small divisor, resonance, t-expansion overflow), reported with witness.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMath = 2;

struct JobConfig {
  int n = 1;
  std::vector<std::string> alpha;  // decimal strings, parsed at precision_bits
  std::string hamiltonian;
  int N = 10;
  int N_t = -1;  // default N/2
  int k = 4;
  int precision_bits = 53;
  double divisor_threshold = 0.0;  // 0 = precision default
  double tau = 2.0;
  int K = 6;
  std::vector<double> radii{0.1, 0.05, 0.025};
  int samples = 10000;
  std::uint64_t seed = 1;
  double T = 50.0;
  double dt = 0.01;
  std::string method = "gauss2";
  std::vector<double> lambda0;  // default all ones
  std::string density_mode = "mc";  // mc | grid

  static JobConfig from_json(const nlohmann::json &j);
  void overlay(const nlohmann::json &j);  // config file wins over flags
  void validate(const std::string &command) const;
};

struct PipelineOutcome {
  int exit_code = kExitOk;
  std::string summary;                          // human-readable
  std::map<std::string, std::string> files;     // filename -> bytes
};

// command in {nf, freq, bruno, density, verify}
PipelineOutcome run_pipeline(const std::string &command, const JobConfig &cfg);

}  // namespace kamnf

#endif
