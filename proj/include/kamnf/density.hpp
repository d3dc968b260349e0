#ifndef KAMNF_DENSITY_HPP
#define KAMNF_DENSITY_HPP

#include <kamnf/bruno.hpp>
#include <kamnf/series.hpp>

namespace kamnf {

struct DensityReport {
  std::vector<double> radii;
  std::vector<double> fractions;
  std::vector<double> ci_half_widths;  // 95% Wilson
  int samples_per_radius = 0;
  int K = 0;
  double tau = 0.0;
  std::string sigma_note;  // the sigma(alpha) interpretation in use
};

enum class SamplingMode { MonteCarlo, Grid };

// Fraction of lambda in the real ball B(0,r) whose shifted frequency
// beta = alpha + Re ghat(lambda) lies in C(a) with a_k = a_k(alpha) 2^{-tau k}.
// Monte-Carlo samples are drawn with per-sample seeds derived from
// (seed, radius index, sample index); grid mode uses samples^(1/n) points
// per side.
DensityReport density_estimate(const std::vector<SeriesD> &ghat,
                               const std::vector<double> &alpha, double tau,
                               int K, const std::vector<double> &radii,
                               int samples, std::uint64_t seed,
                               SamplingMode mode = SamplingMode::MonteCarlo);

double wilson_half_width(double fraction, int samples);

}  // namespace kamnf

#endif
