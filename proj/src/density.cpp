#include <kamnf/density.hpp>

#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kamnf {

double wilson_half_width(double p, int n) {
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double z2 = z * z;
  return z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * double(n) * n)) /
         (1.0 + z2 / n);
}

namespace {

std::vector<double> sample_ball(int n, double r, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (;;) {
    double nn = 0;
    for (int i = 0; i < n; ++i) {
      x[i] = u(rng);
      nn += x[i] * x[i];
    }
    if (nn <= 1.0) break;
  }
  for (double &v : x) v *= r;
  return x;
}

std::vector<double> shifted_frequency(const std::vector<SeriesD> &ghat,
                                      const std::vector<double> &alpha,
                                      const std::vector<double> &lambda) {
  const int n = static_cast<int>(alpha.size());
  std::vector<std::complex<double>> l(lambda.begin(), lambda.end());
  std::vector<double> beta(n);
  for (int i = 0; i < n; ++i) {
    std::complex<double> v = ghat[i].eval({}, {}, l, {});
    beta[i] = alpha[i] + v.real();
  }
  return beta;
}

}  // namespace

DensityReport density_estimate(const std::vector<SeriesD> &ghat,
                               const std::vector<double> &alpha, double tau,
                               int K, const std::vector<double> &radii,
                               int samples, std::uint64_t seed,
                               SamplingMode mode) {
  const int n = static_cast<int>(alpha.size());
  if (static_cast<int>(ghat.size()) != n)
    throw std::invalid_argument("ghat/alpha dimension mismatch");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1]))
      throw std::invalid_argument("radii must be strictly decreasing");
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");

  const std::vector<double> a = tau_sequence(alpha, tau, K);
  const LatticeLevels lat = build_lattice_levels(n, K);

  DensityReport rep;
  rep.radii = radii;
  rep.samples_per_radius = samples;
  rep.K = K;
  rep.tau = tau;
  rep.sigma_note =
      "sigma(alpha) taken as alpha's own Bruno sequence a_k(alpha)";

  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    long hits = 0;
    long total = 0;
    if (mode == SamplingMode::MonteCarlo) {
      total = samples;
      std::vector<char> verdict(samples, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (int s = 0; s < samples; ++s) {
        std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (ri + 1)) ^
                            (0xbf58476d1ce4e5b9ULL * (s + 1)));
        std::vector<double> lambda = sample_ball(n, r, rng);
        std::vector<double> beta = shifted_frequency(ghat, alpha, lambda);
        verdict[s] = member_of_class(lat, beta, a) ? 1 : 0;
      }
      for (char v : verdict) hits += v;
    } else {
      const int side = std::max(
          2, static_cast<int>(std::round(std::pow(double(samples), 1.0 / n))));
      std::vector<int> idx(n, 0);
      std::vector<double> lambda(n);
      std::vector<long> counts(2, 0);
      // full grid walk over [-r,r]^n, keep points inside the ball
      long npts = 1;
      for (int i = 0; i < n; ++i) npts *= side;
      for (long flat = 0; flat < npts; ++flat) {
        long rem = flat;
        double nn = 0;
        for (int i = 0; i < n; ++i) {
          const int gi = static_cast<int>(rem % side);
          rem /= side;
          lambda[i] = -r + 2.0 * r * (gi + 0.5) / side;
          nn += lambda[i] * lambda[i];
        }
        if (nn > r * r) continue;
        ++total;
        std::vector<double> beta = shifted_frequency(ghat, alpha, lambda);
        if (member_of_class(lat, beta, a)) ++hits;
      }
    }
    const double frac = total ? double(hits) / double(total) : 0.0;
    rep.fractions.push_back(frac);
    rep.ci_half_widths.push_back(
        wilson_half_width(frac, static_cast<int>(std::max<long>(1, total))));
  }
  return rep;
}

}  // namespace kamnf
