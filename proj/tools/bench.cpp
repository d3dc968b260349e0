// Compares the parallel kernels against their serial references:
// series products, Bruno lattice enumeration, and density sampling.
#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <kamnf/bruno.hpp>
#include <kamnf/density.hpp>
#include <kamnf/series.hpp>

using namespace kamnf;

namespace {

template <class F>
double time_best(F &&f, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

SeriesD random_series(int n, int N, int terms, std::uint64_t seed) {
  SeriesD s(n, N);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> deg(0, N);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  while (static_cast<int>(s.terms().size()) < terms) {
    ExponentVec e(n);
    int budget = deg(rng);
    for (int i = 0; i < n && budget > 0; ++i) {
      std::uniform_int_distribution<int> part(0, budget);
      int q = part(rng), p = part(rng);
      if (q + p > budget) continue;
      e.at(Var::Q, i) = q;
      e.at(Var::P, i) = p;
      budget -= q + p;
    }
    s.addTerm(e, {coef(rng), coef(rng)});
  }
  return s;
}

void set_threads(int t) {
#ifdef _OPENMP
  omp_set_num_threads(t);
#else
  (void)t;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace

int main() {
  const int threads = max_threads();
  std::printf("hardware threads available to OpenMP: %d\n\n", threads);

  {
    SeriesD a = random_series(3, 12, 4000, 11);
    SeriesD b = random_series(3, 12, 4000, 17);
    SeriesD ref, par;
    double ts = time_best([&] { ref = a.mulSerial(b); });
    double tp = time_best([&] { par = a * b; });
    std::printf("series product (n=3, N=12, 4000x4000 terms)\n");
    std::printf("  serial   %8.3f ms\n", ts * 1e3);
    std::printf("  parallel %8.3f ms  (speedup %.2fx, match %s)\n\n", tp * 1e3,
                ts / tp, (ref - par).maxAbsCoeff() < 1e-10 ? "yes" : "NO");
  }

  {
    std::vector<double> alpha{1.0, std::sqrt(2.0), std::sqrt(3.0)};
    BrunoProfile r1, rp;
    set_threads(1);
    double ts = time_best([&] { r1 = bruno_sequence(alpha, 7); }, 2);
    set_threads(threads);
    double tp = time_best([&] { rp = bruno_sequence(alpha, 7); }, 2);
    bool same = r1.a == rp.a && r1.witnesses == rp.witnesses;
    std::printf("Bruno enumeration (n=3, K=7)\n");
    std::printf("  1 thread  %8.3f ms\n", ts * 1e3);
    std::printf("  %d threads %8.3f ms  (speedup %.2fx, match %s)\n\n",
                threads, tp * 1e3, ts / tp, same ? "yes" : "NO");
  }

  {
    SeriesD g1(2, 6), g2(2, 6);
    ExponentVec e(2);
    e.at(Var::L, 0) = 1;
    g1.addTerm(e, 2.0);
    std::vector<SeriesD> ghat{g1, g2};
    std::vector<double> alpha{1.0, std::sqrt(2.0)};
    std::vector<double> radii{0.1};
    DensityReport r1, rp;
    set_threads(1);
    double ts = time_best(
        [&] { r1 = density_estimate(ghat, alpha, 2.0, 6, radii, 20000, 1); },
        2);
    set_threads(threads);
    double tp = time_best(
        [&] { rp = density_estimate(ghat, alpha, 2.0, 6, radii, 20000, 1); },
        2);
    bool same = r1.fractions == rp.fractions;
    std::printf("density sampling (n=2, K=6, 20000 samples)\n");
    std::printf("  1 thread  %8.3f ms\n", ts * 1e3);
    std::printf("  %d threads %8.3f ms  (speedup %.2fx, match %s)\n",
                threads, tp * 1e3, ts / tp, same ? "yes" : "NO");
  }
  return 0;
}
