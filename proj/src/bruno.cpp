#include <kamnf/bruno.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kamnf {

namespace {

struct MinRecord {
  double value = std::numeric_limits<double>::infinity();
  std::vector<int> witness;

  void offer(double v, const std::vector<int> &j) {
    if (witness.empty() || v < value || (v == value && j < witness)) {
      value = v;
      witness = j;
    }
  }
  void merge(const MinRecord &o) {
    if (!o.witness.empty()) offer(o.value, o.witness);
  }
};

void check_feasible(int n, int K) {
  if (n < 1 || K < 0) throw std::invalid_argument("bad dimension or level");
  if (K > 60) throw FeasibilityError("level K too large");
  const double side = 2.0 * std::pow(2.0, K) + 1.0;
  if (std::pow(side, n) > 1e9)
    throw FeasibilityError("lattice enumeration would exceed 1e9 points");
}

// visit one representative of each +-pair with 0 < ||j|| <= R, in
// deterministic lex order per leading coordinate
template <class F>
void enumerate_half_lattice(int n, double R, F &&visit) {
  const int Ri = static_cast<int>(std::floor(R));
  const double R2 = R * R;
  std::vector<int> j(n, 0);
  // leading coordinate positive, or zero with the suffix canonical
  std::function<void(int, double, bool)> rec = [&](int i, double norm2,
                                                   bool lead_found) {
    if (i == n) {
      if (lead_found && norm2 > 0 && norm2 <= R2) visit(j);
      return;
    }
    const int lo = lead_found ? -Ri : 0;
    for (int v = lo; v <= Ri; ++v) {
      const double nn = norm2 + double(v) * v;
      if (nn > R2) continue;
      j[i] = v;
      rec(i + 1, nn, lead_found || v > 0);
    }
    j[i] = 0;
  };
  rec(0, 0.0, false);
}

}  // namespace

BrunoProfile bruno_sequence(const std::vector<double> &alpha, int K) {
  const int n = static_cast<int>(alpha.size());
  check_feasible(n, K);
  BrunoProfile prof;
  prof.alpha = alpha;
  prof.levels = K;

  MinRecord best;
  for (int k = 0; k <= K; ++k) {
    const double R = std::pow(2.0, k);
    const double Rprev = k == 0 ? 0.0 : std::pow(2.0, k - 1);
    // annulus Rprev < ||j|| <= R, incremental over levels
    MinRecord annulus;
#ifdef _OPENMP
    if (n >= 2 && R >= 64.0) {
      const int Ri = static_cast<int>(std::floor(R));
      const int nthreads = omp_get_max_threads();
      std::vector<MinRecord> part(nthreads);
#pragma omp parallel for schedule(static)
      for (int v0 = 0; v0 <= Ri; ++v0) {
        MinRecord &rec = part[omp_get_thread_num()];
        // suffix enumeration with fixed leading coordinate
        std::vector<int> j(n, 0);
        j[0] = v0;
        const double R2 = R * R, Rp2 = Rprev * Rprev;
        std::function<void(int, double, bool)> go = [&](int i, double norm2,
                                                        bool lead) {
          if (i == n) {
            if (lead && norm2 > Rp2 && norm2 <= R2) {
              double s = 0;
              for (int m = 0; m < n; ++m) s += j[m] * alpha[m];
              rec.offer(std::fabs(s), j);
            }
            return;
          }
          const int lo = lead ? -Ri : 0;
          for (int v = lo; v <= Ri; ++v) {
            const double nn = norm2 + double(v) * v;
            if (nn > R2) continue;
            j[i] = v;
            go(i + 1, nn, lead || v > 0);
          }
          j[i] = 0;
        };
        go(1, double(v0) * v0, v0 > 0);
      }
      for (const auto &r : part) annulus.merge(r);
    } else
#endif
    {
      enumerate_half_lattice(n, R, [&](const std::vector<int> &j) {
        double nn = 0;
        for (int v : j) nn += double(v) * v;
        if (nn <= Rprev * Rprev) return;
        double s = 0;
        for (int m = 0; m < n; ++m) s += j[m] * alpha[m];
        annulus.offer(std::fabs(s), j);
      });
    }
    best.merge(annulus);
    prof.a.push_back(best.value);
    prof.witnesses.push_back(best.witness);
    if (best.value == 0.0 && !prof.resonant) {
      prof.resonant = true;
      prof.resonant_level = k;
    }
    const double prev = k == 0 ? 0.0 : prof.partial_sums.back();
    prof.partial_sums.push_back(prev +
                                std::log(best.value) / std::pow(2.0, k));
  }
  return prof;
}

BrunoSum bruno_sum(const BrunoProfile &profile) {
  BrunoSum s;
  s.partial_sums = profile.partial_sums;
  if (profile.resonant) {
    s.finite = false;
    s.tail_gap = std::numeric_limits<double>::infinity();
    s.verdict = "resonant: a_k = 0, sum diverges to -inf (heuristic at level " +
                std::to_string(profile.levels) + ")";
    return s;
  }
  const int K = profile.levels;
  const int q = (3 * K) / 4;
  s.tail_gap = std::fabs(s.partial_sums[K] - s.partial_sums[q]);
  s.verdict = (s.tail_gap < 0.1 ? "Bruno-like (converging partial sums)"
                                : "divergence trend") +
              std::string(" -- heuristic at level ") + std::to_string(K);
  return s;
}

MembershipResult class_membership(const std::vector<double> &beta,
                                  const std::vector<double> &a, int K) {
  const int n = static_cast<int>(beta.size());
  check_feasible(n, K);
  if (static_cast<int>(a.size()) < K + 1)
    throw std::invalid_argument("sequence a shorter than K+1");
  LatticeLevels lat = build_lattice_levels(n, K);
  MembershipResult res;
  if (K < 1) return res;  // levels start at k = 1; nothing to test
  const std::size_t m = lat.level.size();
  for (std::size_t idx = 0; idx < m; ++idx) {
    double s = 0;
    for (int v = 0; v < n; ++v) s += lat.flat[idx * n + v] * beta[v];
    const int k = std::max(lat.level[idx], 1);
    if (std::fabs(s) < a[k]) {
      res.member = false;
      res.first_failure_level = k;
      res.witness.assign(lat.flat.begin() + idx * n,
                         lat.flat.begin() + (idx + 1) * n);
      return res;
    }
  }
  return res;
}

std::vector<double> tau_sequence(const std::vector<double> &alpha, double tau,
                                 int K) {
  BrunoProfile prof = bruno_sequence(alpha, K);
  if (prof.resonant)
    throw std::invalid_argument("tau_sequence: alpha is resonant at level " +
                                std::to_string(prof.resonant_level));
  std::vector<double> a(K + 1);
  for (int k = 0; k <= K; ++k)
    a[k] = prof.a[k] * std::pow(2.0, -tau * k);
  return a;
}

LatticeLevels build_lattice_levels(int n, int K) {
  check_feasible(n, K);
  LatticeLevels lat;
  lat.n = n;
  lat.K = K;
  const double R = std::pow(2.0, K);
  enumerate_half_lattice(n, R, [&](const std::vector<int> &j) {
    double nn = 0;
    for (int v : j) nn += double(v) * v;
    const double norm = std::sqrt(nn);
    int k = 0;
    while (std::pow(2.0, k) < norm) ++k;
    for (int v : j) lat.flat.push_back(v);
    lat.level.push_back(k);
  });
  return lat;
}

bool member_of_class(const LatticeLevels &lat, const std::vector<double> &beta,
                     const std::vector<double> &a) {
  const int n = lat.n;
  if (lat.K < 1) return true;
  const std::size_t m = lat.level.size();
  for (std::size_t idx = 0; idx < m; ++idx) {
    double s = 0;
    for (int v = 0; v < n; ++v) s += lat.flat[idx * n + v] * beta[v];
    if (std::fabs(s) < a[std::max(lat.level[idx], 1)]) return false;
  }
  return true;
}

}  // namespace kamnf
