#ifndef KAMNF_BRUNO_HPP
#define KAMNF_BRUNO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kamnf {

struct FeasibilityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// a_k = min |<j, alpha>| over 0 < ||j|| <= 2^k (Euclidean norm), with the
// lexicographically-smallest representative among minimizers recorded as
// witness.  a_k = 0 flags an exact resonance.
struct BrunoProfile {
  std::vector<double> alpha;
  int levels = 0;                       // K
  std::vector<double> a;                // a_0..a_K
  std::vector<std::vector<int>> witnesses;
  std::vector<double> partial_sums;     // sum_{m<=k} log(a_m)/2^m
  bool resonant = false;
  int resonant_level = -1;
};

struct BrunoSum {
  std::vector<double> partial_sums;
  double tail_gap = 0.0;  // |S_K - S_{floor(3K/4)}|, last-quarter variation
  bool finite = true;     // false iff some a_k = 0
  std::string verdict;    // explicitly a heuristic at level K
};

struct MembershipResult {
  bool member = true;
  int first_failure_level = -1;
  std::vector<int> witness;
};

// throws FeasibilityError when the lattice enumeration would exceed ~1e9
// points
BrunoProfile bruno_sequence(const std::vector<double> &alpha, int K);

BrunoSum bruno_sum(const BrunoProfile &profile);

// beta in C(a): min_{0<||j||<=2^k} |<j,beta>| >= a_k for 1 <= k <= K.
// The level-0 bound is deliberately not enforced: requiring it would
// exclude a half-neighborhood of any alpha whose smallest unit-lattice
// value is attained exactly, emptying the classes near the base frequency.
MembershipResult class_membership(const std::vector<double> &beta,
                                  const std::vector<double> &a, int K);

// a_k := a_k(alpha) * 2^{-tau k}; throws on resonant alpha
std::vector<double> tau_sequence(const std::vector<double> &alpha, double tau,
                                 int K);

// Precomputed half-lattice with per-point dyadic level, for batched
// membership tests (density estimation).
struct LatticeLevels {
  int n = 0;
  int K = 0;
  std::vector<int> flat;    // points, n ints each (one of each +-pair)
  std::vector<int> level;   // smallest k with ||j|| <= 2^k
};

LatticeLevels build_lattice_levels(int n, int K);

bool member_of_class(const LatticeLevels &lat, const std::vector<double> &beta,
                     const std::vector<double> &a);

}  // namespace kamnf

#endif
