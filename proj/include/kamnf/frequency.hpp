#ifndef KAMNF_FREQUENCY_HPP
#define KAMNF_FREQUENCY_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <kamnf/normalform.hpp>

namespace kamnf {

struct FrequencyMapResult {
  std::vector<SeriesD> ghat;
  Eigen::MatrixXcd space_basis;  // n x dim, orthonormal columns
  int space_dim = 0;
};

// F(H): span of the coefficient vectors (ghat_1[c],...,ghat_n[c]) over
// lambda-monomials c, via a rank-revealing SVD.  Singular values below
// tol * sigma_max are treated as truncation noise.
inline FrequencyMapResult frequency_space(const std::vector<SeriesD> &ghat,
                                          double tol = 1e-10) {
  if (ghat.empty()) throw std::invalid_argument("empty frequency map");
  const int n = static_cast<int>(ghat.size());
  for (const auto &g : ghat) {
    if (g.dim() != n)
      throw DimensionMismatch("frequency map dimension mismatch");
    if (std::abs(g.coeff(ExponentVec(n))) > tol)
      throw std::invalid_argument("frequency map must vanish at the origin");
  }
  // collect the lambda-monomial support
  std::map<ExponentVec, int> cols;
  for (const auto &g : ghat)
    for (const auto &[e, c] : g.terms()) {
      if (e.gradedDegree() == 0) continue;  // origin value, checked above
      if (!cols.count(e)) {
        int id = static_cast<int>(cols.size());
        cols.emplace(e, id);
      }
    }
  FrequencyMapResult res;
  res.ghat = ghat;
  if (cols.empty()) {
    res.space_basis = Eigen::MatrixXcd::Zero(n, 0);
    return res;
  }
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, static_cast<int>(cols.size()));
  for (int i = 0; i < n; ++i)
    for (const auto &[e, c] : ghat[i].terms())
      if (e.gradedDegree() > 0) M(i, cols.at(e)) = c;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU);
  const auto &sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++rank;
  res.space_dim = rank;
  res.space_basis = svd.matrixU().leftCols(rank);
  return res;
}

// largest principal angle between two subspaces given orthonormal bases;
// dimension mismatch counts as a right angle, two zero spaces as zero
inline double max_principal_angle(const Eigen::MatrixXcd &A,
                                  const Eigen::MatrixXcd &B) {
  if (A.cols() != B.cols()) return M_PI / 2;
  if (A.cols() == 0) return 0.0;
  Eigen::MatrixXcd G = A.adjoint() * B;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  smin = std::min(1.0, std::max(-1.0, smin));
  return std::acos(smin);
}

namespace detail {

inline SeriesD random_homogeneous_generator(int n, int degree, double scale,
                                            const SeriesD &like,
                                            std::mt19937_64 &rng) {
  SeriesD g = SeriesD::zero_like(like);
  std::uniform_real_distribution<double> dist(-scale, scale);
  std::vector<int> e(2 * n, 0);
  std::function<void(int, int)> rec = [&](int i, int rem) {
    if (i == 2 * n - 1) {
      e[i] = rem;
      ExponentVec m(n);
      for (int v = 0; v < n; ++v) {
        m.at(Var::Q, v) = e[v];
        m.at(Var::P, v) = e[n + v];
      }
      g.addTerm(m, dist(rng));
      return;
    }
    for (int v = 0; v <= rem; ++v) {
      e[i] = v;
      rec(i + 1, rem - v);
    }
  };
  rec(0, degree);
  return g;
}

}  // namespace detail

// Conjugate H by random Poisson automorphisms and measure how far the
// frequency space moves.  The span is the invariant; individual ghat
// coefficients do change.
inline double automorphism_invariance_check(const SeriesD &H,
                                            const FrequencyVectorD &alpha,
                                            int k, int generator_degree,
                                            int trials, std::uint64_t seed,
                                            double divisor_threshold = 1e-12) {
  if (generator_degree < 3)
    throw std::invalid_argument("automorphism generators need degree >= 3");
  auto [base_nf, base_ghat] =
      parametric_normal_form(H, alpha, k, divisor_threshold);
  auto base_space = frequency_space(base_ghat);
  double max_angle = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(t) *
                                   0x9e3779b97f4a7c15ULL);
    SeriesD g = detail::random_homogeneous_generator(H.dim(), generator_degree,
                                                     0.1, H, rng);
    SeriesD Hc = lie_exp(g, H);
    auto [nf, ghat] = parametric_normal_form(Hc, alpha, k, divisor_threshold);
    auto space = frequency_space(ghat);
    max_angle = std::max(
        max_angle, max_principal_angle(base_space.space_basis,
                                       space.space_basis));
  }
  return max_angle;
}

}  // namespace kamnf

#endif
