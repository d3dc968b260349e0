#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <kamnf/frequency.hpp>
#include <kamnf/io.hpp>

using namespace kamnf;
using Cd = std::complex<double>;

namespace {

const double kSqrt2 = std::sqrt(2.0);

FrequencyVectorD freq(std::initializer_list<double> v) {
  FrequencyVectorD a;
  for (double x : v) a.alpha.emplace_back(x, 0.0);
  return a;
}

// independent rank oracle: Gaussian elimination with partial pivoting over
// the coefficient matrix rebuilt from scratch
int rank_oracle(const std::vector<SeriesD> &ghat, double tol = 1e-10) {
  std::map<std::vector<int>, int> cols;
  for (const auto &g : ghat)
    for (const auto &[e, c] : g.terms())
      if (e.gradedDegree() > 0) cols.emplace(e.raw(), (int)cols.size());
  const int n = (int)ghat.size(), m = (int)cols.size();
  std::vector<std::vector<Cd>> M(n, std::vector<Cd>(m, Cd(0)));
  for (int i = 0; i < n; ++i)
    for (const auto &[e, c] : ghat[i].terms())
      if (e.gradedDegree() > 0) M[i][cols.at(e.raw())] = c;
  int rank = 0;
  for (int col = 0; col < m && rank < n; ++col) {
    int piv = -1;
    double best = tol;
    for (int r = rank; r < n; ++r)
      if (std::abs(M[r][col]) > best) {
        best = std::abs(M[r][col]);
        piv = r;
      }
    if (piv < 0) continue;
    std::swap(M[rank], M[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == rank) continue;
      Cd f = M[r][col] / M[rank][col];
      for (int cc = col; cc < m; ++cc) M[r][cc] -= f * M[rank][cc];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

TEST_CASE("worked example spans the first coordinate axis") {
  std::vector<SeriesD> ghat{parse_series("2*l1", 2, 8), SeriesD(2, 8)};
  auto fs = frequency_space(ghat);
  CHECK(fs.space_dim == 1);
  CHECK(std::abs(fs.space_basis(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(fs.space_basis(1, 0)) < 1e-14);
  CHECK(rank_oracle(ghat) == 1);
}

TEST_CASE("rank detection against the elimination oracle") {
  std::vector<SeriesD> g2{parse_series("2*l1 + l2^2", 2, 8),
                          parse_series("3*l1", 2, 8)};
  auto fs2 = frequency_space(g2);
  CHECK(fs2.space_dim == 2);
  CHECK(rank_oracle(g2) == 2);

  std::vector<SeriesD> g1{parse_series("2*l1 + 4*l1^2", 2, 8),
                          parse_series("3*l1 + 6*l1^2", 2, 8)};
  auto fs1 = frequency_space(g1);
  CHECK(fs1.space_dim == 1);
  CHECK(rank_oracle(g1) == 1);
  // basis parallel to (2,3)/sqrt(13)
  Cd r = fs1.space_basis(1, 0) / fs1.space_basis(0, 0);
  CHECK(std::abs(r - Cd(1.5)) < 1e-12);

  std::vector<SeriesD> g0{SeriesD(2, 8), SeriesD(2, 8)};
  CHECK(frequency_space(g0).space_dim == 0);
}

TEST_CASE("frequency map must vanish at the origin") {
  std::vector<SeriesD> bad{parse_series("1 + 2*l1", 2, 8), SeriesD(2, 8)};
  CHECK_THROWS_AS(frequency_space(bad), std::invalid_argument);
}

TEST_CASE("principal angles") {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2, 1);
  A(0, 0) = 1;
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(2, 1);
  B(1, 0) = 1;
  CHECK(max_principal_angle(A, A) < 1e-14);
  CHECK(max_principal_angle(A, B) == doctest::Approx(M_PI / 2));
  Eigen::MatrixXcd Z(2, 0);
  CHECK(max_principal_angle(A, Z) == doctest::Approx(M_PI / 2));
  CHECK(max_principal_angle(Z, Z) == 0.0);
}

TEST_CASE("frequency space is invariant under Poisson automorphisms") {
  SeriesD H = parse_series("q1*p1 + 1.4142135623730951*q2*p2 + q1^2*p1^2", 2,
                           10);
  double angle =
      automorphism_invariance_check(H, freq({1.0, kSqrt2}), 4, 3, 3, 42);
  CHECK(angle < 1e-8);
}
