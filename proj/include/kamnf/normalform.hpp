#ifndef KAMNF_NORMALFORM_HPP
#define KAMNF_NORMALFORM_HPP

#include <functional>
#include <random>
#include <sstream>

#include <kamnf/poisson.hpp>

namespace kamnf {

template <class R>
R default_divisor_threshold() {
  return std::numeric_limits<R>::epsilon() < R(1e-30) ? R(1e-25) : R(1e-12);
}

class SmallDivisorError : public std::runtime_error {
public:
  SmallDivisorError(std::vector<int> witness, double divisor)
      : std::runtime_error(describe(witness, divisor)),
        witness_(std::move(witness)), divisor_(divisor) {}
  const std::vector<int> &witness() const { return witness_; }
  double divisor() const { return divisor_; }

private:
  static std::string describe(const std::vector<int> &w, double d) {
    std::ostringstream os;
    os << "small divisor |<j,alpha>| = " << d << " at j = (";
    for (std::size_t i = 0; i < w.size(); ++i)
      os << (i ? "," : "") << w[i];
    os << ")";
    return os.str();
  }
  std::vector<int> witness_;
  double divisor_;
};

template <class C>
struct HomologicalSolution {
  Series<C> generator;       // f with {H0, f} = R - resonant_part
  Series<C> resonant_part;   // B, a polynomial in the action symbols
  typename Series<C>::Real min_divisor{0};
  std::vector<int> divisor_witness;  // b - a achieving the minimum
};

namespace detail {

template <class C>
std::vector<int> bracket_eigen_index(const ExponentVec &e) {
  std::vector<int> j(e.dim());
  for (int i = 0; i < e.dim(); ++i) j[i] = e.at(Var::P, i) - e.at(Var::Q, i);
  return j;
}

template <class C>
C eigenvalue(const std::vector<int> &j, const FrequencyVector<C> &alpha) {
  C d(0);
  for (std::size_t i = 0; i < j.size(); ++i)
    d += C(typename Series<C>::Real(j[i])) * alpha.alpha[i];
  return d;
}

}  // namespace detail

// Solve {H0, f} = R - B for H0 = sum alpha_i p_i q_i.  The cohomological
// operator is diagonal on monomials q^a p^b with eigenvalue <b-a, alpha>;
// resonant monomials (a = b) are routed to B on the action symbols.
template <class C>
HomologicalSolution<C> solve_homological(
    const FrequencyVector<C> &alpha, const Series<C> &R,
    typename Series<C>::Real divisor_threshold =
        default_divisor_threshold<typename Series<C>::Real>()) {
  using std::abs;
  using Real = typename Series<C>::Real;
  if (alpha.dim() != R.dim()) throw DimensionMismatch("alpha/R dim mismatch");
  if (!(divisor_threshold > Real(0)))
    throw std::invalid_argument("divisor threshold must be positive");
  HomologicalSolution<C> sol;
  sol.generator = Series<C>::zero_like(R);
  sol.resonant_part = Series<C>::zero_like(R);
  sol.min_divisor = Real(-1);
  for (const auto &[e, c] : R.terms()) {
    if (e.isAction()) {
      ExponentVec x(e.dim());
      for (int i = 0; i < e.dim(); ++i) {
        x.at(Var::L, i) = e.at(Var::L, i) + e.at(Var::Q, i);
        x.at(Var::T, i) = e.at(Var::T, i);
      }
      sol.resonant_part.addTerm(x, c);
      continue;
    }
    if (e.gradedDegree() <= 2)
      throw std::invalid_argument(
          "non-normal term of graded degree <= 2 in homological rhs");
    const std::vector<int> j = detail::bracket_eigen_index<C>(e);
    const C d = detail::eigenvalue(j, alpha);
    const Real ad = abs(d);
    if (ad < divisor_threshold)
      throw SmallDivisorError(j, static_cast<double>(ad));
    if (sol.min_divisor < Real(0) || ad < sol.min_divisor) {
      sol.min_divisor = ad;
      sol.divisor_witness = j;
    }
    sol.generator.addTerm(e, c / d);
  }
  if (sol.min_divisor < Real(0)) sol.min_divisor = Real(0);
  return sol;
}

template <class C>
struct NormalFormResult {
  Series<C> P;  // polynomial in the action symbols (carried on l-slots)
  std::vector<Series<C>> generators;  // applied in order via lie_exp
  int achieved_order = 0;
  typename Series<C>::Real min_divisor_overall{0};
  typename Series<C>::Real residual_norm{0};
};

namespace detail {

// extract the action content c q^a p^a (no l, t) as an X-polynomial
template <class C>
Series<C> action_part(const Series<C> &H, int maxOrder) {
  Series<C> P = Series<C>::zero_like(H);
  for (const auto &[e, c] : H.terms()) {
    if (!e.isAction() || e.blockDegree(Var::L) != 0 || e.tDegree() != 0)
      continue;
    if (e.gradedDegree() > maxOrder) continue;
    ExponentVec x(e.dim());
    for (int i = 0; i < e.dim(); ++i) x.at(Var::L, i) = e.at(Var::Q, i);
    P.addTerm(x, c);
  }
  return P;
}

template <class C>
Series<C> nonnormal_part(const Series<C> &H, int maxOrder) {
  Series<C> R = Series<C>::zero_like(H);
  for (const auto &[e, c] : H.terms())
    if (!e.isAction() && e.gradedDegree() <= maxOrder) R.addTerm(e, c);
  return R;
}

template <class C>
void check_birkhoff_input(const Series<C> &H, const FrequencyVector<C> &alpha,
                          int k) {
  if (alpha.dim() != H.dim())
    throw DimensionMismatch("alpha/H dimension mismatch");
  if (H.dependsOn(Var::L) || H.dependsOn(Var::T))
    throw std::invalid_argument("H must depend on (q,p) only");
  if (k < 3) throw std::invalid_argument("normal-form order k must be >= 3");
  if (k > H.maxDegree())
    throw std::invalid_argument("order k exceeds the series truncation");
  for (int i = 0; i < H.dim(); ++i) {
    ExponentVec e(H.dim());
    e.at(Var::Q, i) = 1;
    e.at(Var::P, i) = 1;
    using std::abs;
    if (abs(H.coeff(e) - alpha.alpha[i]) >
        typename Series<C>::Real(1e-12) * (typename Series<C>::Real(1) +
                                           abs(alpha.alpha[i])))
      throw std::invalid_argument("quadratic part of H does not match alpha");
  }
  for (const auto &[e, c] : H.terms())
    if (e.gradedDegree() <= 2 && !e.isAction())
      throw std::invalid_argument("H has a non-normal quadratic/linear part");
}

// random action monomials of the given even graded degree, coefficients in
// [-1,1]; used to probe uniqueness of P against the kernel freedom
template <class C>
Series<C> random_kernel_element(int n, int degree, const Series<C> &like,
                                std::mt19937_64 &rng) {
  Series<C> s = Series<C>::zero_like(like);
  if (degree % 2 != 0 || degree < 4) return s;
  const int xdeg = degree / 2;
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<int> a(n, 0);
  std::function<void(int, int)> rec = [&](int i, int rem) {
    if (i == n - 1) {
      a[i] = rem;
      ExponentVec e(n);
      for (int m = 0; m < n; ++m) {
        e.at(Var::Q, m) = a[m];
        e.at(Var::P, m) = a[m];
      }
      s.addTerm(e, C(typename Series<C>::Real(dist(rng))));
      return;
    }
    for (int v = 0; v <= rem; ++v) {
      a[i] = v;
      rec(i + 1, rem - v);
    }
  };
  rec(0, xdeg);
  return s;
}

}  // namespace detail

// Birkhoff normal form to order k, following the odd/even pairing of the
// inductive proof: degree 3 alone, then pairs (4,5), (6,7), ...  Each
// stage solves the homological equation against the current Hamiltonian
// and applies a single Lie exponential for the pair.
template <class C>
NormalFormResult<C> birkhoff(
    const Series<C> &H, const FrequencyVector<C> &alpha, int k,
    typename Series<C>::Real divisor_threshold =
        default_divisor_threshold<typename Series<C>::Real>(),
    std::mt19937_64 *kernel_noise = nullptr) {
  using Real = typename Series<C>::Real;
  detail::check_birkhoff_input(H, alpha, k);
  NormalFormResult<C> res;
  res.achieved_order = k;
  res.min_divisor_overall = Real(-1);
  Series<C> current = H;
  std::vector<std::pair<int, int>> stages;
  stages.emplace_back(3, 3);
  for (int d = 4; d <= k; d += 2) stages.emplace_back(d, std::min(d + 1, k));
  for (auto [d1, d2] : stages) {
    Series<C> f = Series<C>::zero_like(H);
    for (int d = d1; d <= d2; ++d) {
      Series<C> R = detail::nonnormal_part(current, d).gradedPart(d);
      if (R.isZero()) continue;
      auto sol = solve_homological(alpha, R, divisor_threshold);
      f += sol.generator;
      if (res.min_divisor_overall < Real(0) ||
          sol.min_divisor < res.min_divisor_overall)
        res.min_divisor_overall = sol.min_divisor;
    }
    if (kernel_noise)
      for (int d = d1; d <= d2; ++d)
        f += detail::random_kernel_element<C>(H.dim(), d, H, *kernel_noise);
    if (f.isZero() && !kernel_noise) continue;
    current = lie_exp(f, current);
    res.generators.push_back(f);
  }
  if (res.min_divisor_overall < Real(0)) res.min_divisor_overall = Real(0);
  res.P = detail::action_part(current, k);
  res.residual_norm = detail::nonnormal_part(current, k).maxAbsCoeff();
  return res;
}

// Independent re-application of the generators; returns the non-normal
// residual norm in degrees <= k.
template <class C>
typename Series<C>::Real certify(const Series<C> &H,
                                 const NormalFormResult<C> &res) {
  Series<C> cur = H;
  for (const auto &g : res.generators) cur = lie_exp(g, cur);
  Series<C> diff = cur - action_substitute(res.P, ActionTarget::QP);
  return diff.truncated(res.achieved_order).maxAbsCoeff();
}

// P plus the formal frequency map ghat_i = (d_{X_i}P)(l) - alpha_i.
template <class C>
std::pair<NormalFormResult<C>, std::vector<Series<C>>> parametric_normal_form(
    const Series<C> &H, const FrequencyVector<C> &alpha, int k,
    typename Series<C>::Real divisor_threshold =
        default_divisor_threshold<typename Series<C>::Real>()) {
  auto res = birkhoff(H, alpha, k, divisor_threshold);
  std::vector<Series<C>> ghat;
  ghat.reserve(H.dim());
  for (int i = 0; i < H.dim(); ++i) {
    Series<C> g = res.P.derivative(Var::L, i);
    g.addTerm(ExponentVec(H.dim()), -alpha.alpha[i]);
    ghat.push_back(g.truncated(2 * (k / 2)));
  }
  return {std::move(res), std::move(ghat)};
}

// Quadratic (Newton-style) scheme: stage s clears the non-normal window of
// graded degrees [max(3, 2^{s-1}+2), 2^s+2] with a single combined
// generator, built degree by degree against the partially transformed
// Hamiltonian so the stage's own corrections are absorbed.
template <class C>
NormalFormResult<C> quadratic_iteration(
    const Series<C> &H, const FrequencyVector<C> &alpha, int stages,
    typename Series<C>::Real divisor_threshold =
        default_divisor_threshold<typename Series<C>::Real>()) {
  using Real = typename Series<C>::Real;
  if (stages < 1) throw std::invalid_argument("stages must be >= 1");
  const int order = (1 << (stages + 1)) - 1;
  detail::check_birkhoff_input(H, alpha, std::min(order, H.maxDegree()));
  if ((1 << (stages + 1)) > H.maxDegree() + 1)
    throw std::invalid_argument("stage count exceeds the series truncation");
  NormalFormResult<C> res;
  res.achieved_order = order;
  res.min_divisor_overall = Real(-1);
  Series<C> current = H;
  int certified = 2;
  for (int s = 1; s <= stages; ++s) {
    const int lo = std::max(3, (1 << (s - 1)) + 2);
    const int hi = (1 << s) + 2;
    Series<C> u = Series<C>::zero_like(H);
    for (int d = lo; d <= hi; ++d) {
      Series<C> K = u.isZero() ? current : lie_exp(u, current);
      Series<C> R = detail::nonnormal_part(K, d).gradedPart(d);
      if (R.isZero()) continue;
      auto sol = solve_homological(alpha, R, divisor_threshold);
      u += sol.generator;
      if (res.min_divisor_overall < Real(0) ||
          sol.min_divisor < res.min_divisor_overall)
        res.min_divisor_overall = sol.min_divisor;
    }
    current = lie_exp(u, current);
    res.generators.push_back(u);
    certified = hi;
  }
  if (res.min_divisor_overall < Real(0)) res.min_divisor_overall = Real(0);
  res.P = detail::action_part(current, order);
  res.residual_norm = detail::nonnormal_part(current, certified).maxAbsCoeff();
  return res;
}

// Reruns birkhoff with random resonant-kernel elements injected into each
// stage generator and reports the max coefficientwise relative deviation
// of P (zero in exact arithmetic: P does not depend on the choice).
template <class C>
typename Series<C>::Real uniqueness_probe(
    const Series<C> &H, const FrequencyVector<C> &alpha, int k, int trials,
    std::uint64_t seed,
    typename Series<C>::Real divisor_threshold =
        default_divisor_threshold<typename Series<C>::Real>()) {
  using std::abs;
  using Real = typename Series<C>::Real;
  auto base = birkhoff(H, alpha, k, divisor_threshold);
  Real dev(0);
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(t) * 0x9e3779b97f4a7c15ULL);
    auto probe = birkhoff(H, alpha, k, divisor_threshold, &rng);
    Series<C> diff = probe.P - base.P;
    for (const auto &[e, c] : diff.terms()) {
      Real denom = std::max<Real>(Real(1), abs(base.P.coeff(e)));
      dev = std::max<Real>(dev, abs(c) / denom);
    }
  }
  return dev;
}

}  // namespace kamnf

#endif
