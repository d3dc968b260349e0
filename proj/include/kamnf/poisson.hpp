#ifndef KAMNF_POISSON_HPP
#define KAMNF_POISSON_HPP

#include <kamnf/series.hpp>

namespace kamnf {

struct NonTerminatingGenerator : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <class C>
struct FrequencyVector {
  std::vector<C> alpha;
  int dim() const { return static_cast<int>(alpha.size()); }
};

using FrequencyVectorD = FrequencyVector<std::complex<double>>;

// {f,g} = sum_i d_{q_i}f d_{p_i}g - d_{p_i}f d_{q_i}g ; l and t are
// treated as constants.
template <class C>
Series<C> poisson_bracket(const Series<C> &f, const Series<C> &g) {
  f.checkCompatible(g);
  Series<C> r = Series<C>::zero_like(f);
  for (int i = 0; i < f.dim(); ++i) {
    r += f.derivative(Var::Q, i) * g.derivative(Var::P, i);
    r -= f.derivative(Var::P, i) * g.derivative(Var::Q, i);
  }
  return r;
}

template <class C>
struct LieExpResult {
  Series<C> value;
  int terms_used = 0;  // largest m with a nonzero ad^m contribution
};

// Lie-series exponential F -> sum_m (1/m!) ad_f^m F with ad_f F = {f,F}.
// Requires the generator's effective lowest degree >= 3 so each bracket
// raises the degree and the sum terminates at the truncation order.
template <class C>
LieExpResult<C> lie_exp_full(const Series<C> &generator, const Series<C> &F) {
  generator.checkCompatible(F);
  if (!generator.isZero()) {
    const int lo = generator.lowestEffectiveDegree();
    if (lo >= 0 && lo <= 2)
      throw NonTerminatingGenerator(
          "lie_exp generator has effective degree <= 2");
  }
  using Real = typename Series<C>::Real;
  LieExpResult<C> res{F, 0};
  Series<C> term = F;
  const int mmax = F.maxDegree() + 2 + F.dim() * F.maxTDegree();
  for (int m = 1; m <= mmax; ++m) {
    term = poisson_bracket(generator, term).scaled(C(Real(1) / Real(m)));
    if (term.isZero()) break;
    res.value += term;
    res.terms_used = m;
  }
  return res;
}

template <class C>
Series<C> lie_exp(const Series<C> &generator, const Series<C> &F) {
  return lie_exp_full(generator, F).value;
}

// Derivation D(F) = {F, ham} + sum_i tshift_i * d_{t_i}F.  The t-shift
// components let an automorphism move the frequency parameters; they must
// have graded degree >= 2 so exp(D) terminates under truncation.
template <class C>
struct PoissonDerivation {
  Series<C> ham;
  std::vector<Series<C>> tshift;  // empty or size n

  Series<C> apply(const Series<C> &F) const {
    Series<C> r = poisson_bracket(ham, F);
    for (std::size_t i = 0; i < tshift.size(); ++i)
      if (!tshift[i].isZero())
        r += tshift[i] * F.derivative(Var::T, static_cast<int>(i));
    return r;
  }

  bool isZero() const {
    if (!ham.isZero()) return false;
    for (const auto &s : tshift)
      if (!s.isZero()) return false;
    return true;
  }
};

template <class C>
Series<C> exp_derivation(const PoissonDerivation<C> &D, const Series<C> &F) {
  if (!D.ham.isZero()) {
    const int lo = D.ham.lowestEffectiveDegree();
    if (lo >= 0 && lo <= 2)
      throw NonTerminatingGenerator("derivation hamiltonian degree <= 2");
  }
  for (const auto &s : D.tshift)
    if (!s.isZero())
      for (const auto &[e, c] : s.terms())
        if (e.gradedDegree() < 2)
          throw NonTerminatingGenerator("t-shift of graded degree < 2");
  using Real = typename Series<C>::Real;
  Series<C> res = F, term = F;
  const int mmax = F.maxDegree() + 2 + F.dim() * F.maxTDegree();
  for (int m = 1; m <= mmax; ++m) {
    term = D.apply(term).scaled(C(Real(1) / Real(m)));
    if (term.isZero()) break;
    res += term;
  }
  return res;
}

// --- action polynomials -------------------------------------------------
//
// Polynomials in the action symbols X_1..X_n are carried on the l-slots
// (both have graded degree 2), so P(X) and its Taylor data in l live in
// the same representation.

template <class C>
void require_action_poly(const Series<C> &P) {
  if (P.dependsOn(Var::Q) || P.dependsOn(Var::P) || P.dependsOn(Var::T))
    throw std::invalid_argument("expected a polynomial in action symbols only");
}

enum class ActionTarget { QP, Lambda };

template <class C>
Series<C> action_substitute(const Series<C> &P, ActionTarget target) {
  require_action_poly(P);
  if (target == ActionTarget::Lambda) return P;
  Series<C> r = Series<C>::zero_like(P);
  for (const auto &[e, c] : P.terms()) {
    ExponentVec m(P.dim());
    for (int i = 0; i < P.dim(); ++i) {
      m.at(Var::Q, i) = e.at(Var::L, i);
      m.at(Var::P, i) = e.at(Var::L, i);
    }
    r.addTerm(m, c);
  }
  return r;
}

// P(q_1p_1,..) = P(l) + sum_i g_i(l)(q_ip_i - l_i) mod I^2, g_i = d_{X_i}P.
template <class C>
struct TaylorModI2 {
  Series<C> constant_part;          // P(l)
  std::vector<Series<C>> linear_coeffs;  // g_i(l)
};

template <class C>
TaylorModI2<C> taylor_mod_I2(const Series<C> &P) {
  require_action_poly(P);
  TaylorModI2<C> r;
  r.constant_part = P;
  r.linear_coeffs.reserve(P.dim());
  for (int i = 0; i < P.dim(); ++i)
    r.linear_coeffs.push_back(P.derivative(Var::L, i));
  return r;
}

// H0 = sum_i alpha_i p_i q_i at the series' truncation parameters
template <class C>
Series<C> quadratic_hamiltonian(const FrequencyVector<C> &alpha,
                                const Series<C> &like) {
  Series<C> h = Series<C>::zero_like(like);
  for (int i = 0; i < like.dim(); ++i) {
    ExponentVec e(like.dim());
    e.at(Var::Q, i) = 1;
    e.at(Var::P, i) = 1;
    h.addTerm(e, alpha.alpha[i]);
  }
  return h;
}

}  // namespace kamnf

#endif
