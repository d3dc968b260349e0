#ifndef KAMNF_PARAMETRIC_HPP
#define KAMNF_PARAMETRIC_HPP

#include <kamnf/normalform.hpp>

namespace kamnf {

struct TExpansionOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class C>
struct ParametricIterationResult {
  std::vector<PoissonDerivation<C>> stages;  // u_s with their t-actions
  Series<C> final_G;
  typename Series<C>::Real residual_norm{0};
  typename Series<C>::Real min_divisor_overall{0};
  typename Series<C>::Real t_box_radius{0};
};

namespace detail {

// 1/<j, alpha+t> as a truncated geometric series in t
template <class C>
Series<C> inverse_divisor_series(const std::vector<int> &j, const C &d0,
                                 const Series<C> &like,
                                 typename Series<C>::Real t_box_radius) {
  using Real = typename Series<C>::Real;
  using std::abs;
  Real l1(0);
  for (int v : j) l1 += Real(std::abs(v));
  if (t_box_radius * l1 / abs(d0) >= Real(1))
    throw TExpansionOverflow(
        "geometric t-expansion ratio >= 1 on the declared t-box");
  Series<C> s = Series<C>::zero_like(like);  // <j, t>
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i] == 0) continue;
    ExponentVec e(like.dim());
    e.at(Var::T, static_cast<int>(i)) = 1;
    s.addTerm(e, C(Real(j[i])));
  }
  const C inv = C(1) / d0;
  Series<C> ratio = s.scaled(-inv);
  Series<C> acc = Series<C>::constant(like.dim(), inv, like.maxDegree(),
                                      like.maxTDegree(), like.dropTolerance());
  Series<C> pow = acc;
  for (int m = 1; m <= like.maxTDegree(); ++m) {
    pow = pow * ratio;
    if (pow.isZero()) break;
    acc += pow;
  }
  return acc;
}

}  // namespace detail

// Quadratic iteration on G = H + sum_i t_i p_i q_i.  Non-normal window
// terms are solved with divisors <b-a, alpha+t> expanded in t; excess
// normal content c(t,l) p_i q_i is absorbed into the frequency parameter
// by the derivation component u(t_i), which is what the tangency check
// inspects.
template <class C>
ParametricIterationResult<C> parametric_quadratic_iteration(
    const Series<C> &H, const FrequencyVector<C> &alpha, int stages,
    typename Series<C>::Real divisor_threshold =
        default_divisor_threshold<typename Series<C>::Real>(),
    typename Series<C>::Real t_box_radius = typename Series<C>::Real(0)) {
  using Real = typename Series<C>::Real;
  using std::abs;
  if (stages < 1) throw std::invalid_argument("stages must be >= 1");
  detail::check_birkhoff_input(H, alpha,
                               std::min((1 << (stages + 1)) - 1, H.maxDegree()));
  const int n = H.dim();
  ParametricIterationResult<C> res;
  res.min_divisor_overall = Real(-1);

  Series<C> G = H;
  for (int i = 0; i < n; ++i) {
    ExponentVec e(n);
    e.at(Var::Q, i) = 1;
    e.at(Var::P, i) = 1;
    e.at(Var::T, i) = 1;
    G.addTerm(e, C(1));
  }

  int certified = 2;
  int max_j = 1;
  for (int s = 1; s <= stages; ++s) {
    const int lo = std::max(3, (1 << (s - 1)) + 2);
    const int hi = (1 << s) + 2;
    PoissonDerivation<C> u;
    u.ham = Series<C>::zero_like(G);
    u.tshift.assign(n, Series<C>::zero_like(G));
    for (int d = lo; d <= hi; ++d) {
      Series<C> K = u.isZero() ? G : exp_derivation(u, G);
      Series<C> W = K.gradedPart(d);
      for (const auto &[e, c] : W.terms()) {
        if (!e.isAction()) {
          const std::vector<int> j = detail::bracket_eigen_index<C>(e);
          const C d0 = detail::eigenvalue(j, alpha);
          const Real ad = abs(d0);
          if (ad < divisor_threshold)
            throw SmallDivisorError(j, static_cast<double>(ad));
          if (res.min_divisor_overall < Real(0) ||
              ad < res.min_divisor_overall)
            res.min_divisor_overall = ad;
          for (int v : j) max_j = std::max(max_j, std::abs(v));
          // default t-box: min divisor / (4 * max |j|_1), fixed lazily
          Real box = t_box_radius;
          if (box <= Real(0))
            box = res.min_divisor_overall / (Real(4) * Real(2 * n * max_j));
          res.t_box_radius = box;
          Series<C> mono = Series<C>::zero_like(G);
          mono.addTerm(e, c);
          u.ham += mono * detail::inverse_divisor_series(j, d0, G, box);
        } else {
          // excess normal term c t^e l^m (qp)^a, |a| >= 1: reduce mod I^2
          // to sum_i a_i c t^e l^{m+a-e_i} (q_ip_i - l_i) and absorb the
          // q_ip_i part by shifting t_i
          int atot = e.blockDegree(Var::Q);
          if (atot == 0) continue;  // pure (t,l): mod C[[t,l]]
          for (int i = 0; i < n; ++i) {
            const int ai = e.at(Var::Q, i);
            if (ai == 0) continue;
            ExponentVec m(n);
            for (int v = 0; v < n; ++v) {
              m.at(Var::L, v) = e.at(Var::L, v) + e.at(Var::Q, v);
              m.at(Var::T, v) = e.at(Var::T, v);
            }
            m.at(Var::L, i) -= 1;
            u.tshift[i].addTerm(m, -c * C(Real(ai)));
          }
        }
      }
    }
    G = exp_derivation(u, G);
    res.stages.push_back(std::move(u));
    certified = hi;
  }
  if (res.min_divisor_overall < Real(0)) res.min_divisor_overall = Real(0);

  // residual: removable content (non-normal, or normal with an action
  // factor after mod-I^2 reduction) left below the certified degree
  Real rn(0);
  for (const auto &[e, c] : G.terms()) {
    const int d = e.gradedDegree();
    if (d <= 2 || d > certified) continue;
    if (!e.isAction()) {
      rn = std::max<Real>(rn, abs(c));
    }
  }
  // reduced excess normal content
  {
    std::vector<Series<C>> ci(n, Series<C>::zero_like(G));
    for (const auto &[e, c] : G.terms()) {
      const int d = e.gradedDegree();
      if (d <= 2 || d > certified || !e.isAction()) continue;
      for (int i = 0; i < n; ++i) {
        const int ai = e.at(Var::Q, i);
        if (ai == 0) continue;
        ExponentVec m(n);
        for (int v = 0; v < n; ++v) {
          m.at(Var::L, v) = e.at(Var::L, v) + e.at(Var::Q, v);
          m.at(Var::T, v) = e.at(Var::T, v);
        }
        m.at(Var::L, i) -= 1;
        ci[i].addTerm(m, c * C(Real(ai)));
      }
    }
    for (const auto &s : ci) rn = std::max<Real>(rn, s.maxAbsCoeff());
  }
  res.residual_norm = rn;
  res.final_G = std::move(G);
  return res;
}

// Lemma-style tangency: with F(H) inside the span of the first V_dim
// coordinate axes, every monomial of u_s(t_i) for i >= V_dim must carry
// some t_j with j >= V_dim.  Returns the largest violating coefficient.
template <class C>
typename Series<C>::Real tangency_check(
    const std::vector<PoissonDerivation<C>> &trace, int V_dim) {
  using Real = typename Series<C>::Real;
  using std::abs;
  Real viol(0);
  for (const auto &u : trace) {
    if (u.tshift.empty())
      throw std::invalid_argument("iteration trace carries no t-action data");
    const int n = static_cast<int>(u.tshift.size());
    for (int i = V_dim; i < n; ++i) {
      for (const auto &[e, c] : u.tshift[i].terms()) {
        bool has_outer_t = false;
        for (int j = V_dim; j < n; ++j)
          if (e.at(Var::T, j) > 0) has_outer_t = true;
        if (!has_outer_t) viol = std::max<Real>(viol, abs(c));
      }
    }
  }
  return viol;
}

}  // namespace kamnf

#endif
