#ifndef KAMNF_SERIES_HPP
#define KAMNF_SERIES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kamnf {

// Variable blocks of the algebra C[[t,l,q,p]].  Graded degrees:
// q,p count 1, l counts 2, t counts 0.
enum class Var { Q, P, L, T };

template <class C>
struct scalar_traits {
  using real_t = decltype(std::declval<const C &>().real());
};

template <class R>
R default_drop_tolerance() {
  // 1e-14 at double precision, 1e-30 at quad and beyond
  return std::numeric_limits<R>::epsilon() < R(1e-30) ? R(1e-30) : R(1e-14);
}

// Exponent vector of a monomial, layout [q_0..q_{n-1} | p | l | t].
class ExponentVec {
public:
  ExponentVec() = default;
  explicit ExponentVec(int n) : e_(4 * static_cast<std::size_t>(n), 0) {}

  int dim() const { return static_cast<int>(e_.size() / 4); }

  int &at(Var v, int i) { return e_[slot(v, i)]; }
  int at(Var v, int i) const { return e_[slot(v, i)]; }

  int gradedDegree() const {
    const int n = dim();
    int d = 0;
    for (int i = 0; i < n; ++i) d += e_[i] + e_[n + i] + 2 * e_[2 * n + i];
    return d;
  }
  int tDegree() const {
    const int n = dim();
    int d = 0;
    for (int i = 0; i < n; ++i) d += e_[3 * n + i];
    return d;
  }
  int blockDegree(Var v) const {
    const int n = dim();
    int d = 0;
    for (int i = 0; i < n; ++i) d += at(v, i);
    return d;
  }

  bool isAction() const {
    // q-exponents equal p-exponents componentwise
    const int n = dim();
    for (int i = 0; i < n; ++i)
      if (e_[i] != e_[n + i]) return false;
    return true;
  }

  ExponentVec operator+(const ExponentVec &o) const {
    ExponentVec r(*this);
    for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
    return r;
  }

  // graded-lex: total graded degree first, then lex on (q,p,l,t)
  bool operator<(const ExponentVec &o) const {
    const int da = gradedDegree(), db = o.gradedDegree();
    if (da != db) return da < db;
    return e_ < o.e_;
  }
  bool operator==(const ExponentVec &o) const { return e_ == o.e_; }

  const std::vector<int> &raw() const { return e_; }
  std::vector<int> &raw() { return e_; }

private:
  std::size_t slot(Var v, int i) const {
    return static_cast<std::size_t>(static_cast<int>(v)) * dim() + i;
  }
  std::vector<int> e_;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Sparse truncated series in C[[t,l,q,p]] with dual truncation: graded
// degree <= maxDegree and t-degree <= maxTDegree.  Terms below the drop
// tolerance are pruned after every operation.  Immutable in spirit: all
// operations return fresh values.
template <class C>
class Series {
public:
  using Complex = C;
  using Real = typename scalar_traits<C>::real_t;
  using TermMap = std::map<ExponentVec, C>;

  Series() = default;
  Series(int n, int maxDegree, int maxTDegree = -1,
         Real dropTol = default_drop_tolerance<Real>())
      : n_(n), maxDeg_(maxDegree),
        maxTDeg_(maxTDegree < 0 ? maxDegree / 2 : maxTDegree),
        dropTol_(dropTol) {
    if (n < 1) throw std::invalid_argument("series dimension must be >= 1");
  }

  int dim() const { return n_; }
  int maxDegree() const { return maxDeg_; }
  int maxTDegree() const { return maxTDeg_; }
  Real dropTolerance() const { return dropTol_; }
  const TermMap &terms() const { return terms_; }
  std::size_t termCount() const { return terms_.size(); }
  bool isZero() const { return terms_.empty(); }

  static Series zero_like(const Series &s) {
    return Series(s.n_, s.maxDeg_, s.maxTDeg_, s.dropTol_);
  }

  static Series constant(int n, const C &c, int maxDegree, int maxTDegree = -1,
                         Real dropTol = default_drop_tolerance<Real>()) {
    Series s(n, maxDegree, maxTDegree, dropTol);
    s.addTerm(ExponentVec(n), c);
    return s;
  }

  static Series monomial(int n, Var v, int i, int maxDegree,
                         int maxTDegree = -1,
                         Real dropTol = default_drop_tolerance<Real>()) {
    Series s(n, maxDegree, maxTDegree, dropTol);
    ExponentVec e(n);
    e.at(v, i) = 1;
    s.addTerm(e, C(1));
    return s;
  }

  void addTerm(const ExponentVec &e, const C &c) {
    if (e.dim() != n_) throw DimensionMismatch("exponent dim mismatch");
    if (e.gradedDegree() > maxDeg_ || e.tDegree() > maxTDeg_) return;
    using std::abs;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      if (abs(c) >= dropTol_) terms_.emplace(e, c);
    } else {
      it->second += c;
      if (abs(it->second) < dropTol_) terms_.erase(it);
    }
  }

  C coeff(const ExponentVec &e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? C(0) : it->second;
  }

  Series operator+(const Series &o) const {
    checkCompatible(o);
    Series r(*this);
    for (const auto &[e, c] : o.terms_) r.addTerm(e, c);
    return r;
  }
  Series operator-(const Series &o) const {
    checkCompatible(o);
    Series r(*this);
    for (const auto &[e, c] : o.terms_) r.addTerm(e, -c);
    return r;
  }
  Series operator-() const { return scaled(C(-1)); }
  Series &operator+=(const Series &o) { return *this = *this + o; }
  Series &operator-=(const Series &o) { return *this = *this - o; }

  Series scaled(const C &s) const {
    Series r = zero_like(*this);
    for (const auto &[e, c] : terms_) r.addTerm(e, c * s);
    return r;
  }

  // Serial reference product, kept as the oracle for the parallel kernel.
  Series mulSerial(const Series &o) const {
    checkCompatible(o);
    Series r = zero_like(*this);
    for (const auto &[ea, ca] : terms_)
      for (const auto &[eb, cb] : o.terms_) r.addTerm(ea + eb, ca * cb);
    return r;
  }

  // Parallel product: the lhs term list is split into fixed contiguous
  // chunks, each chunk convolved serially, partials merged in chunk order
  // so the accumulation order (hence rounding) is schedule-independent.
  Series operator*(const Series &o) const {
    checkCompatible(o);
#ifdef _OPENMP
    const std::size_t work = terms_.size() * o.terms_.size();
    if (work >= 4096) {
      std::vector<const std::pair<const ExponentVec, C> *> lhs;
      lhs.reserve(terms_.size());
      for (const auto &t : terms_) lhs.push_back(&t);
      const int nchunks =
          std::min<int>(omp_get_max_threads(), static_cast<int>(lhs.size()));
      std::vector<TermMap> partial(nchunks);
      const std::size_t chunk = (lhs.size() + nchunks - 1) / nchunks;
#pragma omp parallel for schedule(static, 1)
      for (int ci = 0; ci < nchunks; ++ci) {
        const std::size_t lo = ci * chunk;
        const std::size_t hi = std::min(lhs.size(), lo + chunk);
        TermMap &m = partial[ci];
        for (std::size_t ia = lo; ia < hi; ++ia)
          for (const auto &[eb, cb] : o.terms_) {
            ExponentVec e = lhs[ia]->first + eb;
            if (e.gradedDegree() > maxDeg_ || e.tDegree() > maxTDeg_) continue;
            m[e] += lhs[ia]->second * cb;
          }
      }
      Series r = zero_like(*this);
      for (int ci = 0; ci < nchunks; ++ci)
        for (const auto &[e, c] : partial[ci]) r.addTerm(e, c);
      return r;
    }
#endif
    return mulSerial(o);
  }

  Series derivative(Var v, int i) const {
    Series r = zero_like(*this);
    for (const auto &[e, c] : terms_) {
      const int k = e.at(v, i);
      if (k == 0) continue;
      ExponentVec d = e;
      d.at(v, i) = k - 1;
      r.addTerm(d, c * C(Real(k)));
    }
    return r;
  }

  Series truncated(int maxDegree) const {
    Series r = zero_like(*this);
    for (const auto &[e, c] : terms_)
      if (e.gradedDegree() <= maxDegree) r.addTerm(e, c);
    return r;
  }

  // homogeneous part of given graded degree
  Series gradedPart(int degree) const {
    Series r = zero_like(*this);
    for (const auto &[e, c] : terms_)
      if (e.gradedDegree() == degree) r.addTerm(e, c);
    return r;
  }

  Series gradedRange(int lo, int hi) const {
    Series r = zero_like(*this);
    for (const auto &[e, c] : terms_) {
      const int d = e.gradedDegree();
      if (d >= lo && d <= hi) r.addTerm(e, c);
    }
    return r;
  }

  // lowest graded degree among terms involving q or p (pure (t,l) terms are
  // Casimirs of the bracket); -1 if there is none
  int lowestEffectiveDegree() const {
    int lo = -1;
    for (const auto &[e, c] : terms_) {
      if (e.blockDegree(Var::Q) + e.blockDegree(Var::P) == 0) continue;
      const int d = e.gradedDegree();
      if (lo < 0 || d < lo) lo = d;
    }
    return lo;
  }

  Real maxAbsCoeff() const {
    using std::abs;
    Real m(0);
    for (const auto &[e, c] : terms_) m = std::max<Real>(m, abs(c));
    return m;
  }

  bool approxEquals(const Series &o, Real tol) const {
    using std::abs;
    checkCompatible(o);
    for (const auto &[e, c] : terms_)
      if (abs(c - o.coeff(e)) > tol) return false;
    for (const auto &[e, c] : o.terms_)
      if (abs(c - coeff(e)) > tol) return false;
    return true;
  }

  bool dependsOn(Var v) const {
    for (const auto &[e, c] : terms_)
      for (int i = 0; i < n_; ++i)
        if (e.at(v, i) != 0) return true;
    return false;
  }

  // evaluate at a point; block values given per variable class, any of
  // which may be empty meaning "all zero"
  C eval(const std::vector<C> &q, const std::vector<C> &p,
         const std::vector<C> &l = {}, const std::vector<C> &t = {}) const {
    auto fac = [&](const std::vector<C> &vals, Var v,
                   const ExponentVec &e) -> C {
      C f(1);
      for (int i = 0; i < n_; ++i) {
        int k = e.at(v, i);
        if (k == 0) continue;
        if (vals.empty()) return C(0);
        C b = vals[i];
        for (int j = 0; j < k; ++j) f *= b;
      }
      return f;
    };
    C s(0);
    for (const auto &[e, c] : terms_)
      s += c * fac(q, Var::Q, e) * fac(p, Var::P, e) * fac(l, Var::L, e) *
           fac(t, Var::T, e);
    return s;
  }

  void checkCompatible(const Series &o) const {
    if (n_ != o.n_ || maxDeg_ != o.maxDeg_ || maxTDeg_ != o.maxTDeg_)
      throw DimensionMismatch("series dimension/truncation mismatch");
  }

private:
  int n_ = 0;
  int maxDeg_ = 0;
  int maxTDeg_ = 0;
  Real dropTol_ = default_drop_tolerance<Real>();
  TermMap terms_;
};

using SeriesD = Series<std::complex<double>>;

}  // namespace kamnf

#endif
