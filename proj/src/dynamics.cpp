#include <kamnf/dynamics.hpp>

#include <Eigen/Dense>

namespace kamnf {

ComplexChart ComplexChart::standard() {
  const double s = 1.0 / std::sqrt(2.0);
  return ComplexChart{Cd(s, 0), Cd(0, s), Cd(s, 0), Cd(0, -s)};
}

void ComplexChart::validate() const {
  const double tol = 1e-12;
  // q p = (x^2+y^2)/2 on the nose
  if (std::abs(a * c - Cd(0.5)) > tol || std::abs(b * d - Cd(0.5)) > tol ||
      std::abs(a * d + b * c) > tol)
    throw std::invalid_argument(
        "chart does not send sum alpha(x^2+y^2)/2 to sum alpha qp");
  // conjugation on real (x,y) must swap q and p
  if (std::abs(std::conj(a) - c) > tol || std::abs(std::conj(b) - d) > tol)
    throw std::invalid_argument(
        "chart does not intertwine conjugation with (q,p)->(pbar,qbar)");
  // symplectic factor is forced to -i by the two conditions above; the
  // elliptic flow convention accounts for it
  if (std::abs(bracketFactor() - Cd(0, -1)) > tol)
    throw std::invalid_argument("chart has unexpected symplectic factor");
}

namespace {

SeriesD substitute_qp(const SeriesD &s, const std::vector<SeriesD> &qimg,
                      const std::vector<SeriesD> &pimg) {
  const int n = s.dim();
  SeriesD out = SeriesD::zero_like(s);
  // cached powers per variable
  std::vector<std::vector<SeriesD>> qpow(n), ppow(n);
  auto power = [&](std::vector<SeriesD> &cache, const SeriesD &base, int e) {
    while (static_cast<int>(cache.size()) <= e) {
      if (cache.empty())
        cache.push_back(SeriesD::constant(n, Cd(1), s.maxDegree(),
                                          s.maxTDegree(), s.dropTolerance()));
      else
        cache.push_back(cache.back() * base);
    }
    return cache[e];
  };
  for (const auto &[e, c] : s.terms()) {
    SeriesD term = SeriesD::constant(n, c, s.maxDegree(), s.maxTDegree(),
                                     s.dropTolerance());
    ExponentVec rest(n);
    for (int i = 0; i < n; ++i) {
      rest.at(Var::L, i) = e.at(Var::L, i);
      rest.at(Var::T, i) = e.at(Var::T, i);
    }
    SeriesD restS = SeriesD::zero_like(s);
    restS.addTerm(rest, Cd(1));
    term = term * restS;
    for (int i = 0; i < n; ++i) {
      if (e.at(Var::Q, i)) term = term * power(qpow[i], qimg[i], e.at(Var::Q, i));
      if (e.at(Var::P, i)) term = term * power(ppow[i], pimg[i], e.at(Var::P, i));
    }
    out += term;
  }
  return out;
}

// cu * (first-block symbol i) + cv * (second-block symbol i)
SeriesD linear_image(const SeriesD &like, Cd cu, Cd cv, int i) {
  SeriesD s = SeriesD::zero_like(like);
  ExponentVec a(like.dim());
  a.at(Var::Q, i) = 1;
  s.addTerm(a, cu);
  ExponentVec b(like.dim());
  b.at(Var::P, i) = 1;
  s.addTerm(b, cv);
  return s;
}

}  // namespace

SeriesD chart_series(const SeriesD &s, const ComplexChart &chart,
                     ChartDirection dir) {
  chart.validate();
  const int n = s.dim();
  std::vector<SeriesD> qimg, pimg;
  if (dir == ChartDirection::Realify) {
    // q_i -> a x_i + b y_i, p_i -> c x_i + d y_i
    for (int i = 0; i < n; ++i) {
      qimg.push_back(linear_image(s, chart.a, chart.b, i));
      pimg.push_back(linear_image(s, chart.c, chart.d, i));
    }
  } else {
    // x_i -> (d q - b p)/det, y_i -> (-c q + a p)/det
    const Cd det = chart.bracketFactor();
    for (int i = 0; i < n; ++i) {
      qimg.push_back(linear_image(s, chart.d / det, -chart.b / det, i));
      pimg.push_back(linear_image(s, -chart.c / det, chart.a / det, i));
    }
  }
  return substitute_qp(s, qimg, pimg);
}

std::pair<std::vector<Cd>, std::vector<Cd>> chart_point(
    const std::vector<Cd> &u, const std::vector<Cd> &v,
    const ComplexChart &chart, ChartDirection dir) {
  chart.validate();
  const int n = static_cast<int>(u.size());
  std::vector<Cd> r1(n), r2(n);
  if (dir == ChartDirection::Complexify) {
    for (int i = 0; i < n; ++i) {
      r1[i] = chart.a * u[i] + chart.b * v[i];
      r2[i] = chart.c * u[i] + chart.d * v[i];
    }
  } else {
    const Cd det = chart.bracketFactor();
    for (int i = 0; i < n; ++i) {
      r1[i] = (chart.d * u[i] - chart.b * v[i]) / det;
      r2[i] = (-chart.c * u[i] + chart.a * v[i]) / det;
    }
  }
  return {r1, r2};
}

double realness_defect(const SeriesD &H, const ComplexChart &chart) {
  SeriesD real_form = chart_series(H, chart, ChartDirection::Realify);
  double m = 0;
  for (const auto &[e, c] : real_form.terms())
    m = std::max(m, std::abs(c.imag()));
  return m;
}

namespace {

struct Flow {
  int n;
  std::vector<SeriesD> dHdq, dHdp;
  std::vector<std::vector<SeriesD>> hess;  // d2H/dz_i dz_j, z=(q..,p..)

  explicit Flow(const SeriesD &H) : n(H.dim()) {
    std::vector<SeriesD> grad;
    for (int i = 0; i < n; ++i) {
      dHdq.push_back(H.derivative(Var::Q, i));
      dHdp.push_back(H.derivative(Var::P, i));
    }
    for (int i = 0; i < n; ++i) grad.push_back(dHdq[i]);
    for (int i = 0; i < n; ++i) grad.push_back(dHdp[i]);
    hess.resize(2 * n);
    for (int i = 0; i < 2 * n; ++i)
      for (int j = 0; j < 2 * n; ++j)
        hess[i].push_back(j < n ? grad[i].derivative(Var::Q, j)
                                : grad[i].derivative(Var::P, j - n));
  }

  // qdot = -i dH/dp, pdot = +i dH/dq
  Eigen::VectorXcd rhs(const Eigen::VectorXcd &z) const {
    std::vector<Cd> q(z.data(), z.data() + n), p(z.data() + n, z.data() + 2 * n);
    Eigen::VectorXcd f(2 * n);
    const Cd mi(0, -1), pi_(0, 1);
    for (int i = 0; i < n; ++i) {
      f(i) = mi * dHdp[i].eval(q, p);
      f(n + i) = pi_ * dHdq[i].eval(q, p);
    }
    return f;
  }

  Eigen::MatrixXcd jacobian(const Eigen::VectorXcd &z) const {
    std::vector<Cd> q(z.data(), z.data() + n), p(z.data() + n, z.data() + 2 * n);
    Eigen::MatrixXcd J(2 * n, 2 * n);
    const Cd mi(0, -1), pi_(0, 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2 * n; ++j) {
        J(i, j) = mi * hess[n + i][j].eval(q, p);
        J(n + i, j) = pi_ * hess[i][j].eval(q, p);
      }
    return J;
  }
};

constexpr double kNewtonTol = 1e-13;
constexpr int kNewtonMaxIter = 60;

Eigen::VectorXcd step_midpoint(const Flow &fl, const Eigen::VectorXcd &z0,
                               double dt) {
  Eigen::VectorXcd z1 = z0 + dt * fl.rhs(z0);
  const int d = static_cast<int>(z0.size());
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    Eigen::VectorXcd m = 0.5 * (z0 + z1);
    Eigen::VectorXcd F = z1 - z0 - dt * fl.rhs(m);
    Eigen::MatrixXcd J =
        Eigen::MatrixXcd::Identity(d, d) - (0.5 * dt) * fl.jacobian(m);
    Eigen::VectorXcd delta = J.partialPivLu().solve(F);
    z1 -= delta;
    if (delta.lpNorm<Eigen::Infinity>() < kNewtonTol) return z1;
  }
  throw NewtonFailure("implicit midpoint Newton did not converge");
}

Eigen::VectorXcd step_gauss2(const Flow &fl, const Eigen::VectorXcd &z0,
                             double dt) {
  const double s3 = std::sqrt(3.0);
  const double a11 = 0.25, a12 = 0.25 - s3 / 6.0;
  const double a21 = 0.25 + s3 / 6.0, a22 = 0.25;
  const int d = static_cast<int>(z0.size());
  Eigen::VectorXcd k1 = fl.rhs(z0), k2 = k1;
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    Eigen::VectorXcd Z1 = z0 + dt * (a11 * k1 + a12 * k2);
    Eigen::VectorXcd Z2 = z0 + dt * (a21 * k1 + a22 * k2);
    Eigen::VectorXcd F(2 * d);
    F.head(d) = k1 - fl.rhs(Z1);
    F.tail(d) = k2 - fl.rhs(Z2);
    Eigen::MatrixXcd J1 = fl.jacobian(Z1), J2 = fl.jacobian(Z2);
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Identity(2 * d, 2 * d);
    J.block(0, 0, d, d) -= dt * a11 * J1;
    J.block(0, d, d, d) = -dt * a12 * J1;
    J.block(d, 0, d, d) = -dt * a21 * J2;
    J.block(d, d, d, d) -= dt * a22 * J2;
    Eigen::VectorXcd delta = J.partialPivLu().solve(F);
    k1 -= delta.head(d);
    k2 -= delta.tail(d);
    if (delta.lpNorm<Eigen::Infinity>() < kNewtonTol)
      return z0 + (dt / 2.0) * (k1 + k2);
  }
  throw NewtonFailure("gauss2 Newton did not converge");
}

}  // namespace

TrajectoryRecord integrate(const SeriesD &H, const PhasePoint &z0, double T,
                           double dt, IntegratorMethod method) {
  if (!(dt > 0) || dt > T) throw std::invalid_argument("need 0 < dt <= T");
  const int n = H.dim();
  if (static_cast<int>(z0.q.size()) != n || static_cast<int>(z0.p.size()) != n)
    throw DimensionMismatch("phase point dimension mismatch");
  Flow fl(H);
  const long nsteps = std::lround(T / dt);
  Eigen::VectorXcd z(2 * n);
  for (int i = 0; i < n; ++i) {
    z(i) = z0.q[i];
    z(n + i) = z0.p[i];
  }
  TrajectoryRecord rec;
  auto record = [&](double t) {
    PhasePoint pt;
    pt.q.assign(z.data(), z.data() + n);
    pt.p.assign(z.data() + n, z.data() + 2 * n);
    rec.times.push_back(t);
    rec.energy.push_back(H.eval(pt.q, pt.p));
    std::vector<Cd> act(n);
    for (int i = 0; i < n; ++i) act[i] = pt.q[i] * pt.p[i];
    rec.actions.push_back(std::move(act));
    rec.states.push_back(std::move(pt));
  };
  record(0.0);
  for (long s = 1; s <= nsteps; ++s) {
    z = method == IntegratorMethod::Midpoint ? step_midpoint(fl, z, dt)
                                             : step_gauss2(fl, z, dt);
    record(s * dt);
  }
  return rec;
}

CoordinateTransform build_transform(const std::vector<SeriesD> &generators,
                                    const SeriesD &like) {
  const int n = like.dim();
  CoordinateTransform tr;
  tr.n = n;
  auto coord = [&](int j) {
    return j < n ? SeriesD::monomial(n, Var::Q, j, like.maxDegree(),
                                     like.maxTDegree(), like.dropTolerance())
                 : SeriesD::monomial(n, Var::P, j - n, like.maxDegree(),
                                     like.maxTDegree(), like.dropTolerance());
  };
  for (int j = 0; j < 2 * n; ++j) {
    SeriesD fwd = coord(j);
    for (const auto &g : generators) fwd = lie_exp(g, fwd);
    tr.forward.push_back(fwd);
    SeriesD inv = coord(j);
    for (auto it = generators.rbegin(); it != generators.rend(); ++it)
      inv = lie_exp(-*it, inv);
    tr.inverse.push_back(inv);
  }
  return tr;
}

PhasePoint transform_point(const CoordinateTransform &tr, const PhasePoint &z,
                           bool forward) {
  double nrm = 0;
  for (const auto &v : z.q) nrm = std::max(nrm, std::abs(v));
  for (const auto &v : z.p) nrm = std::max(nrm, std::abs(v));
  if (nrm > tr.norm_guard)
    throw std::domain_error("point outside the transform validity guard");
  const auto &maps = forward ? tr.forward : tr.inverse;
  PhasePoint out;
  out.q.resize(tr.n);
  out.p.resize(tr.n);
  for (int j = 0; j < 2 * tr.n; ++j) {
    Cd v = maps[j].eval(z.q, z.p);
    if (j < tr.n)
      out.q[j] = v;
    else
      out.p[j - tr.n] = v;
  }
  return out;
}

DriftReport drift_exponent(const SeriesD &H, const FrequencyVectorD &alpha,
                           int k, const std::vector<double> &lambda0,
                           const std::vector<double> &radii, double T,
                           double dt, IntegratorMethod method,
                           double divisor_threshold) {
  const int n = H.dim();
  if (static_cast<int>(lambda0.size()) != n)
    throw DimensionMismatch("lambda0 dimension mismatch");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1]))
      throw std::invalid_argument("radii must be strictly decreasing");
  auto nf = birkhoff(H, alpha, k, divisor_threshold);
  CoordinateTransform tr = build_transform(nf.generators, H);

  DriftReport rep;
  rep.radii = radii;
  for (double r : radii) {
    PhasePoint zn;
    zn.q.resize(n);
    zn.p.resize(n);
    std::vector<double> target(n);
    for (int i = 0; i < n; ++i) {
      const double s = std::sqrt(std::max(0.0, lambda0[i])) * r;
      zn.q[i] = s;
      zn.p[i] = s;
      target[i] = lambda0[i] * r * r;
    }
    PhasePoint z0 = transform_point(tr, zn, true);
    TrajectoryRecord traj = integrate(H, z0, T, dt, method);
    double dev = 0;
    for (const auto &st : traj.states) {
      PhasePoint back = transform_point(tr, st, false);
      for (int i = 0; i < n; ++i)
        dev = std::max(dev, std::abs(back.q[i] * back.p[i] - Cd(target[i])));
    }
    rep.deviations.push_back(dev);
    rep.at_floor.push_back(dev < rep.floor_tol);
  }

  // least-squares fit on the above-floor points
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!rep.at_floor[i]) {
      lx.push_back(std::log(radii[i]));
      ly.push_back(std::log(rep.deviations[i]));
    }
  if (lx.size() < 2) {
    rep.all_floor = true;
    return rep;
  }
  const double m = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  const double denom = m * sxx - sx * sx;
  rep.fitted_exponent = (m * sxy - sx * sy) / denom;
  const double ssres_num = (m * sxy - sx * sy) * (m * sxy - sx * sy);
  const double sst = m * syy - sy * sy;
  rep.r2_of_fit = sst > 0 ? ssres_num / (denom * sst) : 1.0;
  return rep;
}

}  // namespace kamnf
