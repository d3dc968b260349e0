#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <kamnf/dynamics.hpp>
#include <kamnf/io.hpp>

using namespace kamnf;

namespace {

FrequencyVectorD freq(std::initializer_list<double> v) {
  FrequencyVectorD a;
  for (double x : v) a.alpha.emplace_back(x, 0.0);
  return a;
}

}  // namespace

TEST_CASE("standard chart satisfies the defining identities") {
  ComplexChart ch = ComplexChart::standard();
  CHECK_NOTHROW(ch.validate());
  CHECK(std::abs(ch.a * ch.c - Cd(0.5)) < 1e-15);
  CHECK(std::abs(ch.b * ch.d - Cd(0.5)) < 1e-15);
  CHECK(std::abs(ch.a * ch.d + ch.b * ch.c) < 1e-15);
  CHECK(std::abs(ch.bracketFactor() - Cd(0, -1)) < 1e-15);

  ComplexChart bad = ch;
  bad.a = Cd(1.0, 0.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("chart maps actions to the real harmonic form") {
  // alpha q p realifies to alpha (x^2 + y^2)/2 with real coefficients
  SeriesD H = parse_series("q1*p1 + 1.4142135623730951*q2*p2", 2, 6);
  ComplexChart ch = ComplexChart::standard();
  SeriesD real_form = chart_series(H, ch, ChartDirection::Realify);
  SeriesD expect = parse_series(
      "0.5*q1^2 + 0.5*p1^2 + 0.70710678118654755*q2^2 "
      "+ 0.70710678118654755*p2^2",
      2, 6);
  CHECK((real_form - expect).maxAbsCoeff() < 1e-14);
  CHECK(realness_defect(H, ch) < 1e-14);
}

TEST_CASE("chart round trips on series and points") {
  ComplexChart ch = ComplexChart::standard();
  SeriesD H = parse_series("q1*p1 + 0.3*q1^3 + 0.1*q1^2*p1^2", 1, 8);
  SeriesD back = chart_series(chart_series(H, ch, ChartDirection::Realify), ch,
                              ChartDirection::Complexify);
  CHECK((back - H).maxAbsCoeff() < 1e-13);

  std::vector<Cd> x{Cd(0.3, 0.0)}, y{Cd(-0.2, 0.0)};
  auto [q, p] = chart_point(x, y, ch, ChartDirection::Complexify);
  CHECK(std::abs(q[0] - std::conj(p[0])) < 1e-15);  // real points: p = qbar
  auto [x2, y2] = chart_point(q, p, ch, ChartDirection::Realify);
  CHECK(std::abs(x2[0] - x[0]) < 1e-15);
  CHECK(std::abs(y2[0] - y[0]) < 1e-15);
}

TEST_CASE("linear flow is a rotation with conserved action") {
  SeriesD H = parse_series("q1*p1", 1, 6);
  PhasePoint z0;
  z0.q = {Cd(0.3, 0.0)};
  z0.p = {Cd(0.3, 0.0)};
  TrajectoryRecord rec = integrate(H, z0, 6.0, 0.01, IntegratorMethod::Gauss2);
  // exact solution q(t) = q0 exp(-i t)
  const double T = rec.times.back();
  Cd expect = z0.q[0] * std::exp(Cd(0, -T));
  CHECK(std::abs(rec.states.back().q[0] - expect) < 1e-10);
  for (std::size_t i = 0; i < rec.actions.size(); ++i)
    CHECK(std::abs(rec.actions[i][0] - Cd(0.09)) < 1e-12);
}

TEST_CASE("integrator convergence orders") {
  SeriesD H = parse_series("q1*p1 + q1^2*p1^2", 1, 6);
  PhasePoint z0;
  z0.q = {Cd(0.4, 0.0)};
  z0.p = {Cd(0.4, 0.0)};
  auto endpoint_err = [&](IntegratorMethod m, double dt) {
    TrajectoryRecord ref = integrate(H, z0, 2.0, dt / 8, m);
    TrajectoryRecord run = integrate(H, z0, 2.0, dt, m);
    return std::abs(run.states.back().q[0] - ref.states.back().q[0]);
  };
  double em1 = endpoint_err(IntegratorMethod::Midpoint, 0.1);
  double em2 = endpoint_err(IntegratorMethod::Midpoint, 0.05);
  double rm = em1 / em2;  // order 2 -> ratio ~4
  CHECK(rm > 3.0);
  CHECK(rm < 5.0);
  double eg1 = endpoint_err(IntegratorMethod::Gauss2, 0.2);
  double eg2 = endpoint_err(IntegratorMethod::Gauss2, 0.1);
  double rg = eg1 / eg2;  // order 4 -> ratio ~16
  CHECK(rg > 11.0);
  CHECK(rg < 22.0);
}

TEST_CASE("symplectic energy behavior over long runs") {
  SeriesD H = parse_series("q1*p1 + 0.25*q1^4 + 0.25*p1^4", 1, 8);
  PhasePoint z0;
  z0.q = {Cd(0.3, 0.1)};
  z0.p = {Cd(0.3, -0.1)};
  TrajectoryRecord rec =
      integrate(H, z0, 50.0, 0.02, IntegratorMethod::Gauss2);
  double drift = 0;
  for (const Cd &e : rec.energy) drift = std::max(drift, std::abs(e - rec.energy.front()));
  CHECK(drift < 1e-10);
}

TEST_CASE("coordinate transform inverts itself and conjugates H") {
  SeriesD H = parse_series(
      "q1*p1 + q1^4 + 4*q1^3*p1 + 6*q1^2*p1^2 + 4*q1*p1^3 + p1^4", 1, 10);
  auto nf = birkhoff(H, freq({1.0}), 6);
  CoordinateTransform tr = build_transform(nf.generators, H);
  PhasePoint z;
  z.q = {Cd(0.025, 0.01)};
  z.p = {Cd(0.02, -0.015)};
  PhasePoint w = transform_point(tr, z, true);
  PhasePoint back = transform_point(tr, w, false);
  CHECK(std::abs(back.q[0] - z.q[0]) < 1e-9);
  CHECK(std::abs(back.p[0] - z.p[0]) < 1e-9);

  // H composed with the forward maps matches the normal form at low degree
  PhasePoint zn;
  zn.q = {Cd(0.05, 0.0)};
  zn.p = {Cd(0.05, 0.0)};
  PhasePoint zo = transform_point(tr, zn, true);
  Cd lhs = H.eval(zo.q, zo.p);
  Cd rhs = action_substitute(nf.P, ActionTarget::QP).eval(zn.q, zn.p);
  // agreement is limited by the degree >= 7 residual at |z| = 0.05
  CHECK(std::abs(lhs - rhs) < 1e-6);

  PhasePoint far;
  far.q = {Cd(2.0, 0.0)};
  far.p = {Cd(0.0, 0.0)};
  CHECK_THROWS_AS(transform_point(tr, far, true), std::domain_error);
}

TEST_CASE("drift harness: residual Hamiltonian scales, integrable floors") {
  SeriesD H = parse_series(
      "q1*p1 + q1^4 + 4*q1^3*p1 + 6*q1^2*p1^2 + 4*q1*p1^3 + p1^4", 1, 8);
  DriftReport rep = drift_exponent(H, freq({1.0}), 4, {1.0}, {0.2, 0.1, 0.05},
                                   10.0, 0.05);
  CHECK_FALSE(rep.all_floor);
  CHECK(rep.fitted_exponent > 4.0);
  CHECK(rep.r2_of_fit > 0.95);
  for (std::size_t i = 1; i < rep.deviations.size(); ++i)
    CHECK(rep.deviations[i] < rep.deviations[i - 1]);

  // pure action terms: the transform is trivial, deviations sit at the
  // integrator floor
  SeriesD Hact = parse_series("q1*p1 + q1^2*p1^2", 1, 8);
  DriftReport flat = drift_exponent(Hact, freq({1.0}), 4, {1.0},
                                    {0.2, 0.1, 0.05}, 10.0, 0.05);
  CHECK(flat.all_floor);
}
