#ifndef KAMNF_DYNAMICS_HPP
#define KAMNF_DYNAMICS_HPP

#include <kamnf/normalform.hpp>

namespace kamnf {

using Cd = std::complex<double>;

// Linear chart (x_i, y_i) -> (q_i, p_i) = (a x + b y, c x + d y) per mode.
// The shipped default is q = (x+iy)/sqrt(2), p = (x-iy)/sqrt(2), which
// sends sum alpha (x^2+y^2)/2 to sum alpha q p exactly and intertwines
// complex conjugation with (q,p) -> (pbar, qbar).  Its symplectic factor
// is {q,p}_{(x,y)} = -i; the elliptic flow convention below absorbs it.
struct ComplexChart {
  Cd a, b, c, d;

  static ComplexChart standard();

  // throws std::invalid_argument if the chart fails the defining checks
  void validate() const;

  Cd bracketFactor() const { return a * d - b * c; }
};

enum class ChartDirection { Realify, Complexify };

// series substitution along the chart; q/p slots carry (x,y) on the real
// side
SeriesD chart_series(const SeriesD &s, const ComplexChart &chart,
                     ChartDirection dir);

// point maps; vectors are (first block, second block) of length n each
std::pair<std::vector<Cd>, std::vector<Cd>> chart_point(
    const std::vector<Cd> &u, const std::vector<Cd> &v,
    const ComplexChart &chart, ChartDirection dir);

// max imaginary part of the coefficients of the realified series
double realness_defect(const SeriesD &H, const ComplexChart &chart);

struct PhasePoint {
  std::vector<Cd> q, p;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<PhasePoint> states;
  std::vector<Cd> energy;
  std::vector<std::vector<Cd>> actions;  // q_i p_i per state
};

enum class IntegratorMethod { Midpoint, Gauss2 };

struct NewtonFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed-step implicit midpoint (order 2) or 2-stage Gauss (order 4) for
// the elliptic complex flow qdot = -i dH/dp, pdot = +i dH/dq.  Inner
// Newton solves to 1e-13.
TrajectoryRecord integrate(const SeriesD &H, const PhasePoint &z0, double T,
                           double dt, IntegratorMethod method);

// Truncated polynomial coordinate maps of the normalizing transform.
struct CoordinateTransform {
  std::vector<SeriesD> forward;  // normal -> original, coordinates (q..,p..)
  std::vector<SeriesD> inverse;
  int n = 0;
  double norm_guard = 1.0;
};

CoordinateTransform build_transform(const std::vector<SeriesD> &generators,
                                    const SeriesD &like);

PhasePoint transform_point(const CoordinateTransform &tr, const PhasePoint &z,
                           bool forward);

struct DriftReport {
  std::vector<double> radii;
  std::vector<double> deviations;
  std::vector<bool> at_floor;
  double fitted_exponent = 0.0;
  double r2_of_fit = 0.0;
  bool all_floor = false;
  double floor_tol = 1e-11;
};

// Start on the transformed torus of action lambda0 * r^2, flow the
// original H for time T, map back, record the max action deviation, and
// fit log(deviation) against log(r).
DriftReport drift_exponent(const SeriesD &H, const FrequencyVectorD &alpha,
                           int k, const std::vector<double> &lambda0,
                           const std::vector<double> &radii, double T,
                           double dt = 0.01,
                           IntegratorMethod method = IntegratorMethod::Gauss2,
                           double divisor_threshold = 1e-12);

}  // namespace kamnf

#endif
