#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "swsr/galewsky.hpp"
#include "swsr/grid.hpp"
#include "swsr/swe.hpp"

using namespace swsr;
using Catch::Approx;

namespace {
constexpr double kEarthRadius = 6.371e6;

SweState rest_state(const SphericalGrid& g, double h0) {
  SweState s = SweState::zeros(g);
  s.h.fill(h0);
  return s;
}

SweState solid_body(const SphericalGrid& g, double u0, double h0) {
  SweState s = rest_state(g, h0);
  for (int j = 0; j < g.nlat; ++j)
    for (int i = 0; i < g.nlon; ++i) s.u(j, i) = u0 * g.coslat_c[j];
  return s;
}

double max_vorticity_error_solid_body(int nlat) {
  auto g = build_grid(nlat, 2 * nlat, kEarthRadius);
  const double u0 = 30.0;
  SweState s = solid_body(g, u0, 10000.0);
  Field2 w = relative_vorticity(s, g);
  double err = 0.0;
  for (int j = 0; j <= g.nlat; ++j) {
    const double analytic = 2.0 * (u0 / kEarthRadius) *
                            std::sin(j == 0 ? -0.5 * std::numbers::pi
                                            : (j == g.nlat ? 0.5 * std::numbers::pi
                                                           : g.lat_edge[j]));
    for (int i = 0; i < g.nlon; ++i) err = std::max(err, std::abs(w(j, i) - analytic));
  }
  return err;
}

GalewskyParams calibrated_params(const SphericalGrid& g, const PhysicalConstants& c,
                                 bool perturbed) {
  GalewskyParams p;
  p.perturbed = perturbed;
  p.h0 = calibrate_h0(g, p, c);
  return p;
}
}  // namespace

TEST_CASE("zero velocity gives zero vorticity") {
  auto g = build_grid(12, 24, kEarthRadius);
  SweState s = rest_state(g, 5000.0);
  Field2 w = relative_vorticity(s, g);
  REQUIRE(w.max_abs() == 0.0);
}

TEST_CASE("solid-body vorticity converges to the analytic curl") {
  const double e16 = max_vorticity_error_solid_body(16);
  const double e32 = max_vorticity_error_solid_body(32);
  REQUIRE(e32 <= e16 / 1.8);
}

TEST_CASE("global vorticity integral vanishes on a closed surface") {
  auto g = build_grid(24, 48, kEarthRadius);
  SweState s = rest_state(g, 8000.0);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> d(-20.0, 20.0);
  for (size_t k = 0; k < s.u.size(); ++k) s.u.data()[k] = d(rng);
  for (size_t k = 0; k < s.v.size(); ++k) s.v.data()[k] = d(rng);
  Field2 w = relative_vorticity(s, g);
  const double integral = corner_integral(w, g);
  const double scale =
      w.max_abs() * 4.0 * std::numbers::pi * kEarthRadius * kEarthRadius;
  REQUIRE(std::abs(integral) <= 1e-11 * scale);
}

TEST_CASE("bernoulli of the rest state is g*h0") {
  auto g = build_grid(8, 16, kEarthRadius);
  PhysicalConstants c;
  SweState s = rest_state(g, 10000.0);
  Field2 b = bernoulli(s, g, c);
  for (int j = 0; j < g.nlat; ++j)
    for (int i = 0; i < g.nlon; ++i) REQUIRE(b(j, i) == Approx(c.g * 10000.0).epsilon(1e-15));
}

TEST_CASE("bernoulli adds the kinetic term for uniform flow") {
  auto g = build_grid(8, 16, kEarthRadius);
  PhysicalConstants c;
  SweState s = SweState::zeros(g);
  s.u.fill(2.0);
  Field2 b = bernoulli(s, g, c);
  for (int j = 0; j < g.nlat; ++j)
    for (int i = 0; i < g.nlon; ++i) REQUIRE(b(j, i) == Approx(2.0).epsilon(1e-15));
}

TEST_CASE("bernoulli matches a direct evaluation on a mixed toy field") {
  auto g = build_grid(4, 8, kEarthRadius);
  PhysicalConstants c;
  SweState s = SweState::zeros(g);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 8; ++i) {
      s.h(j, i) = 100.0 + j + 0.5 * i;
      s.u(j, i) = 0.3 * i - j;
    }
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 8; ++i) s.v(j, i) = 0.1 * (j + 1) * (i - 3);
  Field2 b = bernoulli(s, g, c);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 8; ++i) {
      const double uc = 0.5 * (s.u(j, i) + s.u(j, (i + 1) % 8));
      const double vs = (j > 0) ? s.v(j - 1, i) : 0.0;
      const double vn = (j < 3) ? s.v(j, i) : 0.0;
      const double vc = 0.5 * (vs + vn);
      const double expected = c.g * s.h(j, i) + 0.5 * (uc * uc + vc * vc);
      REQUIRE(b(j, i) == Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("rest state has identically zero tendencies") {
  auto g = build_grid(16, 32, kEarthRadius);
  PhysicalConstants c;
  SweState s = rest_state(g, 10000.0);
  SweTendency k = tendencies(s, g, c);
  REQUIRE(k.dh.max_abs() == 0.0);
  REQUIRE(k.du.max_abs() == 0.0);
  REQUIRE(k.dv.max_abs() == 0.0);
}

TEST_CASE("flux-form height tendency sums to zero") {
  auto g = build_grid(24, 48, kEarthRadius);
  PhysicalConstants c;
  GalewskyParams p = calibrated_params(g, c, true);
  SweState s = init_state(g, p, c);
  SweTendency k = tendencies(s, g, c);
  const double sum = area_sum(k.dh, g);
  const double scale = k.dh.max_abs() * g.total_area();
  REQUIRE(std::abs(sum) <= 1e-13 * std::max(scale, 1e-300));
}

TEST_CASE("balanced jet: zonal tendency exactly zero, meridional residual converges") {
  PhysicalConstants c;
  double residual[2];
  int idx = 0;
  for (int nlat : {32, 64}) {
    auto g = build_grid(nlat, 2 * nlat, kEarthRadius);
    GalewskyParams p = calibrated_params(g, c, false);
    SweState s = init_state(g, p, c);
    SweTendency k = tendencies(s, g, c);
    REQUIRE(k.du.max_abs() == 0.0);
    residual[idx++] = k.dv.max_abs();
  }
  REQUIRE(residual[1] <= residual[0] / 1.8);
}

TEST_CASE("rest state is a fixed point of the integrator") {
  auto g = build_grid(12, 24, kEarthRadius);
  PhysicalConstants c;
  SweState s = rest_state(g, 10000.0);
  const double dt = 0.8 * cfl_dt_limit(s, g, c);
  Rk4Workspace ws = Rk4Workspace::make(g);
  SweState cur = s;
  for (int k = 0; k < 1000; ++k) step_inplace(cur, dt, g, c, ws, k);
  for (size_t i = 0; i < s.h.size(); ++i)
    REQUIRE(std::abs(cur.h.data()[i] - s.h.data()[i]) <= 1e-13 * s.h.data()[i]);
  REQUIRE(cur.u.max_abs() == 0.0);
  REQUIRE(cur.v.max_abs() == 0.0);
}

TEST_CASE("mass is conserved over 1000 perturbed steps") {
  auto g = build_grid(32, 64, kEarthRadius);
  PhysicalConstants c;
  GalewskyParams p = calibrated_params(g, c, true);
  SweState s = init_state(g, p, c);
  const double mass0 = total_mass(s, g);
  const double dt = 0.8 * cfl_dt_limit(s, g, c);
  Rk4Workspace ws = Rk4Workspace::make(g);
  for (int k = 0; k < 1000; ++k) step_inplace(s, dt, g, c, ws, k);
  REQUIRE(std::abs(total_mass(s, g) - mass0) <= 1e-11 * mass0);
}

TEST_CASE("time integration error scales as dt^4") {
  auto g = build_grid(16, 32, 1.0e6);
  PhysicalConstants c;
  c.omega = 0.0;  // pure gravity waves
  SweState s0 = SweState::zeros(g);
  for (int j = 0; j < g.nlat; ++j)
    for (int i = 0; i < g.nlon; ++i) {
      const double lat = g.lat_center[j];
      const double lon = g.lon_center[i];
      s0.h(j, i) = 1000.0 + 1.0 * std::exp(-(lat * lat + lon * lon) / 0.08);
    }

  auto run = [&](double dt) {
    return integrate(s0, dt, 512.0, g, c);
  };
  const SweState a = run(64.0);
  const SweState b = run(32.0);
  const SweState d = run(16.0);

  auto l2diff = [](const Field2& x, const Field2& y) {
    double acc = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
      const double e = x.data()[k] - y.data()[k];
      acc += e * e;
    }
    return std::sqrt(acc);
  };
  const double d1 = l2diff(a.h, b.h);
  const double d2 = l2diff(b.h, d.h);
  REQUIRE(d1 / d2 > 11.0);
  REQUIRE(d1 / d2 < 22.0);
}

TEST_CASE("CFL violation is reported with the limiting row") {
  auto g = build_grid(16, 32, kEarthRadius);
  PhysicalConstants c;
  SweState s = rest_state(g, 10000.0);
  const double dt = 2.0 * cfl_dt_limit(s, g, c);
  Rk4Workspace ws = Rk4Workspace::make(g);
  try {
    step_inplace(s, dt, g, c, ws);
    FAIL("expected CflError");
  } catch (const CflError& e) {
    REQUIRE(e.limiting_row == g.limiting_row);
    REQUIRE(e.dx_min == g.dx_min);
    REQUIRE(std::string(e.what()).find("row") != std::string::npos);
  }
}

TEST_CASE("non-finite states are rejected") {
  auto g = build_grid(8, 16, kEarthRadius);
  PhysicalConstants c;
  SweState s = rest_state(g, 10000.0);
  s.h(3, 5) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(tendencies(s, g, c), InstabilityError);
}

TEST_CASE("integrate with t_end == t returns the input unchanged") {
  auto g = build_grid(8, 16, kEarthRadius);
  PhysicalConstants c;
  SweState s = rest_state(g, 10000.0);
  s.t = 100.0;
  SweState out = integrate(s, 1.0, 100.0, g, c);
  REQUIRE(out.h == s.h);
  REQUIRE(out.t == s.t);
}

TEST_CASE("hooks fire exactly on schedule") {
  auto g = build_grid(8, 16, kEarthRadius);
  PhysicalConstants c;
  SweState s = rest_state(g, 10000.0);
  const double dt = 0.5 * cfl_dt_limit(s, g, c);
  // rescale dt to divide 12 h exactly
  const double hook = 43200.0;
  const long n = static_cast<long>(std::ceil(hook / dt));
  const double dt_even = hook / n;
  int count = 0;
  integrate(s, dt_even, 4 * hook, g, c, hook, [&](const SweState&) { ++count; });
  REQUIRE(count == 4);
}

TEST_CASE("integration composes bitwise over sub-intervals") {
  auto g = build_grid(16, 32, kEarthRadius);
  PhysicalConstants c;
  GalewskyParams p = calibrated_params(g, c, true);
  SweState s = init_state(g, p, c);
  const double dt = 16.0;  // dyadic, far below the CFL limit on this grid
  SweState whole = integrate(s, dt, 256.0, g, c);
  SweState half = integrate(s, dt, 128.0, g, c);
  SweState composed = integrate(half, dt, 256.0, g, c);
  REQUIRE(whole.h == composed.h);
  REQUIRE(whole.u == composed.u);
  REQUIRE(whole.v == composed.v);
  REQUIRE(whole.t == composed.t);
}
