#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "swsr/galewsky.hpp"
#include "swsr/grid.hpp"

using namespace swsr;
using Catch::Approx;

namespace {
constexpr double kEarthRadius = 6.371e6;
}

TEST_CASE("jet vanishes at and outside its support boundaries") {
  GalewskyParams p;
  REQUIRE(jet_profile(p.phi0(), p) == 0.0);
  REQUIRE(jet_profile(p.phi1(), p) == 0.0);
  REQUIRE(jet_profile(-1.3, p) == 0.0);
  REQUIRE(jet_profile(1.5, p) == 0.0);
}

TEST_CASE("jet peaks at exactly u_max at the midpoint") {
  for (int n_phi : {-1, 0, 1}) {
    GalewskyParams p;
    p.n_phi = n_phi;
    const double mid = 0.5 * (p.phi0() + p.phi1());
    REQUIRE(jet_profile(mid, p) == Approx(80.0).epsilon(1e-14));
  }
}

TEST_CASE("jet value matches a 50-digit evaluation") {
  GalewskyParams p;
  // mpmath, 60 significant digits: u(0.8) = 78.67973205480873584806074...
  REQUIRE(jet_profile(0.8, p) == Approx(78.67973205480873584806074).epsilon(1e-13));
}

TEST_CASE("jet is numerically dead just inside the support edges") {
  GalewskyParams p;
  REQUIRE(std::abs(jet_profile(p.phi0() + 1e-6, p)) < 1e-100 * p.u_max);
  REQUIRE(std::abs(jet_profile(p.phi1() - 1e-6, p)) < 1e-100 * p.u_max);
}

TEST_CASE("balanced height starts at h0 and is flat outside the jet") {
  GalewskyParams p;
  p.h0 = 10000.0;
  PhysicalConstants c;
  REQUIRE(balanced_height(-0.5 * std::numbers::pi, p, c, kEarthRadius) == 10000.0);
  REQUIRE(balanced_height(p.phi0() - 0.01, p, c, kEarthRadius) == 10000.0);
}

TEST_CASE("zero wind profile leaves the height at h0 everywhere") {
  GalewskyParams p;
  p.u_max = 0.0;
  p.h0 = 9000.0;
  PhysicalConstants c;
  for (double phi : {-1.0, -0.3, 0.2, 0.9, 1.4})
    REQUIRE(balanced_height(phi, p, c, kEarthRadius) == Approx(9000.0).epsilon(1e-14));
}

TEST_CASE("balanced height decreases monotonically across the jet") {
  GalewskyParams p;
  p.h0 = 10000.0;
  PhysicalConstants c;
  double prev = balanced_height(p.phi0(), p, c, kEarthRadius);
  for (int k = 1; k <= 40; ++k) {
    const double phi = p.phi0() + k * (p.phi1() - p.phi0()) / 40.0;
    const double h = balanced_height(phi, p, c, kEarthRadius);
    REQUIRE(h <= prev + 1e-9);
    prev = h;
  }
}

TEST_CASE("perturbation peak value and polar zero") {
  GalewskyParams p;  // n_phi = n_lambda = 0
  const double peak = perturbation(p.lambda2(), p.phi2(), p);
  REQUIRE(peak == Approx(84.85281374238570).epsilon(1e-13));  // 120 cos(pi/4)
  REQUIRE(perturbation(0.3, 0.5 * std::numbers::pi, p) == Approx(0.0).margin(1e-30));
}

TEST_CASE("one alpha of zonal offset scales the peak by 1/e") {
  GalewskyParams p;
  const double peak = perturbation(p.lambda2(), p.phi2(), p);
  const double off = perturbation(p.lambda2() + p.alpha, p.phi2(), p);
  REQUIRE(off == Approx(peak * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("n_lambda rotates the perturbation by multiples of pi/4") {
  GalewskyParams base;
  for (int k = 1; k < 8; ++k) {
    GalewskyParams rot;
    rot.n_lambda = k;
    for (double lam : {-3.0, -1.2, 0.0, 0.8, 2.9}) {
      for (double phi : {0.2, 0.7, 1.0}) {
        const double a = perturbation(lam, phi, rot);
        const double b = perturbation(lam - k * std::numbers::pi / 4.0, phi, base);
        REQUIRE(a == Approx(b).margin(1e-12));
      }
    }
  }
}

TEST_CASE("perturbation wraps continuously across the date line") {
  GalewskyParams p;
  p.n_lambda = 0;  // centered at lambda = -pi
  const double eps = 1e-8;
  const double west = perturbation(-std::numbers::pi + eps, p.phi2(), p);
  const double east = perturbation(std::numbers::pi - eps, p.phi2(), p);
  REQUIRE(west == Approx(east).epsilon(1e-6));
}

TEST_CASE("initial state is zonal and additive in the perturbation") {
  auto g = build_grid(24, 48, kEarthRadius);
  PhysicalConstants c;
  GalewskyParams p;
  p.h0 = calibrate_h0(g, p, c);

  GalewskyParams unp = p;
  unp.perturbed = false;
  const SweState s0 = init_state(g, unp, c);
  REQUIRE(s0.v.max_abs() == 0.0);

  const SweState s1 = init_state(g, p, c);
  for (int j = 0; j < g.nlat; ++j)
    for (int i = 0; i < g.nlon; ++i) {
      const double dh = s1.h(j, i) - s0.h(j, i);
      const double expected = perturbation(g.lon_center[i], g.lat_center[j], p);
      REQUIRE(dh == Approx(expected).margin(1e-10));
    }
}

TEST_CASE("calibrated h0 yields a 10000 m global mean height") {
  auto g = build_grid(32, 64, kEarthRadius);
  PhysicalConstants c;
  GalewskyParams p;
  p.perturbed = false;
  p.h0 = calibrate_h0(g, p, c);
  const SweState s = init_state(g, p, c);
  REQUIRE(area_mean(s.h, g) == Approx(10000.0).epsilon(1e-6));
}

TEST_CASE("parameter validation rejects out-of-range indices") {
  GalewskyParams p;
  p.n_phi = 2;
  REQUIRE_THROWS_AS(p.validate(), ConfigError);
  p.n_phi = 0;
  p.n_lambda = 8;
  REQUIRE_THROWS_AS(p.validate(), ConfigError);
}
