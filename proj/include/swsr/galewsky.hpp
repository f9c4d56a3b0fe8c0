#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "swsr/errors.hpp"
#include "swsr/grid.hpp"
#include "swsr/quadrature.hpp"
#include "swsr/swe_state.hpp"

namespace swsr {

/// Balanced-jet test case family. n_phi shifts the jet latitude, n_lambda
/// rotates the height perturbation.
struct GalewskyParams {
  double u_max = 80.0;   // m/s
  int n_phi = 0;         // in {-1, 0, 1}
  int n_lambda = 0;      // in {0..7}
  double h_hat = 120.0;  // m, perturbation amplitude
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 15.0;
  double h0 = 10158.0;  // m, reference height; see calibrate_h0
  bool perturbed = true;

  double phi0() const { return std::numbers::pi / 7.0 - n_phi * std::numbers::pi / 36.0; }
  double phi1() const { return std::numbers::pi / 2.0 - phi0(); }
  double e_n() const {
    const double d = phi1() - phi0();
    return std::exp(-4.0 / (d * d));
  }
  double lambda2() const { return n_lambda * std::numbers::pi / 4.0 - std::numbers::pi; }
  double phi2() const { return std::numbers::pi / 4.0 - n_phi * std::numbers::pi / 36.0; }

  void validate() const {
    if (n_phi < -1 || n_phi > 1) throw ConfigError("galewsky: n_phi must be in {-1,0,1}");
    if (n_lambda < 0 || n_lambda > 7) throw ConfigError("galewsky: n_lambda must be in {0..7}");
    if (!(phi0() < phi1())) throw ConfigError("galewsky: phi0 >= phi1");
  }
};

/// Zonal jet profile of the test case; identically zero outside
/// (phi0, phi1) and C-infinity smooth inside.
inline double jet_profile(double phi, const GalewskyParams& p) {
  const double p0 = p.phi0();
  const double p1 = p.phi1();
  if (phi <= p0 || phi >= p1) return 0.0;
  return p.u_max / p.e_n() * std::exp(1.0 / ((phi - p0) * (phi - p1)));
}

/// Integrand of the balanced-height integral:
/// a u(phi) [f + tan(phi)/a u(phi)], zero outside the jet support so the
/// tangent singularity at the poles is never touched.
inline double balance_integrand(double phi, const GalewskyParams& p, const PhysicalConstants& c,
                                double radius) {
  const double u = jet_profile(phi, p);
  if (u == 0.0) return 0.0;
  const double f = 2.0 * c.omega * std::sin(phi);
  return radius * u * (f + std::tan(phi) / radius * u);
}

/// Height in geostrophic balance with the jet, integrated from the south
/// pole: h(phi) = h0 - (1/g) * integral. Uses Romberg over the jet
/// support only.
inline double balanced_height(double phi, const GalewskyParams& p, const PhysicalConstants& c,
                              double radius, double rel_tol = 1e-10) {
  const double lo = p.phi0();
  const double hi = std::min(phi, p.phi1());
  if (hi <= lo) return p.h0;
  const double integral =
      romberg([&](double x) { return balance_integrand(x, p, c, radius); }, lo, hi, rel_tol);
  return p.h0 - integral / c.g;
}

/// Localized Gaussian height bump that triggers the instability. The
/// zonal offset is taken as the minimal angular difference so the field
/// stays continuous across the date line.
inline double perturbation(double lambda, double phi, const GalewskyParams& p) {
  const double two_pi = 2.0 * std::numbers::pi;
  double dl = p.lambda2() - lambda;
  dl = std::remainder(dl, two_pi);
  const double dphi = p.phi2() - phi;
  const double ga = dl / p.alpha;
  const double gb = dphi / p.beta;
  return p.h_hat * std::exp(-ga * ga) * std::exp(-gb * gb) * std::cos(phi);
}

/// Balanced height sampled per latitude row (the profile is zonally
/// symmetric, so one quadrature per row suffices).
inline std::vector<double> balanced_height_rows(const SphericalGrid& g, const GalewskyParams& p,
                                                const PhysicalConstants& c) {
  std::vector<double> rows(g.nlat);
  for (int j = 0; j < g.nlat; ++j) rows[j] = balanced_height(g.lat_center[j], p, c, g.radius);
  return rows;
}

/// Calibrates h0 so the global area-mean of the unperturbed height equals
/// `target_mean` on this grid. Bisection on h0; the cached row integrals
/// make each evaluation cheap.
inline double calibrate_h0(const SphericalGrid& g, const GalewskyParams& p,
                           const PhysicalConstants& c, double target_mean = 10000.0) {
  GalewskyParams q = p;
  q.h0 = 0.0;
  std::vector<double> base = balanced_height_rows(g, q, c);  // h0=0 contribution
  Field2 f(g.nlat, g.nlon);
  for (int j = 0; j < g.nlat; ++j)
    for (int i = 0; i < g.nlon; ++i) f(j, i) = base[j];
  const double mean0 = area_mean(f, g);  // mean for h0 = 0; mean(h0) = h0 + mean0

  double lo = target_mean - 2.0 * std::abs(mean0) - 1e4;
  double hi = target_mean + 2.0 * std::abs(mean0) + 1e4;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid + mean0 < target_mean)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-9) break;
  }
  return 0.5 * (lo + hi);
}

/// Samples the full initial state on the grid: u from the jet at u-points,
/// v = 0, h balanced (plus the perturbation when enabled), t = 0.
inline SweState init_state(const SphericalGrid& g, const GalewskyParams& p,
                           const PhysicalConstants& c) {
  p.validate();
  SweState s = SweState::zeros(g);
  const std::vector<double> hrow = balanced_height_rows(g, p, c);
  for (int j = 0; j < g.nlat; ++j) {
    const double uj = jet_profile(g.lat_center[j], p);
    for (int i = 0; i < g.nlon; ++i) {
      s.u(j, i) = uj;
      double h = hrow[j];
      if (p.perturbed) h += perturbation(g.lon_center[i], g.lat_center[j], p);
      s.h(j, i) = h;
    }
  }
  s.t = 0.0;
  return s;
}

}  // namespace swsr
