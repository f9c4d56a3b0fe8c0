#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "swsr/errors.hpp"
#include "swsr/field.hpp"
#include "swsr/grid.hpp"
#include "swsr/swe_state.hpp"

namespace swsr {

/// Discrete curl of (u, v) at cell corners via the circulation theorem on
/// the dual cell. Returned field has nlat+1 rows; rows 0 and nlat hold the
/// polar-cap value replicated along the row. The dual-area-weighted global
/// sum telescopes to zero exactly.
inline Field2 relative_vorticity(const SweState& s, const SphericalGrid& g) {
  if (s.h.rows() != g.nlat || s.h.cols() != g.nlon)
    throw ShapeError("relative_vorticity: state/grid mismatch");
  const int nlat = g.nlat, nlon = g.nlon;
  Field2 w(nlat + 1, nlon);
  const double a_dlat = g.radius * g.dlat;
  const double a_dlon = g.radius * g.dlon;

  for (int j = 1; j < nlat; ++j) {
    const double* vrow = s.v.row(j - 1);
    const double* uh = s.u.row(j);      // row at lat_center[j]
    const double* ul = s.u.row(j - 1);  // row at lat_center[j-1]
    const double ch = g.coslat_c[j] * a_dlon;
    const double cl = g.coslat_c[j - 1] * a_dlon;
    const double inv_area = g.inv_corner_area[j];
    double* out = w.row(j);
    {
      const double circ = (vrow[0] - vrow[nlon - 1]) * a_dlat - (uh[0] * ch - ul[0] * cl);
      out[0] = circ * inv_area;
    }
    for (int i = 1; i < nlon; ++i) {
      const double circ = (vrow[i] - vrow[i - 1]) * a_dlat - (uh[i] * ch - ul[i] * cl);
      out[i] = circ * inv_area;
    }
  }

  // Polar caps: circulation of the bounding latitude circle over the cap
  // area. The southern loop encloses the pole with westward orientation.
  KahanSum s_south, s_north;
  for (int i = 0; i < nlon; ++i) {
    s_south.add(s.u(0, i));
    s_north.add(s.u(nlat - 1, i));
  }
  const double w_south =
      -s_south.value() * g.coslat_c[0] * a_dlon * g.inv_corner_area[0];
  const double w_north =
      s_north.value() * g.coslat_c[nlat - 1] * a_dlon * g.inv_corner_area[nlat];
  for (int i = 0; i < nlon; ++i) {
    w(0, i) = w_south;
    w(nlat, i) = w_north;
  }
  return w;
}

/// Dual-area-weighted global integral of a corner field (polar caps are
/// counted once, not per replicated corner).
inline double corner_integral(const Field2& w, const SphericalGrid& g) {
  if (w.rows() != g.nlat + 1 || w.cols() != g.nlon)
    throw ShapeError("corner_integral: shape mismatch");
  KahanSum s;
  for (int j = 1; j < g.nlat; ++j) {
    const double* r = w.row(j);
    KahanSum row;
    for (int i = 0; i < g.nlon; ++i) row.add(r[i]);
    s.add(row.value() * g.corner_area[j]);
  }
  s.add(w(0, 0) * g.corner_area[0]);
  s.add(w(g.nlat, 0) * g.corner_area[g.nlat]);
  return s.value();
}

/// Bernoulli function g(h+b) + |u|^2/2 at cell centers, with the staggered
/// velocities averaged to centers.
inline Field2 bernoulli(const SweState& s, const SphericalGrid& g, const PhysicalConstants& c) {
  const int nlat = g.nlat, nlon = g.nlon;
  Field2 out(nlat, nlon);
  for (int j = 0; j < nlat; ++j) {
    const double* u = s.u.row(j);
    const double* vs = (j > 0) ? s.v.row(j - 1) : nullptr;
    const double* vn = (j < nlat - 1) ? s.v.row(j) : nullptr;
    const double* h = s.h.row(j);
    const double* b = c.has_topography() ? c.b.row(j) : nullptr;
    double* o = out.row(j);
    for (int i = 0; i < nlon; ++i) {
      const double ue = u[(i + 1 == nlon) ? 0 : i + 1];
      const double uc = 0.5 * (u[i] + ue);
      const double vc = 0.5 * ((vs ? vs[i] : 0.0) + (vn ? vn[i] : 0.0));
      const double topo = b ? b[i] : 0.0;
      o[i] = c.g * (h[i] + topo) + 0.5 * (uc * uc + vc * vc);
    }
  }
  return out;
}

/// Scratch space reused across tendency evaluations.
struct SweWorkspace {
  Field2 bern;  // nlat x nlon
  Field2 fu;    // nlat x nlon, mass flux h*u at u-points
  Field2 fv;    // (nlat-1) x nlon, mass flux h*v at v-points
  Field2 q;     // (nlat+1) x nlon, potential vorticity at corners

  static SweWorkspace make(const SphericalGrid& g) {
    SweWorkspace w;
    w.bern = Field2(g.nlat, g.nlon);
    w.fu = Field2(g.nlat, g.nlon);
    w.fv = Field2(g.nlat - 1, g.nlon);
    w.q = Field2(g.nlat + 1, g.nlon);
    return w;
  }
};

/// Right-hand side of the vector-invariant shallow-water equations:
///   dh/dt = -div(h u)                     (flux form, telescoping)
///   du/dt = -grad_lambda B + q Vbar       (Sadourny energy form)
///   dv/dt = -grad_phi    B - q Ubar
/// with B the Bernoulli function and q = (f + omega)/h at corners.
inline void tendencies(const SweState& s, const SphericalGrid& g, const PhysicalConstants& c,
                       SweTendency& out, SweWorkspace& ws) {
  const int nlat = g.nlat, nlon = g.nlon;
  if (s.h.rows() != nlat || s.h.cols() != nlon || s.v.rows() != nlat - 1)
    throw ShapeError("tendencies: state/grid mismatch");

  const double a_dlat = g.radius * g.dlat;
  const double a_dlon = g.radius * g.dlon;

  // Pass 1: Bernoulli function and mass fluxes.
  for (int j = 0; j < nlat; ++j) {
    const double* u = s.u.row(j);
    const double* h = s.h.row(j);
    const double* vs = (j > 0) ? s.v.row(j - 1) : nullptr;
    const double* vn = (j < nlat - 1) ? s.v.row(j) : nullptr;
    const double* b = c.has_topography() ? c.b.row(j) : nullptr;
    double* bern = ws.bern.row(j);
    double* fu = ws.fu.row(j);
    for (int i = 0; i < nlon; ++i) {
      const int ie = (i + 1 == nlon) ? 0 : i + 1;
      const int iw = (i == 0) ? nlon - 1 : i - 1;
      const double uc = 0.5 * (u[i] + u[ie]);
      const double vc = 0.5 * ((vs ? vs[i] : 0.0) + (vn ? vn[i] : 0.0));
      const double topo = b ? b[i] : 0.0;
      bern[i] = c.g * (h[i] + topo) + 0.5 * (uc * uc + vc * vc);
      fu[i] = 0.5 * (h[iw] + h[i]) * u[i];
    }
    if (j < nlat - 1) {
      const double* hn = s.h.row(j + 1);
      const double* v = s.v.row(j);
      double* fv = ws.fv.row(j);
      for (int i = 0; i < nlon; ++i) fv[i] = 0.5 * (h[i] + hn[i]) * v[i];
    }
  }

  // Pass 2: potential vorticity at corners, q = (f + omega) / h_corner.
  for (int j = 1; j < nlat; ++j) {
    const double* vrow = s.v.row(j - 1);
    const double* uh = s.u.row(j);
    const double* ul = s.u.row(j - 1);
    const double* hh = s.h.row(j);
    const double* hl = s.h.row(j - 1);
    const double ch = g.coslat_c[j] * a_dlon;
    const double cl = g.coslat_c[j - 1] * a_dlon;
    const double inv_area = g.inv_corner_area[j];
    const double f = 2.0 * c.omega * std::sin(g.lat_edge[j]);
    double* q = ws.q.row(j);
    for (int i = 0; i < nlon; ++i) {
      const int iw = (i == 0) ? nlon - 1 : i - 1;
      const double circ = (vrow[i] - vrow[iw]) * a_dlat - (uh[i] * ch - ul[i] * cl);
      const double hc = 0.25 * (hh[i] + hh[iw] + hl[i] + hl[iw]);
      q[i] = (f + circ * inv_area) / hc;
    }
  }
  {
    KahanSum su_s, su_n, sh_s, sh_n;
    for (int i = 0; i < nlon; ++i) {
      su_s.add(s.u(0, i));
      su_n.add(s.u(nlat - 1, i));
      sh_s.add(s.h(0, i));
      sh_n.add(s.h(nlat - 1, i));
    }
    const double w_s = -su_s.value() * g.coslat_c[0] * a_dlon * g.inv_corner_area[0];
    const double w_n = su_n.value() * g.coslat_c[nlat - 1] * a_dlon * g.inv_corner_area[nlat];
    const double q_s = (-2.0 * c.omega + w_s) / (sh_s.value() / nlon);
    const double q_n = (2.0 * c.omega + w_n) / (sh_n.value() / nlon);
    for (int i = 0; i < nlon; ++i) {
      ws.q(0, i) = q_s;
      ws.q(nlat, i) = q_n;
    }
  }

  // Pass 3: tendencies.
  for (int j = 0; j < nlat; ++j) {
    const double* fu = ws.fu.row(j);
    const double* fvs = (j > 0) ? ws.fv.row(j - 1) : nullptr;
    const double* fvn = (j < nlat - 1) ? ws.fv.row(j) : nullptr;
    const double* bern = ws.bern.row(j);
    const double* ql = ws.q.row(j);
    const double* qh = ws.q.row(j + 1);
    const double len_s = g.face_len_ns[j];
    const double len_n = g.face_len_ns[j + 1];
    const double inv_area = g.inv_cell_area[j];
    const double inv_dx = 1.0 / g.dx_c[j];
    double* dh = out.dh.row(j);
    double* du = out.du.row(j);
    for (int i = 0; i < nlon; ++i) {
      const int ie = (i + 1 == nlon) ? 0 : i + 1;
      const int iw = (i == 0) ? nlon - 1 : i - 1;
      const double flux_e = fu[ie] * a_dlat;
      const double flux_w = fu[i] * a_dlat;
      const double flux_n = (fvn ? fvn[i] * len_n : 0.0);
      const double flux_s = (fvs ? fvs[i] * len_s : 0.0);
      dh[i] = -(flux_e - flux_w + flux_n - flux_s) * inv_area;

      // q * Vbar averaged over the two corners bounding this u-point.
      const double vbar_l = fvs ? 0.5 * (fvs[iw] + fvs[i]) : 0.0;
      const double vbar_h = fvn ? 0.5 * (fvn[iw] + fvn[i]) : 0.0;
      const double qv = 0.5 * (ql[i] * vbar_l + qh[i] * vbar_h);
      du[i] = qv - (bern[i] - bern[iw]) * inv_dx;
    }
    if (j < nlat - 1) {
      const double* fuh = ws.fu.row(j + 1);
      const double* bern_n = ws.bern.row(j + 1);
      const double* qc = ws.q.row(j + 1);
      const double inv_dy = 1.0 / g.dy;
      double* dv = out.dv.row(j);
      for (int i = 0; i < nlon; ++i) {
        const int ie = (i + 1 == nlon) ? 0 : i + 1;
        const double ubar_w = 0.5 * (fu[i] + fuh[i]);
        const double ubar_e = 0.5 * (fu[ie] + fuh[ie]);
        const double qu = 0.5 * (qc[i] * ubar_w + qc[ie] * ubar_e);
        dv[i] = -qu - (bern_n[i] - bern[i]) * inv_dy;
      }
    }
  }
}

inline SweTendency tendencies(const SweState& s, const SphericalGrid& g,
                              const PhysicalConstants& c) {
  if (!s.all_finite()) throw InstabilityError("tendencies: non-finite input state", -1, s.t);
  SweTendency out = SweTendency::zeros(g);
  SweWorkspace ws = SweWorkspace::make(g);
  tendencies(s, g, c, out, ws);
  return out;
}

/// Largest stable time step for the current state:
/// dt_max = cfl * dx_min / (sqrt(g h_max) + |u|_max).
inline double cfl_dt_limit(const SweState& s, const SphericalGrid& g, const PhysicalConstants& c,
                           double cfl = 0.5) {
  double hmax = 0.0, umax = 0.0;
  for (size_t k = 0; k < s.h.size(); ++k) hmax = std::max(hmax, s.h.data()[k]);
  for (size_t k = 0; k < s.u.size(); ++k) umax = std::max(umax, std::abs(s.u.data()[k]));
  for (size_t k = 0; k < s.v.size(); ++k) umax = std::max(umax, std::abs(s.v.data()[k]));
  const double speed = std::sqrt(c.g * hmax) + umax;
  return cfl * g.dx_min / speed;
}

/// Integrator scratch: one tendency buffer, one accumulator, one stage state.
struct Rk4Workspace {
  SweWorkspace tend_ws;
  SweTendency k;
  SweTendency acc;
  SweState stage;

  static Rk4Workspace make(const SphericalGrid& g) {
    Rk4Workspace w;
    w.tend_ws = SweWorkspace::make(g);
    w.k = SweTendency::zeros(g);
    w.acc = SweTendency::zeros(g);
    w.stage = SweState::zeros(g);
    return w;
  }
};

namespace detail {

inline void stage_state(const SweState& y0, double coef, const SweTendency& k, SweState& out) {
  add_scaled(y0.h, coef, k.dh, out.h);
  add_scaled(y0.u, coef, k.du, out.u);
  add_scaled(y0.v, coef, k.dv, out.v);
}

inline void accumulate(SweTendency& acc, double w, const SweTendency& k) {
  axpy(w, k.dh, acc.dh);
  axpy(w, k.du, acc.du);
  axpy(w, k.dv, acc.dv);
}

inline void check_state_health(const SweState& s, long step_index) {
  double hmin = s.h.data()[0];
  bool finite = true;
  for (size_t i = 0; i < s.h.size(); ++i) {
    const double v = s.h.data()[i];
    hmin = std::min(hmin, v);
    finite = finite && std::isfinite(v);
  }
  for (size_t i = 0; i < s.u.size(); ++i) finite = finite && std::isfinite(s.u.data()[i]);
  for (size_t i = 0; i < s.v.size(); ++i) finite = finite && std::isfinite(s.v.data()[i]);
  if (!finite)
    throw InstabilityError("integration produced non-finite fields at step " +
                               std::to_string(step_index) + ", t = " + std::to_string(s.t) + " s",
                           step_index, s.t);
  if (!(hmin > 0.0))
    throw InstabilityError("layer height became non-positive (min h = " + std::to_string(hmin) +
                               ") at step " + std::to_string(step_index),
                           step_index, s.t);
}

}  // namespace detail

/// One classical RK4 step. Enforces the CFL precondition against the
/// current state and verifies field health afterwards. `step_index` only
/// decorates error messages.
inline void step_inplace(SweState& s, double dt, const SphericalGrid& g,
                         const PhysicalConstants& c, Rk4Workspace& ws, long step_index = 0) {
  const double dt_max = cfl_dt_limit(s, g, c, 0.5);
  if (dt > dt_max) {
    throw CflError("CFL violation: dt = " + std::to_string(dt) + " s exceeds limit " +
                       std::to_string(dt_max) + " s set by row " +
                       std::to_string(g.limiting_row) + " (local spacing " +
                       std::to_string(g.dx_min) + " m)",
                   g.limiting_row, g.dx_min, dt_max);
  }

  const double t0 = s.t;
  tendencies(s, g, c, ws.k, ws.tend_ws);  // k1
  ws.acc.dh = ws.k.dh;
  ws.acc.du = ws.k.du;
  ws.acc.dv = ws.k.dv;

  detail::stage_state(s, 0.5 * dt, ws.k, ws.stage);
  tendencies(ws.stage, g, c, ws.k, ws.tend_ws);  // k2
  detail::accumulate(ws.acc, 2.0, ws.k);

  detail::stage_state(s, 0.5 * dt, ws.k, ws.stage);
  tendencies(ws.stage, g, c, ws.k, ws.tend_ws);  // k3
  detail::accumulate(ws.acc, 2.0, ws.k);

  detail::stage_state(s, dt, ws.k, ws.stage);
  tendencies(ws.stage, g, c, ws.k, ws.tend_ws);  // k4
  detail::accumulate(ws.acc, 1.0, ws.k);

  const double w = dt / 6.0;
  axpy(w, ws.acc.dh, s.h);
  axpy(w, ws.acc.du, s.u);
  axpy(w, ws.acc.dv, s.v);
  s.t = t0 + dt;

  detail::check_state_health(s, step_index);
}

inline SweState step(const SweState& s, double dt, const SphericalGrid& g,
                     const PhysicalConstants& c) {
  SweState out = s;
  Rk4Workspace ws = Rk4Workspace::make(g);
  step_inplace(out, dt, g, c, ws);
  return out;
}

using SnapshotHook = std::function<void(const SweState&)>;

/// Integrates from s.t to t_end with fixed dt, invoking `hook` whenever the
/// simulated time crosses a multiple of hook_interval (never at the initial
/// time). dt must divide both t_end - s.t and hook_interval.
inline SweState integrate(SweState s, double dt, double t_end, const SphericalGrid& g,
                          const PhysicalConstants& c, double hook_interval = 0.0,
                          const SnapshotHook& hook = nullptr) {
  if (t_end < s.t) throw ConfigError("integrate: t_end precedes state time");
  if (t_end == s.t) return s;
  if (!(dt > 0.0)) throw ConfigError("integrate: dt must be positive");

  const double span = t_end - s.t;
  const long nsteps = std::lround(span / dt);
  if (std::abs(nsteps * dt - span) > 1e-9 * std::max(1.0, span))
    throw ConfigError("integrate: dt does not divide the integration span");
  long hook_every = 0;
  if (hook_interval > 0.0 && hook) {
    hook_every = std::lround(hook_interval / dt);
    if (hook_every <= 0 || std::abs(hook_every * dt - hook_interval) > 1e-9 * hook_interval)
      throw ConfigError("integrate: dt does not divide the hook interval");
  }

  Rk4Workspace ws = Rk4Workspace::make(g);
  const double t0 = s.t;
  for (long k = 1; k <= nsteps; ++k) {
    step_inplace(s, dt, g, c, ws, k);
    s.t = t0 + k * dt;  // avoid accumulated time drift
    if (hook_every > 0 && k % hook_every == 0) hook(s);
  }
  return s;
}

/// Total mass sum_j A_j h_j (compensated summation).
inline double total_mass(const SweState& s, const SphericalGrid& g) { return area_sum(s.h, g); }

}  // namespace swsr
