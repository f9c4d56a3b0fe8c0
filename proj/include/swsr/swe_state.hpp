#pragma once

#include "swsr/field.hpp"
#include "swsr/grid.hpp"

namespace swsr {

/// Physical parameters of the shallow-water system. The topography b is
/// cell-centered and defaults to zero everywhere.
struct PhysicalConstants {
  double g = 9.80616;      // m/s^2
  double omega = 7.292e-5;  // 1/s planetary rotation
  double h0_ref = 10000.0;  // m, reference depth for documentation only
  Field2 b;                 // optional topography; empty means b == 0

  bool has_topography() const { return b.size() > 0; }
};

/// Prognostic fields on the C-grid.
///   h: cell centers, nlat x nlon
///   u: west faces,   nlat x nlon (periodic in longitude)
///   v: interior north/south faces, (nlat-1) x nlon; the pole faces are
///      identically zero and not stored.
struct SweState {
  Field2 h;
  Field2 u;
  Field2 v;
  double t = 0.0;

  static SweState zeros(const SphericalGrid& g) {
    SweState s;
    s.h = Field2(g.nlat, g.nlon);
    s.u = Field2(g.nlat, g.nlon);
    s.v = Field2(g.nlat - 1, g.nlon);
    s.t = 0.0;
    return s;
  }

  bool same_shape(const SweState& o) const {
    return h.same_shape(o.h) && u.same_shape(o.u) && v.same_shape(o.v);
  }

  bool all_finite() const { return h.all_finite() && u.all_finite() && v.all_finite(); }
};

/// Tendencies (dh/dt, du/dt, dv/dt) share the state layout.
struct SweTendency {
  Field2 dh;
  Field2 du;
  Field2 dv;

  static SweTendency zeros(const SphericalGrid& g) {
    SweTendency k;
    k.dh = Field2(g.nlat, g.nlon);
    k.du = Field2(g.nlat, g.nlon);
    k.dv = Field2(g.nlat - 1, g.nlon);
    return k;
  }
};

}  // namespace swsr
