#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "swsr/errors.hpp"
#include "swsr/field.hpp"
#include "swsr/grid.hpp"
#include "swsr/swe_state.hpp"

namespace swsr {

/// Great-circle distance between two (lat, lon) points on a unit sphere.
inline double great_circle(double lat1, double lon1, double lat2, double lon2) {
  const double sdlat = std::sin(0.5 * (lat2 - lat1));
  const double sdlon = std::sin(0.5 * (lon2 - lon1));
  const double h = sdlat * sdlat + std::cos(lat1) * std::cos(lat2) * sdlon * sdlon;
  return 2.0 * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Normalized inverse-distance weights (1/d^power). A zero distance takes
/// the whole weight.
inline std::vector<double> inverse_distance_weights(const std::vector<double>& d, double power) {
  std::vector<double> w(d.size(), 0.0);
  for (size_t i = 0; i < d.size(); ++i) {
    if (d[i] <= 0.0) {
      std::fill(w.begin(), w.end(), 0.0);
      w[i] = 1.0;
      return w;
    }
    w[i] = std::pow(1.0 / d[i], power);
  }
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return w;
}

struct RestrictOptions {
  int k = 4;          // neighbors
  double power = 1.0; // inverse-distance exponent
};

namespace detail {

/// Tensor-product point set (latitudes x longitudes); longitudes wrap.
struct PointSet {
  const std::vector<double>* lats;
  const std::vector<double>* lons;
};

inline int nearest_sorted(const std::vector<double>& xs, double x) {
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return 0;
  if (it == xs.end()) return static_cast<int>(xs.size()) - 1;
  int hi = static_cast<int>(it - xs.begin());
  return (x - xs[hi - 1] <= xs[hi] - x) ? hi - 1 : hi;
}

/// Distance-weighted k-NN transfer between tensor-product point sets.
/// Candidates come from a 7x7 index window around the nearest fine point,
/// which always contains the 4 nearest points of a regular grid.
inline void idw_transfer(const Field2& src, const PointSet& sp, Field2& dst, const PointSet& dp,
                         const RestrictOptions& opt) {
  const int snlat = static_cast<int>(sp.lats->size());
  const int snlon = static_cast<int>(sp.lons->size());
  const int k = std::min<int>(opt.k, snlat * snlon);
  const double lon0 = (*sp.lons)[0];
  const double dlon = (snlon > 1) ? (*sp.lons)[1] - (*sp.lons)[0] : 2.0 * std::numbers::pi;

  std::vector<std::pair<double, double>> cand;  // (distance, value)
  cand.reserve(49);
  for (int J = 0; J < dst.rows(); ++J) {
    const double plat = (*dp.lats)[J];
    const int jb = nearest_sorted(*sp.lats, plat);
    for (int I = 0; I < dst.cols(); ++I) {
      const double plon = (*dp.lons)[I];
      int ib = static_cast<int>(std::floor((plon - lon0) / dlon + 0.5));
      cand.clear();
      for (int dj = -3; dj <= 3; ++dj) {
        const int j = jb + dj;
        if (j < 0 || j >= snlat) continue;
        for (int di = -3; di <= 3; ++di) {
          int i = (ib + di) % snlon;
          if (i < 0) i += snlon;
          double d = great_circle(plat, plon, (*sp.lats)[j], (*sp.lons)[i]);
          cand.emplace_back(d, src(j, i));
        }
      }
      std::partial_sort(cand.begin(), cand.begin() + std::min<size_t>(k, cand.size()), cand.end());
      const int kk = std::min<int>(k, static_cast<int>(cand.size()));
      if (cand[0].first < 1e-12) {
        dst(J, I) = cand[0].second;
        continue;
      }
      double wsum = 0.0, acc = 0.0;
      for (int q = 0; q < kk; ++q) {
        const double w = std::pow(1.0 / cand[q].first, opt.power);
        wsum += w;
        acc += w * cand[q].second;
      }
      dst(J, I) = acc / wsum;
    }
  }
}

inline std::vector<double> interior_lat_edges(const SphericalGrid& g) {
  return std::vector<double>(g.lat_edge.begin() + 1, g.lat_edge.end() - 1);
}

}  // namespace detail

/// Fine-to-coarse restriction of a full state by inverse-distance-weighted
/// k-nearest-neighbor averaging in great-circle distance, per staggered
/// point set. Exact for constant fields (convex weights).
inline SweState restrict_state(const SweState& fine, const SphericalGrid& fg,
                               const SphericalGrid& cg, const RestrictOptions& opt = {}) {
  if (!(fg.nlat > cg.nlat && fg.nlon > cg.nlon))
    throw ConfigError("restrict_state: source grid must be strictly finer in both dimensions");
  if (fine.h.rows() != fg.nlat || fine.h.cols() != fg.nlon)
    throw ShapeError("restrict_state: state does not match the fine grid");

  SweState out = SweState::zeros(cg);
  out.t = fine.t;

  detail::PointSet f_h{&fg.lat_center, &fg.lon_center};
  detail::PointSet c_h{&cg.lat_center, &cg.lon_center};
  detail::idw_transfer(fine.h, f_h, out.h, c_h, opt);

  detail::PointSet f_u{&fg.lat_center, &fg.lon_edge};
  detail::PointSet c_u{&cg.lat_center, &cg.lon_edge};
  detail::idw_transfer(fine.u, f_u, out.u, c_u, opt);

  const std::vector<double> f_ve = detail::interior_lat_edges(fg);
  const std::vector<double> c_ve = detail::interior_lat_edges(cg);
  detail::PointSet f_v{&f_ve, &fg.lon_center};
  detail::PointSet c_v{&c_ve, &cg.lon_center};
  detail::idw_transfer(fine.v, f_v, out.v, c_v, opt);
  return out;
}

/// Staggered -> cell-centered velocities by two-point averaging; the polar
/// rows use the reflective closure so constant fields round-trip exactly.
inline void stagger_to_centers(const SweState& s, const SphericalGrid& g, Field2& uc, Field2& vc) {
  const int nlat = g.nlat, nlon = g.nlon;
  uc = Field2(nlat, nlon);
  vc = Field2(nlat, nlon);
  for (int j = 0; j < nlat; ++j) {
    const double* u = s.u.row(j);
    double* o = uc.row(j);
    for (int i = 0; i < nlon; ++i) o[i] = 0.5 * (u[i] + u[(i + 1 == nlon) ? 0 : i + 1]);
    const double* vs = (j > 0) ? s.v.row(j - 1) : s.v.row(0);
    const double* vn = (j < nlat - 1) ? s.v.row(j) : s.v.row(nlat - 2);
    double* ov = vc.row(j);
    for (int i = 0; i < nlon; ++i) ov[i] = 0.5 * (vs[i] + vn[i]);
  }
}

/// Cell-centered -> staggered velocities (adjoint layout of the above).
/// Interior v faces average the two neighboring centers; pole faces are
/// implicit zeros of the state layout.
inline void centers_to_stagger(const Field2& uc, const Field2& vc, const SphericalGrid& g,
                               SweState& out) {
  const int nlat = g.nlat, nlon = g.nlon;
  if (uc.rows() != nlat || uc.cols() != nlon) throw ShapeError("centers_to_stagger: bad shape");
  for (int j = 0; j < nlat; ++j) {
    const double* c = uc.row(j);
    double* u = out.u.row(j);
    for (int i = 0; i < nlon; ++i) u[i] = 0.5 * (c[(i == 0) ? nlon - 1 : i - 1] + c[i]);
  }
  for (int j = 0; j + 1 < nlat; ++j) {
    const double* cs = vc.row(j);
    const double* cn = vc.row(j + 1);
    double* v = out.v.row(j);
    for (int i = 0; i < nlon; ++i) v[i] = 0.5 * (cs[i] + cn[i]);
  }
}

/// Patch decomposition parameters. The 8x8 patch grid follows the local
/// correction design; pixel_size must be divisible by 16 so two 4x
/// poolings stay exact.
struct PatchSpec {
  int grid_rows = 8;
  int grid_cols = 8;
  double overlap_fraction = 0.10;
  int pixel_size = 64;

  void validate() const {
    if (grid_rows <= 0 || grid_cols <= 0) throw ConfigError("patch grid must be positive");
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 0.5))
      throw ConfigError("overlap_fraction must be in [0, 0.5)");
    if (pixel_size <= 0 || pixel_size % 16 != 0)
      throw ConfigError("pixel_size must be a positive multiple of 16, got " +
                        std::to_string(pixel_size));
  }
};

/// One rasterized velocity patch: 2 channels (u, v) on a pixel_size^2
/// grid, plus fractional pixel coordinates of the covered core cells for
/// back-sampling.
struct PatchTensor {
  int n = 0;  // latitude band index
  int m = 0;  // longitude band index
  int pixels = 0;
  std::vector<double> values;  // 2 * pixels * pixels, channel-major (u then v)

  struct BackRef {
    int cell_row;
    int cell_col;
    double fy;  // fractional pixel coordinates of the cell center
    double fx;
  };
  std::vector<BackRef> core_cells;

  double& at(int ch, int py, int px) {
    return values[(static_cast<size_t>(ch) * pixels + py) * pixels + px];
  }
  double at(int ch, int py, int px) const {
    return values[(static_cast<size_t>(ch) * pixels + py) * pixels + px];
  }
};

/// Precomputed rasterization geometry for one grid + spec combination.
struct PatchLayout {
  PatchSpec spec;
  int nlat = 0;
  int nlon = 0;

  struct Patch {
    int n, m;
    int row0, row1;          // core rows [row0, row1)
    int col0, col1;          // core cols [col0, col1), unwrapped
    int ext_row0, ext_row1;  // with overlap margin, clamped at poles
    int ext_col0, ext_col1;  // with overlap margin, wraps in longitude
    double lat_lo, lat_hi;
    double lon_lo, lon_hi;
    std::vector<int> rowmap;  // pixel row -> grid row
    std::vector<int> colmap;  // pixel col -> grid col (mod nlon)
  };
  std::vector<Patch> patches;
};

inline PatchLayout build_patch_layout(const SphericalGrid& g, const PatchSpec& spec) {
  spec.validate();
  if (g.nlat < spec.grid_rows || g.nlon < spec.grid_cols)
    throw ConfigError("grid smaller than the patch grid");

  PatchLayout lay;
  lay.spec = spec;
  lay.nlat = g.nlat;
  lay.nlon = g.nlon;
  const int P = spec.pixel_size;
  const double lat0 = g.lat_edge[0];
  const double lon0 = g.lon_edge[0];

  for (int n = 0; n < spec.grid_rows; ++n) {
    const int row0 = n * g.nlat / spec.grid_rows;
    const int row1 = (n + 1) * g.nlat / spec.grid_rows;
    const int mlat = static_cast<int>(std::lround(spec.overlap_fraction * (row1 - row0)));
    for (int m = 0; m < spec.grid_cols; ++m) {
      const int col0 = m * g.nlon / spec.grid_cols;
      const int col1 = (m + 1) * g.nlon / spec.grid_cols;
      const int mlon = static_cast<int>(std::lround(spec.overlap_fraction * (col1 - col0)));

      PatchLayout::Patch p;
      p.n = n;
      p.m = m;
      p.row0 = row0;
      p.row1 = row1;
      p.col0 = col0;
      p.col1 = col1;
      p.ext_row0 = std::max(0, row0 - mlat);
      p.ext_row1 = std::min(g.nlat, row1 + mlat);
      p.ext_col0 = col0 - mlon;  // may be negative; wraps
      p.ext_col1 = col1 + mlon;

      p.lat_lo = lat0 + p.ext_row0 * g.dlat;
      p.lat_hi = lat0 + p.ext_row1 * g.dlat;
      p.lon_lo = lon0 + p.ext_col0 * g.dlon;
      p.lon_hi = lon0 + p.ext_col1 * g.dlon;

      const double px_h = (p.lat_hi - p.lat_lo) / P;
      const double px_w = (p.lon_hi - p.lon_lo) / P;
      p.rowmap.resize(P);
      p.colmap.resize(P);
      for (int py = 0; py < P; ++py) {
        const double lat = p.lat_lo + (py + 0.5) * px_h;
        // nearest cell-center index; uniform spacing makes clamping into the
        // included range exact
        int rc = static_cast<int>(std::floor((lat - (lat0 + 0.5 * g.dlat)) / g.dlat + 0.5));
        rc = std::clamp(rc, p.ext_row0, p.ext_row1 - 1);
        p.rowmap[py] = rc;
      }
      for (int px = 0; px < P; ++px) {
        const double lon = p.lon_lo + (px + 0.5) * px_w;
        int cc = static_cast<int>(std::floor((lon - (lon0 + 0.5 * g.dlon)) / g.dlon + 0.5));
        cc = std::clamp(cc, p.ext_col0, p.ext_col1 - 1);
        int wrapped = cc % g.nlon;
        if (wrapped < 0) wrapped += g.nlon;
        p.colmap[px] = wrapped;
      }
      lay.patches.push_back(std::move(p));
    }
  }
  return lay;
}

/// Rasterizes cell-centered (u, v) onto every patch by nearest-neighbor
/// lookup and records per-core-cell back coordinates.
inline std::vector<PatchTensor> extract_patches(const Field2& uc, const Field2& vc,
                                                const SphericalGrid& g, const PatchLayout& lay) {
  if (uc.rows() != g.nlat || uc.cols() != g.nlon || !uc.same_shape(vc))
    throw ShapeError("extract_patches: field/grid mismatch");
  const int P = lay.spec.pixel_size;
  std::vector<PatchTensor> out;
  out.reserve(lay.patches.size());
  for (const auto& p : lay.patches) {
    PatchTensor t;
    t.n = p.n;
    t.m = p.m;
    t.pixels = P;
    t.values.resize(2 * static_cast<size_t>(P) * P);
    for (int py = 0; py < P; ++py) {
      const int j = p.rowmap[py];
      const double* urow = uc.row(j);
      const double* vrow = vc.row(j);
      double* du = &t.values[static_cast<size_t>(py) * P];
      double* dv = &t.values[(static_cast<size_t>(P) + py) * P];
      for (int px = 0; px < P; ++px) {
        du[px] = urow[p.colmap[px]];
        dv[px] = vrow[p.colmap[px]];
      }
    }
    const double px_h = (p.lat_hi - p.lat_lo) / P;
    const double px_w = (p.lon_hi - p.lon_lo) / P;
    for (int j = p.row0; j < p.row1; ++j) {
      const double lat = g.lat_center[j];
      const double fy = (lat - p.lat_lo) / px_h - 0.5;
      for (int cu = p.col0; cu < p.col1; ++cu) {
        const double lon = g.lon_edge[0] + (cu + 0.5) * g.dlon;
        const double fx = (lon - p.lon_lo) / px_w - 0.5;
        int wrapped = cu % g.nlon;
        if (wrapped < 0) wrapped += g.nlon;
        t.core_cells.push_back({j, wrapped, fy, fx});
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

/// Bilinear interpolation of one channel plane at fractional pixel
/// coordinates, clamped at the patch border.
inline double bilinear_at(const PatchTensor& t, int ch, double fy, double fx) {
  const int P = t.pixels;
  fy = std::clamp(fy, 0.0, static_cast<double>(P - 1));
  fx = std::clamp(fx, 0.0, static_cast<double>(P - 1));
  int y0 = std::min(static_cast<int>(fy), P - 2);
  int x0 = std::min(static_cast<int>(fx), P - 2);
  if (P == 1) {
    y0 = 0;
    x0 = 0;
  }
  const double wy = fy - y0;
  const double wx = fx - x0;
  const int y1 = std::min(y0 + 1, P - 1);
  const int x1 = std::min(x0 + 1, P - 1);
  return (1 - wy) * ((1 - wx) * t.at(ch, y0, x0) + wx * t.at(ch, y0, x1)) +
         wy * ((1 - wx) * t.at(ch, y1, x0) + wx * t.at(ch, y1, x1));
}

/// Stitches corrected patches back to cell-centered fields. Overlap
/// margins are discarded: each cell takes its value from the single patch
/// whose core contains it.
inline void sample_back(const std::vector<PatchTensor>& patches, const SphericalGrid& g,
                        Field2& uc, Field2& vc) {
  uc = Field2(g.nlat, g.nlon);
  vc = Field2(g.nlat, g.nlon);
  std::vector<char> seen(static_cast<size_t>(g.nlat) * g.nlon, 0);
  for (const auto& t : patches) {
    for (const auto& bc : t.core_cells) {
      uc(bc.cell_row, bc.cell_col) = bilinear_at(t, 0, bc.fy, bc.fx);
      vc(bc.cell_row, bc.cell_col) = bilinear_at(t, 1, bc.fy, bc.fx);
      seen[static_cast<size_t>(bc.cell_row) * g.nlon + bc.cell_col] = 1;
    }
  }
  for (size_t k = 0; k < seen.size(); ++k) {
    if (!seen[k])
      throw CoverageError("sample_back: cell " + std::to_string(k / g.nlon) + "," +
                          std::to_string(k % g.nlon) + " not covered by any patch core");
  }
}

}  // namespace swsr
