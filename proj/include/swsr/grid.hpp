#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "swsr/errors.hpp"
#include "swsr/field.hpp"

namespace swsr {

/// Regular latitude-longitude Arakawa C-grid on the sphere.
///
/// Cell centers sit at (lat_center[j], lon_center[i]) with j=0 the
/// southernmost row. Zonal velocity u lives on west faces (lon edges at
/// cell-center latitudes), meridional velocity v on interior north/south
/// faces (lat edges at cell-center longitudes); the pole faces carry
/// v == 0 and are not stored. Immutable after construction.
struct SphericalGrid {
  int nlat = 0;
  int nlon = 0;
  double radius = 0.0;

  double dlat = 0.0;  // radians between latitude rows
  double dlon = 0.0;  // radians between longitude columns

  std::vector<double> lat_center;   // nlat, strictly increasing in (-pi/2, pi/2)
  std::vector<double> lat_edge;     // nlat+1, from -pi/2 to pi/2
  std::vector<double> lon_center;   // nlon
  std::vector<double> lon_edge;     // nlon (west edge of each column)
  std::vector<double> cell_area;    // nlat, per-cell area of row j (zonally uniform)
  std::vector<double> coslat_c;     // cos at centers
  std::vector<double> coslat_e;     // cos at edges (0 at poles)
  std::vector<double> corner_area;  // nlat+1; rows 1..nlat-1 are dual-cell areas,
                                    // rows 0 and nlat are full polar-cap areas
  std::vector<double> fcor_c;       // Coriolis-free here; filled by solver helpers

  // Precomputed metric factors for the solver.
  double dy = 0.0;                        // a * dlat, meridional face length
  std::vector<double> dx_c;               // a cos(lat_c) * dlon, zonal spacing at centers
  std::vector<double> face_len_ns;        // nlat+1, a cos(lat_e) * dlon
  std::vector<double> inv_cell_area;      // nlat
  std::vector<double> inv_corner_area;    // nlat+1
  int limiting_row = 0;                   // row with the smallest local spacing
  double dx_min = 0.0;                    // min over rows of min(dy, dx_c[j])

  double total_area() const {
    KahanSum s;
    for (int j = 0; j < nlat; ++j) s.add(cell_area[j] * nlon);
    return s.value();
  }
};

/// Builds the grid. Requires nlat >= 4, nlon >= 8, nlon even. Cell areas
/// are a^2 * dlon * (sin(lat_north) - sin(lat_south)); their total is the
/// exact sphere area by telescoping.
inline SphericalGrid build_grid(int nlat, int nlon, double radius) {
  if (nlat < 4) throw ConfigError("build_grid: nlat must be >= 4, got " + std::to_string(nlat));
  if (nlon < 8) throw ConfigError("build_grid: nlon must be >= 8, got " + std::to_string(nlon));
  if (nlon % 2 != 0)
    throw ConfigError("build_grid: nlon must be even, got " + std::to_string(nlon));
  if (!(radius > 0.0)) throw ConfigError("build_grid: radius must be positive");

  const double pi = std::numbers::pi;
  SphericalGrid g;
  g.nlat = nlat;
  g.nlon = nlon;
  g.radius = radius;
  g.dlat = pi / nlat;
  g.dlon = 2.0 * pi / nlon;

  g.lat_edge.resize(nlat + 1);
  for (int j = 0; j <= nlat; ++j) g.lat_edge[j] = -0.5 * pi + j * g.dlat;
  g.lat_edge[0] = -0.5 * pi;
  g.lat_edge[nlat] = 0.5 * pi;

  g.lat_center.resize(nlat);
  for (int j = 0; j < nlat; ++j) g.lat_center[j] = -0.5 * pi + (j + 0.5) * g.dlat;

  g.lon_edge.resize(nlon);
  g.lon_center.resize(nlon);
  for (int i = 0; i < nlon; ++i) {
    g.lon_edge[i] = -pi + i * g.dlon;
    g.lon_center[i] = -pi + (i + 0.5) * g.dlon;
  }

  g.coslat_c.resize(nlat);
  g.coslat_e.resize(nlat + 1);
  for (int j = 0; j < nlat; ++j) g.coslat_c[j] = std::cos(g.lat_center[j]);
  for (int j = 0; j <= nlat; ++j) g.coslat_e[j] = std::cos(g.lat_edge[j]);
  g.coslat_e[0] = 0.0;
  g.coslat_e[nlat] = 0.0;

  const double a2dlon = radius * radius * g.dlon;
  g.cell_area.resize(nlat);
  g.inv_cell_area.resize(nlat);
  for (int j = 0; j < nlat; ++j) {
    g.cell_area[j] = a2dlon * (std::sin(g.lat_edge[j + 1]) - std::sin(g.lat_edge[j]));
    g.inv_cell_area[j] = 1.0 / g.cell_area[j];
  }

  // Dual (corner) areas: interior corners span adjacent center latitudes,
  // pole rows get the full cap bounded by the nearest center circle.
  g.corner_area.resize(nlat + 1);
  g.inv_corner_area.resize(nlat + 1);
  for (int j = 1; j < nlat; ++j)
    g.corner_area[j] = a2dlon * (std::sin(g.lat_center[j]) - std::sin(g.lat_center[j - 1]));
  g.corner_area[0] = radius * radius * 2.0 * pi * (std::sin(g.lat_center[0]) + 1.0);
  g.corner_area[nlat] = radius * radius * 2.0 * pi * (1.0 - std::sin(g.lat_center[nlat - 1]));
  for (int j = 0; j <= nlat; ++j) g.inv_corner_area[j] = 1.0 / g.corner_area[j];

  g.dy = radius * g.dlat;
  g.dx_c.resize(nlat);
  g.face_len_ns.resize(nlat + 1);
  for (int j = 0; j < nlat; ++j) g.dx_c[j] = radius * g.coslat_c[j] * g.dlon;
  for (int j = 0; j <= nlat; ++j) g.face_len_ns[j] = radius * g.coslat_e[j] * g.dlon;

  g.dx_min = g.dy;
  g.limiting_row = 0;
  for (int j = 0; j < nlat; ++j) {
    if (g.dx_c[j] < g.dx_min) {
      g.dx_min = g.dx_c[j];
      g.limiting_row = j;
    }
  }
  return g;
}

/// Area-weighted global mean of a cell-centered field:
/// sum_j A_j f_j / sum_j A_j.
inline double area_mean(const Field2& f, const SphericalGrid& g) {
  if (f.rows() != g.nlat || f.cols() != g.nlon)
    throw ShapeError("area_mean: field is " + std::to_string(f.rows()) + "x" +
                     std::to_string(f.cols()) + ", grid is " + std::to_string(g.nlat) + "x" +
                     std::to_string(g.nlon));
  KahanSum num;
  KahanSum den;
  for (int j = 0; j < g.nlat; ++j) {
    const double* r = f.row(j);
    KahanSum rowsum;
    for (int i = 0; i < g.nlon; ++i) rowsum.add(r[i]);
    num.add(g.cell_area[j] * rowsum.value());
    den.add(g.cell_area[j] * g.nlon);
  }
  return num.value() / den.value();
}

/// Area-weighted sum  sum_j A_j f_j  over all cells.
inline double area_sum(const Field2& f, const SphericalGrid& g) {
  if (f.rows() != g.nlat || f.cols() != g.nlon) throw ShapeError("area_sum: shape mismatch");
  KahanSum s;
  for (int j = 0; j < g.nlat; ++j) {
    const double* r = f.row(j);
    KahanSum rowsum;
    for (int i = 0; i < g.nlon; ++i) rowsum.add(r[i]);
    s.add(g.cell_area[j] * rowsum.value());
  }
  return s.value();
}

}  // namespace swsr
