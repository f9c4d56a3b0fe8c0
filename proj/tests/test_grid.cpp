#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "swsr/grid.hpp"

using namespace swsr;
using Catch::Approx;

namespace {
constexpr double kEarthRadius = 6.371e6;

// Independent surface-integral oracle for one lat-lon cell:
// a^2 * integral of cos(phi) over the cell, by composite Simpson in phi.
double cell_area_oracle(double lat_s, double lat_n, double dlon, double a) {
  const int n = 2000;  // even
  const double h = (lat_n - lat_s) / n;
  double acc = std::cos(lat_s) + std::cos(lat_n);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * std::cos(lat_s + i * h);
  return a * a * dlon * acc * h / 3.0;
}
}  // namespace

TEST_CASE("total area equals the sphere surface") {
  for (auto [nlat, nlon] : {std::pair{4, 8}, {17, 36}, {64, 128}}) {
    auto g = build_grid(nlat, nlon, kEarthRadius);
    const double sphere = 4.0 * std::numbers::pi * kEarthRadius * kEarthRadius;
    REQUIRE(g.total_area() == Approx(sphere).epsilon(1e-12));
  }
}

TEST_CASE("longitude spacing is uniform") {
  auto g = build_grid(180, 360, kEarthRadius);
  REQUIRE(g.dlon == Approx(std::numbers::pi / 180.0).epsilon(1e-15));
  for (int i = 1; i < g.nlon; ++i)
    REQUIRE(g.lon_center[i] - g.lon_center[i - 1] == Approx(g.dlon).epsilon(1e-12));
}

TEST_CASE("latitude centers strictly increasing inside the open interval") {
  auto g = build_grid(7, 12, 1.0);
  REQUIRE(g.lat_center.front() > -0.5 * std::numbers::pi);
  REQUIRE(g.lat_center.back() < 0.5 * std::numbers::pi);
  for (int j = 1; j < g.nlat; ++j) REQUIRE(g.lat_center[j] > g.lat_center[j - 1]);
}

TEST_CASE("cell areas match the closed form and the surface integral") {
  auto g = build_grid(4, 8, 1.0);
  // rows adjacent to the equator span one dlat from the equator
  const double expected = (std::numbers::pi / 4.0) * (std::sin(std::numbers::pi / 4.0) - 0.0);
  REQUIRE(g.cell_area[1] == Approx(expected).epsilon(1e-14));
  REQUIRE(g.cell_area[2] == Approx(expected).epsilon(1e-14));
  for (int j = 0; j < g.nlat; ++j) {
    const double oracle = cell_area_oracle(g.lat_edge[j], g.lat_edge[j + 1], g.dlon, 1.0);
    REQUIRE(g.cell_area[j] == Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("degenerate sizes are rejected") {
  REQUIRE_THROWS_AS(build_grid(3, 8, 1.0), ConfigError);
  REQUIRE_THROWS_AS(build_grid(4, 6, 1.0), ConfigError);
  REQUIRE_THROWS_AS(build_grid(4, 9, 1.0), ConfigError);
  REQUIRE_THROWS_AS(build_grid(4, 8, 0.0), ConfigError);
}

TEST_CASE("area_mean of a constant is the constant") {
  auto g = build_grid(12, 24, kEarthRadius);
  Field2 f(12, 24, 3.25);
  REQUIRE(area_mean(f, g) == Approx(3.25).epsilon(1e-14));
}

TEST_CASE("area_mean of a hemisphere indicator is one half") {
  auto g = build_grid(16, 32, kEarthRadius);
  Field2 f(16, 32, 0.0);
  for (int j = 8; j < 16; ++j)
    for (int i = 0; i < 32; ++i) f(j, i) = 1.0;
  REQUIRE(area_mean(f, g) == Approx(0.5).epsilon(1e-13));
}

TEST_CASE("area_mean agrees with a direct weighted sum on a toy grid") {
  auto g = build_grid(4, 8, 2.0);
  Field2 f(4, 8);
  double num = 0.0, den = 0.0;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 8; ++i) {
      f(j, i) = 0.1 * j - 0.7 * i + 0.01 * j * i;
      num += g.cell_area[j] * f(j, i);
      den += g.cell_area[j];
    }
  REQUIRE(area_mean(f, g) == Approx(num / den).epsilon(1e-13));
}

TEST_CASE("area_mean is linear") {
  auto g = build_grid(10, 20, kEarthRadius);
  Field2 f(10, 20), h(10, 20);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 20; ++i) {
      f(j, i) = d(rng);
      h(j, i) = d(rng);
    }
  const double alpha = 2.5, beta = -0.75;
  Field2 combo(10, 20);
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 20; ++i) combo(j, i) = alpha * f(j, i) + beta * h(j, i);
  const double lhs = area_mean(combo, g);
  const double rhs = alpha * area_mean(f, g) + beta * area_mean(h, g);
  REQUIRE(std::abs(lhs - rhs) <= 1e-14 * std::max(1.0, std::abs(rhs)));
}

TEST_CASE("area_mean rejects mismatched shapes") {
  auto g = build_grid(8, 16, 1.0);
  Field2 f(8, 14);
  REQUIRE_THROWS_AS(area_mean(f, g), ShapeError);
}

TEST_CASE("build_grid is deterministic") {
  auto g1 = build_grid(32, 64, kEarthRadius);
  auto g2 = build_grid(32, 64, kEarthRadius);
  REQUIRE(g1.lat_center == g2.lat_center);
  REQUIRE(g1.cell_area == g2.cell_area);
  REQUIRE(g1.corner_area == g2.corner_area);
}
