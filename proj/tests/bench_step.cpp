// Quick timing of the RK4 step at the evaluation grid sizes.
#include <chrono>
#include <cstdio>

#include "swsr/galewsky.hpp"
#include "swsr/swe.hpp"

using namespace swsr;

int main() {
  PhysicalConstants c;
  for (auto [nlat, nlon] : {std::pair{64, 128}, {128, 256}, {256, 512}}) {
    auto g = build_grid(nlat, nlon, 6.371e6);
    GalewskyParams p;
    p.h0 = calibrate_h0(g, p, c);
    SweState s = init_state(g, p, c);
    const double dt = 0.8 * cfl_dt_limit(s, g, c);
    Rk4Workspace ws = Rk4Workspace::make(g);
    step_inplace(s, dt, g, c, ws);  // warm up
    const int reps = 40;
    auto t0 = std::chrono::steady_clock::now();
    for (int k = 0; k < reps; ++k) step_inplace(s, dt, g, c, ws, k);
    auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
    std::printf("%4dx%-4d  dt=%6.3f s  %8.3f ms/step  (1 sim day = %.1f s wall)\n", nlon, nlat,
                dt, ms, ms * 86400.0 / dt / 1000.0);
  }
  return 0;
}
