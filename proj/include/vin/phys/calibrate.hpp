#pragma once

// Tunes the unspecified physics constants (force strength, initial speed)
// toward a target mean per-frame displacement, so object velocities look
// reasonable at the rendered resolution.

#include "vin/phys/types.hpp"

namespace vin::phys {

// Mean over frames/objects of |p(t+1) - p(t)| across `sims` seeded runs.
double mean_frame_displacement(const SimSpec& spec, int sims = 4);

struct CalibrationReport {
    SimSpec tuned;
    double target = 0.01;
    double before = 0.0;
    double after = 0.0;
    int iterations = 0;
};

CalibrationReport calibrate_spec(SimSpec spec, double target = 0.01,
                                 int max_iters = 12, int probe_sims = 4);

}  // namespace vin::phys
