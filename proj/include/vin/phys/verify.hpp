#pragma once

// Physics invariant checks shared by the test suite and the `verify` CLI
// command: conservation laws, mirror symmetry, determinism, and the
// semi-implicit-Euler-vs-RK4 fidelity bound.

#include <cstdint>
#include <string>
#include <vector>

#include "vin/phys/types.hpp"

namespace vin::phys {

struct VerifyCheck {
    std::string name;
    bool applicable = true;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

// Per-frame total-momentum drift on the frictionless system (gravity runs
// with lambda_center = 0). Applicable to spring/gravity/drift.
VerifyCheck check_momentum_conservation(SimSpec spec);

// Kinetic-energy drift and per-collision conservation for the frictionless
// billiards family; requires at least `min_collisions` pair collisions.
VerifyCheck check_energy_conservation(SimSpec spec, long long min_collisions);

// Mirroring positions/velocities about x = 0.5 must mirror the trajectory.
VerifyCheck check_mirror_symmetry(SimSpec spec);

// Identical seeds must produce bit-identical trajectories.
VerifyCheck check_determinism(const SimSpec& spec);

// Positional deviation of the production integrator from the RK4 oracle
// over `n_frames` rendered frames; threshold 1/32 framewidth.
VerifyCheck check_integrator_fidelity(SimSpec spec, int n_frames = 300);

std::vector<VerifyCheck> verify_physics(const SimSpec& spec);

}  // namespace vin::phys
