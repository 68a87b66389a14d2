#pragma once

// Deterministic 2D multi-body simulator: pairwise force laws, semi-implicit
// Euler integration, instantaneous elastic collisions for the billiards
// family, and randomized initialization with momentum / center-of-mass
// constraints. An RK4 integrator of the same smooth dynamics serves as the
// fidelity oracle.

#include <random>

#include "vin/phys/types.hpp"

namespace vin::phys {

using Rng = std::mt19937_64;

// Force exerted ON obj_j BY obj_i. Throws on coincident centers.
Vec2 pairwise_force(const SimSpec& spec, const ObjectState& obj_i,
                    const ObjectState& obj_j);

// Sum of all smooth forces per object: pairwise law, center attraction
// (gravity only) and friction. Collision impulses are not forces.
void accumulate_forces(const SimSpec& spec, const SystemState& state,
                       std::vector<Vec2>& forces);

struct CollisionStats {
    long long pair_collisions = 0;
    long long wall_bounces = 0;
    double max_momentum_err = 0.0;  // per-collision |dP| (pair collisions)
    double max_ke_err = 0.0;        // per-collision relative |dKE|
};

// Elastic pair collisions (normal components only) then wall bounces.
// Pairs are visited in ascending (i, j) order; separating pairs are skipped.
void resolve_collisions(const SimSpec& spec, SystemState& state,
                        CollisionStats* stats = nullptr);

// One integrator substep of dt = 1/stride.
void step(const SimSpec& spec, SystemState& state,
          CollisionStats* stats = nullptr);

SystemState init_system(const SimSpec& spec, Rng& rng);

// Full simulation: init + spec.frames rendered frames (frame 0 is the
// initial state; each later frame advances `stride` substeps).
Trajectory simulate(const SimSpec& spec, CollisionStats* stats = nullptr);

// As simulate(), but from a given initial state and frame count.
Trajectory run_frames(const SimSpec& spec, SystemState state, int n_frames,
                      CollisionStats* stats = nullptr);

// Classical RK4 on the smooth dynamics (no collision impulses); test oracle.
Trajectory rk4_reference(const SimSpec& spec, SystemState state, int n_frames);

double kinetic_energy(const SystemState& state);
Vec2 total_momentum(const SystemState& state);

}  // namespace vin::phys
