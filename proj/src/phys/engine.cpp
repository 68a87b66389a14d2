#include "vin/phys/engine.hpp"

#include <algorithm>
#include <cmath>

namespace vin::phys {

double Vec2::norm() const { return std::sqrt(x * x + y * y); }

const char* force_law_name(ForceLaw law) {
    switch (law) {
        case ForceLaw::kSpring: return "spring";
        case ForceLaw::kGravity: return "gravity";
        case ForceLaw::kBilliards: return "billiards";
        case ForceLaw::kMagneticBilliards: return "magnetic";
        case ForceLaw::kDrift: return "drift";
    }
    return "?";
}

ForceLaw force_law_from_name(const std::string& name) {
    if (name == "spring") return ForceLaw::kSpring;
    if (name == "gravity") return ForceLaw::kGravity;
    if (name == "billiards") return ForceLaw::kBilliards;
    if (name == "magnetic") return ForceLaw::kMagneticBilliards;
    if (name == "drift") return ForceLaw::kDrift;
    throw std::invalid_argument("unknown force law '" + name + "'");
}

Vec2 pairwise_force(const SimSpec& spec, const ObjectState& obj_i,
                    const ObjectState& obj_j) {
    const Vec2 d = obj_i.pos - obj_j.pos;
    const double dist = d.norm();
    if (dist <= 0.0)
        throw std::runtime_error("pairwise_force: coincident object centers");
    const Vec2 dhat = d * (1.0 / dist);
    switch (spec.system) {
        case ForceLaw::kSpring:
            // Hooke's law with nonzero rest length; attracts j toward i
            // when stretched past rest_length, repels when compressed.
            return dhat * (spec.kappa * (dist - spec.rest_length));
        case ForceLaw::kGravity: {
            double mag = spec.gravity_g * obj_i.mass * obj_j.mass / (dist * dist);
            if (spec.gravity_f_max > 0.0) mag = std::min(mag, spec.gravity_f_max);
            return dhat * mag;
        }
        case ForceLaw::kMagneticBilliards: {
            const double mag =
                spec.coulomb_k * obj_i.charge * obj_j.charge / (dist * dist);
            return dhat * -mag;  // like charges repel
        }
        case ForceLaw::kBilliards:
        case ForceLaw::kDrift:
            return {};
    }
    return {};
}

void accumulate_forces(const SimSpec& spec, const SystemState& state,
                       std::vector<Vec2>& forces) {
    const int n = static_cast<int>(state.size());
    forces.assign(state.size(), Vec2{});
    if (spec.system != ForceLaw::kBilliards && spec.system != ForceLaw::kDrift) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                // Force on j from i; equal and opposite on i.
                const Vec2 f = pairwise_force(spec, state[std::size_t(i)],
                                              state[std::size_t(j)]);
                forces[std::size_t(j)] += f;
                forces[std::size_t(i)] -= f;
            }
        }
    }
    if (spec.system == ForceLaw::kGravity && spec.lambda_center != 0.0) {
        const Vec2 center{0.5, 0.5};
        for (int i = 0; i < n; ++i)
            forces[std::size_t(i)] -=
                (state[std::size_t(i)].pos - center) * spec.lambda_center;
    }
    if (spec.system != ForceLaw::kDrift && spec.friction != 0.0) {
        for (int i = 0; i < n; ++i) {
            const ObjectState& o = state[std::size_t(i)];
            forces[std::size_t(i)] -=
                o.vel * (spec.friction * o.radius * o.radius);
        }
    }
}

void resolve_collisions(const SimSpec& spec, SystemState& state,
                        CollisionStats* stats) {
    if (!has_object_collisions(spec.system)) return;
    const int n = static_cast<int>(state.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            ObjectState& a = state[std::size_t(i)];
            ObjectState& b = state[std::size_t(j)];
            const Vec2 d = b.pos - a.pos;
            const double dist = d.norm();
            if (dist <= 0.0 || dist >= a.radius + b.radius) continue;
            const Vec2 nrm = d * (1.0 / dist);
            const double u1 = a.vel.dot(nrm);
            const double u2 = b.vel.dot(nrm);
            if (u1 - u2 <= 0.0) continue;  // separating; skip to avoid sticking
            const double m1 = a.mass, m2 = b.mass;
            const double u1p = ((m1 - m2) * u1 + 2.0 * m2 * u2) / (m1 + m2);
            const double u2p = ((m2 - m1) * u2 + 2.0 * m1 * u1) / (m1 + m2);
            if (stats) {
                const double ke_before =
                    0.5 * m1 * a.vel.norm2() + 0.5 * m2 * b.vel.norm2();
                const Vec2 p_before = a.vel * m1 + b.vel * m2;
                a.vel += nrm * (u1p - u1);
                b.vel += nrm * (u2p - u2);
                const double ke_after =
                    0.5 * m1 * a.vel.norm2() + 0.5 * m2 * b.vel.norm2();
                const Vec2 p_after = a.vel * m1 + b.vel * m2;
                stats->pair_collisions++;
                stats->max_momentum_err = std::max(
                    stats->max_momentum_err, (p_after - p_before).norm());
                stats->max_ke_err =
                    std::max(stats->max_ke_err,
                             std::abs(ke_after - ke_before) /
                                 std::max(ke_before, 1e-300));
            } else {
                a.vel += nrm * (u1p - u1);
                b.vel += nrm * (u2p - u2);
            }
        }
    }
    if (has_walls(spec.system)) {
        for (ObjectState& o : state) {
            const double r = o.radius;
            bool bounced = false;
            if (o.pos.x < r) {
                o.pos.x = r;
                if (o.vel.x < 0) o.vel.x = -o.vel.x;
                bounced = true;
            } else if (o.pos.x > 1.0 - r) {
                o.pos.x = 1.0 - r;
                if (o.vel.x > 0) o.vel.x = -o.vel.x;
                bounced = true;
            }
            if (o.pos.y < r) {
                o.pos.y = r;
                if (o.vel.y < 0) o.vel.y = -o.vel.y;
                bounced = true;
            } else if (o.pos.y > 1.0 - r) {
                o.pos.y = 1.0 - r;
                if (o.vel.y > 0) o.vel.y = -o.vel.y;
                bounced = true;
            }
            if (bounced && stats) stats->wall_bounces++;
        }
    }
}

void step(const SimSpec& spec, SystemState& state, CollisionStats* stats) {
    static thread_local std::vector<Vec2> forces;
    accumulate_forces(spec, state, forces);
    const double dt = spec.dt();
    for (std::size_t i = 0; i < state.size(); ++i) {
        state[i].vel += forces[i] * (dt / state[i].mass);
        state[i].pos += state[i].vel * dt;
    }
    resolve_collisions(spec, state, stats);
}

namespace {

double uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist{lo, hi};
    return dist(rng);
}

bool fully_in_view_until(const ObjectState& o, int frames) {
    // Linear motion: the disc has fully left once its center passes 1+r / -r.
    const double r = o.radius;
    const Vec2 end = o.pos + o.vel * double(frames);
    return end.x >= -r && end.x <= 1.0 + r && end.y >= -r && end.y <= 1.0 + r;
}

void remove_net_momentum(SystemState& state) {
    Vec2 p{};
    double m = 0.0;
    for (const ObjectState& o : state) {
        p += o.vel * o.mass;
        m += o.mass;
    }
    const Vec2 drift = p * (1.0 / m);
    for (ObjectState& o : state) o.vel -= drift;
}

void center_of_mass_to_center(SystemState& state) {
    Vec2 com{};
    double m = 0.0;
    for (const ObjectState& o : state) {
        com += o.pos * o.mass;
        m += o.mass;
    }
    const Vec2 shift = Vec2{0.5, 0.5} - com * (1.0 / m);
    for (ObjectState& o : state) o.pos += shift;
}

void draw_velocities(const SimSpec& spec, SystemState& state, Rng& rng) {
    for (ObjectState& o : state) {
        if (spec.system == ForceLaw::kGravity) {
            // Counter-clockwise tangent about the frame center, scaled with
            // the distance from it (co-rotation), plus a small random vector.
            const Vec2 u = o.pos - Vec2{0.5, 0.5};
            o.vel = Vec2{-u.y, u.x} * (spec.tangent_speed / 0.25);
            o.vel.x += uniform(rng, -spec.tangent_noise, spec.tangent_noise);
            o.vel.y += uniform(rng, -spec.tangent_noise, spec.tangent_noise);
        } else {
            o.vel.x = uniform(rng, -spec.v_init, spec.v_init);
            o.vel.y = uniform(rng, -spec.v_init, spec.v_init);
        }
    }
}

}  // namespace

SystemState init_system(const SimSpec& spec, Rng& rng) {
    spec.validate();
    SystemState state(std::size_t(spec.n_object));
    for (int i = 0; i < spec.n_object; ++i) {
        ObjectState& o = state[std::size_t(i)];
        o.radius = spec.variable_mass
                       ? uniform(rng, spec.radius_min, spec.radius_max)
                       : spec.radius;
        o.mass = spec.density * o.radius * o.radius;
        o.charge = spec.system == ForceLaw::kMagneticBilliards ? spec.charge : 0.0;
        o.color_index = i;
        o.visible = true;
    }

    // Positions: uniform in the centered 0.8-wide box, no overlapping pair.
    constexpr int kMaxAttempts = 20000;
    for (int i = 0; i < spec.n_object; ++i) {
        ObjectState& o = state[std::size_t(i)];
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            o.pos.x = uniform(rng, 0.1, 0.9);
            o.pos.y = uniform(rng, 0.1, 0.9);
            bool overlap = false;
            for (int j = 0; j < i; ++j) {
                const ObjectState& other = state[std::size_t(j)];
                if ((o.pos - other.pos).norm() <= o.radius + other.radius) {
                    overlap = true;
                    break;
                }
            }
            if (!overlap) {
                placed = true;
                break;
            }
        }
        if (!placed)
            throw std::runtime_error(
                "init_system: rejection sampling exceeded retry cap (box too "
                "crowded)");
    }

    const bool zero_momentum = spec.system == ForceLaw::kSpring ||
                               spec.system == ForceLaw::kGravity ||
                               spec.system == ForceLaw::kDrift;
    for (int attempt = 0;; ++attempt) {
        draw_velocities(spec, state, rng);
        if (zero_momentum) remove_net_momentum(state);
        if (spec.system != ForceLaw::kDrift) break;
        // Drift: no object may fully leave the view before frame 32.
        bool ok = true;
        for (const ObjectState& o : state)
            ok = ok && fully_in_view_until(o, 32);
        if (ok) break;
        if (attempt >= kMaxAttempts)
            throw std::runtime_error(
                "init_system: cannot satisfy drift in-view bound");
    }

    if (spec.system == ForceLaw::kSpring || spec.system == ForceLaw::kGravity)
        center_of_mass_to_center(state);

    if (spec.invisible_object) {
        std::uniform_int_distribution<int> pick(0, spec.n_object - 1);
        state[std::size_t(pick(rng))].visible = false;
    }
    return state;
}

namespace {

void check_finite(const SystemState& state, int frame) {
    for (const ObjectState& o : state) {
        if (!std::isfinite(o.pos.x) || !std::isfinite(o.pos.y) ||
            !std::isfinite(o.vel.x) || !std::isfinite(o.vel.y))
            throw std::runtime_error("non-finite state at frame " +
                                     std::to_string(frame));
    }
}

}  // namespace

Trajectory run_frames(const SimSpec& spec, SystemState state, int n_frames,
                      CollisionStats* stats) {
    Trajectory traj;
    traj.frames.reserve(std::size_t(n_frames));
    check_finite(state, 0);
    traj.frames.push_back(state);
    for (int f = 1; f < n_frames; ++f) {
        for (int s = 0; s < spec.stride; ++s) step(spec, state, stats);
        check_finite(state, f);
        traj.frames.push_back(state);
    }
    return traj;
}

Trajectory simulate(const SimSpec& spec, CollisionStats* stats) {
    Rng rng(spec.seed);
    SystemState state = init_system(spec, rng);
    return run_frames(spec, std::move(state), spec.frames, stats);
}

namespace {

struct Derivative {
    std::vector<Vec2> dpos;  // = velocity
    std::vector<Vec2> dvel;  // = force / mass
};

void eval_derivative(const SimSpec& spec, const SystemState& state,
                     Derivative& out) {
    static thread_local std::vector<Vec2> forces;
    accumulate_forces(spec, state, forces);
    out.dpos.resize(state.size());
    out.dvel.resize(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        out.dpos[i] = state[i].vel;
        out.dvel[i] = forces[i] * (1.0 / state[i].mass);
    }
}

void advance(const SystemState& base, const Derivative& d, double h,
             SystemState& out) {
    out = base;
    for (std::size_t i = 0; i < base.size(); ++i) {
        out[i].pos += d.dpos[i] * h;
        out[i].vel += d.dvel[i] * h;
    }
}

}  // namespace

Trajectory rk4_reference(const SimSpec& spec, SystemState state, int n_frames) {
    Trajectory traj;
    traj.frames.reserve(std::size_t(n_frames));
    traj.frames.push_back(state);
    const double h = spec.dt();
    Derivative k1, k2, k3, k4;
    SystemState tmp;
    for (int f = 1; f < n_frames; ++f) {
        for (int s = 0; s < spec.stride; ++s) {
            eval_derivative(spec, state, k1);
            advance(state, k1, h * 0.5, tmp);
            eval_derivative(spec, tmp, k2);
            advance(state, k2, h * 0.5, tmp);
            eval_derivative(spec, tmp, k3);
            advance(state, k3, h, tmp);
            eval_derivative(spec, tmp, k4);
            for (std::size_t i = 0; i < state.size(); ++i) {
                state[i].pos += (k1.dpos[i] + (k2.dpos[i] + k3.dpos[i]) * 2.0 +
                                 k4.dpos[i]) *
                                (h / 6.0);
                state[i].vel += (k1.dvel[i] + (k2.dvel[i] + k3.dvel[i]) * 2.0 +
                                 k4.dvel[i]) *
                                (h / 6.0);
            }
        }
        traj.frames.push_back(state);
    }
    return traj;
}

double kinetic_energy(const SystemState& state) {
    double ke = 0.0;
    for (const ObjectState& o : state) ke += 0.5 * o.mass * o.vel.norm2();
    return ke;
}

Vec2 total_momentum(const SystemState& state) {
    Vec2 p{};
    for (const ObjectState& o : state) p += o.vel * o.mass;
    return p;
}

}  // namespace vin::phys
