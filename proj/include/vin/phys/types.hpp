#pragma once

// Core simulation types. All coordinates are in framewidth units (the
// visible frame spans [0,1] per axis); velocities are framewidths per
// rendered frame; one rendered frame spans `stride` integrator substeps.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vin::phys {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2& operator-=(const Vec2& o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const;
};

struct ObjectState {
    Vec2 pos;
    Vec2 vel;
    double mass = 1.0;
    double radius = 0.0625;
    double charge = 0.0;  // used by magnetic billiards only
    bool visible = true;
    int color_index = 0;  // palette slot; fixed occlusion rank
};

using SystemState = std::vector<ObjectState>;

enum class ForceLaw { kSpring, kGravity, kBilliards, kMagneticBilliards, kDrift };

const char* force_law_name(ForceLaw law);
ForceLaw force_law_from_name(const std::string& name);

inline bool has_walls(ForceLaw law) {
    return law == ForceLaw::kBilliards || law == ForceLaw::kMagneticBilliards;
}
inline bool has_object_collisions(ForceLaw law) { return has_walls(law); }

struct RenderSettings {
    std::string background = "procedural";  // procedural | cifar | solid
    std::string cifar_train_path;
    std::string cifar_test_path;
};

struct SimSpec {
    ForceLaw system = ForceLaw::kDrift;
    int n_object = 3;
    int frames = 64;
    int stride = 8;  // substeps per rendered frame
    std::uint64_t seed = 1;

    double radius = 0.0625;    // framewidth fraction
    double density = 256.0;    // mass = density * radius^2
    double friction = 0.0;     // c_f; force = -c_f * r^2 * v

    // Spring
    double kappa = 0.0;
    double rest_length = 0.45;

    // Gravity
    double gravity_g = 0.0;
    double gravity_f_max = 0.0;     // force-magnitude cap
    double lambda_center = 0.0;     // weak attraction toward frame center
    double tangent_speed = 0.0;     // counter-clockwise init speed
    double tangent_noise = 0.0;     // small random vector added to it

    // Magnetic billiards
    double coulomb_k = 0.0;
    double charge = 1.0;

    double v_init = 0.01;  // uniform velocity half-range per component

    bool variable_mass = false;
    double radius_min = 0.04;
    double radius_max = 0.09;
    bool invisible_object = false;

    RenderSettings render;

    double dt() const { return 1.0 / double(stride); }

    void validate() const {
        if (n_object < 1) throw std::invalid_argument("SimSpec: n_object < 1");
        if (frames < 1) throw std::invalid_argument("SimSpec: frames < 1");
        if (stride < 1) throw std::invalid_argument("SimSpec: stride < 1");
        if (radius <= 0) throw std::invalid_argument("SimSpec: radius <= 0");
        if (density <= 0) throw std::invalid_argument("SimSpec: density <= 0");
        if (variable_mass && !(radius_min > 0 && radius_max >= radius_min))
            throw std::invalid_argument("SimSpec: bad variable-mass radius range");
    }
};

struct Trajectory {
    std::vector<SystemState> frames;  // one SystemState per rendered frame

    int n_frames() const { return static_cast<int>(frames.size()); }
    int n_object() const {
        return frames.empty() ? 0 : static_cast<int>(frames[0].size());
    }
};

}  // namespace vin::phys
