#pragma once

#include "dynmap/sim/types.hpp"

namespace dynmap::sim {

// Advances the world by one 1 ms physics step. The cart is kinematic:
// contacts never alter its motion. `cart_dv` is the velocity increment
// applied to the cart at this substep (control_step applies the whole
// per-period increment on substep 0 so that second-difference action
// preprocessing and cart integration are exact inverses).
void step_physics(WorldState& world, const AccelCommand& cmd, const PhysicsParams& params);

// One 20 Hz control period = 50 physics steps with cmd held constant.
// Cart velocity update: v += a*T applied at period start, then constant
// over the period, which realizes the discrete double integrator
// x_{k+1} = 2 x_k - x_{k-1} + a*T^2 matching the action preprocessing.
void control_step(WorldState& world, const AccelCommand& cmd, const PhysicsParams& params);

SupportStatus support_status(const WorldState& world);

// Number of physics substeps per control period.
inline int substeps_per_control(const PhysicsParams& p) {
    return static_cast<int>(0.05 / p.dt_physics + 0.5);
}

// Exposed for tests: oriented-box contact manifold (up to 2 points).
// Normal points from box A towards box B.
struct BoxPose {
    Vec2 center;
    double theta;
    double half_w;
    double half_h;
};
int collide_boxes(const BoxPose& a, const BoxPose& b, ContactPoint out[2]);

// Deepest block penetration against cart and statics (diagnostics/tests).
double max_penetration(const WorldState& world);

}  // namespace dynmap::sim
