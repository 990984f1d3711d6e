#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynmap/core/vec2.hpp"

namespace dynmap::sim {

struct BodyState {
    // theta is unwrapped (no modular reduction) so finite differencing
    // of orientation never sees 2*pi jumps.
    Vec2 pos;
    double theta = 0.0;
    Vec2 vel;
    double omega = 0.0;
};

struct BodyShape {
    // axis-aligned box in body frame; world-frame orientation comes
    // from the owning BodyState.
    double half_w = 0.05;
    double half_h = 0.05;
    double density = 500.0;  // kg/m^2

    double mass() const { return density * 4.0 * half_w * half_h; }
    double inertia() const {
        const double w = 2.0 * half_w, h = 2.0 * half_h;
        return mass() * (w * w + h * h) / 12.0;
    }
};

struct PhysicsParams {
    double gravity = 9.81;       // m/s^2 downward
    double dt_physics = 0.001;   // s
    double friction_mu = 0.7;
    double restitution = 0.0;
    int solver_iterations = 12;
    double baumgarte_beta = 0.2;
    double penetration_slop = 1e-4;  // m
    // per-axis cart acceleration clamps
    double max_ax = 20.0, max_ay = 20.0, max_alpha = 50.0;
};

struct AccelCommand {
    double ax = 0.0;
    double ay = 0.0;
    double alpha = 0.0;
};

// Static world geometry: an oriented box that never moves.
struct StaticBox {
    Vec2 center;
    double half_w = 0.0;
    double half_h = 0.0;
    double theta = 0.0;
    // tags let task logic interpret contacts (floor vs obstacle vs bin)
    enum Kind : uint8_t { Floor, Obstacle, BinWall, BinFloor } kind = Floor;
};

struct ContactPoint {
    Vec2 point;
    Vec2 normal;          // from reference body towards block
    double penetration = 0.0;
    double normal_impulse = 0.0;   // warm start
    double tangent_impulse = 0.0;
    uint32_t feature_id = 0;
};

// Persistent manifold for warm starting, keyed by the other collider.
struct ContactManifold {
    int other = -1;  // -1 = cart, >=0 index into static_geometry
    std::vector<ContactPoint> points;
};

struct WorldState {
    BodyState cart;
    BodyState block;
    BodyShape cart_shape;
    BodyShape block_shape;
    std::vector<StaticBox> static_geometry;
    int64_t step_count = 0;  // integer bookkeeping; time derived on read
    std::vector<ContactManifold> contact_cache;

    double time(const PhysicsParams& p) const { return static_cast<double>(step_count) * p.dt_physics; }
};

enum class SupportStatus : uint8_t { Supported, Sliding, Airborne, Grounded };

class SimulationDiverged : public std::runtime_error {
  public:
    SimulationDiverged(const std::string& body, int64_t step)
        : std::runtime_error("simulation diverged: non-finite state in body '" + body +
                             "' at step " + std::to_string(step)),
          body_name(body), step_index(step) {}
    std::string body_name;
    int64_t step_index;
};

}  // namespace dynmap::sim
