#pragma once

#include "dynmap/tasks/tasks.hpp"

namespace dynmap::expert {

// 16-d normalized state observation: cart pose (3), cart velocity (3),
// block pose (3), block velocity (3), cart width, block height, target xy.
std::array<double, 16> state_observation(const sim::WorldState& world,
                                         const tasks::EpisodeConfig& config);

// Clamps an acceleration command so that cart velocity after one control
// period stays within the per-step action bounds (|dx|,|dy| <= 25 mm,
// |dtheta| <= 0.1 rad per period) with margin; keeps recorded pose deltas
// representable.
sim::AccelCommand limit_for_recording(const sim::AccelCommand& cmd, const sim::WorldState& world);

// A 20 Hz acceleration-space expert.
class ExpertPolicy {
  public:
    virtual ~ExpertPolicy() = default;
    virtual void reset(const tasks::EpisodeConfig& config) = 0;
    virtual sim::AccelCommand act(const sim::WorldState& world) = 0;
    virtual std::string name() const = 0;
};

// Velocity-profile PD controller for tasks 1-2: accelerations stay below
// 0.3*mu*g so static friction holds the block; task 2 climbs over the
// obstacle via fixed waypoints.
class ScriptedExpert : public ExpertPolicy {
  public:
    struct Tuning {
        double max_accel = 2.0;   // m/s^2, < 0.3*mu*g with defaults
        double max_speed = 0.42;  // m/s, keeps per-step deltas under 25 mm
        double decel = 1.5;       // m/s^2 budget for the stopping profile
        double k_lin = 4.0;       // 1/s, linear region gain near the target
        double waypoint_tol = 0.03;
    };

    explicit ScriptedExpert() : tune_(Tuning{}) {}
    explicit ScriptedExpert(const Tuning& tuning) : tune_(tuning) {}

    void reset(const tasks::EpisodeConfig& config) override;  // throws on infeasible setups
    sim::AccelCommand act(const sim::WorldState& world) override;
    std::string name() const override { return "scripted"; }

  private:
    Tuning tune_;
    tasks::EpisodeConfig config_;
    std::vector<Vec2> waypoints_;
    size_t phase_ = 0;
};

}  // namespace dynmap::expert
