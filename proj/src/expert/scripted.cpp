#include "dynmap/expert/scripted.hpp"

#include <algorithm>
#include <cmath>

namespace dynmap::expert {

using tasks::kControlDt;

std::array<double, 16> state_observation(const sim::WorldState& world,
                                         const tasks::EpisodeConfig& config) {
    auto norm_pos = [](double x) { return 2.0 * x - 1.0; };
    const double pi = 3.14159265358979323846;
    std::array<double, 16> o{};
    o[0] = norm_pos(world.cart.pos.x);
    o[1] = norm_pos(world.cart.pos.y);
    o[2] = world.cart.theta / pi;
    o[3] = world.cart.vel.x;
    o[4] = world.cart.vel.y;
    o[5] = world.cart.omega / 2.0;
    o[6] = norm_pos(world.block.pos.x);
    o[7] = norm_pos(world.block.pos.y);
    o[8] = world.block.theta / pi;
    o[9] = world.block.vel.x;
    o[10] = world.block.vel.y;
    o[11] = world.block.omega / 2.0;
    o[12] = (config.cart_width - 0.26) / 0.06;     // cart_width range midpoint/half-span
    o[13] = (config.block_height - 0.14) / 0.04;   // block_height range midpoint/half-span
    o[14] = norm_pos(config.goal.g.x);
    o[15] = norm_pos(config.goal.g.y);
    return o;
}

sim::AccelCommand limit_for_recording(const sim::AccelCommand& cmd, const sim::WorldState& world) {
    // per-period pose delta is v_next * T; cap v_next inside the action
    // bounds with 10% margin
    const tasks::ActionBounds b;
    auto limit = [](double a, double v, double vmax) {
        const double v_next = v + a * kControlDt;
        if (v_next > vmax) return (vmax - v) / kControlDt;
        if (v_next < -vmax) return (-vmax - v) / kControlDt;
        return a;
    };
    sim::AccelCommand out = cmd;
    out.ax = limit(cmd.ax, world.cart.vel.x, 0.9 * b.dx / kControlDt);
    out.ay = limit(cmd.ay, world.cart.vel.y, 0.9 * b.dy / kControlDt);
    out.alpha = limit(cmd.alpha, world.cart.omega, 0.9 * b.dtheta / kControlDt);
    return out;
}

void ScriptedExpert::reset(const tasks::EpisodeConfig& config) {
    config_ = config;
    phase_ = 0;
    waypoints_.clear();

    const Vec2 start = config.cart_start;
    const Vec2 goal = config.goal.g;
    if (config.task == tasks::TaskId::BalanceReachingV2 && config.obstacle) {
        const double col_x = config.obstacle->center.x;
        const bool opposite = (start.x - col_x) * (goal.x - col_x) < 0.0;
        if (opposite) {
            const double obstacle_top = config.obstacle->center.y + config.obstacle->half_h;
            const double y_cross = obstacle_top + 0.5 * config.cart_height + 0.04;
            waypoints_.push_back({start.x, y_cross});
            waypoints_.push_back({goal.x, y_cross});
        }
    } else if (config.task == tasks::TaskId::BinDropping) {
        throw tasks::ConfigurationError("scripted expert supports tasks 1-2 only");
    }
    waypoints_.push_back(goal);

    // conservative trapezoid timing per leg plus settling margin
    Vec2 prev = start;
    double t_needed = 1.5;
    for (const Vec2& w : waypoints_) {
        const double leg = (w - prev).norm();
        t_needed += leg / tune_.max_speed + 2.0 * tune_.max_speed / tune_.decel;
        prev = w;
    }
    if (t_needed > config.max_steps * kControlDt)
        throw tasks::ConfigurationError("episode infeasible for the scripted accel budget");
}

sim::AccelCommand ScriptedExpert::act(const sim::WorldState& world) {
    const Vec2 pos = world.cart.pos;
    while (phase_ + 1 < waypoints_.size() &&
           (pos - waypoints_[phase_]).norm() < tune_.waypoint_tol)
        ++phase_;
    const Vec2 target = waypoints_[phase_];

    auto axis_accel = [this](double d, double v) {
        const double mag =
            std::min({tune_.max_speed, std::sqrt(2.0 * tune_.decel * std::fabs(d)),
                      tune_.k_lin * std::fabs(d)});
        const double v_des = d >= 0.0 ? mag : -mag;
        // track the velocity profile over ~2 control periods
        const double a = (v_des - v) / (2.0 * kControlDt);
        return std::clamp(a, -tune_.max_accel, tune_.max_accel);
    };

    sim::AccelCommand cmd;
    cmd.ax = axis_accel(target.x - pos.x, world.cart.vel.x);
    cmd.ay = axis_accel(target.y - pos.y, world.cart.vel.y);
    cmd.alpha = std::clamp(-4.0 * world.cart.theta - 2.0 * world.cart.omega, -1.0, 1.0);
    return limit_for_recording(cmd, world);
}

}  // namespace dynmap::expert
