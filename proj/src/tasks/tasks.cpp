#include "dynmap/tasks/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "dynmap/core/hash.hpp"

namespace dynmap::tasks {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kFloorTop = 0.02;
constexpr double kDropTiltRad = 75.0 * kPi / 180.0;
constexpr int kAirborneLatchSteps = 10;
constexpr double kSettleSpeed = 0.05;       // m/s
constexpr double kDropPenalty = 5.0;
}  // namespace

const char* task_name(TaskId id) {
    switch (id) {
        case TaskId::BalanceReaching: return "balance-reaching";
        case TaskId::BalanceReachingV2: return "balance-reaching-v2";
        case TaskId::BinDropping: return "bin-dropping";
    }
    return "?";
}

TaskId task_from_name(const std::string& name) {
    if (name == "balance-reaching" || name == "task1") return TaskId::BalanceReaching;
    if (name == "balance-reaching-v2" || name == "task2") return TaskId::BalanceReachingV2;
    if (name == "bin-dropping" || name == "task3") return TaskId::BinDropping;
    throw ConfigurationError("unknown task: " + name);
}

RandomizationSpec RandomizationSpec::reduced(double scale) const {
    auto shrink = [scale](Range r) {
        const double m = r.mid(), h = 0.5 * (r.hi - r.lo) * scale;
        return Range{m - h, m + h};
    };
    RandomizationSpec out = *this;
    out.cart_width = shrink(cart_width);
    out.block_height = shrink(block_height);
    out.cart_x = shrink(cart_x);
    out.cart_y = shrink(cart_y);
    out.target_x = shrink(target_x);
    out.target_y = shrink(target_y);
    out.block_shift = shrink(block_shift);
    return out;
}

std::array<double, 2> GoalSpec::normalized() const {
    return {2.0 * g.x - 1.0, 2.0 * g.y - 1.0};
}

std::string EpisodeConfig::digest() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%d|%.9f|%.9f|%.9f|%.9f|%.9f|%.9f|%.9f|%.9f|%.9f|%d %d %d|%d %d %d|%d %d %d|%d",
                  static_cast<int>(task), cart_width, cart_height, block_width, block_height,
                  cart_start.x, cart_start.y, block_shift, goal.g.x, goal.g.y,
                  cart_color[0], cart_color[1], cart_color[2],
                  block_color[0], block_color[1], block_color[2],
                  background_color[0], background_color[1], background_color[2], max_steps);
    Fnv64 h;
    h.update(buf, std::strlen(buf));
    if (obstacle) {
        std::snprintf(buf, sizeof(buf), "obs|%.9f|%.9f|%.9f|%.9f", obstacle->center.x,
                      obstacle->center.y, obstacle->half_w, obstacle->half_h);
        h.update(buf, std::strlen(buf));
    }
    if (bin) {
        std::snprintf(buf, sizeof(buf), "bin|%.9f|%.9f|%.9f|%.9f", bin->center_x,
                      bin->inner_half_width, bin->wall_height, bin->wall_thickness);
        h.update(buf, std::strlen(buf));
    }
    return h.hex();
}

namespace {

bool near_green(uint8_t r, uint8_t g, uint8_t b) {
    return g > r + 30 && g > b + 30;
}

Rgb sample_color(Rng& rng) {
    for (int tries = 0; tries < 64; ++tries) {
        const auto r = static_cast<uint8_t>(rng.uniform_index(256));
        const auto g = static_cast<uint8_t>(rng.uniform_index(256));
        const auto b = static_cast<uint8_t>(rng.uniform_index(256));
        if (!near_green(r, g, b)) return {r, g, b};
    }
    return {128, 64, 64};
}

}  // namespace

void validate_config(const EpisodeConfig& c) {
    auto inside = [](double v) { return v >= 0.0 && v <= kWorkspace; };
    if (c.cart_width <= 0 || c.cart_height <= 0 || c.block_width <= 0 || c.block_height <= 0)
        throw ConfigurationError("non-positive body dimensions");
    if (c.block_width > c.cart_width)
        throw ConfigurationError("block wider than cart");
    if (std::fabs(c.block_shift) + 0.5 * c.block_width > 0.5 * c.cart_width)
        throw ConfigurationError("block shift pushes footprint off the cart");
    const double top = c.cart_start.y + 0.5 * c.cart_height + c.block_height;
    if (!inside(c.cart_start.x - 0.5 * c.cart_width) || !inside(c.cart_start.x + 0.5 * c.cart_width) ||
        c.cart_start.y - 0.5 * c.cart_height < kFloorTop || top > kWorkspace)
        throw ConfigurationError("cart/block stack leaves the workspace");
    if (!inside(c.goal.g.x) || !inside(c.goal.g.y))
        throw ConfigurationError("goal outside workspace");
    if (c.max_steps < 1) throw ConfigurationError("max_steps < 1");
}

EpisodeConfig sample_episode(TaskId task, const RandomizationSpec& spec, Rng& rng) {
    if (spec.cart_width.lo <= spec.block_width)
        throw ConfigurationError("cart width range admits carts narrower than the block");

    EpisodeConfig c;
    c.task = task;
    c.cart_width = spec.cart_width.sample(rng.uniform());
    c.cart_height = spec.cart_height;
    c.block_width = spec.block_width;
    c.block_height = spec.block_height.sample(rng.uniform());
    c.cart_start = {spec.cart_x.sample(rng.uniform()), spec.cart_y.sample(rng.uniform())};
    const double max_shift =
        std::max(0.0, 0.5 * c.cart_width - 0.5 * c.block_width - 0.005);
    c.block_shift = std::clamp(spec.block_shift.sample(rng.uniform()), -max_shift, max_shift);
    c.goal.g = {spec.target_x.sample(rng.uniform()), spec.target_y.sample(rng.uniform())};
    c.cart_color = sample_color(rng);
    c.block_color = sample_color(rng);
    c.background_color = sample_color(rng);

    if (task == TaskId::BalanceReachingV2) {
        ObstacleSpec obs;
        obs.half_w = 0.006;
        obs.half_h = 0.5 * (0.42 - kFloorTop);
        obs.center = {0.5, kFloorTop + obs.half_h};
        c.obstacle = obs;
        // push start and goal clear of the column by the cart's own extent
        const double clear = 0.5 * c.cart_width + obs.half_w + 0.03;
        if (std::fabs(c.cart_start.x - 0.5) < clear)
            c.cart_start.x = c.cart_start.x < 0.5 ? 0.5 - clear : 0.5 + clear;
        if (std::fabs(c.goal.g.x - 0.5) < clear)
            c.goal.g.x = c.goal.g.x < 0.5 ? 0.5 - clear : 0.5 + clear;
    } else if (task == TaskId::BinDropping) {
        BinSpec bin;
        bin.center_x = 0.30 + 0.40 * rng.uniform();
        bin.floor_top = kFloorTop;
        c.bin = bin;
        c.goal.g = {bin.center_x, kFloorTop + 0.5 * bin.wall_height};
    }

    validate_config(c);
    return c;
}

sim::WorldState make_world(const EpisodeConfig& c, const sim::PhysicsParams& /*params*/) {
    sim::WorldState w;
    w.cart.pos = c.cart_start;
    w.cart_shape.half_w = 0.5 * c.cart_width;
    w.cart_shape.half_h = 0.5 * c.cart_height;
    w.block.pos = {c.cart_start.x + c.block_shift,
                   c.cart_start.y + 0.5 * c.cart_height + 0.5 * c.block_height};
    w.block_shape.half_w = 0.5 * c.block_width;
    w.block_shape.half_h = 0.5 * c.block_height;

    sim::StaticBox floor;
    floor.center = {0.5, kFloorTop - 0.05};
    floor.half_w = 1.0;
    floor.half_h = 0.05;
    floor.kind = sim::StaticBox::Floor;
    w.static_geometry.push_back(floor);

    if (c.obstacle) {
        sim::StaticBox obs;
        obs.center = c.obstacle->center;
        obs.half_w = c.obstacle->half_w;
        obs.half_h = c.obstacle->half_h;
        obs.kind = sim::StaticBox::Obstacle;
        w.static_geometry.push_back(obs);
    }
    if (c.bin) {
        const auto& b = *c.bin;
        for (int side = -1; side <= 1; side += 2) {
            sim::StaticBox wall;
            wall.half_w = 0.5 * b.wall_thickness;
            wall.half_h = 0.5 * b.wall_height;
            wall.center = {b.center_x + side * (b.inner_half_width + wall.half_w),
                           b.floor_top + wall.half_h};
            wall.kind = sim::StaticBox::BinWall;
            w.static_geometry.push_back(wall);
        }
    }
    return w;
}

DynamicsState extract_dynamics(const sim::WorldState& w, const std::array<double, 6>& prev_v,
                               double dt) {
    DynamicsState d;
    d.p = {w.cart.pos.x, w.cart.pos.y, w.cart.theta, w.block.pos.x, w.block.pos.y, w.block.theta};
    d.v = {w.cart.vel.x, w.cart.vel.y, w.cart.omega, w.block.vel.x, w.block.vel.y, w.block.omega};
    for (int i = 0; i < 6; ++i) d.a[i] = (d.v[i] - prev_v[i]) / dt;
    return d;
}

sim::AccelCommand preprocess_action(const std::array<double, 3>& pose_t,
                                    const std::array<double, 3>& pose_t1,
                                    const std::array<double, 3>& pose_t2, double dt,
                                    const sim::PhysicsParams& params) {
    const double inv_dt2 = 1.0 / (dt * dt);
    sim::AccelCommand cmd;
    cmd.ax = (pose_t[0] - 2.0 * pose_t1[0] + pose_t2[0]) * inv_dt2;
    cmd.ay = (pose_t[1] - 2.0 * pose_t1[1] + pose_t2[1]) * inv_dt2;
    cmd.alpha = (pose_t[2] - 2.0 * pose_t1[2] + pose_t2[2]) * inv_dt2;
    cmd.ax = std::clamp(cmd.ax, -params.max_ax, params.max_ax);
    cmd.ay = std::clamp(cmd.ay, -params.max_ay, params.max_ay);
    cmd.alpha = std::clamp(cmd.alpha, -params.max_alpha, params.max_alpha);
    return cmd;
}

std::array<double, 3> absolute_from_relative(const PolicyAction& action,
                                             const std::array<double, 3>& current_cmd_pose) {
    return {current_cmd_pose[0] + action.dx, current_cmd_pose[1] + action.dy,
            current_cmd_pose[2] + action.dtheta};
}

bool DropMonitor::update(const sim::WorldState& world, const EpisodeConfig& config) {
    if (config.task == TaskId::BinDropping) return latched_;
    if (latched_) return true;
    const sim::SupportStatus s = sim::support_status(world);
    if (s == sim::SupportStatus::Airborne) {
        ++airborne_streak_;
    } else {
        airborne_streak_ = 0;
    }
    const double tilt = std::fabs(world.block.theta - world.cart.theta);
    if (s == sim::SupportStatus::Grounded || airborne_streak_ > kAirborneLatchSteps ||
        tilt > kDropTiltRad) {
        latched_ = true;
    }
    return latched_;
}

bool collides_with_obstacle(const sim::WorldState& world, const EpisodeConfig& config) {
    if (!config.obstacle) return false;
    const sim::BoxPose obs{config.obstacle->center, 0.0, config.obstacle->half_w,
                           config.obstacle->half_h};
    sim::ContactPoint pts[2];
    const sim::BoxPose cart{world.cart.pos, world.cart.theta, world.cart_shape.half_w,
                            world.cart_shape.half_h};
    const sim::BoxPose block{world.block.pos, world.block.theta, world.block_shape.half_w,
                             world.block_shape.half_h};
    return sim::collide_boxes(obs, cart, pts) > 0 || sim::collide_boxes(obs, block, pts) > 0;
}

bool block_in_bin(const sim::WorldState& world, const EpisodeConfig& config) {
    if (!config.bin) return false;
    const auto& b = *config.bin;
    const Vec2 com = world.block.pos;
    return std::fabs(com.x - b.center_x) < b.inner_half_width &&
           com.y > b.floor_top && com.y < b.floor_top + b.wall_height + 0.05;
}

bool block_settled_in_bin(const sim::WorldState& world, const EpisodeConfig& config) {
    if (!block_in_bin(world, config)) return false;
    const double speed = world.block.vel.norm() + 0.1 * std::fabs(world.block.omega);
    return speed < kSettleSpeed;
}

bool block_grounded_outside_bin(const sim::WorldState& world, const EpisodeConfig& config) {
    if (!config.bin) return false;
    return sim::support_status(world) == sim::SupportStatus::Grounded &&
           !block_in_bin(world, config);
}

double task_reward(const sim::WorldState& world, const EpisodeConfig& config, bool dropped) {
    if (config.task == TaskId::BinDropping) {
        if (block_settled_in_bin(world, config)) return 1.0;
        if (block_grounded_outside_bin(world, config)) return -1.0;
        return 0.0;
    }
    const double dist = (world.cart.pos - config.goal.g).norm();
    return -dist - (dropped ? kDropPenalty : 0.0);
}

Outcome episode_outcome(const std::vector<StepRecord>& records, const EpisodeConfig& config,
                        bool dropped, bool settled_in_bin) {
    Outcome out;
    out.dropped = dropped;
    if (config.task == TaskId::BinDropping) {
        out.success = settled_in_bin;
        return out;
    }
    const size_t n = records.size();
    const size_t tail = std::min<size_t>(10, n);
    out.short_episode_warning = tail < 10;
    double sum = 0.0;
    for (size_t i = n - tail; i < n; ++i) {
        const auto& p = records[i].dynamics.p;
        const Vec2 cart_xy{p[0], p[1]};
        sum += (cart_xy - config.goal.g).norm();
    }
    const double pe_mm = tail > 0 ? (sum / static_cast<double>(tail)) * 1000.0 : 1e9;
    out.position_error_mm = pe_mm;
    out.success = !dropped && pe_mm < 50.0;
    return out;
}

namespace {

double clamp_norm(double x, NormStats& stats) {
    if (x < -1.05 || x > 1.05) {
        ++stats.out_of_range_count;
        return std::clamp(x, -1.05, 1.05);
    }
    return x;
}

double affine_norm(double x, double lo, double hi, NormStats& stats) {
    if (hi - lo < 1e-12) {
        stats.degenerate_warning = true;
        return 0.0;
    }
    return clamp_norm(2.0 * (x - lo) / (hi - lo) - 1.0, stats);
}

double affine_denorm(double xn, double lo, double hi) {
    if (hi - lo < 1e-12) return 0.5 * (lo + hi);
    return lo + (xn + 1.0) * 0.5 * (hi - lo);
}

}  // namespace

std::array<double, 6> normalize_p(const std::array<double, 6>& p, NormStats& stats) {
    std::array<double, 6> out{};
    for (int i = 0; i < 6; ++i) {
        if (i == 2 || i == 5) {
            out[i] = clamp_norm(p[i] / stats.theta_range, stats);
        } else {
            out[i] = affine_norm(p[i], 0.0, kWorkspace, stats);
        }
    }
    return out;
}

std::array<double, 6> normalize_v(const std::array<double, 6>& v, NormStats& stats) {
    std::array<double, 6> out{};
    for (int i = 0; i < 6; ++i) out[i] = affine_norm(v[i], stats.v_min[i], stats.v_max[i], stats);
    return out;
}

std::array<double, 6> normalize_a(const std::array<double, 6>& a, NormStats& stats) {
    std::array<double, 6> out{};
    for (int i = 0; i < 6; ++i) out[i] = affine_norm(a[i], stats.a_min[i], stats.a_max[i], stats);
    return out;
}

std::array<double, 6> denormalize_v(const std::array<double, 6>& vn, const NormStats& stats) {
    std::array<double, 6> out{};
    for (int i = 0; i < 6; ++i) out[i] = affine_denorm(vn[i], stats.v_min[i], stats.v_max[i]);
    return out;
}

std::array<double, 6> denormalize_a(const std::array<double, 6>& an, const NormStats& stats) {
    std::array<double, 6> out{};
    for (int i = 0; i < 6; ++i) out[i] = affine_denorm(an[i], stats.a_min[i], stats.a_max[i]);
    return out;
}

std::array<double, 3> normalize_action(const PolicyAction& a, const NormStats& stats) {
    const auto& b = stats.action_bounds;
    return {std::clamp(a.dx / b.dx, -1.05, 1.05), std::clamp(a.dy / b.dy, -1.05, 1.05),
            std::clamp(a.dtheta / b.dtheta, -1.05, 1.05)};
}

PolicyAction denormalize_action(const std::array<double, 3>& an, const NormStats& stats) {
    const auto& b = stats.action_bounds;
    return {an[0] * b.dx, an[1] * b.dy, an[2] * b.dtheta};
}

}  // namespace dynmap::tasks
