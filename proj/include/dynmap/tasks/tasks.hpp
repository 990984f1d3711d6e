#pragma once

#include <vector>

#include "dynmap/core/rng.hpp"
#include "dynmap/sim/world.hpp"
#include "dynmap/tasks/types.hpp"

namespace dynmap::tasks {

// Draws a concrete episode; pure function of (task, spec, rng state).
EpisodeConfig sample_episode(TaskId task, const RandomizationSpec& spec, Rng& rng);

// Reset state implied by a config: floor, cart at start pose, block
// vertical on the cart top, plus obstacle/bin statics for tasks 2/3.
sim::WorldState make_world(const EpisodeConfig& config, const sim::PhysicsParams& params);

// P,V read from body states; A = (V - prev_V) / dt (zeros at t = 0).
DynamicsState extract_dynamics(const sim::WorldState& world,
                               const std::array<double, 6>& prev_v, double dt);

// Paper's double-difference: a = (p_t - 2 p_{t-1} + p_{t-2}) / dt^2 per axis.
sim::AccelCommand preprocess_action(const std::array<double, 3>& pose_t,
                                    const std::array<double, 3>& pose_t1,
                                    const std::array<double, 3>& pose_t2, double dt,
                                    const sim::PhysicsParams& params);

std::array<double, 3> absolute_from_relative(const PolicyAction& action,
                                             const std::array<double, 3>& current_cmd_pose);

// Latched drop detector for tasks 1-2. Call update once per control step.
class DropMonitor {
  public:
    bool update(const sim::WorldState& world, const EpisodeConfig& config);
    bool dropped() const { return latched_; }

  private:
    int airborne_streak_ = 0;
    bool latched_ = false;
};

// Overlap test used for the task-2 obstacle termination rule.
bool collides_with_obstacle(const sim::WorldState& world, const EpisodeConfig& config);

// Task-3 settling predicate.
bool block_in_bin(const sim::WorldState& world, const EpisodeConfig& config);
bool block_settled_in_bin(const sim::WorldState& world, const EpisodeConfig& config);
bool block_grounded_outside_bin(const sim::WorldState& world, const EpisodeConfig& config);

double task_reward(const sim::WorldState& world, const EpisodeConfig& config, bool dropped);

Outcome episode_outcome(const std::vector<StepRecord>& records, const EpisodeConfig& config,
                        bool dropped, bool settled_in_bin = false);

// [-1,1] normalization. Values are clamped to [-1.05, 1.05]; clamps are
// counted in stats.out_of_range_count.
std::array<double, 6> normalize_p(const std::array<double, 6>& p, NormStats& stats);
std::array<double, 6> normalize_v(const std::array<double, 6>& v, NormStats& stats);
std::array<double, 6> normalize_a(const std::array<double, 6>& a, NormStats& stats);
std::array<double, 6> denormalize_v(const std::array<double, 6>& vn, const NormStats& stats);
std::array<double, 6> denormalize_a(const std::array<double, 6>& an, const NormStats& stats);
std::array<double, 3> normalize_action(const PolicyAction& a, const NormStats& stats);
PolicyAction denormalize_action(const std::array<double, 3>& an, const NormStats& stats);

// geometric feasibility check used by sample_episode and validators
void validate_config(const EpisodeConfig& config);

}  // namespace dynmap::tasks
