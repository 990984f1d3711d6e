#pragma once

#include "dynmap/render/render.hpp"
#include "dynmap/tasks/tasks.hpp"
#include "dynmap/wm/model.hpp"

namespace dynmap::wm {

// Shared episode execution core: the recorder, the replay path, and
// closed-loop inference all step through this so a stored command
// sequence reproduces its trajectory bit-exactly.
//
// Per control step t the runner records (I_t, dynamics_t, x_t, action,
// p_t) and then executes p_t via the double-difference acceleration.
// Command history is seeded p_{-1} = p_{-2} = initial cart pose, so the
// cart reaches p_t one control period later.
class EpisodeRunner {
  public:
    EpisodeRunner(const tasks::EpisodeConfig& config, const sim::PhysicsParams& params,
                  const tasks::NormStats& stats);

    // Records the current state plus the command, then advances one
    // control period. Returns false once the episode has terminated
    // (step budget, drop latch, or task-3 settling).
    bool step(const std::array<double, 3>& abs_command);

    // Frame of the current (pre-step) state; what the policy should see.
    const render::Image64& frame();

    const sim::WorldState& world() const { return world_; }
    const std::array<double, 3>& last_command() const { return cmd_t1_; }
    const std::array<double, 3>& prev_command() const { return cmd_t2_; }
    bool done() const { return done_; }
    bool dropped() const { return dropped_; }
    bool settled_in_bin() const { return settled_; }
    int steps_taken() const { return static_cast<int>(records_.size()); }

    const std::vector<tasks::StepRecord>& records() const { return records_; }
    std::vector<tasks::StepRecord> take_records() { return std::move(records_); }
    tasks::Outcome outcome() const;

  private:
    tasks::EpisodeConfig config_;
    sim::PhysicsParams params_;
    tasks::NormStats stats_;
    sim::WorldState world_;
    tasks::DropMonitor monitor_;
    std::array<double, 3> cmd_t1_{}, cmd_t2_{};  // p_{t-1}, p_{t-2}
    std::array<double, 6> prev_v_{};
    std::vector<tasks::StepRecord> records_;
    render::Image64 frame_;
    bool frame_valid_ = false;
    bool done_ = false, dropped_ = false, settled_ = false;
};

struct InferenceResult {
    std::vector<tasks::StepRecord> records;
    tasks::Outcome outcome;
};

// Closed-loop: render -> encode -> policy -> denormalize -> absolute
// command -> acceleration -> control_step; the transition consumes the
// executed action. Deterministic.
InferenceResult rollout_inference(WorldModel& model, const tasks::EpisodeConfig& config,
                                  const tasks::NormStats& stats,
                                  const sim::PhysicsParams& params = {});

// Open-loop: executes a stored absolute command sequence.
InferenceResult replay_commands(const tasks::EpisodeConfig& config,
                                const std::vector<std::array<double, 3>>& abs_commands,
                                const tasks::NormStats& stats,
                                const sim::PhysicsParams& params = {});

}  // namespace dynmap::wm
