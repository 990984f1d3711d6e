#include "dynmap/wm/rollout.hpp"

#include <tuple>

namespace dynmap::wm {

using tasks::kControlDt;

EpisodeRunner::EpisodeRunner(const tasks::EpisodeConfig& config, const sim::PhysicsParams& params,
                             const tasks::NormStats& stats)
    : config_(config), params_(params), stats_(stats) {
    world_ = tasks::make_world(config_, params_);
    const std::array<double, 3> start{world_.cart.pos.x, world_.cart.pos.y, world_.cart.theta};
    cmd_t1_ = start;
    cmd_t2_ = start;
    records_.reserve(static_cast<size_t>(config_.max_steps));
}

const render::Image64& EpisodeRunner::frame() {
    if (!frame_valid_) {
        frame_ = render::render_frame(world_, config_);
        frame_valid_ = true;
    }
    return frame_;
}

bool EpisodeRunner::step(const std::array<double, 3>& raw_command) {
    if (done_) return false;

    // Commands are quantized to f32 before execution so that a trajectory
    // replayed from its serialized (f32) command sequence is bit-exact.
    std::array<double, 3> abs_command;
    for (int i = 0; i < 3; ++i)
        abs_command[i] = static_cast<double>(static_cast<float>(raw_command[i]));

    tasks::StepRecord rec;
    const render::Image64& img = frame();
    rec.image.assign(img.px.begin(), img.px.end());
    rec.dynamics = tasks::extract_dynamics(world_, prev_v_, kControlDt);
    rec.proprio = {world_.cart.pos.x, world_.cart.pos.y, world_.cart.theta};
    rec.abs_command = abs_command;
    tasks::PolicyAction delta{abs_command[0] - cmd_t1_[0], abs_command[1] - cmd_t1_[1],
                              abs_command[2] - cmd_t1_[2]};
    rec.action_norm = tasks::normalize_action(delta, stats_);
    rec.goal = config_.goal;
    rec.support = sim::support_status(world_);
    prev_v_ = rec.dynamics.v;
    records_.push_back(std::move(rec));

    const sim::AccelCommand cmd =
        tasks::preprocess_action(abs_command, cmd_t1_, cmd_t2_, kControlDt, params_);
    sim::control_step(world_, cmd, params_);
    cmd_t2_ = cmd_t1_;
    cmd_t1_ = abs_command;
    frame_valid_ = false;

    if (config_.task != tasks::TaskId::BinDropping) {
        if (monitor_.update(world_, config_)) dropped_ = true;
        if (config_.task == tasks::TaskId::BalanceReachingV2 &&
            tasks::collides_with_obstacle(world_, config_))
            dropped_ = true;
        if (dropped_) done_ = true;
    } else {
        if (tasks::block_settled_in_bin(world_, config_)) {
            settled_ = true;
            done_ = true;
        } else if (tasks::block_grounded_outside_bin(world_, config_)) {
            dropped_ = true;
            done_ = true;
        }
    }
    if (steps_taken() >= config_.max_steps) done_ = true;
    return !done_;
}

tasks::Outcome EpisodeRunner::outcome() const {
    return tasks::episode_outcome(records_, config_, dropped_, settled_);
}

InferenceResult rollout_inference(WorldModel& model, const tasks::EpisodeConfig& config,
                                  const tasks::NormStats& stats,
                                  const sim::PhysicsParams& params) {
    EpisodeRunner runner(config, params, stats);
    const ModelConfig& mc = model.config();
    const bool recurrent = mc.policy == PolicyVariant::Recurrent;

    const nn::Tensor goal = [&] {
        nn::Tensor g({2});
        const auto gn = config.goal.normalized();
        g.v[0] = static_cast<float>(gn[0]);
        g.v[1] = static_cast<float>(gn[1]);
        return g;
    }();

    // Hidden states carried between per-step tapes (forward-only).
    nn::Tensor h1({mc.hidden}), c1({mc.hidden}), h2({mc.hidden}), c2({mc.hidden});
    nn::Tensor ph1({mc.policy_hidden}), pc1({mc.policy_hidden}), ph2({mc.policy_hidden}),
        pc2({mc.policy_hidden});

    while (!runner.done()) {
        nn::Tape tape;
        LatentIds prev;
        prev.h1 = tape.input(h1);
        prev.c1 = tape.input(c1);
        prev.h2 = tape.input(h2);
        prev.c2 = tape.input(c2);
        const nn::Tape::Id z = model.encode(tape, image_to_tensor(runner.frame()));

        nn::Tape::Id a_hat;
        if (recurrent) {
            PolicyStateIds ps{tape.input(ph1), tape.input(pc1), tape.input(ph2), tape.input(pc2)};
            PolicyStateIds next_ps;
            std::tie(a_hat, next_ps) = model.policy_recurrent(tape, z, goal, prev, ps);
            ph1 = tape.val(next_ps.h1);
            pc1 = tape.val(next_ps.c1);
            ph2 = tape.val(next_ps.h2);
            pc2 = tape.val(next_ps.c2);
        } else {
            a_hat = model.policy_feedforward(tape, z, prev, goal);
        }

        const nn::Tensor& an = tape.val(a_hat);
        const tasks::PolicyAction action =
            tasks::denormalize_action({an.v[0], an.v[1], an.v[2]}, stats);
        const std::array<double, 3> abs_cmd =
            tasks::absolute_from_relative(action, runner.last_command());

        const LatentIds next = model.transition(tape, z, a_hat, prev);
        h1 = tape.val(next.h1);
        c1 = tape.val(next.c1);
        h2 = tape.val(next.h2);
        c2 = tape.val(next.c2);

        runner.step(abs_cmd);
    }

    InferenceResult out;
    out.outcome = runner.outcome();
    out.records = runner.take_records();
    return out;
}

InferenceResult replay_commands(const tasks::EpisodeConfig& config,
                                const std::vector<std::array<double, 3>>& abs_commands,
                                const tasks::NormStats& stats, const sim::PhysicsParams& params) {
    EpisodeRunner runner(config, params, stats);
    for (const auto& cmd : abs_commands) {
        if (!runner.step(cmd)) break;
    }
    InferenceResult out;
    out.outcome = runner.outcome();
    out.records = runner.take_records();
    return out;
}

}  // namespace dynmap::wm
