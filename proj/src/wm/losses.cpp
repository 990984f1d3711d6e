#include "dynmap/wm/losses.hpp"

#include <tuple>

namespace dynmap::wm {

using nn::Tape;

namespace {

Tape::Id acc(Tape& tape, Tape::Id sum, Tape::Id term) {
    return sum < 0 ? term : tape.add(sum, term);
}

float scalar_of(const Tape& tape, Tape::Id id) {
    return id < 0 ? 0.0f : tape.val(id).v[0];
}

}  // namespace

BuiltLoss build_window_loss(WorldModel& model, Tape& tape, const SeqSample& sample,
                            const LossWeights& weights, Objective objective) {
    const int steps = sample.length();
    if (steps < 2) throw nn::NnError("loss window needs at least 2 steps");

    const bool want_wm = objective != Objective::E2E;
    const bool want_policy = objective != Objective::WorldModel;
    const bool want_dyn = want_wm && weights.any_dynamics();
    const bool recurrent = model.config().policy == PolicyVariant::Recurrent;

    // Teacher forcing: every frame is encoded once; z[t+1] doubles as the
    // latent-loss target for the transition's prediction at t.
    std::vector<Tape::Id> z(static_cast<size_t>(steps));
    for (int t = 0; t < steps; ++t) z[static_cast<size_t>(t)] = model.encode(tape, sample.images[static_cast<size_t>(t)]);

    LatentIds state = model.initial_state(tape);
    PolicyStateIds pstate = model.initial_policy_state(tape);

    Tape::Id rgb_sum = -1, latent_sum = -1, dyn_sum = -1, policy_sum = -1;
    for (int t = 0; t < steps; ++t) {
        const auto ti = static_cast<size_t>(t);
        if (want_policy) {
            Tape::Id a_hat;
            if (recurrent) {
                std::tie(a_hat, pstate) =
                    model.policy_recurrent(tape, z[ti], sample.goal, state, pstate);
            } else {
                a_hat = model.policy_feedforward(tape, z[ti], state, sample.goal);
            }
            policy_sum = acc(tape, policy_sum, tape.sum_abs_diff_const(a_hat, sample.actions[ti]));
        }
        if (t + 1 == steps) break;

        const LatentIds next =
            model.transition(tape, z[ti], tape.input(sample.actions[ti]), state);
        if (want_wm) {
            const Tape::Id rec = model.decode_rgb(tape, next);
            rgb_sum = acc(tape, rgb_sum, tape.sum_sq_diff_const(rec, sample.images[ti + 1]));
            latent_sum = acc(tape, latent_sum, tape.sum_sq_diff(z[ti + 1], next.z));
            if (want_dyn) {
                const auto dyn = model.decode_dynamics(tape, next);
                Tape::Id d = -1;
                if (weights.w_p > 0.0f)
                    d = acc(tape, d,
                            tape.scale(tape.sum_sq_diff_const(dyn.p, sample.p[ti + 1]), weights.w_p));
                if (weights.w_v > 0.0f)
                    d = acc(tape, d,
                            tape.scale(tape.sum_sq_diff_const(dyn.v, sample.v[ti + 1]), weights.w_v));
                if (weights.w_a > 0.0f)
                    d = acc(tape, d,
                            tape.scale(tape.sum_sq_diff_const(dyn.a, sample.a[ti + 1]), weights.w_a));
                dyn_sum = acc(tape, dyn_sum, d);
            }
        }
        state = next;
    }

    const float inv_w = 1.0f / static_cast<float>(steps - 1);
    const float inv_t = 1.0f / static_cast<float>(steps);

    BuiltLoss out;
    Tape::Id total = -1;
    if (want_wm) {
        // World-model terms are per-dimension means so the weights compare
        // like against like: a summed pixel term (12288 dims) would drown
        // a w_V = 1 velocity term (6 dims) by four orders of magnitude and
        // the dynamics supervision would never shape the latent.
        const float inv_px = 1.0f / static_cast<float>(render::kImageBytes);
        const float inv_z = 1.0f / static_cast<float>(model.config().z_dim);
        const Tape::Id rgb_mean = tape.scale(rgb_sum, inv_w * inv_px);
        const Tape::Id latent_mean = tape.scale(latent_sum, weights.beta_z * inv_w * inv_z);
        out.values.rgb = scalar_of(tape, rgb_mean);
        out.values.latent = scalar_of(tape, latent_mean);
        total = tape.add(rgb_mean, latent_mean);
        if (want_dyn) {
            const Tape::Id dyn_mean = tape.scale(dyn_sum, inv_w / 6.0f);
            out.values.dynamics = scalar_of(tape, dyn_mean);
            total = tape.add(total, dyn_mean);
        }
    }
    if (want_policy) {
        const Tape::Id policy_mean = tape.scale(policy_sum, inv_t);
        out.values.policy = scalar_of(tape, policy_mean);
        if (objective == Objective::E2E) {
            total = policy_mean;
        } else {
            total = tape.add(total, tape.scale(policy_mean, weights.beta_joint));
        }
    }
    out.loss_id = total;
    out.values.total = scalar_of(tape, total);
    return out;
}

BuiltLoss build_policy_loss_on_latents(WorldModel& model, Tape& tape, const LatentSeq& latents,
                                       const SeqSample& sample) {
    const int steps = sample.length();
    if (steps < 1 || latents.z.size() != static_cast<size_t>(steps))
        throw nn::NnError("latent cache does not match sample length");
    const bool recurrent = model.config().policy == PolicyVariant::Recurrent;

    PolicyStateIds pstate = model.initial_policy_state(tape);
    Tape::Id policy_sum = -1;
    for (int t = 0; t < steps; ++t) {
        const auto ti = static_cast<size_t>(t);
        LatentIds state;
        state.h1 = tape.input(latents.h1[ti]);
        state.h2 = tape.input(latents.h2[ti]);
        const Tape::Id z = tape.input(latents.z[ti]);
        Tape::Id a_hat;
        if (recurrent) {
            std::tie(a_hat, pstate) = model.policy_recurrent(tape, z, sample.goal, state, pstate);
        } else {
            a_hat = model.policy_feedforward(tape, z, state, sample.goal);
        }
        policy_sum = acc(tape, policy_sum, tape.sum_abs_diff_const(a_hat, sample.actions[ti]));
    }

    BuiltLoss out;
    out.loss_id = tape.scale(policy_sum, 1.0f / static_cast<float>(steps));
    out.values.policy = scalar_of(tape, out.loss_id);
    out.values.total = out.values.policy;
    return out;
}

LatentSeq precompute_latents(WorldModel& model, const SeqSample& sample) {
    const int steps = sample.length();
    Tape tape;
    LatentSeq out;
    out.z.reserve(static_cast<size_t>(steps));
    out.h1.reserve(static_cast<size_t>(steps));
    out.h2.reserve(static_cast<size_t>(steps));

    LatentIds state = model.initial_state(tape);
    for (int t = 0; t < steps; ++t) {
        const auto ti = static_cast<size_t>(t);
        const Tape::Id z = model.encode(tape, sample.images[ti]);
        out.z.push_back(tape.val(z));
        out.h1.push_back(tape.val(state.h1));
        out.h2.push_back(tape.val(state.h2));
        if (t + 1 < steps)
            state = model.transition(tape, z, tape.input(sample.actions[ti]), state);
    }
    return out;
}

}  // namespace dynmap::wm
