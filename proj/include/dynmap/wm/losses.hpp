#pragma once

#include "dynmap/wm/model.hpp"

namespace dynmap::wm {

struct LossWeights {
    float beta_z = 1.0f;
    float beta_joint = 1.0f;
    float w_p = 0.0f, w_v = 0.0f, w_a = 0.0f;

    bool any_dynamics() const { return w_p > 0.0f || w_v > 0.0f || w_a > 0.0f; }
};

// One normalized trajectory window (sequence-major, single sequence).
struct SeqSample {
    std::vector<nn::Tensor> images;   // T x [3,64,64] in [-1,1]
    std::vector<nn::Tensor> actions;  // T x [3] normalized
    std::vector<nn::Tensor> p, v, a;  // T x [6] normalized
    nn::Tensor goal;                  // [2] normalized
    // decoupled policy training omits images; actions carry the length then
    int length() const {
        return static_cast<int>(images.empty() ? actions.size() : images.size());
    }
};

struct LossValues {
    float rgb = 0.0f;       // next-frame reconstruction term
    float latent = 0.0f;    // next-latent term (already scaled by beta_z)
    float dynamics = 0.0f;  // weighted P/V/A term
    float policy = 0.0f;    // L1 action term (unscaled)
    float total = 0.0f;     // what was optimized
};

enum class Objective : uint8_t {
    WorldModel,  // L_RGB (+ dynamics), policy detached entirely
    Joint,       // L_RGB (+ dynamics) + beta_joint * L_pi
    E2E,         // L_pi only, through encoder + transition
};

// Builds the teacher-forced window loss graph on `tape` and returns the
// scalar loss id plus the forward component values. Terms are
// mean-reduced over the T-1 window transitions.
struct BuiltLoss {
    nn::Tape::Id loss_id;
    LossValues values;
};
BuiltLoss build_window_loss(WorldModel& model, nn::Tape& tape, const SeqSample& sample,
                            const LossWeights& weights, Objective objective);

// Decoupled policy training: latents precomputed from a frozen model.
struct LatentSeq {
    std::vector<nn::Tensor> z, h1, h2;  // T entries, h at the input of step t
};
BuiltLoss build_policy_loss_on_latents(WorldModel& model, nn::Tape& tape, const LatentSeq& latents,
                                       const SeqSample& sample);

// Forward-only teacher-forced pass of a frozen model over a sequence.
LatentSeq precompute_latents(WorldModel& model, const SeqSample& sample);

}  // namespace dynmap::wm
