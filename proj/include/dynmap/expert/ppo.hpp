#pragma once

#include <map>

#include "dynmap/expert/scripted.hpp"
#include "dynmap/nn/optim.hpp"
#include "dynmap/nn/tape.hpp"

namespace dynmap::expert {

struct PPOConfig {
    int hidden = 64;              // actor and critic MLP width
    int horizon = 2048;           // env steps per update
    int minibatch = 256;
    int epochs_per_update = 10;
    double clip_eps = 0.2;
    double gae_lambda = 0.95;
    double gamma = 0.99;
    double entropy_coef = 1e-3;
    double value_coef = 0.5;
    double learning_rate = 3e-4;
    int64_t total_steps = 120000;
    int64_t checkpoint_every = 40000;
    int probe_episodes = 20;

    void validate() const;  // throws ConfigurationError
};

// Accel scaling from the actor's [-1,1] output.
constexpr double kAccelScaleXY = 2.0;
constexpr double kAccelScaleAlpha = 1.0;

// Actor: tanh-squashed diagonal Gaussian over normalized acceleration;
// critic: scalar value. Both 2-hidden-layer MLPs on the 16-d observation.
class ActorCritic {
  public:
    ActorCritic(int hidden, uint64_t seed);

    nn::ParamSet& params() { return params_; }
    const nn::ParamSet& params() const { return params_; }

    nn::Tape::Id actor_mu(nn::Tape& t, nn::Tape::Id obs);
    nn::Tape::Id critic_v(nn::Tape& t, nn::Tape::Id obs);
    nn::Tape::Id log_std(nn::Tape& t) { return t.param(params_.at("actor/logstd")); }

    struct Sample {
        std::array<double, 3> action;    // tanh-squashed, in [-1,1]
        std::array<double, 3> pre_tanh;  // gaussian draw u
        double log_prob;                 // up to the tanh-correction constant
        double value;
    };
    Sample sample_action(const std::array<double, 16>& obs, Rng& rng);
    std::array<double, 3> mean_action(const std::array<double, 16>& obs);
    double value(const std::array<double, 16>& obs);

    std::map<std::string, nn::Tensor> snapshot() const;
    void restore(const std::map<std::string, nn::Tensor>& weights);

  private:
    int hidden_;
    nn::ParamSet params_;
};

// 20 Hz state-based environment used for PPO training.
class ControlEnv {
  public:
    ControlEnv(tasks::TaskId task, const tasks::RandomizationSpec& spec,
               const sim::PhysicsParams& params = {});

    std::array<double, 16> reset(Rng& rng);
    std::array<double, 16> reset_to(const tasks::EpisodeConfig& config);

    struct StepResult {
        std::array<double, 16> obs;
        double reward = 0.0;
        bool done = false;
    };
    StepResult step(const std::array<double, 3>& action_unit);

    const tasks::EpisodeConfig& config() const { return config_; }
    const sim::WorldState& world() const { return world_; }
    bool dropped() const { return dropped_; }
    bool settled() const { return settled_; }
    int steps() const { return steps_; }

  private:
    tasks::TaskId task_;
    tasks::RandomizationSpec spec_;
    sim::PhysicsParams params_;
    tasks::EpisodeConfig config_;
    sim::WorldState world_;
    tasks::DropMonitor monitor_;
    bool dropped_ = false, settled_ = false, done_ = true;
    int steps_ = 0;
};

// Standard recursive GAE; advantages are NOT normalized here (the update
// batch normalizes). `values` has one bootstrap entry more than rewards.
std::pair<std::vector<double>, std::vector<double>> gae_advantages(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<uint8_t>& dones, double gamma, double lambda);

struct PpoCheckpoint {
    std::map<std::string, nn::Tensor> weights;
    int hidden = 0;
    double probe_success_rate = 0.0;
    double probe_mean_return = 0.0;
    int64_t step = 0;
};

struct PpoMetricsRow {
    int64_t step;
    double mean_return, std_return, probe_sr;
};

struct PpoResult {
    std::vector<PpoCheckpoint> checkpoints;
    std::vector<PpoMetricsRow> metrics;
};

PpoResult ppo_train(tasks::TaskId task, const tasks::RandomizationSpec& spec,
                    const PPOConfig& config, uint64_t seed);

// Mean (deterministic) action of a trained checkpoint, as an expert.
class PpoExpert : public ExpertPolicy {
  public:
    explicit PpoExpert(const PpoCheckpoint& ckpt, std::string label = "ppo");
    void reset(const tasks::EpisodeConfig& config) override { config_ = config; }
    sim::AccelCommand act(const sim::WorldState& world) override;
    std::string name() const override { return label_; }

  private:
    ActorCritic net_;
    tasks::EpisodeConfig config_;
    std::string label_;
};

// Mean episodic return of a policy over sampled episodes (shared by the
// PPO probe and the random-baseline oracle).
double mean_return(ActorCritic& net, tasks::TaskId task, const tasks::RandomizationSpec& spec,
                   int episodes, uint64_t seed, bool deterministic, double* success_rate = nullptr);

}  // namespace dynmap::expert
