#include "dynmap/expert/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace dynmap::expert {

using nn::Tape;
using nn::Tensor;
using tasks::kControlDt;

void PPOConfig::validate() const {
    if (clip_eps <= 0.0 || clip_eps >= 1.0)
        throw tasks::ConfigurationError("ppo clip_eps must be in (0,1)");
    if (gamma <= 0.0 || gamma > 1.0) throw tasks::ConfigurationError("ppo gamma must be in (0,1]");
    if (gae_lambda <= 0.0 || gae_lambda > 1.0)
        throw tasks::ConfigurationError("ppo gae_lambda must be in (0,1]");
    if (hidden < 1 || horizon < 1 || minibatch < 1 || epochs_per_update < 1)
        throw tasks::ConfigurationError("ppo sizes must be positive");
    if (minibatch > horizon)
        throw tasks::ConfigurationError("ppo minibatch cannot exceed the horizon");
}

// ---- actor-critic ----

ActorCritic::ActorCritic(int hidden, uint64_t seed) : hidden_(hidden) {
    Rng rng(seed);
    auto dense = [&](const std::string& base, int out, int in) {
        params_.add(base + "/w", nn::kaiming_uniform({out, in}, in, rng));
        params_.add(base + "/b", Tensor({out}));
    };
    dense("actor/fc0", hidden, 16);
    dense("actor/fc1", hidden, hidden);
    dense("actor/mu", 3, hidden);
    Tensor logstd({3});
    logstd.fill(-0.5f);
    params_.add("actor/logstd", logstd);
    dense("critic/fc0", hidden, 16);
    dense("critic/fc1", hidden, hidden);
    dense("critic/v", 1, hidden);
}

namespace {

Tensor obs_tensor(const std::array<double, 16>& obs) {
    Tensor t({16});
    for (int i = 0; i < 16; ++i) t.v[static_cast<size_t>(i)] = static_cast<float>(obs[i]);
    return t;
}

}  // namespace

Tape::Id ActorCritic::actor_mu(Tape& t, Tape::Id obs) {
    Tape::Id x = t.tanh_(t.dense(obs, t.param(params_.at("actor/fc0/w")),
                                 t.param(params_.at("actor/fc0/b"))));
    x = t.tanh_(t.dense(x, t.param(params_.at("actor/fc1/w")), t.param(params_.at("actor/fc1/b"))));
    return t.dense(x, t.param(params_.at("actor/mu/w")), t.param(params_.at("actor/mu/b")));
}

Tape::Id ActorCritic::critic_v(Tape& t, Tape::Id obs) {
    Tape::Id x = t.tanh_(t.dense(obs, t.param(params_.at("critic/fc0/w")),
                                 t.param(params_.at("critic/fc0/b"))));
    x = t.tanh_(t.dense(x, t.param(params_.at("critic/fc1/w")),
                        t.param(params_.at("critic/fc1/b"))));
    return t.dense(x, t.param(params_.at("critic/v/w")), t.param(params_.at("critic/v/b")));
}

ActorCritic::Sample ActorCritic::sample_action(const std::array<double, 16>& obs, Rng& rng) {
    Tape t;
    const Tape::Id mu = actor_mu(t, t.input(obs_tensor(obs)));
    const Tape::Id v = critic_v(t, t.input(obs_tensor(obs)));
    const Tensor& logstd = params_.at("actor/logstd").value;

    Sample s;
    s.log_prob = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double m = t.val(mu).v[static_cast<size_t>(i)];
        const double sig = std::exp(logstd.v[static_cast<size_t>(i)]);
        const double u = m + sig * rng.gauss();
        s.pre_tanh[static_cast<size_t>(i)] = u;
        s.action[static_cast<size_t>(i)] = std::tanh(u);
        const double z = (u - m) / sig;
        s.log_prob += -0.5 * z * z - logstd.v[static_cast<size_t>(i)];
    }
    s.value = t.val(v).v[0];
    return s;
}

std::array<double, 3> ActorCritic::mean_action(const std::array<double, 16>& obs) {
    Tape t;
    const Tape::Id mu = actor_mu(t, t.input(obs_tensor(obs)));
    std::array<double, 3> a{};
    for (int i = 0; i < 3; ++i) a[static_cast<size_t>(i)] = std::tanh(t.val(mu).v[static_cast<size_t>(i)]);
    return a;
}

double ActorCritic::value(const std::array<double, 16>& obs) {
    Tape t;
    return t.val(critic_v(t, t.input(obs_tensor(obs)))).v[0];
}

std::map<std::string, Tensor> ActorCritic::snapshot() const {
    std::map<std::string, Tensor> out;
    for (const nn::Parameter* p : params_.all()) out[p->name] = p->value;
    return out;
}

void ActorCritic::restore(const std::map<std::string, Tensor>& weights) {
    for (nn::Parameter* p : params_.all()) {
        const auto it = weights.find(p->name);
        if (it == weights.end()) throw nn::NnError("missing weight " + p->name);
        if (it->second.shape != p->value.shape) throw nn::NnError("shape mismatch " + p->name);
        p->value = it->second;
    }
}

// ---- environment ----

ControlEnv::ControlEnv(tasks::TaskId task, const tasks::RandomizationSpec& spec,
                       const sim::PhysicsParams& params)
    : task_(task), spec_(spec), params_(params) {}

std::array<double, 16> ControlEnv::reset(Rng& rng) {
    return reset_to(tasks::sample_episode(task_, spec_, rng));
}

std::array<double, 16> ControlEnv::reset_to(const tasks::EpisodeConfig& config) {
    config_ = config;
    world_ = tasks::make_world(config_, params_);
    monitor_ = tasks::DropMonitor();
    dropped_ = settled_ = false;
    done_ = false;
    steps_ = 0;
    return state_observation(world_, config_);
}

ControlEnv::StepResult ControlEnv::step(const std::array<double, 3>& action_unit) {
    if (done_) throw std::logic_error("step on a finished episode");
    sim::AccelCommand cmd;
    cmd.ax = std::clamp(action_unit[0], -1.0, 1.0) * kAccelScaleXY;
    cmd.ay = std::clamp(action_unit[1], -1.0, 1.0) * kAccelScaleXY;
    cmd.alpha = std::clamp(action_unit[2], -1.0, 1.0) * kAccelScaleAlpha;
    cmd = limit_for_recording(cmd, world_);
    sim::control_step(world_, cmd, params_);
    ++steps_;

    StepResult res;
    if (task_ != tasks::TaskId::BinDropping) {
        bool newly_dropped = false;
        if (!dropped_) {
            if (monitor_.update(world_, config_)) newly_dropped = true;
            if (task_ == tasks::TaskId::BalanceReachingV2 &&
                tasks::collides_with_obstacle(world_, config_))
                newly_dropped = true;
        }
        dropped_ = dropped_ || newly_dropped;
        res.reward = tasks::task_reward(world_, config_, newly_dropped);
        if (dropped_) done_ = true;
    } else {
        res.reward = tasks::task_reward(world_, config_, false);
        if (tasks::block_settled_in_bin(world_, config_)) {
            settled_ = true;
            done_ = true;
        } else if (tasks::block_grounded_outside_bin(world_, config_)) {
            dropped_ = true;
            done_ = true;
        }
    }
    if (steps_ >= config_.max_steps) done_ = true;
    res.done = done_;
    res.obs = state_observation(world_, config_);
    return res;
}

// ---- gae ----

std::pair<std::vector<double>, std::vector<double>> gae_advantages(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<uint8_t>& dones, double gamma, double lambda) {
    const size_t n = rewards.size();
    if (values.size() != n + 1 || dones.size() != n)
        throw std::invalid_argument("gae: sequence lengths misaligned");
    std::vector<double> adv(n), ret(n);
    double running = 0.0;
    for (size_t i = n; i-- > 0;) {
        const double not_done = dones[i] ? 0.0 : 1.0;
        const double delta = rewards[i] + gamma * values[i + 1] * not_done - values[i];
        running = delta + gamma * lambda * not_done * running;
        adv[i] = running;
        ret[i] = adv[i] + values[i];
    }
    return {adv, ret};
}

// ---- training ----

namespace {

struct RolloutBuffer {
    std::vector<std::array<double, 16>> obs;
    std::vector<std::array<double, 3>> pre_tanh;
    std::vector<double> log_prob, value, reward;
    std::vector<uint8_t> done;
};

double episode_success(const ControlEnv& env, const std::deque<double>& tail_dist) {
    if (env.config().task == tasks::TaskId::BinDropping) return env.settled() ? 1.0 : 0.0;
    if (env.dropped() || tail_dist.empty()) return 0.0;
    const double pe_mm =
        std::accumulate(tail_dist.begin(), tail_dist.end(), 0.0) / tail_dist.size() * 1000.0;
    return pe_mm < 50.0 ? 1.0 : 0.0;
}

}  // namespace

double mean_return(ActorCritic& net, tasks::TaskId task, const tasks::RandomizationSpec& spec,
                   int episodes, uint64_t seed, bool deterministic, double* success_rate) {
    ControlEnv env(task, spec);
    Rng rng(seed);
    double total = 0.0;
    int successes = 0;
    for (int e = 0; e < episodes; ++e) {
        std::array<double, 16> obs = env.reset(rng);
        double ret = 0.0;
        std::deque<double> tail;
        bool done = false;
        while (!done) {
            const std::array<double, 3> a =
                deterministic ? net.mean_action(obs) : net.sample_action(obs, rng).action;
            const auto res = env.step(a);
            ret += res.reward;
            obs = res.obs;
            done = res.done;
            tail.push_back((env.world().cart.pos - env.config().goal.g).norm());
            if (tail.size() > 10) tail.pop_front();
        }
        total += ret;
        if (episode_success(env, tail) > 0.5) ++successes;
    }
    if (success_rate) *success_rate = 100.0 * successes / std::max(1, episodes);
    return total / std::max(1, episodes);
}

PpoResult ppo_train(tasks::TaskId task, const tasks::RandomizationSpec& spec,
                    const PPOConfig& config, uint64_t seed) {
    config.validate();
    Rng rng(seed);
    ActorCritic net(config.hidden, rng.next_u64());
    Rng env_rng = rng.split();
    Rng shuffle_rng = rng.split();
    const uint64_t probe_seed = rng.next_u64();
    ControlEnv env(task, spec);
    nn::AdamState adam({static_cast<float>(config.learning_rate)});

    PpoResult result;
    auto emit_checkpoint = [&](int64_t step) {
        PpoCheckpoint ck;
        ck.weights = net.snapshot();
        ck.hidden = config.hidden;
        ck.step = step;
        ck.probe_mean_return = mean_return(net, task, spec, config.probe_episodes, probe_seed,
                                           true, &ck.probe_success_rate);
        result.checkpoints.push_back(std::move(ck));
    };
    emit_checkpoint(0);
    if (config.total_steps <= 0) return result;

    std::array<double, 16> obs = env.reset(env_rng);
    int64_t steps_done = 0;
    int64_t next_ckpt = config.checkpoint_every;
    std::vector<double> episode_returns;
    double current_return = 0.0;

    while (steps_done < config.total_steps) {
        RolloutBuffer buf;
        buf.obs.reserve(static_cast<size_t>(config.horizon));
        for (int i = 0; i < config.horizon; ++i) {
            const ActorCritic::Sample s = net.sample_action(obs, env_rng);
            const auto res = env.step(s.action);
            buf.obs.push_back(obs);
            buf.pre_tanh.push_back(s.pre_tanh);
            buf.log_prob.push_back(s.log_prob);
            buf.value.push_back(s.value);
            buf.reward.push_back(res.reward);
            buf.done.push_back(res.done ? 1 : 0);
            current_return += res.reward;
            if (res.done) {
                episode_returns.push_back(current_return);
                current_return = 0.0;
                obs = env.reset(env_rng);
            } else {
                obs = res.obs;
            }
        }
        std::vector<double> values = buf.value;
        values.push_back(buf.done.back() ? 0.0 : net.value(obs));
        auto [adv, ret] = gae_advantages(buf.reward, values, buf.done, config.gamma,
                                         config.gae_lambda);

        double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / adv.size();
        double var = 0.0;
        for (double a : adv) var += (a - mean) * (a - mean);
        const double stdev = std::sqrt(var / adv.size()) + 1e-8;
        for (double& a : adv) a = (a - mean) / stdev;

        const size_t n = buf.obs.size();
        std::vector<size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        try {
            for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
                for (size_t i = n; i > 1; --i)
                    std::swap(idx[i - 1], idx[shuffle_rng.uniform_index(i)]);
                for (size_t start = 0; start < n; start += static_cast<size_t>(config.minibatch)) {
                    const size_t end = std::min(n, start + static_cast<size_t>(config.minibatch));
                    const float inv_m = 1.0f / static_cast<float>(end - start);
                    for (size_t k = start; k < end; ++k) {
                        const size_t s = idx[k];
                        Tape t;
                        const Tape::Id o = t.input(obs_tensor(buf.obs[s]));
                        const Tape::Id mu = net.actor_mu(t, o);
                        const Tape::Id logsig = net.log_std(t);

                        Tensor u({3});
                        for (int d = 0; d < 3; ++d)
                            u.v[static_cast<size_t>(d)] =
                                static_cast<float>(buf.pre_tanh[s][static_cast<size_t>(d)]);
                        const Tape::Id diff = t.add(t.input(u), t.scale(mu, -1.0f));
                        const Tape::Id z = t.mul(diff, t.exp_(t.scale(logsig, -1.0f)));
                        const Tape::Id logp =
                            t.add(t.scale(t.sum_elems(t.mul(z, z)), -0.5f),
                                  t.scale(t.sum_elems(logsig), -1.0f));

                        const double lp = t.val(logp).v[0];
                        const double ratio = std::exp(lp - buf.log_prob[s]);
                        const double A = adv[s];
                        const bool clipped = (A >= 0.0 && ratio > 1.0 + config.clip_eps) ||
                                             (A < 0.0 && ratio < 1.0 - config.clip_eps);

                        const Tape::Id v = net.critic_v(t, t.input(obs_tensor(buf.obs[s])));
                        Tape::Id loss =
                            t.scale(t.sum_sq_diff_const(v, Tensor::scalar(static_cast<float>(ret[s]))),
                                    static_cast<float>(config.value_coef));
                        loss = t.add(loss, t.scale(t.sum_elems(logsig),
                                                   -static_cast<float>(config.entropy_coef)));
                        if (!clipped) {
                            const Tape::Id ratio_id = t.exp_(t.add(
                                logp, t.input(Tensor::scalar(static_cast<float>(-buf.log_prob[s])))));
                            loss = t.add(loss, t.scale(ratio_id, static_cast<float>(-A)));
                        }
                        t.backward(t.scale(loss, inv_m));
                    }
                    adam.step(net.params().all());
                }
            }
        } catch (const nn::NnError& e) {
            throw std::runtime_error("ppo update aborted at env step " +
                                     std::to_string(steps_done) + ": " + e.what());
        }

        steps_done += config.horizon;
        {
            const size_t m = episode_returns.size();
            const size_t win = std::min<size_t>(m, 20);
            double rmean = 0.0, rstd = 0.0;
            if (win > 0) {
                for (size_t i = m - win; i < m; ++i) rmean += episode_returns[i];
                rmean /= win;
                for (size_t i = m - win; i < m; ++i)
                    rstd += (episode_returns[i] - rmean) * (episode_returns[i] - rmean);
                rstd = std::sqrt(rstd / win);
            }
            result.metrics.push_back({steps_done, rmean, rstd, -1.0});
        }
        if (steps_done >= next_ckpt) {
            emit_checkpoint(steps_done);
            result.metrics.back().probe_sr = result.checkpoints.back().probe_success_rate;
            next_ckpt += config.checkpoint_every;
        }
    }
    if (result.checkpoints.back().step != steps_done) emit_checkpoint(steps_done);
    return result;
}

// ---- recording expert ----

PpoExpert::PpoExpert(const PpoCheckpoint& ckpt, std::string label)
    : net_(ckpt.hidden, 0), label_(std::move(label)) {
    net_.restore(ckpt.weights);
}

sim::AccelCommand PpoExpert::act(const sim::WorldState& world) {
    const std::array<double, 3> a = net_.mean_action(state_observation(world, config_));
    sim::AccelCommand cmd;
    cmd.ax = a[0] * kAccelScaleXY;
    cmd.ay = a[1] * kAccelScaleXY;
    cmd.alpha = a[2] * kAccelScaleAlpha;
    return limit_for_recording(cmd, world);
}

}  // namespace dynmap::expert
