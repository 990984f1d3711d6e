#include "dynmap/harness/eval.hpp"

#include <cmath>
#include <fstream>

#include "dynmap/harness/train.hpp"

namespace dynmap::harness {

SeedMetrics seed_metrics(const std::vector<tasks::Outcome>& outcomes) {
    SeedMetrics m;
    m.episodes = static_cast<int>(outcomes.size());
    if (outcomes.empty()) return m;
    int dropped = 0, success = 0, with_pe = 0;
    double pe_sum = 0.0;
    for (const auto& o : outcomes) {
        if (o.dropped) ++dropped;
        if (o.success) ++success;
        if (!o.dropped && o.position_error_mm) {
            pe_sum += *o.position_error_mm;
            ++with_pe;
        }
    }
    m.dr = 100.0 * dropped / m.episodes;
    m.sr = 100.0 * success / m.episodes;
    m.pe = with_pe > 0 ? pe_sum / with_pe : 0.0;
    return m;
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& stdev) {
    mean = 0.0;
    stdev = 0.0;
    if (xs.empty()) return;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    for (double x : xs) stdev += (x - mean) * (x - mean);
    stdev = std::sqrt(stdev / static_cast<double>(xs.size()));
}

}  // namespace

Metrics metrics_from_outcomes(const std::vector<std::vector<tasks::Outcome>>& per_seed) {
    Metrics m;
    std::vector<double> drs, pes, srs;
    for (const auto& outcomes : per_seed) {
        const SeedMetrics s = seed_metrics(outcomes);
        m.per_seed.push_back(s);
        drs.push_back(s.dr);
        pes.push_back(s.pe);
        srs.push_back(s.sr);
    }
    mean_std(drs, m.dr_mean, m.dr_std);
    mean_std(pes, m.pe_mean, m.pe_std);
    mean_std(srs, m.sr_mean, m.sr_std);
    return m;
}

std::vector<tasks::EpisodeConfig> eval_configs(const std::string& dataset_dir, int n_episodes) {
    const DatasetManifest manifest = load_manifest(dataset_dir);
    std::vector<tasks::EpisodeConfig> configs;
    for (const auto& entry : manifest.eval_files) {
        if (n_episodes > 0 && static_cast<int>(configs.size()) >= n_episodes) break;
        configs.push_back(read_trajectory(dataset_dir + "/" + entry.file).config);
    }
    if (configs.empty()) throw tasks::ConfigurationError("dataset has no eval trajectories");
    return configs;
}

Metrics evaluate_models(std::vector<wm::WorldModel*> models, const std::string& dataset_dir,
                        int n_episodes, const std::string& episode_csv,
                        const std::string& error_csv) {
    const DatasetManifest manifest = load_manifest(dataset_dir);
    const std::vector<tasks::EpisodeConfig> configs = eval_configs(dataset_dir, n_episodes);

    std::ofstream ep_out, err_out;
    if (!episode_csv.empty()) {
        ep_out.open(episode_csv, std::ios::trunc);
        ep_out << "seed,episode,dropped,pe_mm,success\n";
    }
    if (!error_csv.empty()) {
        err_out.open(error_csv, std::ios::trunc);
        err_out << "seed,episode,step,cart_goal_dist_m\n";
    }

    std::vector<std::vector<tasks::Outcome>> per_seed;
    for (size_t s = 0; s < models.size(); ++s) {
        std::vector<tasks::Outcome> outcomes;
        for (size_t e = 0; e < configs.size(); ++e) {
            const wm::InferenceResult res =
                wm::rollout_inference(*models[s], configs[e], manifest.norm_stats);
            outcomes.push_back(res.outcome);
            if (ep_out.is_open()) {
                ep_out << s << ',' << e << ',' << (res.outcome.dropped ? 1 : 0) << ','
                       << (res.outcome.position_error_mm ? *res.outcome.position_error_mm : -1.0)
                       << ',' << (res.outcome.success ? 1 : 0) << '\n';
            }
            if (err_out.is_open()) {
                for (size_t t = 0; t < res.records.size(); ++t) {
                    const auto& p = res.records[t].dynamics.p;
                    const Vec2 cart{p[0], p[1]};
                    err_out << s << ',' << e << ',' << t << ','
                            << (cart - configs[e].goal.g).norm() << '\n';
                }
            }
        }
        per_seed.push_back(std::move(outcomes));
    }
    return metrics_from_outcomes(per_seed);
}

Metrics evaluate(const std::vector<std::string>& checkpoint_paths, const std::string& dataset_dir,
                 int n_episodes, const std::string& episode_csv, const std::string& error_csv) {
    std::vector<wm::WorldModel> models;
    models.reserve(checkpoint_paths.size());
    for (const auto& path : checkpoint_paths) models.push_back(wm::WorldModel::load(path));
    std::vector<wm::WorldModel*> ptrs;
    for (auto& m : models) ptrs.push_back(&m);
    return evaluate_models(ptrs, dataset_dir, n_episodes, episode_csv, error_csv);
}

namespace {

const std::vector<ManifestEntry>& split_entries(const DatasetManifest& m, bool eval_split) {
    return eval_split ? m.eval_files : m.train_files;
}

}  // namespace

double evaluate_policy_loss(wm::WorldModel& model, const std::string& dataset_dir,
                            bool eval_split) {
    const DatasetManifest manifest = load_manifest(dataset_dir);
    const auto& entries = split_entries(manifest, eval_split);
    if (entries.empty()) throw tasks::ConfigurationError("empty dataset split");
    double sum = 0.0;
    for (const auto& entry : entries) {
        const Trajectory traj = read_trajectory(dataset_dir + "/" + entry.file);
        const wm::SeqSample sample = make_seq_sample(traj, manifest.norm_stats);
        nn::Tape tape;
        const wm::BuiltLoss built =
            wm::build_window_loss(model, tape, sample, {}, wm::Objective::E2E);
        sum += built.values.policy;
    }
    return sum / static_cast<double>(entries.size());
}

std::array<double, 3> evaluate_dynamics_mse(wm::WorldModel& model, const std::string& dataset_dir,
                                            bool eval_split) {
    const DatasetManifest manifest = load_manifest(dataset_dir);
    const auto& entries = split_entries(manifest, eval_split);
    if (entries.empty()) throw tasks::ConfigurationError("empty dataset split");

    std::array<double, 3> sq{}, tsum{}, tsumsq{};
    int64_t count = 0;
    for (const auto& entry : entries) {
        const Trajectory traj = read_trajectory(dataset_dir + "/" + entry.file);
        const wm::SeqSample sample = make_seq_sample(traj, manifest.norm_stats);
        nn::Tape tape;
        wm::LatentIds state = model.initial_state(tape);
        for (int t = 0; t + 1 < sample.length(); ++t) {
            const auto ti = static_cast<size_t>(t);
            const nn::Tape::Id z = model.encode(tape, sample.images[ti]);
            state = model.transition(tape, z, tape.input(sample.actions[ti]), state);
            const auto dyn = model.decode_dynamics(tape, state);
            auto accum = [&](int head, nn::Tape::Id id, const nn::Tensor& target) {
                const nn::Tensor& pred = tape.val(id);
                for (int d = 0; d < 6; ++d) {
                    const double tv = target.v[static_cast<size_t>(d)];
                    const double err = pred.v[static_cast<size_t>(d)] - tv;
                    sq[static_cast<size_t>(head)] += err * err;
                    tsum[static_cast<size_t>(head)] += tv;
                    tsumsq[static_cast<size_t>(head)] += tv * tv;
                }
            };
            accum(0, dyn.p, sample.p[ti + 1]);
            accum(1, dyn.v, sample.v[ti + 1]);
            accum(2, dyn.a, sample.a[ti + 1]);
            count += 6;
        }
    }
    // Variance-normalized (fraction of held-out target variance left
    // unexplained): the raw per-head MSEs are not comparable because the
    // min/max normalization leaves each head with a different spread.
    const double n = static_cast<double>(std::max<int64_t>(1, count));
    for (size_t h = 0; h < 3; ++h) {
        const double mean = tsum[h] / n;
        const double var = tsumsq[h] / n - mean * mean;
        sq[h] = sq[h] / n / std::max(var, 1e-12);
    }
    return sq;
}

}  // namespace dynmap::harness
