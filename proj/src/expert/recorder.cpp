#include "dynmap/expert/recorder.hpp"

#include <cstdio>
#include <filesystem>

#include "dynmap/core/hash.hpp"
#include "dynmap/wm/rollout.hpp"

namespace dynmap::expert {

using tasks::kControlDt;

namespace {

bool run_expert_episode(ExpertPolicy& expert, const tasks::EpisodeConfig& config,
                        harness::Trajectory& out) {
    try {
        expert.reset(config);
    } catch (const tasks::ConfigurationError&) {
        return false;  // infeasible for this expert; counts as a failed attempt
    }
    wm::EpisodeRunner runner(config, {}, {});
    const double t2 = kControlDt * kControlDt;
    while (!runner.done()) {
        const sim::AccelCommand a = expert.act(runner.world());
        const auto& p1 = runner.last_command();
        const auto& p2 = runner.prev_command();
        const std::array<double, 3> cmd{2.0 * p1[0] - p2[0] + a.ax * t2,
                                        2.0 * p1[1] - p2[1] + a.ay * t2,
                                        2.0 * p1[2] - p2[2] + a.alpha * t2};
        runner.step(cmd);
    }
    const tasks::Outcome outcome = runner.outcome();
    if (!outcome.success) return false;
    out.config = config;
    out.steps = runner.take_records();
    return true;
}

}  // namespace

harness::DatasetManifest record_dataset(const std::vector<ExpertPolicy*>& experts,
                                        tasks::TaskId task,
                                        const tasks::RandomizationSpec& spec,
                                        const RecorderConfig& config, uint64_t seed) {
    if (experts.empty()) throw tasks::ConfigurationError("recorder needs at least one expert");
    std::filesystem::create_directories(config.out_dir);

    Rng rng(seed);
    harness::DatasetManifest manifest;
    manifest.task = task;
    manifest.creation_seed = seed;
    manifest.randomization = spec;

    harness::NormAccumulator acc;
    const int wanted = config.n_train + config.n_eval;
    int successes = 0, attempts = 0;
    while (successes < wanted) {
        ++attempts;
        const tasks::EpisodeConfig episode = tasks::sample_episode(task, spec, rng);
        ExpertPolicy& expert = *experts[static_cast<size_t>(successes) % experts.size()];
        harness::Trajectory traj;
        if (!run_expert_episode(expert, episode, traj)) {
            if (attempts >= config.yield_window &&
                static_cast<double>(successes) < config.min_yield * attempts) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "recorder yield too low: %d successes in %d attempts (floor %.0f%%)",
                              successes, attempts, 100.0 * config.min_yield);
                throw std::runtime_error(buf);
            }
            continue;
        }

        const bool is_train = successes < config.n_train;
        char name[32];
        std::snprintf(name, sizeof(name), "%s_%04d.dmtj", is_train ? "train" : "eval",
                      is_train ? successes : successes - config.n_train);
        const std::string path = config.out_dir + "/" + name;
        harness::write_trajectory(path, traj);

        if (is_train)
            for (const auto& rec : traj.steps) acc.add(rec.dynamics);

        harness::ManifestEntry entry;
        entry.file = name;
        entry.config_digest = traj.config.digest();
        entry.file_hash = hash_file_hex(path);
        entry.steps = static_cast<uint32_t>(traj.steps.size());
        (is_train ? manifest.train_files : manifest.eval_files).push_back(std::move(entry));
        ++successes;
    }

    manifest.norm_stats = acc.finish();
    manifest.dataset_hash = harness::combined_hash(manifest);
    harness::save_manifest(config.out_dir, manifest);
    return manifest;
}

}  // namespace dynmap::expert
