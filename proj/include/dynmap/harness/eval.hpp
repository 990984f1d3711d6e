#pragma once

#include "dynmap/harness/dataset.hpp"
#include "dynmap/wm/rollout.hpp"

namespace dynmap::harness {

struct SeedMetrics {
    double dr = 0.0;  // percent
    double pe = 0.0;  // mm, mean over non-dropped episodes
    double sr = 0.0;  // percent
    int episodes = 0;
};

struct Metrics {
    std::vector<SeedMetrics> per_seed;
    double dr_mean = 0.0, dr_std = 0.0;
    double pe_mean = 0.0, pe_std = 0.0;
    double sr_mean = 0.0, sr_std = 0.0;
};

// Metric arithmetic on outcome lists; one inner vector per seed.
SeedMetrics seed_metrics(const std::vector<tasks::Outcome>& outcomes);
Metrics metrics_from_outcomes(const std::vector<std::vector<tasks::Outcome>>& per_seed);

// Episode configs pinned by the dataset's eval split (identical across
// compared models). n_episodes = 0 takes the whole split.
std::vector<tasks::EpisodeConfig> eval_configs(const std::string& dataset_dir, int n_episodes);

// Closed-loop evaluation: one checkpoint per seed, all rolled over the
// same eval configs. Optionally writes a per-episode CSV and a per-step
// cart-to-goal error CSV (Fig.-8-style trajectories).
Metrics evaluate(const std::vector<std::string>& checkpoint_paths, const std::string& dataset_dir,
                 int n_episodes, const std::string& episode_csv = "",
                 const std::string& error_csv = "");

// Same protocol for in-memory models (used by tests/criteria).
Metrics evaluate_models(std::vector<wm::WorldModel*> models, const std::string& dataset_dir,
                        int n_episodes, const std::string& episode_csv = "",
                        const std::string& error_csv = "");

// Teacher-forced held-out policy loss (L1, mean per step) over a split.
double evaluate_policy_loss(wm::WorldModel& model, const std::string& dataset_dir,
                            bool eval_split = true);

// Held-out next-step dynamics MSE per head {P, V, A}, variance-normalized
// (fraction of the split's target variance left unexplained) so heads
// with different normalized spreads are comparable.
std::array<double, 3> evaluate_dynamics_mse(wm::WorldModel& model, const std::string& dataset_dir,
                                            bool eval_split = true);

}  // namespace dynmap::harness
