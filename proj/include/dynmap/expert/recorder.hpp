#pragma once

#include "dynmap/expert/scripted.hpp"
#include "dynmap/harness/dataset.hpp"

namespace dynmap::expert {

struct RecorderConfig {
    std::string out_dir;
    int n_train = 300;
    int n_eval = 50;
    double min_yield = 0.10;  // success fraction; below this the run aborts
    int yield_window = 50;    // attempts before the first yield check
};

// Rolls experts round-robin over sampled episodes and keeps successes
// until n_train + n_eval trajectories are on disk. The expert acts in
// acceleration space; the stored absolute pose command follows
// p_t = 2 p_{t-1} - p_{t-2} + a T^2, which preprocess_action inverts
// exactly. NormStats come from the training split only.
harness::DatasetManifest record_dataset(const std::vector<ExpertPolicy*>& experts,
                                        tasks::TaskId task,
                                        const tasks::RandomizationSpec& spec,
                                        const RecorderConfig& config, uint64_t seed);

}  // namespace dynmap::expert
