#pragma once

#include "dynmap/harness/dataset.hpp"
#include "dynmap/wm/losses.hpp"

namespace dynmap::harness {

enum class Regime : uint8_t { DecoupledWm, DecoupledPolicy, Joint, E2E };

const char* regime_name(Regime r);
Regime regime_from_name(const std::string& name);

struct TrainConfig {
    Regime regime = Regime::DecoupledWm;
    wm::ModelConfig model;
    wm::LossWeights weights;
    nn::AdamConfig adam;
    int epochs = 200;
    int batch_size = 8;  // sequences per optimizer step
    int window = 0;      // steps per training window; 0 = full episode
    uint64_t seed = 0;
    std::string dataset_dir;
    std::string wm_checkpoint;   // frozen model, decoupled policy training only
    std::string init_checkpoint; // optional warm start for joint/e2e/policy regimes
    std::string out_checkpoint;
    std::string cache_dir;       // latent caches; defaults to dataset_dir
    std::string log_csv;         // per-epoch loss components; empty = no log
};

struct TrainResult {
    std::vector<wm::LossValues> epochs;  // mean per-window components per epoch
    std::string checkpoint;
    std::string wm_hash_before, wm_hash_after;  // set by decoupled policy training
};

// Normalized training sample from a stored trajectory. `offset`/`window`
// select a sub-sequence; window 0 takes the whole episode.
wm::SeqSample make_seq_sample(const Trajectory& traj, const tasks::NormStats& stats, int offset = 0,
                              int window = 0);

TrainResult train_decoupled_wm(const TrainConfig& cfg);
TrainResult train_policy_frozen(const TrainConfig& cfg);
TrainResult train_joint(const TrainConfig& cfg);
TrainResult train_e2e(const TrainConfig& cfg);

// ---- latent cache (decoupled policy training) ----

class StaleCache : public std::runtime_error {
  public:
    explicit StaleCache(const std::string& what) : std::runtime_error(what) {}
};

struct LatentCache {
    std::string dataset_hash, checkpoint_hash;
    std::vector<wm::LatentSeq> seqs;  // training split order
};

std::string latent_cache_path(const std::string& cache_dir, const std::string& dataset_hash,
                              const std::string& checkpoint_hash);
void save_latent_cache(const std::string& path, const LatentCache& cache);
LatentCache load_latent_cache(const std::string& path);

// Computes (or loads, when a fresh cache file exists) teacher-forced
// latents of the frozen model over the training split.
LatentCache latents_for_dataset(wm::WorldModel& model, const std::string& dataset_dir,
                                const std::string& checkpoint_path, const std::string& cache_dir);

}  // namespace dynmap::harness
