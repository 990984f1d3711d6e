#pragma once

#include <nlohmann/json.hpp>

#include "dynmap/tasks/tasks.hpp"

namespace dynmap::harness {

class CorruptFile : public std::runtime_error {
  public:
    CorruptFile(const std::string& path, const std::string& field)
        : std::runtime_error("corrupt file " + path + ": bad " + field), field_(field) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

nlohmann::json episode_config_to_json(const tasks::EpisodeConfig& c);
tasks::EpisodeConfig episode_config_from_json(const nlohmann::json& j);
nlohmann::json norm_stats_to_json(const tasks::NormStats& s);
tasks::NormStats norm_stats_from_json(const nlohmann::json& j);
nlohmann::json randomization_to_json(const tasks::RandomizationSpec& s);
tasks::RandomizationSpec randomization_from_json(const nlohmann::json& j);

struct Trajectory {
    tasks::EpisodeConfig config;
    std::vector<tasks::StepRecord> steps;
};

// Binary trajectory format, little-endian:
//   "DMTJ" | u32 version | u32 steps | u32 header_len | JSON header
//   | steps * fixed 12408-byte record | u32 CRC32 (all preceding bytes)
// Record: image 12288 u8, P/V/A 18 f32, x_t 3 f32, action 3 f32,
// abs command 3 f32, goal 2 f32, support u8, 3 pad bytes.
constexpr uint32_t kTrajectoryVersion = 1;
constexpr size_t kRecordStride = 12408;

void write_trajectory(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory(const std::string& path);

struct ManifestEntry {
    std::string file;
    std::string config_digest;
    std::string file_hash;  // fnv64 of the file bytes
    uint32_t steps = 0;
};

struct DatasetManifest {
    int format_version = 1;
    tasks::TaskId task = tasks::TaskId::BalanceReaching;
    uint64_t creation_seed = 0;
    tasks::RandomizationSpec randomization;
    tasks::NormStats norm_stats;  // computed from the training split only
    std::vector<ManifestEntry> train_files, eval_files;
    std::string dataset_hash;  // fnv64 over all per-file hashes, train then eval
};

std::string combined_hash(const DatasetManifest& m);
void save_manifest(const std::string& dir, const DatasetManifest& m);
DatasetManifest load_manifest(const std::string& dir);

// Running min/max accumulation for the training split.
struct NormAccumulator {
    std::array<double, 6> v_min{}, v_max{}, a_min{}, a_max{};
    bool any = false;
    void add(const tasks::DynamicsState& d);
    tasks::NormStats finish() const;  // flags degenerate dimensions
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> issues;
};
ValidationReport validate_dataset(const std::string& dir);

}  // namespace dynmap::harness
