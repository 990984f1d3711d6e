#pragma once

#include <iosfwd>

#include "dynmap/expert/ppo.hpp"

namespace dynmap::harness {

// Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
int run_cli(int argc, char** argv);

void save_ppo_checkpoint(const std::string& path, const expert::PpoCheckpoint& ck);
expert::PpoCheckpoint load_ppo_checkpoint(const std::string& path);

// Multi-modality rule: the last 3 checkpoints whose probe SR reaches 80%
// of the best checkpoint's probe SR.
std::vector<expert::PpoCheckpoint> select_recording_checkpoints(
    const std::vector<expert::PpoCheckpoint>& all);

// Gradient-check suite over every layer type plus composed models;
// returns true when all checks pass. Prints one line per check.
bool run_gradcheck_suite(std::ostream& out, uint64_t seed);

}  // namespace dynmap::harness
