#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dynmap/nn/tensor.hpp"

namespace dynmap::nn {

// Named-tensor container: magic "DMCK", u32 version, u32 header length,
// JSON header (tensor names/shapes/byte offsets + caller metadata),
// little-endian float32 payload, trailing CRC32 over everything before it.

class CorruptCheckpoint : public NnError {
  public:
    explicit CorruptCheckpoint(const std::string& field)
        : NnError("corrupt checkpoint: bad " + field), field_name(field) {}
    std::string field_name;
};

struct CheckpointData {
    std::string meta_json;  // caller metadata (architecture descriptor etc.)
    std::vector<std::pair<std::string, Tensor>> tensors;
};

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params,
                     const std::string& meta_json);
void save_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint(const std::string& path);

// loads into an existing ParamSet; shapes must match exactly
void load_into(const std::string& path, ParamSet& params);

}  // namespace dynmap::nn
