#pragma once

#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

namespace dynmap {

// FNV-1a 64-bit, used for content digests (checkpoints, manifests, caches).
class Fnv64 {
  public:
    void update(const void* data, size_t n) {
        const auto* p = static_cast<const uint8_t*>(data);
        for (size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ull;
        }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }
    void update(const std::vector<uint8_t>& v) { update(v.data(), v.size()); }
    uint64_t digest() const { return h_; }
    std::string hex() const;

  private:
    uint64_t h_ = 0xcbf29ce484222325ull;
};

std::string hash_file_hex(const std::string& path);

}  // namespace dynmap
