#include "dynmap/core/hash.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dynmap {

std::string Fnv64::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h_));
    return std::string(buf);
}

std::string hash_file_hex(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open file for hashing: " + path);
    Fnv64 h;
    char buf[1 << 16];
    while (f) {
        f.read(buf, sizeof(buf));
        h.update(buf, static_cast<size_t>(f.gcount()));
    }
    return h.hex();
}

}  // namespace dynmap
