#include "dynmap/nn/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <zlib.h>
#include <json.hpp>

namespace dynmap::nn {

namespace {

constexpr uint32_t kVersion = 1;

void append_u32(std::vector<uint8_t>& out, uint32_t x) {
    out.push_back(static_cast<uint8_t>(x));
    out.push_back(static_cast<uint8_t>(x >> 8));
    out.push_back(static_cast<uint8_t>(x >> 16));
    out.push_back(static_cast<uint8_t>(x >> 24));
}

uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void atomic_write(const std::string& path, const std::vector<uint8_t>& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw NnError("cannot write " + tmp);
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
        if (!f) throw NnError("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointData& data) {
    nlohmann::json header;
    header["version"] = kVersion;
    if (!data.meta_json.empty()) {
        header["meta"] = nlohmann::json::parse(data.meta_json, nullptr, false);
        if (header["meta"].is_discarded()) header["meta"] = data.meta_json;
    }
    uint64_t offset = 0;
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& [name, t] : data.tensors) {
        const uint64_t nbytes = static_cast<uint64_t>(t.numel()) * 4;
        tensors.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}, {"nbytes", nbytes}});
        offset += nbytes;
    }
    header["tensors"] = std::move(tensors);
    const std::string hs = header.dump();

    std::vector<uint8_t> out;
    out.reserve(hs.size() + offset + 64);
    out.insert(out.end(), {'D', 'M', 'C', 'K'});
    append_u32(out, kVersion);
    append_u32(out, static_cast<uint32_t>(hs.size()));
    out.insert(out.end(), hs.begin(), hs.end());
    for (const auto& [name, t] : data.tensors) {
        const auto* p = reinterpret_cast<const uint8_t*>(t.v.data());
        out.insert(out.end(), p, p + static_cast<size_t>(t.numel()) * 4);
    }
    const uint32_t crc = crc32(0, out.data(), static_cast<uInt>(out.size()));
    append_u32(out, crc);
    atomic_write(path, out);
}

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params,
                     const std::string& meta_json) {
    CheckpointData data;
    data.meta_json = meta_json;
    for (const Parameter* p : params) data.tensors.emplace_back(p->name, p->value);
    save_checkpoint(path, data);
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw NnError("cannot open checkpoint: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() < 16) throw CorruptCheckpoint("file size");
    if (std::memcmp(bytes.data(), "DMCK", 4) != 0) throw CorruptCheckpoint("magic");
    const uint32_t version = read_u32(bytes.data() + 4);
    if (version != kVersion) throw CorruptCheckpoint("version");
    const uint32_t header_len = read_u32(bytes.data() + 8);
    if (bytes.size() < 12ull + header_len + 4) throw CorruptCheckpoint("header length");

    const uint32_t stored_crc = read_u32(bytes.data() + bytes.size() - 4);
    const uint32_t crc = crc32(0, bytes.data(), static_cast<uInt>(bytes.size() - 4));
    if (crc != stored_crc) throw CorruptCheckpoint("crc");

    nlohmann::json header = nlohmann::json::parse(
        std::string(bytes.begin() + 12, bytes.begin() + 12 + header_len), nullptr, false);
    if (header.is_discarded()) throw CorruptCheckpoint("header json");
    if (!header.contains("version")) throw CorruptCheckpoint("header version field");

    CheckpointData data;
    if (header.contains("meta")) data.meta_json = header["meta"].dump();
    const size_t payload_start = 12 + header_len;
    const size_t payload_len = bytes.size() - 4 - payload_start;
    for (const auto& td : header["tensors"]) {
        const std::string name = td.at("name");
        const std::vector<int> shape = td.at("shape").get<std::vector<int>>();
        const uint64_t off = td.at("offset");
        const uint64_t nbytes = td.at("nbytes");
        if (off + nbytes > payload_len) throw CorruptCheckpoint("tensor extent: " + name);
        Tensor t(shape);
        if (static_cast<uint64_t>(t.numel()) * 4 != nbytes)
            throw CorruptCheckpoint("tensor size: " + name);
        std::memcpy(t.v.data(), bytes.data() + payload_start + off, nbytes);
        data.tensors.emplace_back(name, std::move(t));
    }
    return data;
}

void load_into(const std::string& path, ParamSet& params) {
    const CheckpointData data = load_checkpoint(path);
    for (const auto& [name, t] : data.tensors) {
        Parameter& p = params.at(name);
        if (p.value.shape != t.shape) throw CorruptCheckpoint("shape of " + name);
        p.value = t;
        p.zero_grad();
    }
}

}  // namespace dynmap::nn
