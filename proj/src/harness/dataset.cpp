#include "dynmap/harness/dataset.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "dynmap/core/hash.hpp"
#include "dynmap/render/render.hpp"

namespace dynmap::harness {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- json converters ----

namespace {

json rgb_to_json(const tasks::Rgb& c) { return json::array({c[0], c[1], c[2]}); }
tasks::Rgb rgb_from_json(const json& j) {
    return {j.at(0).get<uint8_t>(), j.at(1).get<uint8_t>(), j.at(2).get<uint8_t>()};
}

json range_to_json(const tasks::Range& r) { return json::array({r.lo, r.hi}); }
tasks::Range range_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

template <size_t N>
json arr_to_json(const std::array<double, N>& a) {
    json j = json::array();
    for (double x : a) j.push_back(x);
    return j;
}

template <size_t N>
std::array<double, N> arr_from_json(const json& j) {
    std::array<double, N> a{};
    for (size_t i = 0; i < N; ++i) a[i] = j.at(i).get<double>();
    return a;
}

}  // namespace

json episode_config_to_json(const tasks::EpisodeConfig& c) {
    json j;
    j["task"] = tasks::task_name(c.task);
    j["cart_width"] = c.cart_width;
    j["cart_height"] = c.cart_height;
    j["block_width"] = c.block_width;
    j["block_height"] = c.block_height;
    j["cart_start"] = json::array({c.cart_start.x, c.cart_start.y});
    j["block_shift"] = c.block_shift;
    j["goal"] = json::array({c.goal.g.x, c.goal.g.y});
    j["cart_color"] = rgb_to_json(c.cart_color);
    j["block_color"] = rgb_to_json(c.block_color);
    j["background_color"] = rgb_to_json(c.background_color);
    j["max_steps"] = c.max_steps;
    if (c.obstacle) {
        j["obstacle"] = {{"center", json::array({c.obstacle->center.x, c.obstacle->center.y})},
                         {"half_w", c.obstacle->half_w},
                         {"half_h", c.obstacle->half_h}};
    }
    if (c.bin) {
        j["bin"] = {{"center_x", c.bin->center_x},
                    {"inner_half_width", c.bin->inner_half_width},
                    {"wall_height", c.bin->wall_height},
                    {"wall_thickness", c.bin->wall_thickness},
                    {"floor_top", c.bin->floor_top}};
    }
    return j;
}

tasks::EpisodeConfig episode_config_from_json(const json& j) {
    tasks::EpisodeConfig c;
    c.task = tasks::task_from_name(j.at("task").get<std::string>());
    c.cart_width = j.at("cart_width").get<double>();
    c.cart_height = j.at("cart_height").get<double>();
    c.block_width = j.at("block_width").get<double>();
    c.block_height = j.at("block_height").get<double>();
    c.cart_start = {j.at("cart_start").at(0).get<double>(), j.at("cart_start").at(1).get<double>()};
    c.block_shift = j.at("block_shift").get<double>();
    c.goal.g = {j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>()};
    c.cart_color = rgb_from_json(j.at("cart_color"));
    c.block_color = rgb_from_json(j.at("block_color"));
    c.background_color = rgb_from_json(j.at("background_color"));
    c.max_steps = j.at("max_steps").get<int>();
    if (j.contains("obstacle")) {
        tasks::ObstacleSpec o;
        o.center = {j["obstacle"].at("center").at(0).get<double>(),
                    j["obstacle"].at("center").at(1).get<double>()};
        o.half_w = j["obstacle"].at("half_w").get<double>();
        o.half_h = j["obstacle"].at("half_h").get<double>();
        c.obstacle = o;
    }
    if (j.contains("bin")) {
        tasks::BinSpec b;
        b.center_x = j["bin"].at("center_x").get<double>();
        b.inner_half_width = j["bin"].at("inner_half_width").get<double>();
        b.wall_height = j["bin"].at("wall_height").get<double>();
        b.wall_thickness = j["bin"].at("wall_thickness").get<double>();
        b.floor_top = j["bin"].at("floor_top").get<double>();
        c.bin = b;
    }
    return c;
}

json norm_stats_to_json(const tasks::NormStats& s) {
    json j;
    j["v_min"] = arr_to_json(s.v_min);
    j["v_max"] = arr_to_json(s.v_max);
    j["a_min"] = arr_to_json(s.a_min);
    j["a_max"] = arr_to_json(s.a_max);
    j["action_bounds"] = {s.action_bounds.dx, s.action_bounds.dy, s.action_bounds.dtheta};
    j["theta_range"] = s.theta_range;
    j["degenerate_warning"] = s.degenerate_warning;
    return j;
}

tasks::NormStats norm_stats_from_json(const json& j) {
    tasks::NormStats s;
    s.v_min = arr_from_json<6>(j.at("v_min"));
    s.v_max = arr_from_json<6>(j.at("v_max"));
    s.a_min = arr_from_json<6>(j.at("a_min"));
    s.a_max = arr_from_json<6>(j.at("a_max"));
    s.action_bounds.dx = j.at("action_bounds").at(0).get<double>();
    s.action_bounds.dy = j.at("action_bounds").at(1).get<double>();
    s.action_bounds.dtheta = j.at("action_bounds").at(2).get<double>();
    s.theta_range = j.at("theta_range").get<double>();
    s.degenerate_warning = j.at("degenerate_warning").get<bool>();
    return s;
}

json randomization_to_json(const tasks::RandomizationSpec& s) {
    json j;
    j["cart_width"] = range_to_json(s.cart_width);
    j["block_height"] = range_to_json(s.block_height);
    j["cart_x"] = range_to_json(s.cart_x);
    j["cart_y"] = range_to_json(s.cart_y);
    j["target_x"] = range_to_json(s.target_x);
    j["target_y"] = range_to_json(s.target_y);
    j["block_shift"] = range_to_json(s.block_shift);
    j["rng_seed"] = s.rng_seed;
    j["cart_height"] = s.cart_height;
    j["block_width"] = s.block_width;
    return j;
}

tasks::RandomizationSpec randomization_from_json(const json& j) {
    tasks::RandomizationSpec s;
    s.cart_width = range_from_json(j.at("cart_width"));
    s.block_height = range_from_json(j.at("block_height"));
    s.cart_x = range_from_json(j.at("cart_x"));
    s.cart_y = range_from_json(j.at("cart_y"));
    s.target_x = range_from_json(j.at("target_x"));
    s.target_y = range_from_json(j.at("target_y"));
    s.block_shift = range_from_json(j.at("block_shift"));
    s.rng_seed = j.at("rng_seed").get<uint64_t>();
    s.cart_height = j.at("cart_height").get<double>();
    s.block_width = j.at("block_width").get<double>();
    return s;
}

// ---- binary trajectory io ----

namespace {

void put_u32(std::vector<uint8_t>& buf, uint32_t v) {
    buf.push_back(static_cast<uint8_t>(v & 0xff));
    buf.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    buf.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    buf.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

uint32_t get_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void put_f32(std::vector<uint8_t>& buf, double x) {
    const float f = static_cast<float>(x);
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(buf, bits);
}

double get_f32(const uint8_t*& p) {
    const uint32_t bits = get_u32(p);
    p += 4;
    float f;
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
}

void atomic_write(const std::string& path, const std::vector<uint8_t>& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

std::vector<uint8_t> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open " + path);
    const auto size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    return bytes;
}

}  // namespace

void write_trajectory(const std::string& path, const Trajectory& traj) {
    json header;
    header["config"] = episode_config_to_json(traj.config);
    header["layout"] = "image[12288]u8 p[6]f32 v[6]f32 a[6]f32 x[3]f32 "
                       "action[3]f32 command[3]f32 goal[2]f32 support u8 pad[3]";
    const std::string hs = header.dump();

    std::vector<uint8_t> buf;
    buf.reserve(16 + hs.size() + traj.steps.size() * kRecordStride + 4);
    buf.insert(buf.end(), {'D', 'M', 'T', 'J'});
    put_u32(buf, kTrajectoryVersion);
    put_u32(buf, static_cast<uint32_t>(traj.steps.size()));
    put_u32(buf, static_cast<uint32_t>(hs.size()));
    buf.insert(buf.end(), hs.begin(), hs.end());

    for (const auto& rec : traj.steps) {
        if (rec.image.size() != static_cast<size_t>(render::kImageBytes))
            throw std::runtime_error("record image has wrong size");
        const size_t start = buf.size();
        buf.insert(buf.end(), rec.image.begin(), rec.image.end());
        for (double x : rec.dynamics.p) put_f32(buf, x);
        for (double x : rec.dynamics.v) put_f32(buf, x);
        for (double x : rec.dynamics.a) put_f32(buf, x);
        for (double x : rec.proprio) put_f32(buf, x);
        for (double x : rec.action_norm) put_f32(buf, x);
        for (double x : rec.abs_command) put_f32(buf, x);
        put_f32(buf, rec.goal.g.x);
        put_f32(buf, rec.goal.g.y);
        buf.push_back(static_cast<uint8_t>(rec.support));
        while (buf.size() - start < kRecordStride) buf.push_back(0);
    }

    const auto crc = static_cast<uint32_t>(
        crc32(0L, buf.data(), static_cast<uInt>(buf.size())));
    put_u32(buf, crc);
    atomic_write(path, buf);
}

Trajectory read_trajectory(const std::string& path) {
    const std::vector<uint8_t> buf = read_all(path);
    if (buf.size() < 20) throw CorruptFile(path, "size");
    if (std::memcmp(buf.data(), "DMTJ", 4) != 0) throw CorruptFile(path, "magic");
    if (get_u32(buf.data() + 4) != kTrajectoryVersion) throw CorruptFile(path, "version");
    const uint32_t steps = get_u32(buf.data() + 8);
    const uint32_t header_len = get_u32(buf.data() + 12);
    const size_t expect = 16 + static_cast<size_t>(header_len) +
                          static_cast<size_t>(steps) * kRecordStride + 4;
    if (buf.size() != expect) throw CorruptFile(path, "size");

    const uint32_t stored_crc = get_u32(buf.data() + buf.size() - 4);
    const auto crc = static_cast<uint32_t>(
        crc32(0L, buf.data(), static_cast<uInt>(buf.size() - 4)));
    if (crc != stored_crc) throw CorruptFile(path, "crc");

    Trajectory traj;
    json header;
    try {
        header = json::parse(buf.begin() + 16, buf.begin() + 16 + header_len);
        traj.config = episode_config_from_json(header.at("config"));
    } catch (const json::exception&) {
        throw CorruptFile(path, "header");
    }

    traj.steps.resize(steps);
    const uint8_t* p = buf.data() + 16 + header_len;
    for (auto& rec : traj.steps) {
        const uint8_t* start = p;
        rec.image.assign(p, p + render::kImageBytes);
        p += render::kImageBytes;
        for (double& x : rec.dynamics.p) x = get_f32(p);
        for (double& x : rec.dynamics.v) x = get_f32(p);
        for (double& x : rec.dynamics.a) x = get_f32(p);
        for (double& x : rec.proprio) x = get_f32(p);
        for (double& x : rec.action_norm) x = get_f32(p);
        for (double& x : rec.abs_command) x = get_f32(p);
        rec.goal.g.x = get_f32(p);
        rec.goal.g.y = get_f32(p);
        if (*p > 3) throw CorruptFile(path, "support");
        rec.support = static_cast<sim::SupportStatus>(*p);
        p = start + kRecordStride;
    }
    return traj;
}

// ---- manifest ----

std::string combined_hash(const DatasetManifest& m) {
    Fnv64 h;
    for (const auto* list : {&m.train_files, &m.eval_files})
        for (const auto& e : *list) h.update(e.file_hash.data(), e.file_hash.size());
    return h.hex();
}

namespace {

json entry_to_json(const ManifestEntry& e) {
    return {{"file", e.file},
            {"config_digest", e.config_digest},
            {"file_hash", e.file_hash},
            {"steps", e.steps}};
}

ManifestEntry entry_from_json(const json& j) {
    ManifestEntry e;
    e.file = j.at("file").get<std::string>();
    e.config_digest = j.at("config_digest").get<std::string>();
    e.file_hash = j.at("file_hash").get<std::string>();
    e.steps = j.at("steps").get<uint32_t>();
    return e;
}

}  // namespace

void save_manifest(const std::string& dir, const DatasetManifest& m) {
    json j;
    j["format_version"] = m.format_version;
    j["task"] = tasks::task_name(m.task);
    j["creation_seed"] = m.creation_seed;
    j["randomization"] = randomization_to_json(m.randomization);
    j["norm_stats"] = norm_stats_to_json(m.norm_stats);
    j["n_train"] = m.train_files.size();
    j["n_eval"] = m.eval_files.size();
    j["train_files"] = json::array();
    for (const auto& e : m.train_files) j["train_files"].push_back(entry_to_json(e));
    j["eval_files"] = json::array();
    for (const auto& e : m.eval_files) j["eval_files"].push_back(entry_to_json(e));
    j["dataset_hash"] = m.dataset_hash;

    const std::string text = j.dump(2);
    atomic_write(dir + "/manifest.json",
                 std::vector<uint8_t>(text.begin(), text.end()));
}

DatasetManifest load_manifest(const std::string& dir) {
    const std::string path = dir + "/manifest.json";
    json j;
    try {
        j = json::parse(read_all(path));
    } catch (const json::exception&) {
        throw CorruptFile(path, "json");
    }
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    m.task = tasks::task_from_name(j.at("task").get<std::string>());
    m.creation_seed = j.at("creation_seed").get<uint64_t>();
    m.randomization = randomization_from_json(j.at("randomization"));
    m.norm_stats = norm_stats_from_json(j.at("norm_stats"));
    for (const auto& e : j.at("train_files")) m.train_files.push_back(entry_from_json(e));
    for (const auto& e : j.at("eval_files")) m.eval_files.push_back(entry_from_json(e));
    m.dataset_hash = j.at("dataset_hash").get<std::string>();
    return m;
}

// ---- norm accumulation ----

void NormAccumulator::add(const tasks::DynamicsState& d) {
    if (!any) {
        v_min = v_max = d.v;
        a_min = a_max = d.a;
        any = true;
        return;
    }
    for (int i = 0; i < 6; ++i) {
        v_min[i] = std::min(v_min[i], d.v[i]);
        v_max[i] = std::max(v_max[i], d.v[i]);
        a_min[i] = std::min(a_min[i], d.a[i]);
        a_max[i] = std::max(a_max[i], d.a[i]);
    }
}

tasks::NormStats NormAccumulator::finish() const {
    tasks::NormStats s;
    s.v_min = v_min;
    s.v_max = v_max;
    s.a_min = a_min;
    s.a_max = a_max;
    for (int i = 0; i < 6; ++i)
        if (v_max[i] - v_min[i] < 1e-12 || a_max[i] - a_min[i] < 1e-12)
            s.degenerate_warning = true;
    return s;
}

// ---- validation ----

ValidationReport validate_dataset(const std::string& dir) {
    ValidationReport rep;
    auto fail = [&rep](const std::string& msg) {
        rep.ok = false;
        rep.issues.push_back(msg);
    };

    DatasetManifest m;
    try {
        m = load_manifest(dir);
    } catch (const std::exception& e) {
        fail(e.what());
        return rep;
    }
    if (combined_hash(m) != m.dataset_hash) fail("dataset_hash does not match file hashes");

    for (const auto* list : {&m.train_files, &m.eval_files}) {
        for (const auto& e : *list) {
            const std::string path = dir + "/" + e.file;
            if (!fs::exists(path)) {
                fail(e.file + ": missing");
                continue;
            }
            if (hash_file_hex(path) != e.file_hash) {
                fail(e.file + ": content hash mismatch");
                continue;
            }
            Trajectory traj;
            try {
                traj = read_trajectory(path);
            } catch (const std::exception& ex) {
                fail(e.file + ": " + ex.what());
                continue;
            }
            if (traj.steps.size() != e.steps) fail(e.file + ": step count mismatch");
            if (traj.config.digest() != e.config_digest) fail(e.file + ": config digest mismatch");
            if (traj.config.task != m.task) fail(e.file + ": task mismatch");

            bool grounded = false;
            for (const auto& rec : traj.steps)
                if (rec.support == sim::SupportStatus::Grounded) grounded = true;
            if (m.task == tasks::TaskId::BinDropping) {
                // recorded bin episodes end with the block released
                continue;
            }
            if (grounded) fail(e.file + ": block grounded in a recorded success");
            const tasks::Outcome out = tasks::episode_outcome(traj.steps, traj.config, false);
            if (!out.success)
                fail(e.file + ": stored trajectory fails the success predicate");
        }
    }
    return rep;
}

}  // namespace dynmap::harness
