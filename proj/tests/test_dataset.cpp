#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dynmap/core/hash.hpp"
#include "dynmap/core/rng.hpp"
#include "dynmap/expert/recorder.hpp"
#include "dynmap/harness/dataset.hpp"
#include "dynmap/render/render.hpp"
#include "dynmap/tasks/tasks.hpp"

using namespace dynmap;
using namespace dynmap::harness;
namespace fs = std::filesystem;

namespace {

Trajectory synthetic_trajectory(int steps, uint64_t seed) {
    Rng rng(seed);
    Trajectory traj;
    traj.config = tasks::sample_episode(tasks::TaskId::BalanceReaching,
                                        tasks::RandomizationSpec{}, rng);
    for (int t = 0; t < steps; ++t) {
        tasks::StepRecord rec;
        rec.image.resize(render::kImageBytes);
        for (auto& b : rec.image) b = static_cast<uint8_t>(rng.uniform_index(256));
        for (int i = 0; i < 6; ++i) {
            rec.dynamics.p[i] = rng.uniform(-1.0, 1.0);
            rec.dynamics.v[i] = rng.uniform(-1.0, 1.0);
            rec.dynamics.a[i] = rng.uniform(-1.0, 1.0);
        }
        for (int i = 0; i < 3; ++i) {
            rec.proprio[i] = rng.uniform(0.0, 1.0);
            rec.action_norm[i] = rng.uniform(-1.0, 1.0);
            rec.abs_command[i] = rng.uniform(0.0, 1.0);
        }
        rec.goal = traj.config.goal;
        rec.support = t % 2 ? sim::SupportStatus::Supported : sim::SupportStatus::Sliding;
        traj.steps.push_back(std::move(rec));
    }
    return traj;
}

struct TempDir {
    std::string path;
    explicit TempDir(std::string p) : path(std::move(p)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("trajectory round-trip preserves everything float32 can hold") {
    TempDir dir("dataset_probe_rt");
    const std::string path = dir.path + "/ep.dmtj";
    const Trajectory traj = synthetic_trajectory(12, 3);
    write_trajectory(path, traj);
    const Trajectory back = read_trajectory(path);

    CHECK(back.config.digest() == traj.config.digest());
    REQUIRE(back.steps.size() == traj.steps.size());
    for (size_t t = 0; t < traj.steps.size(); ++t) {
        const auto& a = traj.steps[t];
        const auto& b = back.steps[t];
        CHECK(a.image == b.image);
        for (int i = 0; i < 6; ++i) {
            CHECK(b.dynamics.p[i] == doctest::Approx(a.dynamics.p[i]).epsilon(1e-6));
            CHECK(b.dynamics.v[i] == doctest::Approx(a.dynamics.v[i]).epsilon(1e-6));
            CHECK(b.dynamics.a[i] == doctest::Approx(a.dynamics.a[i]).epsilon(1e-6));
        }
        for (int i = 0; i < 3; ++i) {
            CHECK(b.action_norm[i] == doctest::Approx(a.action_norm[i]).epsilon(1e-6));
            CHECK(b.abs_command[i] == doctest::Approx(a.abs_command[i]).epsilon(1e-6));
        }
        CHECK(b.goal.g.x == doctest::Approx(a.goal.g.x).epsilon(1e-6));
        CHECK(b.support == a.support);
    }
}

TEST_CASE("trajectory file size is exactly header + records + checksum") {
    TempDir dir("dataset_probe_size");
    const std::string path = dir.path + "/ep.dmtj";
    const Trajectory traj = synthetic_trajectory(120, 5);
    write_trajectory(path, traj);

    std::ifstream f(path, std::ios::binary);
    char magic[4];
    uint32_t version = 0, steps = 0, header_len = 0;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&version), 4);
    f.read(reinterpret_cast<char*>(&steps), 4);
    f.read(reinterpret_cast<char*>(&header_len), 4);
    CHECK(std::string(magic, 4) == "DMTJ");
    CHECK(version == kTrajectoryVersion);
    CHECK(steps == 120);

    const auto size = fs::file_size(path);
    CHECK(size == 16 + header_len + 120 * kRecordStride + 4);
}

TEST_CASE("trajectory corruption detection") {
    TempDir dir("dataset_probe_corrupt");
    const std::string path = dir.path + "/ep.dmtj";
    write_trajectory(path, synthetic_trajectory(6, 7));

    SUBCASE("payload bit flip") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(2000);
        char b;
        f.seekg(2000);
        f.read(&b, 1);
        b = static_cast<char>(b ^ 0x01);
        f.seekp(2000);
        f.write(&b, 1);
        f.close();
        CHECK_THROWS_AS(read_trajectory(path), CorruptFile);
    }
    SUBCASE("truncation") {
        const auto size = fs::file_size(path);
        fs::resize_file(path, size - 100);
        CHECK_THROWS_AS(read_trajectory(path), CorruptFile);
    }
    SUBCASE("wrong magic names the field") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("NOPE", 4);
        f.close();
        try {
            read_trajectory(path);
            FAIL("expected CorruptFile");
        } catch (const CorruptFile& e) {
            CHECK(e.field() == "magic");
        }
    }
    SUBCASE("missing file") {
        CHECK_THROWS(read_trajectory(dir.path + "/absent.dmtj"));
    }
}

TEST_CASE("norm accumulator") {
    NormAccumulator acc;
    tasks::DynamicsState d;
    d.v = {1.0, -2.0, 0.0, 0.5, 0.0, 0.0};
    d.a = {10.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    acc.add(d);
    d.v = {-1.0, 4.0, 0.0, 0.5, 0.0, 0.0};
    d.a = {-10.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    acc.add(d);
    const tasks::NormStats stats = acc.finish();
    CHECK(stats.v_min[0] == doctest::Approx(-1.0));
    CHECK(stats.v_max[0] == doctest::Approx(1.0));
    CHECK(stats.v_min[1] == doctest::Approx(-2.0));
    CHECK(stats.v_max[1] == doctest::Approx(4.0));
    CHECK(stats.a_max[0] == doctest::Approx(10.0));
    // dimension 3 never varies: degenerate
    CHECK(stats.degenerate_warning);
}

TEST_CASE("json converters round-trip") {
    Rng rng(11);
    SUBCASE("episode config") {
        const auto cfg =
            tasks::sample_episode(tasks::TaskId::BalanceReachingV2, tasks::RandomizationSpec{}, rng);
        const auto back = episode_config_from_json(episode_config_to_json(cfg));
        CHECK(back.digest() == cfg.digest());
        CHECK(back.obstacle.has_value());
    }
    SUBCASE("norm stats") {
        tasks::NormStats s;
        for (int i = 0; i < 6; ++i) {
            s.v_min[i] = -0.1 * (i + 1);
            s.v_max[i] = 0.2 * (i + 1);
            s.a_min[i] = -1.0;
            s.a_max[i] = 2.0;
        }
        s.degenerate_warning = true;
        const auto back = norm_stats_from_json(norm_stats_to_json(s));
        for (int i = 0; i < 6; ++i) {
            CHECK(back.v_min[i] == doctest::Approx(s.v_min[i]));
            CHECK(back.v_max[i] == doctest::Approx(s.v_max[i]));
        }
        CHECK(back.degenerate_warning);
    }
    SUBCASE("randomization spec") {
        tasks::RandomizationSpec s;
        s.cart_width = {0.22, 0.30};
        s.rng_seed = 99;
        const auto back = randomization_from_json(randomization_to_json(s));
        CHECK(back.cart_width.lo == doctest::Approx(0.22));
        CHECK(back.cart_width.hi == doctest::Approx(0.30));
        CHECK(back.rng_seed == 99);
    }
}

TEST_CASE("recorded dataset: manifest, validation, and action oracle") {
    TempDir dir("dataset_probe_rec");
    expert::ScriptedExpert scripted;
    expert::RecorderConfig rc;
    rc.out_dir = dir.path;
    rc.n_train = 3;
    rc.n_eval = 1;
    const tasks::RandomizationSpec spec;
    const DatasetManifest manifest = expert::record_dataset(
        {&scripted}, tasks::TaskId::BalanceReaching, spec, rc, 2024);

    REQUIRE(manifest.train_files.size() == 3);
    REQUIRE(manifest.eval_files.size() == 1);
    CHECK(manifest.dataset_hash == combined_hash(manifest));

    SUBCASE("manifest round-trips through disk") {
        const DatasetManifest loaded = load_manifest(dir.path);
        CHECK(loaded.dataset_hash == manifest.dataset_hash);
        CHECK(loaded.train_files.size() == 3);
        CHECK(loaded.norm_stats.v_max[0] == doctest::Approx(manifest.norm_stats.v_max[0]));
    }
    SUBCASE("file hashes match the bytes on disk") {
        for (const auto& e : manifest.train_files)
            CHECK(hash_file_hex(dir.path + "/" + e.file) == e.file_hash);
    }
    SUBCASE("validate_dataset accepts the fresh dataset") {
        const ValidationReport rep = validate_dataset(dir.path);
        CAPTURE(rep.issues.empty() ? std::string() : rep.issues.front());
        CHECK(rep.ok);
    }
    SUBCASE("validate_dataset flags a corrupted file") {
        const std::string victim = dir.path + "/" + manifest.train_files[0].file;
        std::fstream f(victim, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(5000);
        f.write("\xde\xad", 2);
        f.close();
        const ValidationReport rep = validate_dataset(dir.path);
        CHECK_FALSE(rep.ok);
        CHECK_FALSE(rep.issues.empty());
    }
    SUBCASE("stored abs commands replay through the double-difference inverse") {
        // recompute the acceleration from consecutive absolute commands and
        // drive a fresh world with it: the cart must retrace the recording
        sim::PhysicsParams params;
        const Trajectory traj = read_trajectory(dir.path + "/" + manifest.train_files[0].file);
        sim::WorldState w = tasks::make_world(traj.config, params);
        std::array<double, 3> p2{w.cart.pos.x, w.cart.pos.y, w.cart.theta};
        std::array<double, 3> p1 = p2;
        for (const auto& step : traj.steps) {
            const auto cmd = tasks::preprocess_action(step.abs_command, p1, p2, tasks::kControlDt,
                                                      params);
            control_step(w, cmd, params);
            p2 = p1;
            p1 = step.abs_command;
            CHECK(std::fabs(w.cart.pos.x - step.abs_command[0]) < 1e-5);
            CHECK(std::fabs(w.cart.pos.y - step.abs_command[1]) < 1e-5);
            CHECK(std::fabs(w.cart.theta - step.abs_command[2]) < 1e-5);
        }
    }
    SUBCASE("recording is deterministic in the seed") {
        TempDir dir2("dataset_probe_rec2");
        expert::RecorderConfig rc2 = rc;
        rc2.out_dir = dir2.path;
        expert::ScriptedExpert scripted2;
        const DatasetManifest again = expert::record_dataset(
            {&scripted2}, tasks::TaskId::BalanceReaching, spec, rc2, 2024);
        CHECK(again.dataset_hash == manifest.dataset_hash);
    }
}
