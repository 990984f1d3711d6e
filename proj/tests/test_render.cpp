#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dynmap/core/rng.hpp"
#include "dynmap/render/render.hpp"
#include "dynmap/tasks/tasks.hpp"

using namespace dynmap;
using namespace dynmap::render;

namespace {

tasks::EpisodeConfig nominal_config() {
    tasks::EpisodeConfig c;
    c.cart_start = {0.5, 0.4};
    c.goal.g = {0.5, 0.4};
    c.cart_color = {200, 60, 60};
    c.block_color = {60, 60, 200};
    c.background_color = {20, 20, 20};
    return c;
}

bool pixel_is(const Image64& img, int row, int col, const tasks::Rgb& rgb) {
    const uint8_t* p = img.at(row, col);
    return p[0] == rgb[0] && p[1] == rgb[1] && p[2] == rgb[2];
}

}  // namespace

TEST_CASE("camera mapping") {
    CHECK(Camera::pixel_center_x(0) == doctest::Approx(0.5 / 64.0));
    CHECK(Camera::pixel_center_x(63) == doctest::Approx(63.5 / 64.0));
    CHECK(Camera::pixel_center_y(0) == doctest::Approx(1.0 - 0.5 / 64.0));
    CHECK(Camera::pixel_center_y(63) == doctest::Approx(0.5 / 64.0));
}

TEST_CASE("every pixel belongs to a known palette entry") {
    sim::PhysicsParams params;
    const tasks::EpisodeConfig cfg = nominal_config();
    const sim::WorldState w = tasks::make_world(cfg, params);
    const Image64 img = render_frame(w, cfg);
    int bg = 0, cart = 0, block = 0, goal = 0;
    for (int r = 0; r < kImageSize; ++r) {
        for (int c = 0; c < kImageSize; ++c) {
            if (pixel_is(img, r, c, cfg.background_color)) ++bg;
            else if (pixel_is(img, r, c, cfg.cart_color)) ++cart;
            else if (pixel_is(img, r, c, cfg.block_color)) ++block;
            else if (pixel_is(img, r, c, kGoalGreen)) ++goal;
        }
    }
    CHECK(bg + cart + block + goal == kImageSize * kImageSize);
    CHECK(cart > 0);
    CHECK(block > 0);
    CHECK(bg > 2000);
}

TEST_CASE("axis-aligned cart covers an exact pixel run") {
    sim::PhysicsParams params;
    tasks::EpisodeConfig cfg = nominal_config();
    cfg.cart_width = 0.25;  // 0.25 m at 64 px/m = exactly 16 columns
    const sim::WorldState w = tasks::make_world(cfg, params);
    const Image64 img = render_frame(w, cfg);
    // pick the row through the cart centre
    const int row = static_cast<int>(std::floor((1.0 - w.cart.pos.y) * kImageSize));
    int run = 0;
    for (int c = 0; c < kImageSize; ++c)
        if (pixel_is(img, row, c, cfg.cart_color)) ++run;
    CHECK(run == 16);
}

TEST_CASE("goal marker lands on the expected pixel") {
    sim::PhysicsParams params;
    tasks::EpisodeConfig cfg = nominal_config();
    cfg.goal.g = {0.8, 0.2};
    // keep the bodies away from the marker
    cfg.cart_start = {0.3, 0.6};
    const sim::WorldState w = tasks::make_world(cfg, params);
    const Image64 img = render_frame(w, cfg);
    // (0.8, 0.2) -> col floor(0.8*64)=51, row floor(0.8*64)=51
    CHECK(pixel_is(img, 51, 51, kGoalGreen));
    // 3x3 marker footprint
    for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) CHECK(pixel_is(img, 51 + dr, 51 + dc, kGoalGreen));
    CHECK_FALSE(pixel_is(img, 51, 55, kGoalGreen));
}

TEST_CASE("bodies draw over the goal marker") {
    sim::PhysicsParams params;
    tasks::EpisodeConfig cfg = nominal_config();
    cfg.goal.g = cfg.cart_start;  // marker underneath the cart
    const sim::WorldState w = tasks::make_world(cfg, params);
    const Image64 img = render_frame(w, cfg);
    const int row = static_cast<int>(std::floor((1.0 - cfg.goal.g.y) * kImageSize));
    const int col = static_cast<int>(std::floor(cfg.goal.g.x * kImageSize));
    CHECK(pixel_is(img, row, col, cfg.cart_color));
}

TEST_CASE("scanline fill agrees with the per-pixel coverage oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec2 center{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
        const double theta = rng.uniform(-3.0, 3.0);
        const double hw = rng.uniform(0.02, 0.2);
        const double hh = rng.uniform(0.02, 0.2);
        const auto quad = box_corners(center, theta, hw, hh);

        Image64 img;
        const tasks::Rgb color{255, 255, 255};
        fill_convex_quad(img, quad, color);
        for (int r = 0; r < kImageSize; ++r) {
            for (int c = 0; c < kImageSize; ++c) {
                const bool filled = pixel_is(img, r, c, color);
                const bool covered = pixel_covered(quad, r, c);
                if (filled != covered) {
                    CAPTURE(trial);
                    CAPTURE(r);
                    CAPTURE(c);
                    REQUIRE(filled == covered);
                }
            }
        }
    }
}

TEST_CASE("rendering is deterministic") {
    sim::PhysicsParams params;
    const tasks::EpisodeConfig cfg = nominal_config();
    sim::WorldState w = tasks::make_world(cfg, params);
    for (int i = 0; i < 5; ++i) control_step(w, {0.5, 0.0, 0.1}, params);
    const Image64 a = render_frame(w, cfg);
    const Image64 b = render_frame(w, cfg);
    CHECK(a.px == b.px);
}

TEST_CASE("png writer emits a valid signature") {
    const std::string path = "render_probe.png";
    Image64 img;
    write_png(path, img.px.data(), kImageSize, kImageSize);
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    unsigned char sig[8] = {};
    f.read(reinterpret_cast<char*>(sig), 8);
    const unsigned char expect[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    for (int i = 0; i < 8; ++i) CHECK(sig[i] == expect[i]);
    f.close();
    std::remove(path.c_str());
}

TEST_CASE("export_frames writes one png per step plus a contact sheet") {
    namespace fs = std::filesystem;
    const std::string dir = "render_export_probe";
    fs::remove_all(dir);

    sim::PhysicsParams params;
    const tasks::EpisodeConfig cfg = nominal_config();
    sim::WorldState w = tasks::make_world(cfg, params);
    std::vector<tasks::StepRecord> records;
    for (int t = 0; t < 7; ++t) {
        tasks::StepRecord rec;
        const Image64 img = render_frame(w, cfg);
        rec.image.assign(img.px.begin(), img.px.end());
        records.push_back(std::move(rec));
        control_step(w, {0.3, 0.0, 0.0}, params);
    }
    export_frames(records, dir);

    int pngs = 0;
    bool sheet = false;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".png") {
            ++pngs;
            if (e.path().filename() == "sheet.png") sheet = true;
        }
    }
    CHECK(pngs == 8);  // 7 frames + sheet
    CHECK(sheet);
    CHECK_THROWS(export_frames({}, dir));
    fs::remove_all(dir);
}
