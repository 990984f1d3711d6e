#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dynmap/sim/types.hpp"
#include "dynmap/tasks/types.hpp"

namespace dynmap::render {

constexpr int kImageSize = 64;
constexpr int kImageBytes = kImageSize * kImageSize * 3;

// 64x64 RGB, row-major, row 0 = top of the workspace.
struct Image64 {
    std::array<uint8_t, kImageBytes> px{};

    uint8_t* at(int row, int col) { return px.data() + (row * kImageSize + col) * 3; }
    const uint8_t* at(int row, int col) const { return px.data() + (row * kImageSize + col) * 3; }
};

// 1 m x 1 m workspace at 15.625 mm per pixel (scale * 64 = 1.0 exactly).
struct Camera {
    static constexpr double scale = 1.0 / kImageSize;
    static double pixel_center_x(int col) { return (col + 0.5) * scale; }
    static double pixel_center_y(int row) { return 1.0 - (row + 0.5) * scale; }
};

constexpr tasks::Rgb kGoalGreen{0, 220, 0};

Image64 render_frame(const sim::WorldState& world, const tasks::EpisodeConfig& config);

// Scanline fill of a convex quad given in CCW order (world coords, y-up),
// pixel-center coverage with top/left edges inclusive.
void fill_convex_quad(Image64& img, const std::array<Vec2, 4>& quad, const tasks::Rgb& color);

// Brute-force coverage oracle used by tests: true iff the pixel center is
// covered under the same top/left rule, decided per-pixel from the edge
// half-plane tests rather than scanline intervals.
bool pixel_covered(const std::array<Vec2, 4>& quad, int row, int col);

std::array<Vec2, 4> box_corners(const Vec2& center, double theta, double half_w, double half_h);

void write_png(const std::string& path, const uint8_t* rgb, int width, int height);

// One PNG per step plus a tiled contact sheet ("sheet.png").
void export_frames(const std::vector<tasks::StepRecord>& records, const std::string& dir);

}  // namespace dynmap::render
