#include "dynmap/render/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <zlib.h>

namespace dynmap::render {

std::array<Vec2, 4> box_corners(const Vec2& center, double theta, double half_w, double half_h) {
    // CCW in y-up world coordinates
    const std::array<Vec2, 4> local{Vec2{-half_w, -half_h}, Vec2{half_w, -half_h},
                                    Vec2{half_w, half_h}, Vec2{-half_w, half_h}};
    std::array<Vec2, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = center + rotate(local[i], theta);
    return out;
}

namespace {

// Inclusive edges under the top/left rule (CCW, y-up): an edge going down
// (left edge) or exactly horizontal going -x (top edge).
bool edge_inclusive(const Vec2& e) { return e.y < 0.0 || (e.y == 0.0 && e.x < 0.0); }

}  // namespace

bool pixel_covered(const std::array<Vec2, 4>& quad, int row, int col) {
    const Vec2 p{Camera::pixel_center_x(col), Camera::pixel_center_y(row)};
    for (int i = 0; i < 4; ++i) {
        const Vec2 a = quad[i];
        const Vec2 e = quad[(i + 1) % 4] - a;
        const double d = e.cross(p - a);
        if (d < 0.0) return false;
        if (d == 0.0 && !edge_inclusive(e)) return false;
    }
    return true;
}

void fill_convex_quad(Image64& img, const std::array<Vec2, 4>& quad, const tasks::Rgb& color) {
    double ymin = quad[0].y, ymax = quad[0].y;
    for (const auto& v : quad) {
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    for (int row = 0; row < kImageSize; ++row) {
        const double yc = Camera::pixel_center_y(row);
        // bottom edge exclusive, top edge inclusive
        if (!(yc > ymin && yc <= ymax)) continue;

        // intersect edges with the row line to get the covered x-interval
        double x_lo = std::numeric_limits<double>::infinity();
        double x_hi = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < 4; ++i) {
            const Vec2 a = quad[i], b = quad[(i + 1) % 4];
            if (a.y == b.y) {
                if (yc == a.y) {
                    x_lo = std::min({x_lo, a.x, b.x});
                    x_hi = std::max({x_hi, a.x, b.x});
                }
                continue;
            }
            const double t = (yc - a.y) / (b.y - a.y);
            if (t < 0.0 || t > 1.0) continue;
            const double x = a.x + t * (b.x - a.x);
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
        }
        if (!(x_lo <= x_hi)) continue;

        // left inclusive, right exclusive
        int col_lo = static_cast<int>(std::ceil(x_lo * kImageSize - 0.5));
        int col_hi = static_cast<int>(std::ceil(x_hi * kImageSize - 0.5)) - 1;
        // ceil(x*64 - 0.5) gives the first col with center >= x_lo; the last
        // col must have center strictly < x_hi, so back off exact hits.
        if (col_hi >= 0 && Camera::pixel_center_x(col_hi) >= x_hi) --col_hi;
        if (col_lo < 0) col_lo = 0;
        if (col_hi > kImageSize - 1) col_hi = kImageSize - 1;
        for (int col = col_lo; col <= col_hi; ++col) {
            uint8_t* p = img.at(row, col);
            p[0] = color[0];
            p[1] = color[1];
            p[2] = color[2];
        }
    }
}

namespace {

void fill_goal_marker(Image64& img, const tasks::GoalSpec& goal) {
    const int cc = static_cast<int>(std::floor(goal.g.x * kImageSize));
    const int cr = static_cast<int>(std::floor((1.0 - goal.g.y) * kImageSize));
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            const int r = cr + dr, c = cc + dc;
            if (r < 0 || r >= kImageSize || c < 0 || c >= kImageSize) continue;
            uint8_t* p = img.at(r, c);
            p[0] = kGoalGreen[0];
            p[1] = kGoalGreen[1];
            p[2] = kGoalGreen[2];
        }
    }
}

}  // namespace

Image64 render_frame(const sim::WorldState& world, const tasks::EpisodeConfig& config) {
    Image64 img;
    for (int i = 0; i < kImageSize * kImageSize; ++i) {
        img.px[i * 3 + 0] = config.background_color[0];
        img.px[i * 3 + 1] = config.background_color[1];
        img.px[i * 3 + 2] = config.background_color[2];
    }

    // goal / obstacle / bin markers go behind the bodies
    if (config.task == tasks::TaskId::BinDropping && config.bin) {
        const auto& b = *config.bin;
        for (int side = -1; side <= 1; side += 2) {
            const double hw = 0.5 * b.wall_thickness;
            const Vec2 c{b.center_x + side * (b.inner_half_width + hw),
                         b.floor_top + 0.5 * b.wall_height};
            fill_convex_quad(img, box_corners(c, 0.0, hw, 0.5 * b.wall_height), kGoalGreen);
        }
    } else {
        fill_goal_marker(img, config.goal);
    }
    if (config.obstacle) {
        fill_convex_quad(img,
                         box_corners(config.obstacle->center, 0.0, config.obstacle->half_w,
                                     config.obstacle->half_h),
                         kGoalGreen);
    }

    fill_convex_quad(img,
                     box_corners(world.cart.pos, world.cart.theta, world.cart_shape.half_w,
                                 world.cart_shape.half_h),
                     config.cart_color);
    fill_convex_quad(img,
                     box_corners(world.block.pos, world.block.theta, world.block_shape.half_w,
                                 world.block_shape.half_h),
                     config.block_color);
    return img;
}

namespace {

void append_u32_be(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(static_cast<uint8_t>(x >> 24));
    v.push_back(static_cast<uint8_t>(x >> 16));
    v.push_back(static_cast<uint8_t>(x >> 8));
    v.push_back(static_cast<uint8_t>(x));
}

void append_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& data) {
    append_u32_be(out, static_cast<uint32_t>(data.size()));
    const size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uint32_t crc =
        crc32(0, out.data() + start, static_cast<uInt>(out.size() - start));
    append_u32_be(out, crc);
}

}  // namespace

void write_png(const std::string& path, const uint8_t* rgb, int width, int height) {
    // raw scanlines with filter byte 0
    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(height) * (1 + 3 * width));
    for (int r = 0; r < height; ++r) {
        raw.push_back(0);
        raw.insert(raw.end(), rgb + static_cast<size_t>(r) * width * 3,
                   rgb + static_cast<size_t>(r + 1) * width * 3);
    }
    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw std::runtime_error("png deflate failed");
    comp.resize(comp_len);

    std::vector<uint8_t> out{0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<uint8_t> ihdr;
    append_u32_be(ihdr, static_cast<uint32_t>(width));
    append_u32_be(ihdr, static_cast<uint32_t>(height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // color type RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", comp);
    append_chunk(out, "IEND", {});

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("short write to " + path);
}

void export_frames(const std::vector<tasks::StepRecord>& records, const std::string& dir) {
    if (records.empty()) throw std::runtime_error("export_frames: no records");
    std::filesystem::create_directories(dir);
    char name[64];
    for (size_t i = 0; i < records.size(); ++i) {
        std::snprintf(name, sizeof(name), "/frame_%04zu.png", i);
        write_png(dir + name, records[i].image.data(), kImageSize, kImageSize);
    }
    // contact sheet: up to 12 columns
    const int cols = static_cast<int>(std::min<size_t>(records.size(), 12));
    const int rows = static_cast<int>((records.size() + cols - 1) / cols);
    std::vector<uint8_t> sheet(static_cast<size_t>(rows) * kImageSize * cols * kImageSize * 3, 0);
    const int sheet_w = cols * kImageSize;
    for (size_t i = 0; i < records.size(); ++i) {
        const int tr = static_cast<int>(i) / cols, tc = static_cast<int>(i) % cols;
        for (int r = 0; r < kImageSize; ++r) {
            const uint8_t* src = records[i].image.data() + static_cast<size_t>(r) * kImageSize * 3;
            uint8_t* dst = sheet.data() +
                           ((static_cast<size_t>(tr) * kImageSize + r) * sheet_w +
                            static_cast<size_t>(tc) * kImageSize) * 3;
            std::copy(src, src + kImageSize * 3, dst);
        }
    }
    write_png(dir + "/sheet.png", sheet.data(), sheet_w, rows * kImageSize);
}

}  // namespace dynmap::render
