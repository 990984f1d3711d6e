#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dynmap/sim/types.hpp"

namespace dynmap::tasks {

enum class TaskId : uint8_t { BalanceReaching = 0, BalanceReachingV2 = 1, BinDropping = 2 };

const char* task_name(TaskId id);
TaskId task_from_name(const std::string& name);

using Rgb = std::array<uint8_t, 3>;

struct Range {
    double lo = 0.0, hi = 0.0;
    double sample(double u) const { return lo + (hi - lo) * u; }
    double mid() const { return 0.5 * (lo + hi); }
};

// Workspace is the unit square [0,1] x [0,1] metres.
constexpr double kWorkspace = 1.0;
constexpr double kControlDt = 0.05;  // 20 Hz
constexpr int kDefaultMaxSteps = 120;

// Per-control-step relative action bounds used for [-1,1] normalization.
struct ActionBounds {
    double dx = 0.025;      // m
    double dy = 0.025;      // m
    double dtheta = 0.1;    // rad
};

struct RandomizationSpec {
    Range cart_width{0.20, 0.32};
    Range block_height{0.10, 0.18};
    Range cart_x{0.20, 0.80};
    Range cart_y{0.30, 0.65};
    Range target_x{0.20, 0.80};
    Range target_y{0.30, 0.65};
    Range block_shift{-0.04, 0.04};  // offset from cart centre
    uint64_t rng_seed = 0;

    // fixed geometry not varied by the paper's randomization
    double cart_height = 0.05;
    double block_width = 0.06;

    // Shrinks every range towards its midpoint; scale=1 is the full spec,
    // scale=0 collapses to the single midpoint configuration.
    RandomizationSpec reduced(double scale) const;
};

struct GoalSpec {
    Vec2 g;                       // metres, inside workspace
    std::array<double, 2> normalized() const;
};

struct ObstacleSpec {
    Vec2 center;
    double half_w = 0.0, half_h = 0.0;
};

struct BinSpec {
    double center_x = 0.5;
    double inner_half_width = 0.075;
    double wall_height = 0.10;
    double wall_thickness = 0.012;
    double floor_top = 0.02;  // y of the workspace floor surface
};

struct EpisodeConfig {
    TaskId task = TaskId::BalanceReaching;
    double cart_width = 0.26;
    double cart_height = 0.05;
    double block_width = 0.06;
    double block_height = 0.14;
    Vec2 cart_start;
    double block_shift = 0.0;
    GoalSpec goal;
    Rgb cart_color{200, 60, 60};
    Rgb block_color{60, 60, 200};
    Rgb background_color{20, 20, 20};
    std::optional<ObstacleSpec> obstacle;  // task 2
    std::optional<BinSpec> bin;            // task 3
    int max_steps = kDefaultMaxSteps;

    std::string digest() const;  // content hash for manifests
};

struct DynamicsState {
    // layout: [cart x, cart y, cart theta, block x, block y, block theta]
    std::array<double, 6> p{};
    std::array<double, 6> v{};
    std::array<double, 6> a{};
};

struct PolicyAction {
    double dx = 0.0, dy = 0.0, dtheta = 0.0;  // metres / radians per control step
};

struct NormStats {
    std::array<double, 6> v_min{}, v_max{};
    std::array<double, 6> a_min{}, a_max{};
    ActionBounds action_bounds;
    // theta normalization range for P (positions use workspace bounds)
    double theta_range = 3.14159265358979323846;
    bool degenerate_warning = false;
    int64_t out_of_range_count = 0;  // mutable bookkeeping, not serialized per-op
};

struct StepRecord {
    std::vector<uint8_t> image;            // 64*64*3, row-major RGB
    DynamicsState dynamics;
    std::array<double, 3> proprio{};       // cart pose x_t
    std::array<double, 3> action_norm{};   // normalized policy action
    std::array<double, 3> abs_command{};   // absolute commanded cart pose
    GoalSpec goal;
    sim::SupportStatus support = sim::SupportStatus::Supported;
};

struct Outcome {
    bool dropped = false;
    std::optional<double> position_error_mm;  // absent for task 3
    bool success = false;
    bool short_episode_warning = false;
};

class ConfigurationError : public std::runtime_error {
  public:
    explicit ConfigurationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dynmap::tasks
