// Acceptance gate. Prints one PASS/FAIL line per criterion; exit code is
// the number of failures. Criteria 1-13 are deterministic oracles;
// 14-17 are desk-scale training reproductions evaluated as medians over
// three seeds on the pinned eval split.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "dynmap/core/hash.hpp"
#include "dynmap/expert/ppo.hpp"
#include "dynmap/expert/recorder.hpp"
#include "dynmap/harness/cli.hpp"
#include "dynmap/harness/eval.hpp"
#include "dynmap/harness/train.hpp"
#include "dynmap/wm/rollout.hpp"

namespace fs = std::filesystem;
using namespace dynmap;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("%s criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", idx, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool body_bits_equal(const sim::BodyState& a, const sim::BodyState& b) {
    return bits_equal(a.pos.x, b.pos.x) && bits_equal(a.pos.y, b.pos.y) &&
           bits_equal(a.theta, b.theta) && bits_equal(a.vel.x, b.vel.x) &&
           bits_equal(a.vel.y, b.vel.y) && bits_equal(a.omega, b.omega);
}

nn::Tensor randn(std::vector<int> shape, Rng& rng, float scale = 1.0f) {
    nn::Tensor t(std::move(shape));
    for (auto& x : t.v) x = static_cast<float>(rng.gauss()) * scale;
    return t;
}

double median3(std::array<double, 3> v) {
    std::sort(v.begin(), v.end());
    return v[1];
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---- criteria 1-4: physics and preprocessing oracles ----

void criterion_1() {
    const sim::PhysicsParams params;
    Rng cmd_rng(11);
    bool ok = true;
    for (int s = 0; s < 10 && ok; ++s) {
        Rng ep(1000 + s);
        const tasks::EpisodeConfig cfg =
            tasks::sample_episode(tasks::TaskId::BalanceReaching, {}, ep);
        std::vector<sim::AccelCommand> cmds;
        for (int t = 0; t < 120; ++t)
            cmds.push_back({cmd_rng.uniform(-2.0, 2.0), cmd_rng.uniform(-2.0, 2.0),
                            cmd_rng.uniform(-1.0, 1.0)});
        auto run = [&] {
            sim::WorldState w = tasks::make_world(cfg, params);
            for (const auto& c : cmds) sim::control_step(w, c, params);
            return w;
        };
        const sim::WorldState a = run();
        const sim::WorldState b = run();
        ok = body_bits_equal(a.cart, b.cart) && body_bits_equal(a.block, b.block) &&
             a.step_count == b.step_count;
    }
    report(1, "physics determinism (10 sequences, bit-identical reruns)", ok);
}

void criterion_2() {
    const sim::PhysicsParams params;
    tasks::EpisodeConfig cfg;
    cfg.cart_start = {0.5, 0.45};
    cfg.goal.g = {0.5, 0.45};
    sim::WorldState w = tasks::make_world(cfg, params);
    const Vec2 com0 = w.block.pos;
    double max_pen = 0.0;
    for (int t = 0; t < 120; ++t) {  // 6 s
        sim::control_step(w, {}, params);
        max_pen = std::max(max_pen, sim::max_penetration(w));
    }
    const double disp = (w.block.pos - com0).norm();
    report(2, "static equilibrium (6 s)", disp < 1e-3 && max_pen < 1e-3,
           fmt("displacement %.2e m, penetration %.2e m", disp, max_pen));
}

void criterion_3() {
    const sim::PhysicsParams params;
    tasks::EpisodeConfig cfg;
    cfg.cart_start = {0.4, 0.45};
    sim::WorldState w = tasks::make_world(cfg, params);
    const sim::AccelCommand a{0.6, 0.25, 0.3};
    const double T = tasks::kControlDt;
    const Vec2 p0 = w.cart.pos;
    const double th0 = w.cart.theta;
    double worst = 0.0;
    for (int n = 1; n <= 20; ++n) {  // 1 s
        sim::control_step(w, a, params);
        // v += a*T at period start => x_N = x0 + a*T^2*N(N+1)/2 from rest
        const double k = T * T * n * (n + 1) / 2.0;
        worst = std::max({worst, std::fabs(w.cart.pos.x - (p0.x + a.ax * k)),
                          std::fabs(w.cart.pos.y - (p0.y + a.ay * k)),
                          std::fabs(w.cart.theta - (th0 + a.alpha * k))});
    }
    report(3, "kinematic-cart closed form over 1 s", worst < 1e-6, fmt("max error %.2e m", worst));
}

void criterion_4() {
    const sim::PhysicsParams params;
    const double T = tasks::kControlDt;
    Rng rng(17);
    double worst = 0.0;
    for (int seq = 0; seq < 100; ++seq) {
        tasks::EpisodeConfig cfg;
        cfg.cart_start = {0.5, 0.45};
        sim::WorldState w = tasks::make_world(cfg, params);
        std::array<double, 3> p2{w.cart.pos.x, w.cart.pos.y, w.cart.theta};
        std::array<double, 3> p1 = p2;
        for (int t = 0; t < 60; ++t) {
            // smooth commanded pose via a bounded random acceleration
            const std::array<double, 3> acc{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                                            rng.uniform(-0.6, 0.6)};
            std::array<double, 3> pt;
            for (int i = 0; i < 3; ++i) pt[i] = 2.0 * p1[i] - p2[i] + acc[i] * T * T;
            const sim::AccelCommand cmd = tasks::preprocess_action(pt, p1, p2, T, params);
            sim::control_step(w, cmd, params);
            worst = std::max({worst, std::fabs(w.cart.pos.x - pt[0]),
                              std::fabs(w.cart.pos.y - pt[1]), std::fabs(w.cart.theta - pt[2])});
            p2 = p1;
            p1 = pt;
        }
    }
    report(4, "action preprocessing round-trip (100 sequences)", worst < 1e-6,
           fmt("max pose error %.2e m", worst));
}

// ---- criteria 5-7: differentiation and loss bookkeeping ----

void criterion_5() {
    std::ostringstream log;
    const bool ok = harness::run_gradcheck_suite(log, 5);
    if (!ok) std::fputs(log.str().c_str(), stdout);
    report(5, "gradient checks (layers and composites)", ok);
}

void criterion_6() {
    Rng rng(23);
    double worst = 0.0;
    struct Case {
        int ci, co, h, k, stride, pad;
    };
    std::vector<Case> cases;
    for (int i = 0; i < 18; ++i) {
        const int k = 2 + static_cast<int>(rng.uniform_index(3));
        const int stride = 1 + static_cast<int>(rng.uniform_index(2));
        const int pad = static_cast<int>(rng.uniform_index(2));
        int h = k + static_cast<int>(rng.uniform_index(6));
        h += (stride - ((h + 2 * pad - k) % stride)) % stride;
        cases.push_back({1 + static_cast<int>(rng.uniform_index(3)),
                         1 + static_cast<int>(rng.uniform_index(3)), h, k, stride, pad});
    }
    cases.push_back({3, 8, 64, 4, 2, 1});
    cases.push_back({8, 3, 32, 4, 2, 1});

    for (const auto& c : cases) {
        const int ho = (c.h + 2 * c.pad - c.k) / c.stride + 1;
        if (ho < 1) continue;
        nn::Tape t;
        nn::ParamSet ps;
        nn::Parameter& k = ps.add("k", randn({c.co, c.ci, c.k, c.k}, rng, 0.2f));
        nn::Parameter& b0 = ps.add("b0", nn::Tensor({c.co}));
        nn::Parameter& b1 = ps.add("b1", nn::Tensor({c.ci}));
        const nn::Tensor x = randn({c.ci, c.h, c.h}, rng);
        const nn::Tensor y = randn({c.co, ho, ho}, rng);
        const nn::Tape::Id cx = t.conv2d(t.input(x), t.param(k), t.param(b0), c.stride, c.pad);
        const nn::Tape::Id dy = t.deconv2d(t.input(y), t.param(k), t.param(b1), c.stride, c.pad);
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < y.numel(); ++i) lhs += static_cast<double>(t.val(cx)[i]) * y[i];
        for (int i = 0; i < x.numel(); ++i) rhs += static_cast<double>(x[i]) * t.val(dy)[i];
        worst = std::max(worst, std::fabs(lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), 1.0}));
    }
    report(6, "conv/deconv adjoint identity (20 shapes)", worst < 1e-5, fmt("max rel err %.2e", worst));
}

wm::ModelConfig tiny_model(wm::PolicyVariant policy = wm::PolicyVariant::Feedforward) {
    wm::ModelConfig cfg;
    cfg.z_dim = 6;
    cfg.hidden = 8;
    cfg.enc_channels = {2, 2};
    cfg.dyn_trunk = 8;
    cfg.policy_hidden = 8;
    cfg.policy = policy;
    return cfg;
}

wm::SeqSample random_sample(Rng& rng, int T) {
    wm::SeqSample s;
    for (int t = 0; t < T; ++t) {
        render::Image64 img;
        for (auto& px : img.px) px = static_cast<uint8_t>(rng.uniform_index(256));
        s.images.push_back(wm::image_to_tensor(img));
        nn::Tensor act({3});
        for (auto& x : act.v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
        s.actions.push_back(act);
        for (auto* vec : {&s.p, &s.v, &s.a}) {
            nn::Tensor d({6});
            for (auto& x : d.v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
            vec->push_back(d);
        }
    }
    s.goal = nn::Tensor({2}, {0.3f, -0.2f});
    return s;
}

void criterion_7() {
    Rng rng(31);
    wm::LossWeights weights;
    weights.w_p = 0.5f;
    weights.w_v = 1.0f;
    weights.w_a = 0.25f;
    weights.beta_joint = 2.0f;
    bool sums_ok = true, mask_ok = true;
    for (const auto policy : {wm::PolicyVariant::Feedforward, wm::PolicyVariant::Recurrent}) {
        wm::WorldModel model(tiny_model(policy), 9);
        const wm::SeqSample sample = random_sample(rng, 5);
        for (const auto objective :
             {wm::Objective::WorldModel, wm::Objective::Joint, wm::Objective::E2E}) {
            nn::Tape tape;
            model.params().zero_grads();
            const wm::BuiltLoss built = wm::build_window_loss(model, tape, sample, weights, objective);
            double expected = 0.0;
            switch (objective) {
                case wm::Objective::WorldModel:
                    expected = built.values.rgb + built.values.latent + built.values.dynamics;
                    break;
                case wm::Objective::Joint:
                    expected = built.values.rgb + built.values.latent + built.values.dynamics +
                               weights.beta_joint * built.values.policy;
                    break;
                case wm::Objective::E2E: expected = built.values.policy; break;
            }
            const double total = built.values.total;
            sums_ok = sums_ok && std::fabs(total - expected) <= 1e-6 * std::max(1.0, std::fabs(total));

            tape.backward(built.loss_id);
            auto group_zero = [&](const char* prefix) {
                for (nn::Parameter* p : model.group(prefix))
                    for (float g : p->grad.v)
                        if (g != 0.0f) return false;
                return true;
            };
            if (objective == wm::Objective::WorldModel) mask_ok = mask_ok && group_zero("theta");
            if (objective == wm::Objective::E2E)
                mask_ok = mask_ok && group_zero("zeta") && !group_zero("phi") && !group_zero("theta");
            if (objective == wm::Objective::Joint)
                mask_ok = mask_ok && !group_zero("phi") && !group_zero("zeta") && !group_zero("theta");
        }
    }
    report(7, "loss bookkeeping and gradient masking", sums_ok && mask_ok,
           fmt("sums %s, masks %s", sums_ok ? "ok" : "bad", mask_ok ? "ok" : "bad"));
}

// ---- criteria 8, 11, 12: dataset / expert pipeline ----

std::string record_into(const fs::path& dir, tasks::TaskId task, const tasks::RandomizationSpec& spec,
                        int n_train, int n_eval, uint64_t seed) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    expert::ScriptedExpert scripted;
    expert::RecorderConfig rc;
    rc.out_dir = dir.string();
    rc.n_train = n_train;
    rc.n_eval = n_eval;
    return expert::record_dataset({&scripted}, task, spec, rc, seed).dataset_hash;
}

void criterion_8(const fs::path& work) {
    const fs::path ds = work / "ds_tiny";
    record_into(ds, tasks::TaskId::BalanceReaching, tasks::RandomizationSpec{}.reduced(0.3), 4, 2, 77);

    harness::TrainConfig cfg;
    cfg.regime = harness::Regime::DecoupledWm;
    cfg.model = tiny_model();
    cfg.epochs = 1;
    cfg.window = 16;
    cfg.batch_size = 2;
    cfg.dataset_dir = ds.string();
    cfg.out_checkpoint = (work / "tiny_wm.dmck").string();
    harness::train_decoupled_wm(cfg);
    const std::string hash_before = hash_file_hex(cfg.out_checkpoint);

    harness::TrainConfig pc = cfg;
    pc.regime = harness::Regime::DecoupledPolicy;
    pc.wm_checkpoint = cfg.out_checkpoint;
    pc.out_checkpoint = (work / "tiny_pol.dmck").string();
    const harness::TrainResult res = harness::train_policy_frozen(pc);
    const std::string hash_after = hash_file_hex(cfg.out_checkpoint);

    const bool ok = res.wm_hash_before == res.wm_hash_after && hash_before == hash_after &&
                    res.wm_hash_before == hash_before;
    report(8, "frozen-model contract (checkpoint hash unchanged)", ok,
           fmt("before %s after %s", hash_before.c_str(), hash_after.c_str()));
}

void criterion_9() {
    bool ok = true;

    // 25 successes at exactly 40 mm + 25 drops
    std::vector<tasks::Outcome> fixture;
    for (int i = 0; i < 25; ++i) fixture.push_back({false, 40.0, true, false});
    for (int i = 0; i < 25; ++i) fixture.push_back({true, std::nullopt, false, false});
    const harness::SeedMetrics sm = harness::seed_metrics(fixture);
    ok = ok && sm.dr == 50.0 && sm.sr == 50.0 && std::fabs(sm.pe - 40.0) < 1e-12;

    // threshold cases through episode_outcome
    tasks::EpisodeConfig cfg;
    cfg.goal.g = {0.5, 0.45};
    auto records_at = [&](double offset) {
        std::vector<tasks::StepRecord> recs(cfg.max_steps);
        for (auto& r : recs) {
            r.dynamics.p = {cfg.goal.g.x + offset, cfg.goal.g.y, 0.0, 0.0, 0.0, 0.0};
            r.goal = cfg.goal;
        }
        return recs;
    };
    const tasks::Outcome pass40 = tasks::episode_outcome(records_at(0.040), cfg, false);
    const tasks::Outcome fail60 = tasks::episode_outcome(records_at(0.060), cfg, false);
    const tasks::Outcome drop40 = tasks::episode_outcome(records_at(0.040), cfg, true);
    ok = ok && pass40.success && std::fabs(*pass40.position_error_mm - 40.0) < 1e-9;
    ok = ok && !fail60.success && std::fabs(*fail60.position_error_mm - 60.0) < 1e-9;
    ok = ok && drop40.dropped && !drop40.success;

    // SR + DR + miss-rate identity on a random mix
    Rng rng(3);
    std::vector<tasks::Outcome> mix;
    for (int i = 0; i < 200; ++i) {
        tasks::Outcome o;
        o.dropped = rng.uniform() < 0.3;
        if (!o.dropped) {
            o.position_error_mm = rng.uniform(0.0, 100.0);
            o.success = *o.position_error_mm < 50.0;
        }
        mix.push_back(o);
    }
    const harness::SeedMetrics mm = harness::seed_metrics(mix);
    double miss = 0.0;
    for (const auto& o : mix)
        if (!o.dropped && !o.success) miss += 1.0;
    miss = 100.0 * miss / static_cast<double>(mix.size());
    ok = ok && std::fabs(mm.sr + mm.dr + miss - 100.0) < 1e-9;

    report(9, "metric oracles (40/60 mm thresholds, drop override, SR+DR+miss)", ok);
}

void criterion_10() {
    // camera transform at the workspace corners, 1 pix = 15.625 mm
    bool ok = std::fabs(render::Camera::scale - 0.015625) == 0.0;
    ok = ok && std::fabs(render::Camera::pixel_center_x(0) - 0.0078125) < 1e-12;
    ok = ok && std::fabs(render::Camera::pixel_center_x(63) - 0.9921875) < 1e-12;
    ok = ok && std::fabs(render::Camera::pixel_center_y(0) - 0.9921875) < 1e-12;
    ok = ok && std::fabs(render::Camera::pixel_center_y(63) - 0.0078125) < 1e-12;

    Rng rng(41);
    int bad_pixels = 0;
    for (int scene = 0; scene < 50; ++scene) {
        const int n_quads = 1 + static_cast<int>(rng.uniform_index(4));
        std::vector<std::array<Vec2, 4>> quads;
        std::vector<tasks::Rgb> colors;
        render::Image64 img;
        for (int q = 0; q < n_quads; ++q) {
            const Vec2 c{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
            const auto quad = render::box_corners(c, rng.uniform(-3.1, 3.1),
                                                  rng.uniform(0.02, 0.2), rng.uniform(0.02, 0.2));
            const tasks::Rgb color{static_cast<uint8_t>(40 + 50 * q), 80, 120};
            render::fill_convex_quad(img, quad, color);
            quads.push_back(quad);
            colors.push_back(color);
        }
        for (int row = 0; row < 64; ++row)
            for (int col = 0; col < 64; ++col) {
                tasks::Rgb expect{0, 0, 0};
                for (size_t q = 0; q < quads.size(); ++q)
                    if (render::pixel_covered(quads[q], row, col)) expect = colors[q];
                const uint8_t* px = img.at(row, col);
                if (px[0] != expect[0] || px[1] != expect[1] || px[2] != expect[2]) ++bad_pixels;
            }
    }
    report(10, "renderer coverage vs brute force (50 scenes) and camera transform",
           ok && bad_pixels == 0, fmt("%d mismatched pixels", bad_pixels));
}

void criterion_11(const fs::path& work) {
    const fs::path ds = work / "ds_small";
    record_into(ds, tasks::TaskId::BalanceReaching, tasks::RandomizationSpec{}.reduced(0.4), 6, 2, 909);

    const harness::ValidationReport rep = harness::validate_dataset(ds.string());
    bool ok = rep.ok;

    const harness::DatasetManifest manifest = harness::load_manifest(ds.string());
    // byte round-trip
    {
        const std::string src = (ds / manifest.train_files[0].file).string();
        const std::string dst = (work / "roundtrip.dmtj").string();
        harness::write_trajectory(dst, harness::read_trajectory(src));
        ok = ok && hash_file_hex(src) == hash_file_hex(dst);
    }
    // recorded trajectories satisfy the success predicate, and the stored
    // command stream (the double-difference inverse) reproduces the run
    double worst = 0.0;
    auto check_file = [&](const harness::ManifestEntry& e) {
        const harness::Trajectory t = harness::read_trajectory((ds / e.file).string());
        std::vector<std::array<double, 3>> cmds;
        for (const auto& s : t.steps) cmds.push_back(s.abs_command);
        const wm::InferenceResult replay = wm::replay_commands(t.config, cmds, manifest.norm_stats);
        ok = ok && replay.outcome.success && replay.records.size() == t.steps.size();
        for (size_t i = 0; i < std::min(replay.records.size(), t.steps.size()); ++i)
            for (int d = 0; d < 3; ++d)
                worst = std::max(worst, std::fabs(replay.records[i].dynamics.p[d] -
                                                  t.steps[i].dynamics.p[d]));
    };
    for (const auto& e : manifest.train_files) check_file(e);
    for (const auto& e : manifest.eval_files) check_file(e);
    ok = ok && worst < 1e-5;
    report(11, "dataset integrity (round-trip, success predicate, recorder inverse)", ok,
           fmt("max replay pose error %.2e m", worst));
}

void criterion_12() {
    const tasks::RandomizationSpec spec = tasks::RandomizationSpec{}.reduced(0.5);
    Rng rng(4242);
    int successes = 0;
    for (int ep = 0; ep < 50; ++ep) {
        const tasks::EpisodeConfig cfg =
            tasks::sample_episode(tasks::TaskId::BalanceReaching, spec, rng);
        expert::ScriptedExpert ex;
        ex.reset(cfg);
        wm::EpisodeRunner runner(cfg, {}, {});
        const double t2 = tasks::kControlDt * tasks::kControlDt;
        while (!runner.done()) {
            const sim::AccelCommand a = ex.act(runner.world());
            const auto& p1 = runner.last_command();
            const auto& p2 = runner.prev_command();
            runner.step({2.0 * p1[0] - p2[0] + a.ax * t2, 2.0 * p1[1] - p2[1] + a.ay * t2,
                         2.0 * p1[2] - p2[2] + a.alpha * t2});
        }
        if (runner.outcome().success) ++successes;
    }
    report(12, "scripted-expert smoke (>= 90% SR over 50 episodes)", successes >= 45,
           fmt("%d/50 successes", successes));
}

// ---- criterion 13: PPO progress ----

void criterion_13() {
    const tasks::RandomizationSpec spec = tasks::RandomizationSpec{}.reduced(0.5);
    expert::PPOConfig cfg;
    cfg.hidden = 64;
    cfg.horizon = 2048;
    cfg.minibatch = 256;
    cfg.epochs_per_update = 10;
    cfg.total_steps = 122880;
    cfg.checkpoint_every = 40960;
    cfg.probe_episodes = 10;

    double random_sum = 0.0;
    std::array<double, 3> trained{};
    for (int s = 0; s < 3; ++s) {
        expert::ActorCritic random_net(cfg.hidden, 900 + static_cast<uint64_t>(s));
        random_sum += expert::mean_return(random_net, tasks::TaskId::BalanceReaching, spec, 20,
                                          500 + static_cast<uint64_t>(s), true);
        const expert::PpoResult res =
            expert::ppo_train(tasks::TaskId::BalanceReaching, spec, cfg, 100 + static_cast<uint64_t>(s));
        expert::ActorCritic net(cfg.hidden, 0);
        net.restore(res.checkpoints.back().weights);
        trained[static_cast<size_t>(s)] = expert::mean_return(
            net, tasks::TaskId::BalanceReaching, spec, 20, 500 + static_cast<uint64_t>(s), true);
    }
    const double random_mean = random_sum / 3.0;
    const double med = median3(trained);
    // returns are negative (distance costs): "2x the random baseline"
    // means half the cost, i.e. med >= 0.5 * random_mean
    const bool ok = med >= 0.5 * random_mean;
    report(13, "PPO progress (median of 3 seeds vs random baseline)", ok,
           fmt("trained median %.2f, random mean %.2f", med, random_mean));
}

// ---- criteria 14-17: desk-scale directional reproductions ----

struct DeskScale {
    int wm_epochs = 20;
    int policy_epochs = 40;
    int window = 60;
    int batch = 4;
};

wm::ModelConfig desk_model(wm::PolicyVariant policy = wm::PolicyVariant::Feedforward) {
    wm::ModelConfig cfg;
    cfg.z_dim = 16;
    cfg.hidden = 64;
    cfg.enc_channels = {4, 8};
    cfg.dyn_trunk = 64;
    cfg.policy_hidden = 64;
    cfg.policy = policy;
    return cfg;
}

struct SeedArtifacts {
    std::string pol_rgb_ff, pol_rgb_rec, pol_v_ff, pol_t2;
    double heldout_rgb = 0.0, heldout_v = 0.0;
    std::array<double, 3> mse_all{};
};

SeedArtifacts run_seed(const fs::path& work, const std::string& ds1, const std::string& ds2,
                       const DeskScale& scale, uint64_t seed) {
    SeedArtifacts out;
    auto base = [&](const std::string& tag) {
        harness::TrainConfig cfg;
        cfg.regime = harness::Regime::DecoupledWm;
        cfg.model = desk_model();
        cfg.epochs = scale.wm_epochs;
        cfg.window = scale.window;
        cfg.batch_size = scale.batch;
        cfg.seed = seed;
        cfg.dataset_dir = ds1;
        cfg.out_checkpoint = (work / (tag + "_s" + std::to_string(seed) + ".dmck")).string();
        return cfg;
    };
    auto train_policy = [&](const std::string& wm_ckpt, wm::PolicyVariant pol,
                            const std::string& dataset, const std::string& tag) {
        harness::TrainConfig pc;
        pc.regime = harness::Regime::DecoupledPolicy;
        pc.model = desk_model(pol);
        pc.epochs = scale.policy_epochs;
        pc.window = scale.window;
        pc.batch_size = scale.batch;
        pc.seed = seed;
        pc.dataset_dir = dataset;
        pc.wm_checkpoint = wm_ckpt;
        pc.out_checkpoint = (work / (tag + "_s" + std::to_string(seed) + ".dmck")).string();
        harness::train_policy_frozen(pc);
        return pc.out_checkpoint;
    };

    harness::TrainConfig rgb = base("wm_rgb");
    harness::train_decoupled_wm(rgb);

    harness::TrainConfig v = base("wm_v");
    v.weights.w_v = 1.0f;
    harness::train_decoupled_wm(v);

    harness::TrainConfig all = base("wm_all");
    all.weights.w_p = all.weights.w_v = all.weights.w_a = 1.0f;
    harness::train_decoupled_wm(all);

    out.pol_rgb_ff = train_policy(rgb.out_checkpoint, wm::PolicyVariant::Feedforward, ds1, "pol_rgb_ff");
    out.pol_rgb_rec = train_policy(rgb.out_checkpoint, wm::PolicyVariant::Recurrent, ds1, "pol_rgb_rec");
    out.pol_v_ff = train_policy(v.out_checkpoint, wm::PolicyVariant::Feedforward, ds1, "pol_v_ff");
    out.pol_t2 = train_policy(v.out_checkpoint, wm::PolicyVariant::Feedforward, ds2, "pol_t2");

    {
        wm::WorldModel m = wm::WorldModel::load(out.pol_rgb_ff);
        out.heldout_rgb = harness::evaluate_policy_loss(m, ds1);
    }
    {
        wm::WorldModel m = wm::WorldModel::load(out.pol_v_ff);
        out.heldout_v = harness::evaluate_policy_loss(m, ds1);
    }
    {
        wm::WorldModel m = wm::WorldModel::load(all.out_checkpoint);
        out.mse_all = harness::evaluate_dynamics_mse(m, ds1);
    }
    return out;
}

std::array<double, 3> seed_srs(const std::vector<std::string>& paths, const std::string& ds) {
    const harness::Metrics m = harness::evaluate(paths, ds, 0);
    std::array<double, 3> srs{};
    for (size_t i = 0; i < 3; ++i) srs[i] = m.per_seed.at(i).sr;
    return srs;
}

void criteria_14_to_17(const fs::path& work) {
    const DeskScale scale;
    const fs::path ds1_dir = work / "ds_task1";
    const fs::path ds2_dir = work / "ds_task2";
    record_into(ds1_dir, tasks::TaskId::BalanceReaching, tasks::RandomizationSpec{}.reduced(0.5),
                100, 30, 2025);
    record_into(ds2_dir, tasks::TaskId::BalanceReachingV2, tasks::RandomizationSpec{}.reduced(0.5),
                60, 20, 2026);
    const std::string ds1 = ds1_dir.string();
    const std::string ds2 = ds2_dir.string();

    std::vector<SeedArtifacts> seeds;
    for (uint64_t s = 0; s < 3; ++s) {
        seeds.push_back(run_seed(work, ds1, ds2, scale, s));
        std::printf("  [info] seed %llu trained\n", static_cast<unsigned long long>(s));
        std::fflush(stdout);
    }

    auto med = [&](auto get) {
        return median3({get(seeds[0]), get(seeds[1]), get(seeds[2])});
    };
    const auto sr_rgb_ff = seed_srs({seeds[0].pol_rgb_ff, seeds[1].pol_rgb_ff, seeds[2].pol_rgb_ff}, ds1);
    const auto sr_rgb_rec =
        seed_srs({seeds[0].pol_rgb_rec, seeds[1].pol_rgb_rec, seeds[2].pol_rgb_rec}, ds1);
    const auto sr_v_ff = seed_srs({seeds[0].pol_v_ff, seeds[1].pol_v_ff, seeds[2].pol_v_ff}, ds1);
    const auto sr_t2 = seed_srs({seeds[0].pol_t2, seeds[1].pol_t2, seeds[2].pol_t2}, ds2);

    const double m_sr_rgb = median3(sr_rgb_ff), m_sr_rec = median3(sr_rgb_rec);
    const double m_sr_v = median3(sr_v_ff), m_sr_t2 = median3(sr_t2);
    const double m_hl_rgb = med([](const SeedArtifacts& s) { return s.heldout_rgb; });
    const double m_hl_v = med([](const SeedArtifacts& s) { return s.heldout_v; });
    const double m_p = med([](const SeedArtifacts& s) { return s.mse_all[0]; });
    const double m_v = med([](const SeedArtifacts& s) { return s.mse_all[1]; });
    const double m_a = med([](const SeedArtifacts& s) { return s.mse_all[2]; });

    report(14, "dynamics-informed world model beats Only-RGB (loss and SR)",
           m_hl_v < m_hl_rgb && m_sr_v >= m_sr_rgb + 10.0,
           fmt("heldout loss V %.4f vs RGB %.4f; SR V %.0f vs RGB %.0f", m_hl_v, m_hl_rgb, m_sr_v,
               m_sr_rgb));
    report(15, "recurrent policy beats feedforward (Only-RGB)", m_sr_rec > m_sr_rgb,
           fmt("SR recurrent %.0f vs feedforward %.0f", m_sr_rec, m_sr_rgb));
    report(16, "held-out dynamics MSE ordering P < V < A", m_p < m_v && m_v < m_a,
           fmt("P %.5f V %.5f A %.5f", m_p, m_v, m_a));
    report(17, "frozen task-1 model transfers to task 2 (SR within 20 points)",
           m_sr_t2 >= m_sr_v - 20.0, fmt("task-2 SR %.0f vs task-1 SR %.0f", m_sr_t2, m_sr_v));

    // task-3 transfer is exercised without an ordering requirement: the
    // paper reports limited/ambiguous gains there
    try {
        expert::PPOConfig pcfg;
        pcfg.hidden = 32;
        pcfg.horizon = 512;
        pcfg.minibatch = 128;
        pcfg.epochs_per_update = 4;
        pcfg.total_steps = 2048;
        pcfg.checkpoint_every = 1024;
        pcfg.probe_episodes = 4;
        const expert::PpoResult res = expert::ppo_train(
            tasks::TaskId::BinDropping, tasks::RandomizationSpec{}.reduced(0.3), pcfg, 7);
        expert::PpoExpert ppo_expert(res.checkpoints.back());
        expert::RecorderConfig rc;
        rc.out_dir = (work / "ds_task3").string();
        rc.n_train = 2;
        rc.n_eval = 1;
        rc.min_yield = 0.0;
        rc.yield_window = 200;
        fs::create_directories(rc.out_dir);
        expert::record_dataset({&ppo_expert}, tasks::TaskId::BinDropping,
                               tasks::RandomizationSpec{}.reduced(0.3), rc, 31);
        std::printf("  [info] task-3 transfer leg exercised (PPO expert recorded a dataset)\n");
    } catch (const std::exception& e) {
        std::printf("  [info] task-3 transfer leg exercised; recording did not complete: %s\n",
                    e.what());
    }
}

}  // namespace

int main() {
    const fs::path work = "acceptance_work";
    fs::create_directories(work);

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8(work);
    criterion_9();
    criterion_10();
    criterion_11(work);
    criterion_12();
    criterion_13();
    criteria_14_to_17(work);

    std::printf("%d criteria failed\n", g_failures);
    return g_failures;
}
