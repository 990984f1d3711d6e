#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "dynmap/core/rng.hpp"
#include "dynmap/wm/losses.hpp"
#include "dynmap/wm/model.hpp"

using namespace dynmap;
using namespace dynmap::wm;

namespace {

ModelConfig tiny_config(PolicyVariant policy = PolicyVariant::Feedforward) {
    ModelConfig cfg;
    cfg.z_dim = 6;
    cfg.hidden = 8;
    cfg.enc_channels = {2, 2};
    cfg.dyn_trunk = 8;
    cfg.policy_hidden = 8;
    cfg.policy = policy;
    return cfg;
}

render::Image64 random_image(Rng& rng) {
    render::Image64 img;
    for (auto& px : img.px) px = static_cast<uint8_t>(rng.uniform_index(256));
    return img;
}

SeqSample random_sample(Rng& rng, int T) {
    SeqSample s;
    for (int t = 0; t < T; ++t) {
        s.images.push_back(image_to_tensor(random_image(rng)));
        nn::Tensor act({3});
        for (auto& x : act.v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
        s.actions.push_back(act);
        for (auto* vec : {&s.p, &s.v, &s.a}) {
            nn::Tensor d({6});
            for (auto& x : d.v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
            vec->push_back(d);
        }
    }
    s.goal = nn::Tensor({2}, {0.2f, -0.4f});
    return s;
}

}  // namespace

TEST_CASE("image_to_tensor maps bytes to [-1,1] channel planes") {
    render::Image64 img;
    img.px.fill(0);
    img.px[0] = 255;  // R of pixel (0,0)
    img.px[1] = 128;  // G of pixel (0,0)
    const nn::Tensor t = image_to_tensor(img);
    REQUIRE(t.shape == std::vector<int>{3, 64, 64});
    CHECK(t[0] == doctest::Approx(1.0f));                    // R plane first
    CHECK(t[64 * 64] == doctest::Approx(128.0f / 127.5f - 1.0f));
    CHECK(t[2 * 64 * 64] == doctest::Approx(-1.0f));
    CHECK(image_bytes_to_tensor(img.px.data()).v == t.v);
}

TEST_CASE("parameter groups partition the model") {
    WorldModel model(tiny_config(), 1);
    const size_t total = model.params().size();
    const size_t phi = model.group("phi").size();
    const size_t zeta = model.group("zeta").size();
    const size_t theta = model.group("theta").size();
    CHECK(phi + zeta + theta == total);
    CHECK(model.world_model_params().size() == phi + zeta);
    CHECK(model.policy_params().size() == theta);
}

TEST_CASE("encoder output is tanh-bounded and deterministic in the seed") {
    Rng rng(8);
    const render::Image64 img = random_image(rng);
    WorldModel a(tiny_config(), 42);
    WorldModel b(tiny_config(), 42);
    nn::Tape ta, tb;
    const auto za = a.encode(ta, image_to_tensor(img));
    const auto zb = b.encode(tb, image_to_tensor(img));
    REQUIRE(ta.val(za).numel() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(ta.val(za)[i] > -1.0f);
        CHECK(ta.val(za)[i] < 1.0f);
        CHECK(ta.val(za)[i] == tb.val(zb)[i]);
    }

    SUBCASE("different seeds give different weights") {
        WorldModel c(tiny_config(), 43);
        nn::Tape tc;
        const auto zc = c.encode(tc, image_to_tensor(img));
        bool differs = false;
        for (int i = 0; i < 6; ++i) differs = differs || tc.val(zc)[i] != ta.val(za)[i];
        CHECK(differs);
    }
}

TEST_CASE("decoders produce the right shapes and ranges") {
    WorldModel model(tiny_config(), 7);
    Rng rng(9);
    nn::Tape t;
    LatentIds s = model.initial_state(t);
    s.z = model.encode(t, image_to_tensor(random_image(rng)));
    const nn::Tensor act({3}, {0.1f, -0.2f, 0.0f});
    const LatentIds next = model.transition(t, s.z, t.input(act), s);

    const auto rgb = model.decode_rgb(t, next);
    CHECK(t.val(rgb).shape == std::vector<int>{3, 64, 64});
    for (float x : t.val(rgb).v) {
        CHECK(x >= -1.0f);
        CHECK(x <= 1.0f);
    }
    const auto dyn = model.decode_dynamics(t, next);
    CHECK(t.val(dyn.p).numel() == 6);
    CHECK(t.val(dyn.v).numel() == 6);
    CHECK(t.val(dyn.a).numel() == 6);
}

TEST_CASE("dynamics heads are independent above the shared trunk") {
    WorldModel model(tiny_config(), 7);
    Rng rng(10);
    const nn::Tensor img = image_to_tensor(random_image(rng));
    auto heads = [&]() {
        nn::Tape t;
        LatentIds s = model.initial_state(t);
        s.z = model.encode(t, img);
        const auto dyn = model.decode_dynamics(t, s);
        return std::array<nn::Tensor, 3>{t.val(dyn.p), t.val(dyn.v), t.val(dyn.a)};
    };
    const auto before = heads();
    model.params().at("zeta3/head_v/b").value[2] += 1.0f;
    const auto after = heads();
    CHECK(after[0].v == before[0].v);  // P untouched
    CHECK(after[1][2] == doctest::Approx(before[1][2] + 1.0f));
    CHECK(after[2].v == before[2].v);  // A untouched
}

TEST_CASE("policy heads emit bounded 3-d actions") {
    Rng rng(11);
    const nn::Tensor goal({2}, {0.5f, 0.5f});

    SUBCASE("feedforward") {
        WorldModel model(tiny_config(PolicyVariant::Feedforward), 3);
        nn::Tape t;
        LatentIds s = model.initial_state(t);
        s.z = model.encode(t, image_to_tensor(random_image(rng)));
        const auto a = model.policy_feedforward(t, s.z, s, goal);
        REQUIRE(t.val(a).numel() == 3);
        for (int i = 0; i < 3; ++i) {
            CHECK(t.val(a)[i] > -1.0f);
            CHECK(t.val(a)[i] < 1.0f);
        }
    }
    SUBCASE("recurrent carries its own hidden state") {
        WorldModel model(tiny_config(PolicyVariant::Recurrent), 3);
        nn::Tape t;
        LatentIds s = model.initial_state(t);
        s.z = model.encode(t, image_to_tensor(random_image(rng)));
        PolicyStateIds ps = model.initial_policy_state(t);
        const auto [a1, ps1] = model.policy_recurrent(t, s.z, goal, s, ps);
        const auto [a2, ps2] = model.policy_recurrent(t, s.z, goal, s, ps1);
        REQUIRE(t.val(a1).numel() == 3);
        // state evolves, so repeated observations need not repeat actions
        CHECK(t.val(ps1.h1).numel() == tiny_config().policy_hidden);
        bool state_changed = false;
        for (int i = 0; i < t.val(ps1.h1).numel(); ++i)
            state_changed = state_changed || t.val(ps1.h1)[i] != t.val(ps2.h1)[i];
        CHECK(state_changed);
    }
}

TEST_CASE("window loss bookkeeping is exact") {
    Rng rng(12);
    const SeqSample sample = random_sample(rng, 4);
    LossWeights weights;
    weights.w_p = 0.5f;
    weights.w_v = 1.0f;
    weights.w_a = 0.25f;
    weights.beta_joint = 2.0f;

    for (PolicyVariant variant : {PolicyVariant::Feedforward, PolicyVariant::Recurrent}) {
        WorldModel model(tiny_config(variant), 21);

        SUBCASE(variant == PolicyVariant::Feedforward ? "feedforward" : "recurrent") {
            SUBCASE("world-model objective: total = rgb + latent + dynamics") {
                nn::Tape t;
                const BuiltLoss built =
                    build_window_loss(model, t, sample, weights, Objective::WorldModel);
                const double expect = static_cast<double>(built.values.rgb) +
                                      built.values.latent + built.values.dynamics;
                CHECK(built.values.total ==
                      doctest::Approx(expect).epsilon(1e-6));
                CHECK(built.values.total == doctest::Approx(t.val(built.loss_id)[0]));
                CHECK(built.values.rgb > 0.0f);
            }
            SUBCASE("joint objective adds beta_joint * policy") {
                nn::Tape t;
                const BuiltLoss built =
                    build_window_loss(model, t, sample, weights, Objective::Joint);
                const double expect = static_cast<double>(built.values.rgb) +
                                      built.values.latent + built.values.dynamics +
                                      2.0 * built.values.policy;
                CHECK(built.values.total == doctest::Approx(expect).epsilon(1e-6));
                CHECK(built.values.policy > 0.0f);
            }
            SUBCASE("e2e objective is the policy term alone") {
                nn::Tape t;
                const BuiltLoss built = build_window_loss(model, t, sample, weights, Objective::E2E);
                CHECK(built.values.total == doctest::Approx(built.values.policy).epsilon(1e-6));
                CHECK(built.values.rgb == 0.0f);
                CHECK(built.values.dynamics == 0.0f);
            }
            SUBCASE("zero dynamics weights drop the dynamics term") {
                nn::Tape t;
                const BuiltLoss built =
                    build_window_loss(model, t, sample, LossWeights{}, Objective::WorldModel);
                CHECK(built.values.dynamics == 0.0f);
            }
        }
    }
}

TEST_CASE("objective gradient masking") {
    Rng rng(13);
    const SeqSample sample = random_sample(rng, 3);
    LossWeights weights;
    weights.w_v = 1.0f;

    auto grads_nonzero = [](const std::vector<nn::Parameter*>& ps) {
        for (const auto* p : ps)
            for (float g : p->grad.v)
                if (g != 0.0f) return true;
        return false;
    };

    SUBCASE("world-model objective leaves policy grads bit-zero") {
        WorldModel model(tiny_config(), 31);
        nn::Tape t;
        const BuiltLoss built = build_window_loss(model, t, sample, weights, Objective::WorldModel);
        t.backward(built.loss_id);
        CHECK(grads_nonzero(model.world_model_params()));
        CHECK_FALSE(grads_nonzero(model.policy_params()));
    }
    SUBCASE("e2e objective leaves decoder grads bit-zero but trains phi and theta") {
        WorldModel model(tiny_config(), 31);
        nn::Tape t;
        const BuiltLoss built = build_window_loss(model, t, sample, weights, Objective::E2E);
        t.backward(built.loss_id);
        CHECK(grads_nonzero(model.group("phi")));
        CHECK(grads_nonzero(model.policy_params()));
        CHECK_FALSE(grads_nonzero(model.group("zeta")));
    }
    SUBCASE("joint objective trains everything") {
        WorldModel model(tiny_config(), 31);
        nn::Tape t;
        const BuiltLoss built = build_window_loss(model, t, sample, weights, Objective::Joint);
        t.backward(built.loss_id);
        CHECK(grads_nonzero(model.group("phi")));
        CHECK(grads_nonzero(model.group("zeta")));
        CHECK(grads_nonzero(model.policy_params()));
    }
}

TEST_CASE("decoupled policy training on precomputed latents") {
    Rng rng(14);
    const SeqSample sample = random_sample(rng, 4);
    WorldModel model(tiny_config(), 5);

    const LatentSeq latents = precompute_latents(model, sample);
    REQUIRE(latents.z.size() == 4);
    REQUIRE(latents.h1.size() == 4);

    SUBCASE("latents are deterministic") {
        const LatentSeq again = precompute_latents(model, sample);
        for (size_t i = 0; i < latents.z.size(); ++i) CHECK(latents.z[i].v == again.z[i].v);
    }
    SUBCASE("policy loss trains theta only") {
        nn::Tape t;
        const BuiltLoss built = build_policy_loss_on_latents(model, t, latents, sample);
        CHECK(built.values.policy > 0.0f);
        CHECK(built.values.total == doctest::Approx(built.values.policy));
        t.backward(built.loss_id);
        bool theta_grads = false;
        for (const auto* p : model.policy_params())
            for (float g : p->grad.v) theta_grads = theta_grads || g != 0.0f;
        CHECK(theta_grads);
        for (const auto* p : model.world_model_params())
            for (float g : p->grad.v) CHECK(g == 0.0f);
    }
}

TEST_CASE("model save/load round-trip") {
    const std::string path = "wm_probe.dmck";
    WorldModel model(tiny_config(PolicyVariant::Recurrent), 77);
    model.save(path);
    WorldModel loaded = WorldModel::load(path);
    CHECK(loaded.config().z_dim == 6);
    CHECK(loaded.config().policy == PolicyVariant::Recurrent);
    CHECK(loaded.params().size() == model.params().size());
    for (const auto* p : model.params().all())
        CHECK(loaded.params().at(p->name).value.v == p->value.v);
    std::remove(path.c_str());
}

TEST_CASE("model config json round-trip") {
    ModelConfig cfg = tiny_config(PolicyVariant::Recurrent);
    const ModelConfig back = ModelConfig::from_json(cfg.to_json());
    CHECK(back.z_dim == cfg.z_dim);
    CHECK(back.hidden == cfg.hidden);
    CHECK(back.enc_channels == cfg.enc_channels);
    CHECK(back.policy == cfg.policy);
    CHECK(cfg.enc_spatial() == 16);  // 64 / 2 / 2
}
