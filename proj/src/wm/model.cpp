#include "dynmap/wm/model.hpp"

#include <json.hpp>

#include "dynmap/nn/checkpoint.hpp"

namespace dynmap::wm {

using nn::Tape;
using nn::Tensor;

std::string ModelConfig::to_json() const {
    nlohmann::json j;
    j["z_dim"] = z_dim;
    j["hidden"] = hidden;
    j["enc_channels"] = enc_channels;
    j["dyn_trunk"] = dyn_trunk;
    j["policy_hidden"] = policy_hidden;
    j["policy"] = policy == PolicyVariant::Recurrent ? "recurrent" : "feedforward";
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& json) {
    const auto j = nlohmann::json::parse(json);
    ModelConfig c;
    c.z_dim = j.value("z_dim", c.z_dim);
    c.hidden = j.value("hidden", c.hidden);
    if (j.contains("enc_channels")) c.enc_channels = j["enc_channels"].get<std::vector<int>>();
    c.dyn_trunk = j.value("dyn_trunk", c.dyn_trunk);
    c.policy_hidden = j.value("policy_hidden", c.policy_hidden);
    c.policy = j.value("policy", "feedforward") == std::string("recurrent")
                   ? PolicyVariant::Recurrent
                   : PolicyVariant::Feedforward;
    return c;
}

Tensor image_bytes_to_tensor(const uint8_t* rgb) {
    constexpr int hw = render::kImageSize * render::kImageSize;
    Tensor t({3, render::kImageSize, render::kImageSize});
    for (int i = 0; i < hw; ++i) {
        for (int c = 0; c < 3; ++c) {
            t[c * hw + i] = static_cast<float>(rgb[i * 3 + c]) / 127.5f - 1.0f;
        }
    }
    return t;
}

Tensor image_to_tensor(const render::Image64& img) { return image_bytes_to_tensor(img.px.data()); }

WorldModel::WorldModel(ModelConfig cfg, uint64_t seed) : cfg_(std::move(cfg)) {
    build_params(seed);
}

void WorldModel::build_params(uint64_t seed) {
    Rng rng(seed);
    const int z = cfg_.z_dim;
    const int hd = cfg_.hidden;
    const int s = cfg_.enc_spatial();
    const auto& ch = cfg_.enc_channels;
    const int feat = ch.back() * s * s;

    // encoder phi1: stride-2 4x4 convs, relu, then dense to z
    int cin = 3;
    for (size_t i = 0; i < ch.size(); ++i) {
        const int fan_in = cin * 16;
        params_.add("phi1/conv" + std::to_string(i) + "/w",
                    nn::kaiming_uniform({ch[i], cin, 4, 4}, fan_in, rng));
        params_.add("phi1/conv" + std::to_string(i) + "/b", Tensor({ch[i]}));
        cin = ch[i];
    }
    params_.add("phi1/fc/w", nn::kaiming_uniform({z, feat}, feat, rng));
    params_.add("phi1/fc/b", Tensor({z}));

    // transition phi2: (z ++ a) proj -> lstm1 -> lstm2 -> z head
    params_.add("phi2/proj/w", nn::kaiming_uniform({hd, z + 3}, z + 3, rng));
    params_.add("phi2/proj/b", Tensor({hd}));
    params_.add("phi2/lstm1/wx", nn::lstm_weight({4 * hd, hd}, hd, rng));
    params_.add("phi2/lstm1/wh", nn::lstm_weight({4 * hd, hd}, hd, rng));
    params_.add("phi2/lstm1/b", nn::lstm_bias(hd));
    params_.add("phi2/lstm2/wx", nn::lstm_weight({4 * hd, hd}, hd, rng));
    params_.add("phi2/lstm2/wh", nn::lstm_weight({4 * hd, hd}, hd, rng));
    params_.add("phi2/lstm2/b", nn::lstm_bias(hd));
    params_.add("phi2/zhead/w", nn::kaiming_uniform({z, hd}, hd, rng));
    params_.add("phi2/zhead/b", Tensor({z}));

    // rgb decoder zeta1: dense to [C,s,s], then mirrored stride-2 deconvs
    const int dec_in = z + 2 * hd;
    params_.add("zeta1/fc/w", nn::kaiming_uniform({feat, dec_in}, dec_in, rng));
    params_.add("zeta1/fc/b", Tensor({feat}));
    for (size_t i = 0; i < ch.size(); ++i) {
        // deconv kernels are indexed [Cin(of deconv input), Cout, kh, kw]
        const int from = ch[ch.size() - 1 - i];
        const int to = i + 1 < ch.size() ? ch[ch.size() - 2 - i] : 3;
        params_.add("zeta1/deconv" + std::to_string(i) + "/w",
                    nn::kaiming_uniform({from, to, 4, 4}, from * 16, rng));
        params_.add("zeta1/deconv" + std::to_string(i) + "/b", Tensor({to}));
    }

    // dynamics decoders: shared 2-layer trunk (zeta2..4 heads)
    const int tr = cfg_.dyn_trunk;
    params_.add("zeta_trunk/fc0/w", nn::kaiming_uniform({tr, dec_in}, dec_in, rng));
    params_.add("zeta_trunk/fc0/b", Tensor({tr}));
    params_.add("zeta_trunk/fc1/w", nn::kaiming_uniform({tr, tr}, tr, rng));
    params_.add("zeta_trunk/fc1/b", Tensor({tr}));
    params_.add("zeta2/head_p/w", nn::kaiming_uniform({6, tr}, tr, rng));
    params_.add("zeta2/head_p/b", Tensor({6}));
    params_.add("zeta3/head_v/w", nn::kaiming_uniform({6, tr}, tr, rng));
    params_.add("zeta3/head_v/b", Tensor({6}));
    params_.add("zeta4/head_a/w", nn::kaiming_uniform({6, tr}, tr, rng));
    params_.add("zeta4/head_a/b", Tensor({6}));

    // policy theta
    const int ph = cfg_.policy_hidden;
    const int pin = z + 2 * hd + 2;
    if (cfg_.policy == PolicyVariant::Feedforward) {
        params_.add("theta/fc0/w", nn::kaiming_uniform({ph, pin}, pin, rng));
        params_.add("theta/fc0/b", Tensor({ph}));
        params_.add("theta/fc1/w", nn::kaiming_uniform({ph, ph}, ph, rng));
        params_.add("theta/fc1/b", Tensor({ph}));
        params_.add("theta/out/w", nn::kaiming_uniform({3, ph}, ph, rng));
        params_.add("theta/out/b", Tensor({3}));
    } else {
        params_.add("theta/proj/w", nn::kaiming_uniform({ph, pin}, pin, rng));
        params_.add("theta/proj/b", Tensor({ph}));
        params_.add("theta/lstm1/wx", nn::lstm_weight({4 * ph, ph}, ph, rng));
        params_.add("theta/lstm1/wh", nn::lstm_weight({4 * ph, ph}, ph, rng));
        params_.add("theta/lstm1/b", nn::lstm_bias(ph));
        params_.add("theta/lstm2/wx", nn::lstm_weight({4 * ph, ph}, ph, rng));
        params_.add("theta/lstm2/wh", nn::lstm_weight({4 * ph, ph}, ph, rng));
        params_.add("theta/lstm2/b", nn::lstm_bias(ph));
        params_.add("theta/out/w", nn::kaiming_uniform({3, ph}, ph, rng));
        params_.add("theta/out/b", Tensor({3}));
    }
}

std::vector<nn::Parameter*> WorldModel::group(const std::string& prefix) {
    std::vector<nn::Parameter*> out;
    for (nn::Parameter* p : params_.all())
        if (p->name.rfind(prefix, 0) == 0) out.push_back(p);
    return out;
}

std::vector<nn::Parameter*> WorldModel::world_model_params() {
    std::vector<nn::Parameter*> out;
    for (nn::Parameter* p : params_.all())
        if (p->name.rfind("phi", 0) == 0 || p->name.rfind("zeta", 0) == 0) out.push_back(p);
    return out;
}

std::vector<nn::Parameter*> WorldModel::policy_params() { return group("theta"); }

Tape::Id WorldModel::encode_id(Tape& t, Tape::Id image) {
    Tape::Id x = image;
    for (size_t i = 0; i < cfg_.enc_channels.size(); ++i) {
        const std::string base = "phi1/conv" + std::to_string(i);
        x = t.conv2d(x, t.param(params_.at(base + "/w")), t.param(params_.at(base + "/b")), 2, 1);
        x = t.relu(x);
    }
    return t.dense(x, t.param(params_.at("phi1/fc/w")), t.param(params_.at("phi1/fc/b")));
}

Tape::Id WorldModel::encode(Tape& t, const Tensor& image) {
    return encode_id(t, t.input(image));
}

LatentIds WorldModel::initial_state(Tape& t) {
    LatentIds s;
    const Tensor zero_h({cfg_.hidden});
    s.z = t.input(Tensor({cfg_.z_dim}));
    s.h1 = t.input(zero_h);
    s.c1 = t.input(zero_h);
    s.h2 = t.input(zero_h);
    s.c2 = t.input(zero_h);
    return s;
}

PolicyStateIds WorldModel::initial_policy_state(Tape& t) {
    PolicyStateIds s;
    const Tensor zero({cfg_.policy_hidden});
    s.h1 = t.input(zero);
    s.c1 = t.input(zero);
    s.h2 = t.input(zero);
    s.c2 = t.input(zero);
    return s;
}

LatentIds WorldModel::transition(Tape& t, Tape::Id z, Tape::Id action, const LatentIds& prev) {
    const Tape::Id in = t.concat({z, action});
    const Tape::Id proj =
        t.dense(in, t.param(params_.at("phi2/proj/w")), t.param(params_.at("phi2/proj/b")));
    auto [h1, c1] = t.lstm_cell(proj, prev.h1, prev.c1, t.param(params_.at("phi2/lstm1/wx")),
                                t.param(params_.at("phi2/lstm1/wh")),
                                t.param(params_.at("phi2/lstm1/b")));
    auto [h2, c2] = t.lstm_cell(h1, prev.h2, prev.c2, t.param(params_.at("phi2/lstm2/wx")),
                                t.param(params_.at("phi2/lstm2/wh")),
                                t.param(params_.at("phi2/lstm2/b")));
    LatentIds next;
    next.z = t.dense(h2, t.param(params_.at("phi2/zhead/w")), t.param(params_.at("phi2/zhead/b")));
    next.h1 = h1;
    next.c1 = c1;
    next.h2 = h2;
    next.c2 = c2;
    return next;
}

Tape::Id WorldModel::decode_rgb(Tape& t, const LatentIds& s) {
    const int side = cfg_.enc_spatial();
    Tape::Id x = t.concat({s.z, s.h1, s.h2});
    x = t.dense(x, t.param(params_.at("zeta1/fc/w")), t.param(params_.at("zeta1/fc/b")));
    x = t.relu(x);
    x = t.reshape(x, {cfg_.enc_channels.back(), side, side});
    for (size_t i = 0; i < cfg_.enc_channels.size(); ++i) {
        const std::string base = "zeta1/deconv" + std::to_string(i);
        x = t.deconv2d(x, t.param(params_.at(base + "/w")), t.param(params_.at(base + "/b")), 2, 1);
        if (i + 1 < cfg_.enc_channels.size()) x = t.relu(x);
    }
    return t.tanh_(x);
}

WorldModel::DynIds WorldModel::decode_dynamics(Tape& t, const LatentIds& s) {
    Tape::Id x = t.concat({s.z, s.h1, s.h2});
    x = t.relu(t.dense(x, t.param(params_.at("zeta_trunk/fc0/w")),
                       t.param(params_.at("zeta_trunk/fc0/b"))));
    x = t.relu(t.dense(x, t.param(params_.at("zeta_trunk/fc1/w")),
                       t.param(params_.at("zeta_trunk/fc1/b"))));
    DynIds out;
    out.p = t.dense(x, t.param(params_.at("zeta2/head_p/w")), t.param(params_.at("zeta2/head_p/b")));
    out.v = t.dense(x, t.param(params_.at("zeta3/head_v/w")), t.param(params_.at("zeta3/head_v/b")));
    out.a = t.dense(x, t.param(params_.at("zeta4/head_a/w")), t.param(params_.at("zeta4/head_a/b")));
    return out;
}

Tape::Id WorldModel::policy_feedforward(Tape& t, Tape::Id z, const LatentIds& h,
                                        const Tensor& goal) {
    Tape::Id x = t.concat({z, h.h1, h.h2, t.input(goal)});
    x = t.relu(t.dense(x, t.param(params_.at("theta/fc0/w")), t.param(params_.at("theta/fc0/b"))));
    x = t.relu(t.dense(x, t.param(params_.at("theta/fc1/w")), t.param(params_.at("theta/fc1/b"))));
    return t.tanh_(
        t.dense(x, t.param(params_.at("theta/out/w")), t.param(params_.at("theta/out/b"))));
}

std::pair<Tape::Id, PolicyStateIds> WorldModel::policy_recurrent(Tape& t, Tape::Id z,
                                                                 const Tensor& goal,
                                                                 const LatentIds& h,
                                                                 const PolicyStateIds& ps) {
    Tape::Id x = t.concat({z, t.input(goal), h.h1, h.h2});
    x = t.dense(x, t.param(params_.at("theta/proj/w")), t.param(params_.at("theta/proj/b")));
    auto [h1, c1] = t.lstm_cell(x, ps.h1, ps.c1, t.param(params_.at("theta/lstm1/wx")),
                                t.param(params_.at("theta/lstm1/wh")),
                                t.param(params_.at("theta/lstm1/b")));
    auto [h2, c2] = t.lstm_cell(h1, ps.h2, ps.c2, t.param(params_.at("theta/lstm2/wx")),
                                t.param(params_.at("theta/lstm2/wh")),
                                t.param(params_.at("theta/lstm2/b")));
    const Tape::Id a = t.tanh_(
        t.dense(h2, t.param(params_.at("theta/out/w")), t.param(params_.at("theta/out/b"))));
    PolicyStateIds next{h1, c1, h2, c2};
    return {a, next};
}

void WorldModel::save(const std::string& path) const {
    nlohmann::json meta;
    meta["arch"] = nlohmann::json::parse(cfg_.to_json());
    nn::save_checkpoint(path, params_.all(), meta.dump());
}

WorldModel WorldModel::load(const std::string& path) {
    const nn::CheckpointData data = nn::load_checkpoint(path);
    const auto meta = nlohmann::json::parse(data.meta_json);
    WorldModel model(ModelConfig::from_json(meta.at("arch").dump()), 0);
    for (const auto& [name, tensor] : data.tensors) {
        nn::Parameter& p = model.params_.at(name);
        if (p.value.shape != tensor.shape)
            throw nn::CorruptCheckpoint("architecture mismatch for " + name);
        p.value = tensor;
        p.zero_grad();
    }
    return model;
}

}  // namespace dynmap::wm
