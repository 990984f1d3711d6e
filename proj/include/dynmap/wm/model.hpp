#pragma once

#include <optional>
#include <string>

#include "dynmap/nn/optim.hpp"
#include "dynmap/nn/tape.hpp"
#include "dynmap/render/render.hpp"

namespace dynmap::wm {

enum class PolicyVariant : uint8_t { Feedforward = 0, Recurrent = 1 };

struct ModelConfig {
    int z_dim = 64;
    int hidden = 256;                                // transition LSTM width
    std::vector<int> enc_channels = {32, 64, 128, 256};  // stride-2 conv chain
    int dyn_trunk = 256;
    int policy_hidden = 256;
    PolicyVariant policy = PolicyVariant::Feedforward;

    int enc_spatial() const {  // spatial side after the conv chain
        int s = render::kImageSize;
        for (size_t i = 0; i < enc_channels.size(); ++i) s /= 2;
        return s;
    }
    std::string to_json() const;
    static ModelConfig from_json(const std::string& json);
};

// Converts a rendered frame to the [-1,1]-normalized [3,64,64] tensor.
nn::Tensor image_to_tensor(const render::Image64& img);
nn::Tensor image_bytes_to_tensor(const uint8_t* rgb);

// Latent state flowing through the transition model.
struct LatentIds {
    nn::Tape::Id z = -1;  // z_hat from the transition (or encoder output)
    nn::Tape::Id h1 = -1, c1 = -1, h2 = -1, c2 = -1;
};

struct PolicyStateIds {
    nn::Tape::Id h1 = -1, c1 = -1, h2 = -1, c2 = -1;
};

// Encoder phi1, transition phi2, decoders zeta1..4, policy theta.
class WorldModel {
  public:
    WorldModel(ModelConfig cfg, uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    nn::ParamSet& params() { return params_; }
    const nn::ParamSet& params() const { return params_; }

    std::vector<nn::Parameter*> group(const std::string& prefix);  // "phi", "zeta", ...
    std::vector<nn::Parameter*> world_model_params();              // phi + zeta
    std::vector<nn::Parameter*> policy_params();                   // theta

    nn::Tape::Id encode(nn::Tape& t, const nn::Tensor& image);
    nn::Tape::Id encode_id(nn::Tape& t, nn::Tape::Id image);

    // zero-initialized latent/hidden state at episode start
    LatentIds initial_state(nn::Tape& t);
    PolicyStateIds initial_policy_state(nn::Tape& t);

    // (z_t, a_t, h_t) -> (z_hat_{t+1}, h_{t+1})
    LatentIds transition(nn::Tape& t, nn::Tape::Id z, nn::Tape::Id action, const LatentIds& prev);

    nn::Tape::Id decode_rgb(nn::Tape& t, const LatentIds& s);
    struct DynIds {
        nn::Tape::Id p, v, a;
    };
    DynIds decode_dynamics(nn::Tape& t, const LatentIds& s);

    nn::Tape::Id policy_feedforward(nn::Tape& t, nn::Tape::Id z, const LatentIds& h,
                                    const nn::Tensor& goal);
    std::pair<nn::Tape::Id, PolicyStateIds> policy_recurrent(nn::Tape& t, nn::Tape::Id z,
                                                             const nn::Tensor& goal,
                                                             const LatentIds& h,
                                                             const PolicyStateIds& ps);

    void save(const std::string& path) const;
    static WorldModel load(const std::string& path);

  private:
    void build_params(uint64_t seed);

    ModelConfig cfg_;
    nn::ParamSet params_;
};

}  // namespace dynmap::wm
