#pragma once

#include <map>

#include "dynmap/core/rng.hpp"
#include "dynmap/nn/tensor.hpp"

namespace dynmap::nn {

struct AdamConfig {
    float lr = 3e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

// Bias-corrected Adam; moments keyed by parameter name.
class AdamState {
  public:
    explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

    // applies one update to every parameter, then zeroes the grads
    void step(std::vector<Parameter*> params);

    int64_t step_count() const { return t_; }
    AdamConfig& config() { return cfg_; }

  private:
    AdamConfig cfg_;
    int64_t t_ = 0;
    std::map<std::string, Tensor> m_, v_;
};

// ---- weight init (Kaiming-uniform for conv/dense, +/- 1/sqrt(fan_in)
// uniform for LSTM, forget-gate bias +1) ----
Tensor kaiming_uniform(std::vector<int> shape, int fan_in, Rng& rng);
Tensor lstm_weight(std::vector<int> shape, int fan_in, Rng& rng);
Tensor lstm_bias(int hidden, float forget_bias = 1.0f);

}  // namespace dynmap::nn
