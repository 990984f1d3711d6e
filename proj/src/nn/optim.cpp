#include "dynmap/nn/optim.hpp"

#include <cmath>

namespace dynmap::nn {

void AdamState::step(std::vector<Parameter*> params) {
    ++t_;
    const float bc1 = 1.0f - std::pow(cfg_.beta1, static_cast<float>(t_));
    const float bc2 = 1.0f - std::pow(cfg_.beta2, static_cast<float>(t_));
    for (Parameter* p : params) {
        auto mit = m_.find(p->name);
        if (mit == m_.end()) {
            mit = m_.emplace(p->name, Tensor(p->value.shape)).first;
            v_.emplace(p->name, Tensor(p->value.shape));
        }
        Tensor& m = mit->second;
        Tensor& v = v_.at(p->name);
        if (m.numel() != p->value.numel()) throw NnError("adam: moment shape mismatch for " + p->name);
        for (int i = 0; i < p->value.numel(); ++i) {
            const float gi = p->grad[i];
            m[i] = cfg_.beta1 * m[i] + (1.0f - cfg_.beta1) * gi;
            v[i] = cfg_.beta2 * v[i] + (1.0f - cfg_.beta2) * gi * gi;
            const float mhat = m[i] / bc1;
            const float vhat = v[i] / bc2;
            p->value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
        p->zero_grad();
    }
}

Tensor kaiming_uniform(std::vector<int> shape, int fan_in, Rng& rng) {
    Tensor t(std::move(shape));
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : t.v) v = static_cast<float>(rng.uniform(-bound, bound));
    return t;
}

Tensor lstm_weight(std::vector<int> shape, int fan_in, Rng& rng) {
    Tensor t(std::move(shape));
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : t.v) v = static_cast<float>(rng.uniform(-bound, bound));
    return t;
}

Tensor lstm_bias(int hidden, float forget_bias) {
    Tensor t({4 * hidden});
    for (int i = hidden; i < 2 * hidden; ++i) t[i] = forget_bias;
    return t;
}

}  // namespace dynmap::nn
