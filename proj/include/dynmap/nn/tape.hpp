#pragma once

#include <functional>
#include <unordered_map>

#include "dynmap/nn/tensor.hpp"

namespace dynmap::nn {

// Reverse-mode tape. Ops append their value and a backward closure; the
// trainer owns the tape and calls backward(loss) once per window. Every
// op validates shapes and raises NnError on non-finite outputs instead
// of propagating NaNs.
class Tape {
  public:
    using Id = int;

    Id input(Tensor t);            // leaf with gradient tracked but unused
    Id param(Parameter& p);        // leaf whose gradient flows to p.grad

    const Tensor& val(Id id) const { return slots_[static_cast<size_t>(id)].value; }
    const Tensor& grad(Id id) const { return slots_[static_cast<size_t>(id)].grad; }

    // Double-precision reading of a scalar slot. Reductions record their
    // sums in double before rounding to float32, and add/scale propagate
    // them; finite-difference checks need this extra headroom because the
    // float32 loss granularity (eps·|L|) rivals h·gradient for large L.
    double dval(Id id) const;

    // seeds d(loss)=1 and runs all recorded closures in reverse, then
    // accumulates leaf gradients into their Parameters
    void backward(Id loss);

    // ---- ops ----
    Id dense(Id x, Id w, Id b);                         // y = W x + b (x flattened)
    Id conv2d(Id x, Id k, Id b, int stride, int pad);   // x [Ci,H,W], k [Co,Ci,kh,kw]
    Id deconv2d(Id x, Id k, Id b, int stride, int pad); // adjoint of conv2d w.r.t. x
    // gates packed [i,f,g,o]; returns (h', c')
    std::pair<Id, Id> lstm_cell(Id x, Id h, Id c, Id wx, Id wh, Id b);
    Id tanh_(Id x);
    Id sigmoid_(Id x);
    Id relu(Id x);
    Id concat(const std::vector<Id>& xs);               // flat concat
    Id reshape(Id x, std::vector<int> shape);           // same numel, new shape
    Id mul(Id a, Id b);                                 // elementwise
    Id exp_(Id x);
    Id sum_elems(Id x);                                 // scalar sum
    Id add(Id a, Id b);
    Id scale(Id a, float s);
    Id sum_sq_diff(Id a, Id b);                         // scalar, grads to both
    Id sum_abs_diff(Id a, Id b);                        // scalar, L1 subgradient(0)=0
    Id sum_sq_diff_const(Id a, const Tensor& target);
    Id sum_abs_diff_const(Id a, const Tensor& target);

    size_t size() const { return slots_.size(); }

  private:
    struct Slot {
        Tensor value;
        Tensor grad;
        Parameter* psrc = nullptr;
        double scalar_d = 0.0;
        bool has_scalar_d = false;
    };

    Id push(Tensor value, const char* op);
    Id push_scalar(double v, const char* op);
    Tensor& g(Id id) { return slots_[static_cast<size_t>(id)].grad; }

    std::vector<Slot> slots_;
    std::vector<std::function<void()>> backfns_;
    std::unordered_map<const Parameter*, Id> param_ids_;
};

// Stand-alone losses matching the spec conventions: mean over batch
// entries, sum over feature dims.
float loss_l1(const Tensor& pred, const Tensor& target);
float loss_l2(const Tensor& pred, const Tensor& target);

}  // namespace dynmap::nn
