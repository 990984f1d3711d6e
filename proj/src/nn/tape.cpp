#include "dynmap/nn/tape.hpp"

#include <cmath>

namespace dynmap::nn {

Parameter& ParamSet::add(const std::string& name, Tensor init) {
    if (contains(name)) throw NnError("duplicate parameter name: " + name);
    params_.push_back(std::make_unique<Parameter>(name, std::move(init)));
    return *params_.back();
}

Parameter& ParamSet::at(const std::string& name) {
    for (auto& p : params_)
        if (p->name == name) return *p;
    throw NnError("no such parameter: " + name);
}

const Parameter& ParamSet::at(const std::string& name) const {
    for (const auto& p : params_)
        if (p->name == name) return *p;
    throw NnError("no such parameter: " + name);
}

bool ParamSet::contains(const std::string& name) const {
    for (const auto& p : params_)
        if (p->name == name) return true;
    return false;
}

std::vector<Parameter*> ParamSet::all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

std::vector<const Parameter*> ParamSet::all() const {
    std::vector<const Parameter*> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.get());
    return out;
}

void ParamSet::zero_grads() {
    for (auto& p : params_) p->zero_grad();
}

namespace {

void check_finite(const Tensor& t, const char* op) {
    for (float x : t.v)
        if (!std::isfinite(x)) throw NnError(std::string("non-finite value produced by op ") + op);
}

}  // namespace

Tape::Id Tape::push(Tensor value, const char* op) {
    check_finite(value, op);
    Slot s;
    s.grad = Tensor(value.shape);
    s.value = std::move(value);
    slots_.push_back(std::move(s));
    return static_cast<Id>(slots_.size() - 1);
}

Tape::Id Tape::push_scalar(double v, const char* op) {
    const Id id = push(Tensor::scalar(static_cast<float>(v)), op);
    slots_[static_cast<size_t>(id)].scalar_d = v;
    slots_[static_cast<size_t>(id)].has_scalar_d = true;
    return id;
}

double Tape::dval(Id id) const {
    const Slot& s = slots_[static_cast<size_t>(id)];
    if (s.has_scalar_d) return s.scalar_d;
    if (s.value.numel() != 1) throw NnError("dval: slot is not a scalar");
    return static_cast<double>(s.value[0]);
}

Tape::Id Tape::input(Tensor t) { return push(std::move(t), "input"); }

Tape::Id Tape::param(Parameter& p) {
    auto it = param_ids_.find(&p);
    if (it != param_ids_.end()) return it->second;
    const Id id = push(p.value, "param");
    slots_[static_cast<size_t>(id)].psrc = &p;
    param_ids_.emplace(&p, id);
    return id;
}

void Tape::backward(Id loss) {
    auto& lg = g(loss);
    if (lg.numel() != 1) throw NnError("backward: loss must be a scalar");
    lg[0] = 1.0f;
    for (auto it = backfns_.rbegin(); it != backfns_.rend(); ++it) (*it)();
    for (auto& s : slots_) {
        if (!s.psrc) continue;
        for (int i = 0; i < s.grad.numel(); ++i) s.psrc->grad[i] += s.grad[i];
    }
}

Tape::Id Tape::dense(Id x, Id w, Id b) {
    const Tensor& xv = val(x);
    const Tensor& wv = val(w);
    const Tensor& bv = val(b);
    if (wv.shape.size() != 2) throw NnError("dense: W must be 2-D");
    const int m = wv.shape[0], n = wv.shape[1];
    if (xv.numel() != n || bv.numel() != m) throw NnError("dense: shape mismatch");

    Tensor y({m});
    for (int i = 0; i < m; ++i) {
        const float* wr = wv.v.data() + static_cast<size_t>(i) * n;
        double acc = bv[i];
        for (int j = 0; j < n; ++j) acc += static_cast<double>(wr[j]) * xv[j];
        y[i] = static_cast<float>(acc);
    }
    const Id out = push(std::move(y), "dense");
    backfns_.push_back([this, x, w, b, out, m, n] {
        const Tensor& dy = grad(out);
        const Tensor& xv2 = val(x);
        const Tensor& wv2 = val(w);
        Tensor& dx = g(x);
        Tensor& dw = g(w);
        Tensor& db = g(b);
        for (int i = 0; i < m; ++i) {
            const float dyi = dy[i];
            db[i] += dyi;
            const float* wr = wv2.v.data() + static_cast<size_t>(i) * n;
            float* dwr = dw.v.data() + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                dwr[j] += dyi * xv2[j];
                dx[j] += dyi * wr[j];
            }
        }
    });
    return out;
}

Tape::Id Tape::conv2d(Id x, Id k, Id b, int stride, int pad) {
    const Tensor& xv = val(x);
    const Tensor& kv = val(k);
    const Tensor& bv = val(b);
    if (xv.shape.size() != 3 || kv.shape.size() != 4) throw NnError("conv2d: bad ranks");
    const int ci = xv.shape[0], h = xv.shape[1], w = xv.shape[2];
    const int co = kv.shape[0], kci = kv.shape[1], kh = kv.shape[2], kw = kv.shape[3];
    if (kci != ci || bv.numel() != co) throw NnError("conv2d: shape mismatch");
    if ((h + 2 * pad - kh) % stride != 0 || (w + 2 * pad - kw) % stride != 0)
        throw NnError("conv2d: spatial size not divisible by stride");
    const int ho = (h + 2 * pad - kh) / stride + 1;
    const int wo = (w + 2 * pad - kw) / stride + 1;

    Tensor y({co, ho, wo});
    for (int oc = 0; oc < co; ++oc) {
        for (int oy = 0; oy < ho; ++oy) {
            for (int ox = 0; ox < wo; ++ox) {
                double acc = bv[oc];
                for (int ic = 0; ic < ci; ++ic) {
                    const float* xp = xv.v.data() + static_cast<size_t>(ic) * h * w;
                    const float* kp =
                        kv.v.data() + (static_cast<size_t>(oc) * ci + ic) * kh * kw;
                    for (int dy = 0; dy < kh; ++dy) {
                        const int iy = oy * stride + dy - pad;
                        if (iy < 0 || iy >= h) continue;
                        for (int dx = 0; dx < kw; ++dx) {
                            const int ix = ox * stride + dx - pad;
                            if (ix < 0 || ix >= w) continue;
                            acc += static_cast<double>(xp[iy * w + ix]) * kp[dy * kw + dx];
                        }
                    }
                }
                y.v[(static_cast<size_t>(oc) * ho + oy) * wo + ox] = static_cast<float>(acc);
            }
        }
    }
    const Id out = push(std::move(y), "conv2d");
    backfns_.push_back([this, x, k, b, out, stride, pad, ci, h, w, co, kh, kw, ho, wo] {
        const Tensor& dy = grad(out);
        const Tensor& xv2 = val(x);
        const Tensor& kv2 = val(k);
        Tensor& dx = g(x);
        Tensor& dk = g(k);
        Tensor& db = g(b);
        for (int oc = 0; oc < co; ++oc) {
            for (int oy = 0; oy < ho; ++oy) {
                for (int ox = 0; ox < wo; ++ox) {
                    const float gy = dy.v[(static_cast<size_t>(oc) * ho + oy) * wo + ox];
                    if (gy == 0.0f) continue;
                    db[oc] += gy;
                    for (int ic = 0; ic < ci; ++ic) {
                        const float* xp = xv2.v.data() + static_cast<size_t>(ic) * h * w;
                        float* dxp = dx.v.data() + static_cast<size_t>(ic) * h * w;
                        const size_t ko = (static_cast<size_t>(oc) * ci + ic) * kh * kw;
                        const float* kp = kv2.v.data() + ko;
                        float* dkp = dk.v.data() + ko;
                        for (int dyy = 0; dyy < kh; ++dyy) {
                            const int iy = oy * stride + dyy - pad;
                            if (iy < 0 || iy >= h) continue;
                            for (int dxx = 0; dxx < kw; ++dxx) {
                                const int ix = ox * stride + dxx - pad;
                                if (ix < 0 || ix >= w) continue;
                                dkp[dyy * kw + dxx] += gy * xp[iy * w + ix];
                                dxp[iy * w + ix] += gy * kp[dyy * kw + dxx];
                            }
                        }
                    }
                }
            }
        }
    });
    return out;
}

Tape::Id Tape::deconv2d(Id x, Id k, Id b, int stride, int pad) {
    const Tensor& xv = val(x);
    const Tensor& kv = val(k);
    const Tensor& bv = val(b);
    if (xv.shape.size() != 3 || kv.shape.size() != 4) throw NnError("deconv2d: bad ranks");
    const int co = xv.shape[0], ho = xv.shape[1], wo = xv.shape[2];
    const int kco = kv.shape[0], ci = kv.shape[1], kh = kv.shape[2], kw = kv.shape[3];
    if (kco != co || bv.numel() != ci) throw NnError("deconv2d: shape mismatch");
    const int h = (ho - 1) * stride - 2 * pad + kh;
    const int w = (wo - 1) * stride - 2 * pad + kw;
    if (h <= 0 || w <= 0) throw NnError("deconv2d: non-positive output size");

    std::vector<double> acc(static_cast<size_t>(ci) * h * w);
    for (int ic = 0; ic < ci; ++ic) {
        double* yp = acc.data() + static_cast<size_t>(ic) * h * w;
        for (int i = 0; i < h * w; ++i) yp[i] = bv[ic];
    }
    // scatter: exact adjoint of the conv2d gather above (bias aside)
    for (int oc = 0; oc < co; ++oc) {
        for (int oy = 0; oy < ho; ++oy) {
            for (int ox = 0; ox < wo; ++ox) {
                const float xin = xv.v[(static_cast<size_t>(oc) * ho + oy) * wo + ox];
                if (xin == 0.0f) continue;
                for (int ic = 0; ic < ci; ++ic) {
                    double* yp = acc.data() + static_cast<size_t>(ic) * h * w;
                    const float* kp =
                        kv.v.data() + (static_cast<size_t>(oc) * ci + ic) * kh * kw;
                    for (int dy = 0; dy < kh; ++dy) {
                        const int iy = oy * stride + dy - pad;
                        if (iy < 0 || iy >= h) continue;
                        for (int dx = 0; dx < kw; ++dx) {
                            const int ix = ox * stride + dx - pad;
                            if (ix < 0 || ix >= w) continue;
                            yp[iy * w + ix] += static_cast<double>(xin) * kp[dy * kw + dx];
                        }
                    }
                }
            }
        }
    }
    Tensor y({ci, h, w});
    for (size_t i = 0; i < acc.size(); ++i) y.v[i] = static_cast<float>(acc[i]);
    const Id out = push(std::move(y), "deconv2d");
    backfns_.push_back([this, x, k, b, out, stride, pad, ci, h, w, co, kh, kw, ho, wo] {
        const Tensor& dy = grad(out);
        const Tensor& xv2 = val(x);
        const Tensor& kv2 = val(k);
        Tensor& dx = g(x);
        Tensor& dk = g(k);
        Tensor& db = g(b);
        for (int ic = 0; ic < ci; ++ic) {
            const float* dyp = dy.v.data() + static_cast<size_t>(ic) * h * w;
            for (int i = 0; i < h * w; ++i) db[ic] += dyp[i];
        }
        for (int oc = 0; oc < co; ++oc) {
            for (int oy = 0; oy < ho; ++oy) {
                for (int ox = 0; ox < wo; ++ox) {
                    const size_t xi = (static_cast<size_t>(oc) * ho + oy) * wo + ox;
                    float acc = 0.0f;
                    for (int ic = 0; ic < ci; ++ic) {
                        const float* dyp = dy.v.data() + static_cast<size_t>(ic) * h * w;
                        const size_t ko = (static_cast<size_t>(oc) * ci + ic) * kh * kw;
                        const float* kp = kv2.v.data() + ko;
                        float* dkp = dk.v.data() + ko;
                        for (int dyy = 0; dyy < kh; ++dyy) {
                            const int iy = oy * stride + dyy - pad;
                            if (iy < 0 || iy >= h) continue;
                            for (int dxx = 0; dxx < kw; ++dxx) {
                                const int ix = ox * stride + dxx - pad;
                                if (ix < 0 || ix >= w) continue;
                                acc += dyp[iy * w + ix] * kp[dyy * kw + dxx];
                                dkp[dyy * kw + dxx] += dyp[iy * w + ix] * xv2.v[xi];
                            }
                        }
                    }
                    dx.v[xi] += acc;
                }
            }
        }
    });
    return out;
}

std::pair<Tape::Id, Tape::Id> Tape::lstm_cell(Id x, Id h, Id c, Id wx, Id wh, Id b) {
    const Tensor& xv = val(x);
    const Tensor& hv = val(h);
    const Tensor& cv = val(c);
    const Tensor& wxv = val(wx);
    const Tensor& whv = val(wh);
    const Tensor& bv = val(b);
    const int n = xv.numel();
    const int hs = hv.numel();
    if (wxv.shape.size() != 2 || wxv.shape[0] != 4 * hs || wxv.shape[1] != n)
        throw NnError("lstm_cell: Wx shape mismatch");
    if (whv.shape.size() != 2 || whv.shape[0] != 4 * hs || whv.shape[1] != hs)
        throw NnError("lstm_cell: Wh shape mismatch");
    if (bv.numel() != 4 * hs || cv.numel() != hs) throw NnError("lstm_cell: shape mismatch");

    // pre-activations then gates, order [i, f, g, o]
    Tensor z({4 * hs});
    for (int i = 0; i < 4 * hs; ++i) {
        const float* wxr = wxv.v.data() + static_cast<size_t>(i) * n;
        const float* whr = whv.v.data() + static_cast<size_t>(i) * hs;
        double acc = bv[i];
        for (int j = 0; j < n; ++j) acc += static_cast<double>(wxr[j]) * xv[j];
        for (int j = 0; j < hs; ++j) acc += static_cast<double>(whr[j]) * hv[j];
        z[i] = static_cast<float>(acc);
    }
    auto sig = [](float v) { return 1.0f / (1.0f + std::exp(-v)); };
    Tensor gates({4 * hs});
    for (int i = 0; i < hs; ++i) {
        gates[i] = sig(z[i]);
        gates[hs + i] = sig(z[hs + i]);
        gates[2 * hs + i] = std::tanh(z[2 * hs + i]);
        gates[3 * hs + i] = sig(z[3 * hs + i]);
    }
    Tensor c_new({hs}), h_new({hs});
    for (int i = 0; i < hs; ++i) {
        c_new[i] = gates[hs + i] * cv[i] + gates[i] * gates[2 * hs + i];
        h_new[i] = gates[3 * hs + i] * std::tanh(c_new[i]);
    }
    const Id hc_id = push(std::move(h_new), "lstm_cell");
    const Id cc_id = push(std::move(c_new), "lstm_cell");

    auto gates_cache = std::make_shared<Tensor>(std::move(gates));
    backfns_.push_back([this, x, h, c, wx, wh, b, hc_id, cc_id, gates_cache, n, hs] {
        const Tensor& dh_new = grad(hc_id);
        const Tensor& dc_new_in = grad(cc_id);
        const Tensor& cnv = val(cc_id);
        const Tensor& xv2 = val(x);
        const Tensor& hv2 = val(h);
        const Tensor& cv2 = val(c);
        const Tensor& wxv2 = val(wx);
        const Tensor& whv2 = val(wh);
        const Tensor& gt = *gates_cache;

        Tensor dz({4 * hs});
        Tensor& dc_prev = g(c);
        for (int i = 0; i < hs; ++i) {
            const float gi = gt[i], gf = gt[hs + i], gg = gt[2 * hs + i], go = gt[3 * hs + i];
            const float tc = std::tanh(cnv[i]);
            const float dc_tot = dc_new_in[i] + dh_new[i] * go * (1.0f - tc * tc);
            const float d_o = dh_new[i] * tc;
            dc_prev[i] += dc_tot * gf;
            dz[i] = dc_tot * gg * gi * (1.0f - gi);
            dz[hs + i] = dc_tot * cv2[i] * gf * (1.0f - gf);
            dz[2 * hs + i] = dc_tot * gi * (1.0f - gg * gg);
            dz[3 * hs + i] = d_o * go * (1.0f - go);
        }
        Tensor& dx = g(x);
        Tensor& dh = g(h);
        Tensor& dwx = g(wx);
        Tensor& dwh = g(wh);
        Tensor& db = g(b);
        for (int i = 0; i < 4 * hs; ++i) {
            const float d = dz[i];
            if (d == 0.0f) continue;
            db[i] += d;
            const float* wxr = wxv2.v.data() + static_cast<size_t>(i) * n;
            const float* whr = whv2.v.data() + static_cast<size_t>(i) * hs;
            float* dwxr = dwx.v.data() + static_cast<size_t>(i) * n;
            float* dwhr = dwh.v.data() + static_cast<size_t>(i) * hs;
            for (int j = 0; j < n; ++j) {
                dwxr[j] += d * xv2[j];
                dx[j] += d * wxr[j];
            }
            for (int j = 0; j < hs; ++j) {
                dwhr[j] += d * hv2[j];
                dh[j] += d * whr[j];
            }
        }
    });
    return {hc_id, cc_id};
}

Tape::Id Tape::tanh_(Id x) {
    Tensor y = val(x);
    for (auto& v : y.v) v = std::tanh(v);
    const Id out = push(std::move(y), "tanh");
    backfns_.push_back([this, x, out] {
        const Tensor& dy = grad(out);
        const Tensor& yv = val(out);
        Tensor& dx = g(x);
        for (int i = 0; i < dy.numel(); ++i) dx[i] += dy[i] * (1.0f - yv[i] * yv[i]);
    });
    return out;
}

Tape::Id Tape::sigmoid_(Id x) {
    Tensor y = val(x);
    for (auto& v : y.v) v = 1.0f / (1.0f + std::exp(-v));
    const Id out = push(std::move(y), "sigmoid");
    backfns_.push_back([this, x, out] {
        const Tensor& dy = grad(out);
        const Tensor& yv = val(out);
        Tensor& dx = g(x);
        for (int i = 0; i < dy.numel(); ++i) dx[i] += dy[i] * yv[i] * (1.0f - yv[i]);
    });
    return out;
}

Tape::Id Tape::relu(Id x) {
    Tensor y = val(x);
    for (auto& v : y.v) v = v > 0.0f ? v : 0.0f;
    const Id out = push(std::move(y), "relu");
    backfns_.push_back([this, x, out] {
        const Tensor& dy = grad(out);
        const Tensor& xv = val(x);
        Tensor& dx = g(x);
        for (int i = 0; i < dy.numel(); ++i) dx[i] += xv[i] > 0.0f ? dy[i] : 0.0f;
    });
    return out;
}

Tape::Id Tape::concat(const std::vector<Id>& xs) {
    int total = 0;
    for (Id id : xs) total += val(id).numel();
    Tensor y({total});
    int off = 0;
    for (Id id : xs) {
        const Tensor& t = val(id);
        std::copy(t.v.begin(), t.v.end(), y.v.begin() + off);
        off += t.numel();
    }
    const Id out = push(std::move(y), "concat");
    backfns_.push_back([this, xs, out] {
        const Tensor& dy = grad(out);
        int off2 = 0;
        for (Id id : xs) {
            Tensor& dx = g(id);
            for (int i = 0; i < dx.numel(); ++i) dx[i] += dy[off2 + i];
            off2 += dx.numel();
        }
    });
    return out;
}

Tape::Id Tape::reshape(Id x, std::vector<int> shape) {
    Tensor y = val(x);
    if (Tensor::count(shape) != y.numel()) throw NnError("reshape: element count mismatch");
    y.shape = std::move(shape);
    const Id out = push(std::move(y), "reshape");
    backfns_.push_back([this, x, out] {
        const Tensor& dy = grad(out);
        Tensor& dx = g(x);
        for (int i = 0; i < dy.numel(); ++i) dx[i] += dy[i];
    });
    return out;
}

Tape::Id Tape::mul(Id a, Id b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    if (av.numel() != bv.numel()) throw NnError("mul: shape mismatch");
    Tensor y = av;
    for (int i = 0; i < y.numel(); ++i) y[i] *= bv[i];
    const Id out = push(std::move(y), "mul");
    backfns_.push_back([this, a, b, out] {
        const Tensor& dy = grad(out);
        const Tensor& av2 = val(a);
        const Tensor& bv2 = val(b);
        Tensor& da = g(a);
        Tensor& db = g(b);
        for (int i = 0; i < dy.numel(); ++i) {
            da[i] += dy[i] * bv2[i];
            db[i] += dy[i] * av2[i];
        }
    });
    return out;
}

Tape::Id Tape::exp_(Id x) {
    Tensor y = val(x);
    for (auto& v : y.v) v = std::exp(v);
    const Id out = push(std::move(y), "exp");
    backfns_.push_back([this, x, out] {
        const Tensor& dy = grad(out);
        const Tensor& yv = val(out);
        Tensor& dx = g(x);
        for (int i = 0; i < dy.numel(); ++i) dx[i] += dy[i] * yv[i];
    });
    return out;
}

Tape::Id Tape::sum_elems(Id x) {
    const Tensor& xv = val(x);
    double acc = 0.0;
    for (float v : xv.v) acc += v;
    const Id out = push_scalar(acc, "sum_elems");
    backfns_.push_back([this, x, out] {
        const float gy = grad(out)[0];
        Tensor& dx = g(x);
        for (int i = 0; i < dx.numel(); ++i) dx[i] += gy;
    });
    return out;
}

Tape::Id Tape::add(Id a, Id b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    if (av.numel() != bv.numel()) throw NnError("add: shape mismatch");
    const bool sc = av.numel() == 1 && slots_[static_cast<size_t>(a)].has_scalar_d &&
                    slots_[static_cast<size_t>(b)].has_scalar_d;
    Tensor y = av;
    for (int i = 0; i < y.numel(); ++i) y[i] += bv[i];
    const Id out = sc ? push_scalar(dval(a) + dval(b), "add") : push(std::move(y), "add");
    backfns_.push_back([this, a, b, out] {
        const Tensor& dy = grad(out);
        Tensor& da = g(a);
        Tensor& db = g(b);
        for (int i = 0; i < dy.numel(); ++i) {
            da[i] += dy[i];
            db[i] += dy[i];
        }
    });
    return out;
}

Tape::Id Tape::scale(Id a, float s) {
    const bool sc = val(a).numel() == 1 && slots_[static_cast<size_t>(a)].has_scalar_d;
    Tensor y = val(a);
    for (auto& v : y.v) v *= s;
    const Id out = sc ? push_scalar(dval(a) * s, "scale") : push(std::move(y), "scale");
    backfns_.push_back([this, a, out, s] {
        const Tensor& dy = grad(out);
        Tensor& da = g(a);
        for (int i = 0; i < dy.numel(); ++i) da[i] += s * dy[i];
    });
    return out;
}

Tape::Id Tape::sum_sq_diff(Id a, Id b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    if (av.numel() != bv.numel()) throw NnError("sum_sq_diff: shape mismatch");
    double acc = 0.0;
    for (int i = 0; i < av.numel(); ++i) {
        const double d = static_cast<double>(av[i]) - bv[i];
        acc += d * d;
    }
    const Id out = push_scalar(acc, "sum_sq_diff");
    backfns_.push_back([this, a, b, out] {
        const float gy = grad(out)[0];
        const Tensor& av2 = val(a);
        const Tensor& bv2 = val(b);
        Tensor& da = g(a);
        Tensor& db = g(b);
        for (int i = 0; i < av2.numel(); ++i) {
            const float d = 2.0f * (av2[i] - bv2[i]) * gy;
            da[i] += d;
            db[i] -= d;
        }
    });
    return out;
}

Tape::Id Tape::sum_abs_diff(Id a, Id b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    if (av.numel() != bv.numel()) throw NnError("sum_abs_diff: shape mismatch");
    double acc = 0.0;
    for (int i = 0; i < av.numel(); ++i) acc += std::fabs(static_cast<double>(av[i]) - bv[i]);
    const Id out = push_scalar(acc, "sum_abs_diff");
    backfns_.push_back([this, a, b, out] {
        const float gy = grad(out)[0];
        const Tensor& av2 = val(a);
        const Tensor& bv2 = val(b);
        Tensor& da = g(a);
        Tensor& db = g(b);
        for (int i = 0; i < av2.numel(); ++i) {
            const float d = av2[i] - bv2[i];
            const float s = d > 0.0f ? 1.0f : (d < 0.0f ? -1.0f : 0.0f);
            da[i] += s * gy;
            db[i] -= s * gy;
        }
    });
    return out;
}

Tape::Id Tape::sum_sq_diff_const(Id a, const Tensor& target) {
    return sum_sq_diff(a, input(target));
}

Tape::Id Tape::sum_abs_diff_const(Id a, const Tensor& target) {
    return sum_abs_diff(a, input(target));
}

float loss_l1(const Tensor& pred, const Tensor& target) {
    if (pred.numel() != target.numel()) throw NnError("loss_l1: shape mismatch");
    float acc = 0.0f;
    for (int i = 0; i < pred.numel(); ++i) acc += std::fabs(pred[i] - target[i]);
    return acc;
}

float loss_l2(const Tensor& pred, const Tensor& target) {
    if (pred.numel() != target.numel()) throw NnError("loss_l2: shape mismatch");
    float acc = 0.0f;
    for (int i = 0; i < pred.numel(); ++i) {
        const float d = pred[i] - target[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace dynmap::nn
