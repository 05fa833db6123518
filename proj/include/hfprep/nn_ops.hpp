#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "hfprep/tensor.hpp"

namespace hfprep {

// Layer primitives with analytic backward passes. Everything runs on one
// thread with a fixed summation order so identical inputs give bit-identical
// results. Backward functions ACCUMULATE into the .grad buffers of their
// inputs (allocate before use); unallocated grads are skipped.

template <typename T>
inline void check_4d(const TensorT<T>& t, const char* what) {
    if (t.ndim() != 4)
        throw InvalidArgument(std::string(what) + ": expected 4-d tensor, got " +
                              shape_str(t.shape));
}

// ---- conv2d: cross-correlation, (N,Ci,H,W) * (Co,Ci,Kh,Kw) -> (N,Co,Ho,Wo)

inline int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                          int stride, int pad) {
    check_4d(x, "conv2d x");
    check_4d(w, "conv2d w");
    if (x.dim(1) != w.dim(1))
        throw InvalidArgument("conv2d: channel mismatch, x " + shape_str(x.shape) +
                              " vs w " + shape_str(w.shape));
    if (b.ndim() != 1 || b.dim(0) != w.dim(0))
        throw InvalidArgument("conv2d: bias " + shape_str(b.shape) + " vs w " +
                              shape_str(w.shape));
    const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int Co = w.dim(0), Kh = w.dim(2), Kw = w.dim(3);
    const int Ho = conv_out_dim(H, Kh, stride, pad);
    const int Wo = conv_out_dim(W, Kw, stride, pad);
    if (Ho <= 0 || Wo <= 0)
        throw InvalidArgument("conv2d: non-positive output dims for x " +
                              shape_str(x.shape) + " w " + shape_str(w.shape));

    TensorT<T> y({N, Co, Ho, Wo});
    const size_t xs_n = static_cast<size_t>(Ci) * H * W;
    const size_t ws_o = static_cast<size_t>(Ci) * Kh * Kw;
    for (int n = 0; n < N; ++n) {
        const T* xn = &x.data[n * xs_n];
        for (int co = 0; co < Co; ++co) {
            const T* wo = &w.data[co * ws_o];
            T* yo = &y.data[(static_cast<size_t>(n) * Co + co) * Ho * Wo];
            for (int oy = 0; oy < Ho; ++oy) {
                for (int ox = 0; ox < Wo; ++ox) {
                    T acc = b.data[co];
                    const int iy0 = oy * stride - pad;
                    const int ix0 = ox * stride - pad;
                    for (int ci = 0; ci < Ci; ++ci) {
                        const T* xc = xn + static_cast<size_t>(ci) * H * W;
                        const T* wc = wo + static_cast<size_t>(ci) * Kh * Kw;
                        for (int ky = 0; ky < Kh; ++ky) {
                            const int iy = iy0 + ky;
                            if (iy < 0 || iy >= H) continue;
                            for (int kx = 0; kx < Kw; ++kx) {
                                const int ix = ix0 + kx;
                                if (ix < 0 || ix >= W) continue;
                                acc += wc[ky * Kw + kx] * xc[static_cast<size_t>(iy) * W + ix];
                            }
                        }
                    }
                    yo[static_cast<size_t>(oy) * Wo + ox] = acc;
                }
            }
        }
    }
    return y;
}

template <typename T>
void conv2d_backward(TensorT<T>& x, TensorT<T>& w, TensorT<T>& b, const TensorT<T>& y,
                     int stride, int pad) {
    const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int Co = w.dim(0), Kh = w.dim(2), Kw = w.dim(3);
    const int Ho = y.dim(2), Wo = y.dim(3);
    if (y.grad.empty()) throw InvalidArgument("conv2d backward: output grad missing");

    const size_t xs_n = static_cast<size_t>(Ci) * H * W;
    const size_t ws_o = static_cast<size_t>(Ci) * Kh * Kw;
    for (int n = 0; n < N; ++n) {
        for (int co = 0; co < Co; ++co) {
            const T* gy = &y.grad[(static_cast<size_t>(n) * Co + co) * Ho * Wo];
            for (int oy = 0; oy < Ho; ++oy) {
                for (int ox = 0; ox < Wo; ++ox) {
                    const T g = gy[static_cast<size_t>(oy) * Wo + ox];
                    if (!b.grad.empty()) b.grad[co] += g;
                    const int iy0 = oy * stride - pad;
                    const int ix0 = ox * stride - pad;
                    for (int ci = 0; ci < Ci; ++ci) {
                        for (int ky = 0; ky < Kh; ++ky) {
                            const int iy = iy0 + ky;
                            if (iy < 0 || iy >= H) continue;
                            for (int kx = 0; kx < Kw; ++kx) {
                                const int ix = ix0 + kx;
                                if (ix < 0 || ix >= W) continue;
                                const size_t xi = n * xs_n + static_cast<size_t>(ci) * H * W +
                                                  static_cast<size_t>(iy) * W + ix;
                                const size_t wi = co * ws_o + static_cast<size_t>(ci) * Kh * Kw +
                                                  static_cast<size_t>(ky) * Kw + kx;
                                if (!w.grad.empty()) w.grad[wi] += g * x.data[xi];
                                if (!x.grad.empty()) x.grad[xi] += g * w.data[wi];
                            }
                        }
                    }
                }
            }
        }
    }
}

// ---- relu

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& x) {
    TensorT<T> y(x.shape);
    for (size_t i = 0; i < x.data.size(); ++i)
        y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
    return y;
}

template <typename T>
void relu_backward(TensorT<T>& x, const TensorT<T>& y) {
    if (x.grad.empty()) return;
    for (size_t i = 0; i < x.data.size(); ++i)
        if (x.data[i] > T(0)) x.grad[i] += y.grad[i];
}

// ---- avgpool2: 2x2 stride-2 mean; odd trailing rows/cols are dropped

template <typename T>
TensorT<T> avgpool2_forward(const TensorT<T>& x) {
    check_4d(x, "avgpool2 x");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int Ho = H / 2, Wo = W / 2;
    if (Ho == 0 || Wo == 0)
        throw InvalidArgument("avgpool2: input " + shape_str(x.shape) + " too small");
    TensorT<T> y({N, C, Ho, Wo});
    for (int nc = 0; nc < N * C; ++nc) {
        const T* xp = &x.data[static_cast<size_t>(nc) * H * W];
        T* yp = &y.data[static_cast<size_t>(nc) * Ho * Wo];
        for (int oy = 0; oy < Ho; ++oy)
            for (int ox = 0; ox < Wo; ++ox) {
                const T* p = xp + static_cast<size_t>(2 * oy) * W + 2 * ox;
                yp[static_cast<size_t>(oy) * Wo + ox] =
                    (p[0] + p[1] + p[W] + p[W + 1]) * T(0.25);
            }
    }
    return y;
}

template <typename T>
void avgpool2_backward(TensorT<T>& x, const TensorT<T>& y) {
    if (x.grad.empty()) return;
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int Ho = y.dim(2), Wo = y.dim(3);
    for (int nc = 0; nc < N * C; ++nc) {
        T* gx = &x.grad[static_cast<size_t>(nc) * H * W];
        const T* gy = &y.grad[static_cast<size_t>(nc) * Ho * Wo];
        for (int oy = 0; oy < Ho; ++oy)
            for (int ox = 0; ox < Wo; ++ox) {
                const T g = gy[static_cast<size_t>(oy) * Wo + ox] * T(0.25);
                T* p = gx + static_cast<size_t>(2 * oy) * W + 2 * ox;
                p[0] += g;
                p[1] += g;
                p[W] += g;
                p[W + 1] += g;
            }
    }
}

// ---- global average pool: (N,C,H,W) -> (N,C)

template <typename T>
TensorT<T> global_avgpool_forward(const TensorT<T>& x) {
    check_4d(x, "global_avgpool x");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    TensorT<T> y({N, C});
    const T inv = T(1) / static_cast<T>(static_cast<int64_t>(H) * W);
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const T* xp = &x.data[(static_cast<size_t>(n) * C + c) * H * W];
            T acc = T(0);
            for (int i = 0; i < H * W; ++i) acc += xp[i];
            y.data[static_cast<size_t>(n) * C + c] = acc * inv;
        }
    return y;
}

template <typename T>
void global_avgpool_backward(TensorT<T>& x, const TensorT<T>& y) {
    if (x.grad.empty()) return;
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const T inv = T(1) / static_cast<T>(static_cast<int64_t>(H) * W);
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const T g = y.grad[static_cast<size_t>(n) * C + c] * inv;
            T* gx = &x.grad[(static_cast<size_t>(n) * C + c) * H * W];
            for (int i = 0; i < H * W; ++i) gx[i] += g;
        }
}

// ---- fully connected: (N,D) x (O,D)^T + b -> (N,O)

template <typename T>
TensorT<T> fc_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b) {
    if (x.ndim() != 2 || w.ndim() != 2 || x.dim(1) != w.dim(1) || b.dim(0) != w.dim(0))
        throw InvalidArgument("fc: x " + shape_str(x.shape) + " w " + shape_str(w.shape) +
                              " b " + shape_str(b.shape));
    const int N = x.dim(0), D = x.dim(1), O = w.dim(0);
    TensorT<T> y({N, O});
    for (int n = 0; n < N; ++n)
        for (int o = 0; o < O; ++o) {
            T acc = b.data[o];
            const T* xp = &x.data[static_cast<size_t>(n) * D];
            const T* wp = &w.data[static_cast<size_t>(o) * D];
            for (int d = 0; d < D; ++d) acc += xp[d] * wp[d];
            y.data[static_cast<size_t>(n) * O + o] = acc;
        }
    return y;
}

template <typename T>
void fc_backward(TensorT<T>& x, TensorT<T>& w, TensorT<T>& b, const TensorT<T>& y) {
    const int N = x.dim(0), D = x.dim(1), O = w.dim(0);
    for (int n = 0; n < N; ++n)
        for (int o = 0; o < O; ++o) {
            const T g = y.grad[static_cast<size_t>(n) * O + o];
            if (!b.grad.empty()) b.grad[o] += g;
            const T* xp = &x.data[static_cast<size_t>(n) * D];
            const T* wp = &w.data[static_cast<size_t>(o) * D];
            for (int d = 0; d < D; ++d) {
                if (!w.grad.empty()) w.grad[static_cast<size_t>(o) * D + d] += g * xp[d];
                if (!x.grad.empty()) x.grad[static_cast<size_t>(n) * D + d] += g * wp[d];
            }
        }
}

// ---- L1 loss: mean |pred - gt|; subgradient 0 at ties

template <typename T>
T l1_loss_forward(const TensorT<T>& pred, const TensorT<T>& gt) {
    if (pred.shape != gt.shape)
        throw InvalidArgument("l1_loss: pred " + shape_str(pred.shape) + " vs gt " +
                              shape_str(gt.shape));
    if (pred.data.empty()) throw InvalidArgument("l1_loss: empty input");
    T acc = T(0);
    for (size_t i = 0; i < pred.data.size(); ++i) {
        const T d = pred.data[i] - gt.data[i];
        acc += d < T(0) ? -d : d;
    }
    return acc / static_cast<T>(pred.data.size());
}

template <typename T>
void l1_loss_backward(TensorT<T>& pred, const TensorT<T>& gt, T loss_grad = T(1)) {
    if (pred.grad.empty()) return;
    const T inv = loss_grad / static_cast<T>(pred.data.size());
    for (size_t i = 0; i < pred.data.size(); ++i) {
        const T d = pred.data[i] - gt.data[i];
        if (d > T(0))
            pred.grad[i] += inv;
        else if (d < T(0))
            pred.grad[i] -= inv;
    }
}

// ---- AdamW (decoupled weight decay), one state slot per parameter tensor

struct AdamWHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

template <typename T>
struct AdamWGroup {
    std::vector<TensorT<T>*> params;
    AdamWHyper hp;
    std::vector<std::vector<T>> m, v;
    int64_t step = 0;

    void init() {
        m.clear();
        v.clear();
        for (auto* p : params) {
            m.emplace_back(p->data.size(), T(0));
            v.emplace_back(p->data.size(), T(0));
        }
        step = 0;
    }
};

template <typename T>
void adamw_step(AdamWGroup<T>& g) {
    if (g.m.size() != g.params.size()) g.init();
    g.step += 1;
    const T b1 = static_cast<T>(g.hp.beta1), b2 = static_cast<T>(g.hp.beta2);
    const T lr = static_cast<T>(g.hp.lr), eps = static_cast<T>(g.hp.eps);
    const T wd = static_cast<T>(g.hp.weight_decay);
    const T bc1 = T(1) - static_cast<T>(std::pow(g.hp.beta1, static_cast<double>(g.step)));
    const T bc2 = T(1) - static_cast<T>(std::pow(g.hp.beta2, static_cast<double>(g.step)));
    for (size_t pi = 0; pi < g.params.size(); ++pi) {
        TensorT<T>& p = *g.params[pi];
        if (p.grad.size() != p.data.size())
            throw InvalidArgument("adamw: parameter grad missing");
        std::vector<T>& m = g.m[pi];
        std::vector<T>& v = g.v[pi];
        for (size_t i = 0; i < p.data.size(); ++i) {
            const T grad = p.grad[i];
            m[i] = b1 * m[i] + (T(1) - b1) * grad;
            v[i] = b2 * v[i] + (T(1) - b2) * grad * grad;
            const T mhat = m[i] / bc1;
            const T vhat = v[i] / bc2;
            p.data[i] -= lr * wd * p.data[i];
            p.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

// ---- central-difference gradient check

// `f` evaluates the scalar objective (in double, regardless of the op
// precision under test) from the inputs' CURRENT data; inputs' grad
// buffers must hold the analytic gradient of f. Each element is perturbed
// by +-epsilon and restored. Returns the worst per-element error
// |analytic-numeric| / max(|analytic|,|numeric|,abs_floor); the floor
// turns the ratio into an absolute comparison for near-zero gradients,
// where a pure relative error only measures finite-difference noise. The
// objective must be differentiable at the inputs; redraw them when a
// relu/l1 kink sits within epsilon.
template <typename T>
double grad_check(const std::function<double()>& f, const std::vector<TensorT<T>*>& inputs,
                  T epsilon, double abs_floor = 1e-4) {
    double worst = 0.0;
    for (TensorT<T>* t : inputs) {
        if (t->grad.size() != t->data.size())
            throw InvalidArgument("grad_check: input grad missing");
        for (size_t i = 0; i < t->data.size(); ++i) {
            const T saved = t->data[i];
            t->data[i] = saved + epsilon;
            const double fp = f();
            t->data[i] = saved - epsilon;
            const double fm = f();
            t->data[i] = saved;
            const double numeric = (fp - fm) / (2.0 * static_cast<double>(epsilon));
            const double analytic = static_cast<double>(t->grad[i]);
            const double denom =
                std::max({std::abs(analytic), std::abs(numeric), abs_floor});
            worst = std::max(worst, std::abs(analytic - numeric) / denom);
        }
    }
    return worst;
}

} // namespace hfprep
