#include "hfprep/ffpn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace hfprep {

void validate_ffpn(const FfpnConfig& cfg) {
    for (int c : cfg.stage_channels)
        if (c < 1) throw InvalidArgument("ffpn stage channels must be positive");
    for (int s : cfg.stage_strides)
        if (s < 1) throw InvalidArgument("ffpn stage strides must be >= 1");
    if (cfg.fa_hidden < 1 || cfg.head_hidden < 1)
        throw InvalidArgument("ffpn hidden widths must be positive");
    if (cfg.input_side < 1 || cfg.clip_frames < 1)
        throw InvalidArgument("ffpn input_side/clip_frames must be positive");
    stage_sides(cfg); // throws when a stage collapses to zero
}

std::array<int, 4> stage_sides(const FfpnConfig& cfg) {
    std::array<int, 4> sides{};
    int side = cfg.input_side;
    for (int i = 0; i < 4; ++i) {
        side = conv_out_dim(side, 3, cfg.stage_strides[static_cast<size_t>(i)], 1);
        if (side < 1)
            throw InvalidArgument("ffpn stage " + std::to_string(i) +
                                  " output side is non-positive for input_side " +
                                  std::to_string(cfg.input_side));
        sides[static_cast<size_t>(i)] = side;
    }
    return sides;
}

template <typename T>
TensorT<T> pool_mask_to(const TensorT<T>& mask, int oh, int ow) {
    check_4d(mask, "pool_mask_to");
    const int N = mask.dim(0), C = mask.dim(1), H = mask.dim(2), W = mask.dim(3);
    if (oh > H || ow > W)
        throw InvalidArgument("mask " + shape_str(mask.shape) +
                              " smaller than target " + std::to_string(oh) + "x" +
                              std::to_string(ow));
    TensorT<T> out({N, C, oh, ow});
    for (int nc = 0; nc < N * C; ++nc) {
        const T* src = &mask.data[static_cast<size_t>(nc) * H * W];
        T* dst = &out.data[static_cast<size_t>(nc) * oh * ow];
        for (int r = 0; r < oh; ++r) {
            const int y0 = static_cast<int>(static_cast<int64_t>(r) * H / oh);
            const int y1 = static_cast<int>((static_cast<int64_t>(r + 1) * H + oh - 1) / oh);
            for (int c = 0; c < ow; ++c) {
                const int x0 = static_cast<int>(static_cast<int64_t>(c) * W / ow);
                const int x1 = static_cast<int>((static_cast<int64_t>(c + 1) * W + ow - 1) / ow);
                T acc = T(0);
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) acc += src[static_cast<size_t>(y) * W + x];
                dst[static_cast<size_t>(r) * ow + c] =
                    acc / static_cast<T>((y1 - y0) * (x1 - x0));
            }
        }
    }
    return out;
}

template TensorT<float> pool_mask_to<float>(const TensorT<float>&, int, int);
template TensorT<double> pool_mask_to<double>(const TensorT<double>&, int, int);

namespace {

template <typename T>
void fill_fan_in_uniform(TensorT<T>& w, int fan_in, Rng& rng) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : w.data) v = static_cast<T>(rng.uniform(-limit, limit));
}

template <typename T>
void modulate_forward(const TensorT<T>& f, const TensorT<T>& gamma,
                      const TensorT<T>& beta, TensorT<T>& F) {
    F = TensorT<T>(f.shape);
    for (size_t i = 0; i < f.data.size(); ++i)
        F.data[i] = gamma.data[i] * f.data[i] + beta.data[i];
}

} // namespace

template <typename T>
void FfpnNetT<T>::init(uint64_t seed) {
    validate_ffpn(cfg);
    Rng rng(seed);
    const auto ch = cfg.stage_channels;
    for (int i = 0; i < 4; ++i) {
        const int ci = i == 0 ? 1 : ch[static_cast<size_t>(i - 1)];
        const int co = ch[static_cast<size_t>(i)];
        convA[static_cast<size_t>(i)] = {TensorT<T>({co, ci, 3, 3}), TensorT<T>({co}),
                                         cfg.stage_strides[static_cast<size_t>(i)], 1};
        convB[static_cast<size_t>(i)] = {TensorT<T>({co, co, 3, 3}), TensorT<T>({co}), 1, 1};
        fa_g1[static_cast<size_t>(i)] = {TensorT<T>({cfg.fa_hidden, 1, 3, 3}),
                                         TensorT<T>({cfg.fa_hidden}), 1, 1};
        fa_g2[static_cast<size_t>(i)] = {TensorT<T>({co, cfg.fa_hidden, 3, 3}),
                                         TensorT<T>({co}), 1, 1};
        fa_h1[static_cast<size_t>(i)] = {TensorT<T>({cfg.fa_hidden, 1, 3, 3}),
                                         TensorT<T>({cfg.fa_hidden}), 1, 1};
        fa_h2[static_cast<size_t>(i)] = {TensorT<T>({co, cfg.fa_hidden, 3, 3}),
                                         TensorT<T>({co}), 1, 1};
    }
    fc1_w = TensorT<T>({cfg.head_hidden, concat_dim()});
    fc1_b = TensorT<T>({cfg.head_hidden});
    fc2_w = TensorT<T>({1, cfg.head_hidden});
    fc2_b = TensorT<T>({1});

    // Draw weights in the fixed named_params order so init is reproducible.
    for (auto& [name, p] : named_params()) {
        const bool is_weight = name.size() > 2 && name.compare(name.size() - 2, 2, ".w") == 0;
        if (!is_weight) {
            std::fill(p->data.begin(), p->data.end(), T(0));
            continue;
        }
        int fan_in;
        if (p->ndim() == 4)
            fan_in = p->dim(1) * p->dim(2) * p->dim(3);
        else
            fan_in = p->dim(1);
        fill_fan_in_uniform(*p, fan_in, rng);
    }

    // FA identity: the modulation starts as gamma=1, beta=0 so an untrained
    // network is bitwise identical to the FA-ablated variant.
    for (int i = 0; i < 4; ++i) {
        auto& g2 = fa_g2[static_cast<size_t>(i)];
        std::fill(g2.w.data.begin(), g2.w.data.end(), T(0));
        std::fill(g2.b.data.begin(), g2.b.data.end(), T(1));
        auto& h2 = fa_h2[static_cast<size_t>(i)];
        std::fill(h2.w.data.begin(), h2.w.data.end(), T(0));
        std::fill(h2.b.data.begin(), h2.b.data.end(), T(0));
    }

    for (auto& [name, p] : named_params()) {
        (void)name;
        p->alloc_grad();
    }
}

template <typename T>
std::vector<std::pair<std::string, TensorT<T>*>> FfpnNetT<T>::named_params() {
    std::vector<std::pair<std::string, TensorT<T>*>> out;
    for (int i = 0; i < 4; ++i) {
        const std::string s = "backbone.s" + std::to_string(i);
        out.emplace_back(s + ".conv1.w", &convA[static_cast<size_t>(i)].w);
        out.emplace_back(s + ".conv1.b", &convA[static_cast<size_t>(i)].b);
        out.emplace_back(s + ".conv2.w", &convB[static_cast<size_t>(i)].w);
        out.emplace_back(s + ".conv2.b", &convB[static_cast<size_t>(i)].b);
    }
    for (int i = 0; i < 4; ++i) {
        const std::string s = "fa.s" + std::to_string(i);
        out.emplace_back(s + ".scale.c1.w", &fa_g1[static_cast<size_t>(i)].w);
        out.emplace_back(s + ".scale.c1.b", &fa_g1[static_cast<size_t>(i)].b);
        out.emplace_back(s + ".scale.c2.w", &fa_g2[static_cast<size_t>(i)].w);
        out.emplace_back(s + ".scale.c2.b", &fa_g2[static_cast<size_t>(i)].b);
        out.emplace_back(s + ".shift.c1.w", &fa_h1[static_cast<size_t>(i)].w);
        out.emplace_back(s + ".shift.c1.b", &fa_h1[static_cast<size_t>(i)].b);
        out.emplace_back(s + ".shift.c2.w", &fa_h2[static_cast<size_t>(i)].w);
        out.emplace_back(s + ".shift.c2.b", &fa_h2[static_cast<size_t>(i)].b);
    }
    out.emplace_back("head.fc1.w", &fc1_w);
    out.emplace_back("head.fc1.b", &fc1_b);
    out.emplace_back("head.fc2.w", &fc2_w);
    out.emplace_back("head.fc2.b", &fc2_b);
    return out;
}

template <typename T>
std::vector<std::pair<std::string, const TensorT<T>*>> FfpnNetT<T>::named_params() const {
    auto mut = const_cast<FfpnNetT<T>*>(this)->named_params();
    std::vector<std::pair<std::string, const TensorT<T>*>> out;
    out.reserve(mut.size());
    for (auto& [n, p] : mut) out.emplace_back(n, p);
    return out;
}

template <typename T>
std::vector<TensorT<T>*> FfpnNetT<T>::backbone_params() {
    std::vector<TensorT<T>*> out;
    for (auto& [name, p] : named_params())
        if (name.rfind("backbone.", 0) == 0) out.push_back(p);
    return out;
}

template <typename T>
std::vector<TensorT<T>*> FfpnNetT<T>::fa_head_params() {
    std::vector<TensorT<T>*> out;
    for (auto& [name, p] : named_params())
        if (name.rfind("backbone.", 0) != 0) out.push_back(p);
    return out;
}

template <typename T>
void FfpnNetT<T>::forward(const TensorT<T>& frames, const TensorT<T>& masks,
                          FfpnCache<T>& cache) const {
    check_4d(frames, "ffpn frames");
    check_4d(masks, "ffpn masks");
    if (frames.dim(1) != 1 || frames.dim(2) != cfg.input_side ||
        frames.dim(3) != cfg.input_side)
        throw InvalidArgument("ffpn frames " + shape_str(frames.shape) +
                              " do not match input side " + std::to_string(cfg.input_side));
    if (masks.shape != frames.shape)
        throw InvalidArgument("ffpn masks " + shape_str(masks.shape) + " vs frames " +
                              shape_str(frames.shape));

    cache.x = frames;
    cache.mask = masks;

    const TensorT<T>* input = &cache.x;
    for (int i = 0; i < 4; ++i) {
        StageCache<T>& sc = cache.stage[static_cast<size_t>(i)];
        const auto& A = convA[static_cast<size_t>(i)];
        const auto& B = convB[static_cast<size_t>(i)];
        sc.a_pre = conv2d_forward(*input, A.w, A.b, A.stride, A.pad);
        sc.a_pre.alloc_grad();
        sc.a = relu_forward(sc.a_pre);
        sc.a.alloc_grad();
        sc.b_pre = conv2d_forward(sc.a, B.w, B.b, B.stride, B.pad);
        sc.b_pre.alloc_grad();
        sc.f = relu_forward(sc.b_pre);
        sc.f.alloc_grad();

        if (cfg.use_fa) {
            sc.m = pool_mask_to(cache.mask, sc.f.dim(2), sc.f.dim(3));
            const auto& G1 = fa_g1[static_cast<size_t>(i)];
            const auto& G2 = fa_g2[static_cast<size_t>(i)];
            const auto& H1 = fa_h1[static_cast<size_t>(i)];
            const auto& H2 = fa_h2[static_cast<size_t>(i)];
            sc.g1_pre = conv2d_forward(sc.m, G1.w, G1.b, 1, 1);
            sc.g1_pre.alloc_grad();
            sc.g1 = relu_forward(sc.g1_pre);
            sc.g1.alloc_grad();
            sc.gamma = conv2d_forward(sc.g1, G2.w, G2.b, 1, 1);
            sc.gamma.alloc_grad();
            sc.h1_pre = conv2d_forward(sc.m, H1.w, H1.b, 1, 1);
            sc.h1_pre.alloc_grad();
            sc.h1 = relu_forward(sc.h1_pre);
            sc.h1.alloc_grad();
            sc.beta = conv2d_forward(sc.h1, H2.w, H2.b, 1, 1);
            sc.beta.alloc_grad();
            modulate_forward(sc.f, sc.gamma, sc.beta, sc.F);
        } else {
            sc.F = sc.f;
        }
        sc.F.alloc_grad();

        input = &sc.f;
    }

    // Head: pooled pyramid vectors concatenated, two FC stages.
    const int N = frames.dim(0);
    cache.concat = TensorT<T>({N, concat_dim()});
    int col = 0;
    for (int i = 0; i < 4; ++i) {
        StageCache<T>& sc = cache.stage[static_cast<size_t>(i)];
        sc.gap = global_avgpool_forward(sc.F);
        sc.gap.alloc_grad();
        const int C = sc.gap.dim(1);
        for (int n = 0; n < N; ++n)
            std::copy(&sc.gap.data[static_cast<size_t>(n) * C],
                      &sc.gap.data[static_cast<size_t>(n) * C] + C,
                      &cache.concat.data[static_cast<size_t>(n) * concat_dim() + col]);
        col += C;
    }
    cache.concat.alloc_grad();
    cache.fc1_pre = fc_forward(cache.concat, fc1_w, fc1_b);
    cache.fc1_pre.alloc_grad();
    cache.fc1_out = relu_forward(cache.fc1_pre);
    cache.fc1_out.alloc_grad();
    cache.out = fc_forward(cache.fc1_out, fc2_w, fc2_b);
    cache.out.alloc_grad();
}

template <typename T>
void FfpnNetT<T>::backward(FfpnCache<T>& cache) {
    fc_backward(cache.fc1_out, fc2_w, fc2_b, cache.out);
    relu_backward(cache.fc1_pre, cache.fc1_out);
    fc_backward(cache.concat, fc1_w, fc1_b, cache.fc1_pre);

    const int N = cache.concat.dim(0);
    int col = 0;
    for (int i = 0; i < 4; ++i) {
        StageCache<T>& sc = cache.stage[static_cast<size_t>(i)];
        const int C = sc.gap.dim(1);
        for (int n = 0; n < N; ++n)
            std::copy(&cache.concat.grad[static_cast<size_t>(n) * concat_dim() + col],
                      &cache.concat.grad[static_cast<size_t>(n) * concat_dim() + col] + C,
                      &sc.gap.grad[static_cast<size_t>(n) * C]);
        col += C;
        global_avgpool_backward(sc.F, sc.gap);
    }

    for (int i = 3; i >= 0; --i) {
        StageCache<T>& sc = cache.stage[static_cast<size_t>(i)];
        if (cfg.use_fa) {
            // F = gamma * f + beta, elementwise.
            for (size_t k = 0; k < sc.F.grad.size(); ++k) {
                const T g = sc.F.grad[k];
                sc.gamma.grad[k] += g * sc.f.data[k];
                sc.f.grad[k] += g * sc.gamma.data[k];
                sc.beta.grad[k] += g;
            }
            auto& G1 = fa_g1[static_cast<size_t>(i)];
            auto& G2 = fa_g2[static_cast<size_t>(i)];
            auto& H1 = fa_h1[static_cast<size_t>(i)];
            auto& H2 = fa_h2[static_cast<size_t>(i)];
            conv2d_backward(sc.g1, G2.w, G2.b, sc.gamma, 1, 1);
            relu_backward(sc.g1_pre, sc.g1);
            conv2d_backward(sc.m, G1.w, G1.b, sc.g1_pre, 1, 1); // mask grad unallocated
            conv2d_backward(sc.h1, H2.w, H2.b, sc.beta, 1, 1);
            relu_backward(sc.h1_pre, sc.h1);
            conv2d_backward(sc.m, H1.w, H1.b, sc.h1_pre, 1, 1);
        } else {
            for (size_t k = 0; k < sc.F.grad.size(); ++k) sc.f.grad[k] += sc.F.grad[k];
        }

        auto& A = convA[static_cast<size_t>(i)];
        auto& B = convB[static_cast<size_t>(i)];
        relu_backward(sc.b_pre, sc.f);
        conv2d_backward(sc.a, B.w, B.b, sc.b_pre, B.stride, B.pad);
        relu_backward(sc.a_pre, sc.a);
        TensorT<T>& input = i == 0 ? cache.x : cache.stage[static_cast<size_t>(i - 1)].f;
        conv2d_backward(input, A.w, A.b, sc.a_pre, A.stride, A.pad);
    }
}

template <typename T>
std::array<TensorT<T>, 4> FfpnNetT<T>::backbone_forward(const TensorT<T>& frames) const {
    std::array<TensorT<T>, 4> features;
    TensorT<T> input = frames;
    for (int i = 0; i < 4; ++i) {
        const auto& A = convA[static_cast<size_t>(i)];
        const auto& B = convB[static_cast<size_t>(i)];
        TensorT<T> a = relu_forward(conv2d_forward(input, A.w, A.b, A.stride, A.pad));
        features[static_cast<size_t>(i)] =
            relu_forward(conv2d_forward(a, B.w, B.b, B.stride, B.pad));
        input = features[static_cast<size_t>(i)];
    }
    return features;
}

template <typename T>
TensorT<T> FfpnNetT<T>::frequency_attention(int stage, const TensorT<T>& masks,
                                            const TensorT<T>& f_i) const {
    if (stage < 0 || stage > 3) throw InvalidArgument("fa stage out of range");
    const auto& G1 = fa_g1[static_cast<size_t>(stage)];
    const auto& G2 = fa_g2[static_cast<size_t>(stage)];
    const auto& H1 = fa_h1[static_cast<size_t>(stage)];
    const auto& H2 = fa_h2[static_cast<size_t>(stage)];
    TensorT<T> m = pool_mask_to(masks, f_i.dim(2), f_i.dim(3));
    TensorT<T> gamma =
        conv2d_forward(relu_forward(conv2d_forward(m, G1.w, G1.b, 1, 1)), G2.w, G2.b, 1, 1);
    TensorT<T> beta =
        conv2d_forward(relu_forward(conv2d_forward(m, H1.w, H1.b, 1, 1)), H2.w, H2.b, 1, 1);
    if (gamma.shape != f_i.shape)
        throw InvalidArgument("fa output " + shape_str(gamma.shape) + " vs features " +
                              shape_str(f_i.shape));
    TensorT<T> F;
    modulate_forward(f_i, gamma, beta, F);
    return F;
}

template <typename T>
double FfpnNetT<T>::regression_head(const std::array<TensorT<T>, 4>& features) const {
    const int N = features[0].dim(0);
    TensorT<T> concat({N, concat_dim()});
    int col = 0;
    for (int i = 0; i < 4; ++i) {
        TensorT<T> gap = global_avgpool_forward(features[static_cast<size_t>(i)]);
        const int C = gap.dim(1);
        for (int n = 0; n < N; ++n)
            std::copy(&gap.data[static_cast<size_t>(n) * C],
                      &gap.data[static_cast<size_t>(n) * C] + C,
                      &concat.data[static_cast<size_t>(n) * concat_dim() + col]);
        col += C;
    }
    TensorT<T> out = fc_forward(relu_forward(fc_forward(concat, fc1_w, fc1_b)), fc2_w, fc2_b);
    T acc = T(0);
    for (int n = 0; n < N; ++n) acc += out.data[static_cast<size_t>(n)];
    return static_cast<double>(acc / static_cast<T>(N));
}

template <typename T>
ModelCheckpoint FfpnNetT<T>::to_checkpoint() const {
    ModelCheckpoint ckpt;
    for (const auto& [name, p] : named_params()) {
        auto& e = ckpt.add(name, p->shape);
        for (size_t i = 0; i < p->data.size(); ++i) e.data[i] = static_cast<float>(p->data[i]);
    }
    return ckpt;
}

template <typename T>
void FfpnNetT<T>::load_params(const ModelCheckpoint& ckpt) {
    for (auto& [name, p] : named_params()) {
        const auto* e = ckpt.find(name);
        if (!e)
            throw InvalidArgument("checkpoint/config mismatch: tensor '" + name +
                                  "' missing from checkpoint");
        if (e->shape != p->shape)
            throw InvalidArgument("checkpoint/config mismatch: tensor '" + name + "' shape " +
                                  shape_str(e->shape) + " expected " + shape_str(p->shape));
        for (size_t i = 0; i < p->data.size(); ++i) p->data[i] = static_cast<T>(e->data[i]);
        p->alloc_grad();
    }
}

template struct FfpnNetT<float>;
template struct FfpnNetT<double>;

// ---- meta ------------------------------------------------------------------

void write_meta(ModelCheckpoint& ckpt, const CheckpointMeta& meta) {
    auto& arch = ckpt.add("meta/arch", {13});
    for (int i = 0; i < 4; ++i) arch.data[static_cast<size_t>(i)] =
        static_cast<float>(meta.ffpn.stage_channels[static_cast<size_t>(i)]);
    for (int i = 0; i < 4; ++i) arch.data[static_cast<size_t>(4 + i)] =
        static_cast<float>(meta.ffpn.stage_strides[static_cast<size_t>(i)]);
    arch.data[8] = static_cast<float>(meta.ffpn.fa_hidden);
    arch.data[9] = static_cast<float>(meta.ffpn.head_hidden);
    arch.data[10] = static_cast<float>(meta.ffpn.input_side);
    arch.data[11] = static_cast<float>(meta.ffpn.clip_frames);
    arch.data[12] = meta.ffpn.use_fa ? 1.0f : 0.0f;

    auto& smp = ckpt.add("meta/sampler", {4});
    smp.data = {static_cast<float>(meta.sampler.segments),
                static_cast<float>(meta.sampler.frames_per_segment),
                static_cast<float>(meta.sampler.grid), static_cast<float>(meta.sampler.patch)};

    // sigma is stored byte-wise so the double round-trips exactly.
    auto& gau = ckpt.add("meta/mask_gaussian", {10});
    gau.data[0] = static_cast<float>(meta.mask_spec.ksize);
    gau.data[1] = meta.mask_spec.boundary == Boundary::Wrap ? 1.0f : 0.0f;
    uint8_t sigma_bytes[8];
    std::memcpy(sigma_bytes, &meta.mask_spec.sigma, 8);
    for (int i = 0; i < 8; ++i) gau.data[static_cast<size_t>(2 + i)] = sigma_bytes[i];

    auto& tr = ckpt.add("meta/train", {2});
    tr.data = {static_cast<float>(meta.best_epoch), meta.best_loss};
}

CheckpointMeta read_meta(const ModelCheckpoint& ckpt) {
    const auto* arch = ckpt.find("meta/arch");
    const auto* smp = ckpt.find("meta/sampler");
    const auto* gau = ckpt.find("meta/mask_gaussian");
    if (!arch || arch->data.size() != 13 || !smp || smp->data.size() != 4 || !gau ||
        gau->data.size() != 10)
        throw InvalidArgument("checkpoint is missing meta tensors");
    CheckpointMeta meta;
    for (int i = 0; i < 4; ++i)
        meta.ffpn.stage_channels[static_cast<size_t>(i)] =
            static_cast<int>(arch->data[static_cast<size_t>(i)]);
    for (int i = 0; i < 4; ++i)
        meta.ffpn.stage_strides[static_cast<size_t>(i)] =
            static_cast<int>(arch->data[static_cast<size_t>(4 + i)]);
    meta.ffpn.fa_hidden = static_cast<int>(arch->data[8]);
    meta.ffpn.head_hidden = static_cast<int>(arch->data[9]);
    meta.ffpn.input_side = static_cast<int>(arch->data[10]);
    meta.ffpn.clip_frames = static_cast<int>(arch->data[11]);
    meta.ffpn.use_fa = arch->data[12] != 0.0f;
    meta.sampler.segments = static_cast<int>(smp->data[0]);
    meta.sampler.frames_per_segment = static_cast<int>(smp->data[1]);
    meta.sampler.grid = static_cast<int>(smp->data[2]);
    meta.sampler.patch = static_cast<int>(smp->data[3]);
    meta.mask_spec.ksize = static_cast<int>(gau->data[0]);
    meta.mask_spec.boundary = gau->data[1] != 0.0f ? Boundary::Wrap : Boundary::Reflect;
    uint8_t sigma_bytes[8];
    for (int i = 0; i < 8; ++i)
        sigma_bytes[i] = static_cast<uint8_t>(gau->data[static_cast<size_t>(2 + i)]);
    std::memcpy(&meta.mask_spec.sigma, sigma_bytes, 8);
    if (const auto* tr = ckpt.find("meta/train"); tr && tr->data.size() == 2) {
        meta.best_epoch = static_cast<int>(tr->data[0]);
        meta.best_loss = tr->data[1];
    }
    return meta;
}

// ---- tensor conversion -----------------------------------------------------

Tensor clips_to_tensor(const std::vector<const std::vector<Plane>*>& plane_lists) {
    if (plane_lists.empty() || plane_lists[0]->empty())
        throw InvalidArgument("clips_to_tensor: no planes");
    const Plane& first = (*plane_lists[0])[0];
    int total = 0;
    for (const auto* pl : plane_lists) total += static_cast<int>(pl->size());
    Tensor t({total, 1, first.height, first.width});
    size_t off = 0;
    for (const auto* pl : plane_lists)
        for (const Plane& p : *pl) {
            if (p.width != first.width || p.height != first.height)
                throw InvalidArgument("clips_to_tensor: inconsistent plane sizes");
            for (float v : p.data) t.data[off++] = v * (1.0f / 255.0f);
        }
    return t;
}

// ---- training --------------------------------------------------------------

namespace {

// Mean of each clip's frame scores; grads fan back as 1/frames.
std::vector<float> clip_means(const Tensor& out, int frames_per_clip) {
    const int n_clips = out.dim(0) / frames_per_clip;
    std::vector<float> means(static_cast<size_t>(n_clips));
    for (int c = 0; c < n_clips; ++c) {
        float acc = 0.0f;
        for (int k = 0; k < frames_per_clip; ++k)
            acc += out.data[static_cast<size_t>(c) * frames_per_clip + k];
        means[static_cast<size_t>(c)] = acc / static_cast<float>(frames_per_clip);
    }
    return means;
}

} // namespace

TrainResult train_ffpn(const std::vector<TrainItem>& data, const FfpnConfig& cfg,
                       const SamplerConfig& sampler, const GaussianSpec& mask_spec,
                       const TrainSchedule& schedule) {
    validate_ffpn(cfg);
    validate_sampler(sampler);
    if (data.empty()) throw InvalidArgument("train: empty dataset");
    for (const auto& item : data) {
        if (!item.video) throw InvalidArgument("train: entry '" + item.video_id + "' has no video");
        if (!std::isfinite(item.alpha))
            throw InvalidArgument("train: entry '" + item.video_id + "' has no strategy label");
    }
    if (sampler.clip_frames() != cfg.clip_frames)
        throw InvalidArgument("sampler clip length " + std::to_string(sampler.clip_frames()) +
                              " != ffpn clip_frames " + std::to_string(cfg.clip_frames));
    if (sampler.fragment_side() != cfg.input_side)
        throw InvalidArgument("sampler fragment side " +
                              std::to_string(sampler.fragment_side()) + " != ffpn input side " +
                              std::to_string(cfg.input_side));
    if (schedule.epochs < 1 || schedule.batch < 1)
        throw InvalidArgument("train: epochs and batch must be >= 1");

    FfpnNet net;
    net.cfg = cfg;
    net.init(derive_seed(schedule.seed, "init"));

    AdamWGroup<float> g_backbone, g_fa_head;
    g_backbone.params = net.backbone_params();
    g_backbone.hp.lr = schedule.lr_backbone;
    g_backbone.hp.weight_decay = schedule.weight_decay;
    g_fa_head.params = net.fa_head_params();
    g_fa_head.hp.lr = schedule.lr_fa_head;
    g_fa_head.hp.weight_decay = schedule.weight_decay;
    g_backbone.init();
    g_fa_head.init();

    TrainResult result;
    PlateauHalver halver;
    halver.patience = schedule.lr_patience;

    const int F = cfg.clip_frames;
    for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
        std::vector<size_t> order(data.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng order_rng(derive_seed(schedule.seed, "order/" + std::to_string(epoch)));
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<size_t>(order_rng.below(i))]);

        double loss_sum = 0.0;
        for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(schedule.batch)) {
            const size_t end = std::min(order.size(), begin + static_cast<size_t>(schedule.batch));
            const int B = static_cast<int>(end - begin);

            std::vector<SampleClip> clips;
            clips.reserve(static_cast<size_t>(B));
            Tensor labels({B});
            for (size_t k = begin; k < end; ++k) {
                const TrainItem& item = data[order[k]];
                Rng clip_rng(derive_seed(schedule.seed, "clip/" + item.video_id + "/" +
                                                             std::to_string(epoch)));
                clips.push_back(build_input_clip(*item.video, sampler, mask_spec, clip_rng));
                labels.data[k - begin] = static_cast<float>(item.alpha);
            }
            std::vector<const std::vector<Plane>*> frame_lists, mask_lists;
            for (const auto& c : clips) {
                frame_lists.push_back(&c.frames);
                mask_lists.push_back(&c.hf_masks);
            }
            Tensor frames = clips_to_tensor(frame_lists);
            Tensor masks = clips_to_tensor(mask_lists);

            FfpnCache<float> cache;
            net.forward(frames, masks, cache);

            Tensor preds({B});
            const std::vector<float> means = clip_means(cache.out, F);
            for (int b = 0; b < B; ++b) preds.data[static_cast<size_t>(b)] = means[static_cast<size_t>(b)];
            preds.alloc_grad();
            const float loss = l1_loss_forward(preds, labels);
            loss_sum += static_cast<double>(loss) * B;
            l1_loss_backward(preds, labels);

            for (int b = 0; b < B; ++b) {
                const float g = preds.grad[static_cast<size_t>(b)] / static_cast<float>(F);
                for (int k = 0; k < F; ++k)
                    cache.out.grad[static_cast<size_t>(b) * F + k] = g;
            }
            for (auto& [name, p] : net.named_params()) {
                (void)name;
                p->zero_grad();
            }
            net.backward(cache);
            adamw_step(g_backbone);
            adamw_step(g_fa_head);
        }

        EpochLog log;
        log.epoch = epoch;
        log.mean_loss = loss_sum / static_cast<double>(data.size());
        log.lr_backbone = g_backbone.hp.lr;
        log.lr_fa_head = g_fa_head.hp.lr;
        result.log.push_back(log);

        const PlateauHalver::Decision decision = halver.observe(log.mean_loss);
        if (decision.new_best) {
            result.best_epoch = epoch;
            result.best_loss = log.mean_loss;
            result.best = net.to_checkpoint();
            CheckpointMeta meta;
            meta.ffpn = cfg;
            meta.sampler = sampler;
            meta.mask_spec = mask_spec;
            meta.best_epoch = epoch;
            meta.best_loss = static_cast<float>(log.mean_loss);
            write_meta(result.best, meta);
        } else if (decision.halve) {
            g_backbone.hp.lr *= 0.5;
            g_fa_head.hp.lr *= 0.5;
        }
    }
    return result;
}

// ---- inference -------------------------------------------------------------

Prediction predict_video(const PlanarVideo& video, const ModelCheckpoint& ckpt,
                         int n_clips, uint64_t seed) {
    if (n_clips < 1) throw InvalidArgument("predict: n_clips must be >= 1");
    const CheckpointMeta meta = read_meta(ckpt);
    FfpnNet net;
    net.cfg = meta.ffpn;
    net.init(0); // shapes only; weights come from the checkpoint
    net.load_params(ckpt);

    Prediction pred;
    pred.clip_count = n_clips;
    double total = 0.0;
    for (int k = 0; k < n_clips; ++k) {
        Rng rng(derive_seed(seed, "predict/clip/" + std::to_string(k)));
        SampleClip clip = build_input_clip(video, meta.sampler, meta.mask_spec, rng);
        Tensor frames = clips_to_tensor({&clip.frames});
        Tensor masks = clips_to_tensor({&clip.hf_masks});
        FfpnCache<float> cache;
        net.forward(frames, masks, cache);
        double score = 0.0;
        for (float v : cache.out.data) score += static_cast<double>(v);
        score /= cache.out.dim(0);
        score = std::clamp(score, kAlphaMin, kAlphaMax);
        pred.per_clip_scores.push_back(score);
        total += score;
    }
    pred.s_pred = total / n_clips;
    return pred;
}

} // namespace hfprep
