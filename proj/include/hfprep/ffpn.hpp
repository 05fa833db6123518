#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hfprep/checkpoint.hpp"
#include "hfprep/nn_ops.hpp"
#include "hfprep/rng.hpp"
#include "hfprep/sampling.hpp"

namespace hfprep {

// Frequency-attentive feature pyramid prediction network: a four-stage
// conv backbone, per-stage mask-conditioned affine modulation, and a
// two-layer regression head over pooled pyramid features.
struct FfpnConfig {
    std::array<int, 4> stage_channels{8, 16, 32, 64};
    std::array<int, 4> stage_strides{2, 2, 2, 2};
    int fa_hidden = 16;
    int head_hidden = 64;
    int input_side = 256;
    int clip_frames = 32;
    bool use_fa = true; // ablation switch; identity-initialized FA matches it bitwise
};

void validate_ffpn(const FfpnConfig& cfg);

// Spatial side of each stage's features for a given input side.
std::array<int, 4> stage_sides(const FfpnConfig& cfg);

struct Prediction {
    double s_pred = 0.0;
    std::vector<double> per_clip_scores;
    int clip_count = 0;
};

template <typename T>
struct ConvParam {
    TensorT<T> w, b;
    int stride = 1;
    int pad = 1;
};

template <typename T>
struct StageCache {
    TensorT<T> a_pre, a, b_pre, f;   // conv-relu-conv-relu backbone
    TensorT<T> m;                    // pooled mask (no grad)
    TensorT<T> g1_pre, g1, gamma;    // scale branch
    TensorT<T> h1_pre, h1, beta;     // shift branch
    TensorT<T> F;                    // gamma*f + beta
    TensorT<T> gap;                  // globally pooled F
};

template <typename T>
struct FfpnCache {
    TensorT<T> x, mask;
    std::array<StageCache<T>, 4> stage;
    TensorT<T> concat, fc1_pre, fc1_out, out; // out: (N,1) frame scores
};

// Box-average downsampling of a (N,1,H,W) tensor to (N,1,oh,ow) with
// adaptive windows (exact boxes when H,W divide evenly). Forward only:
// the mask is network input, nothing propagates into it.
template <typename T>
TensorT<T> pool_mask_to(const TensorT<T>& mask, int oh, int ow);

template <typename T>
struct FfpnNetT {
    FfpnConfig cfg;
    std::array<ConvParam<T>, 4> convA, convB;                    // backbone
    std::array<ConvParam<T>, 4> fa_g1, fa_g2, fa_h1, fa_h2;      // FA branches
    TensorT<T> fc1_w, fc1_b, fc2_w, fc2_b;                       // head

    // Fan-in-scaled uniform weights, zero biases, then the FA identity
    // override: final scale-branch layers get weight 0 / bias 1, final
    // shift-branch layers weight 0 / bias 0.
    void init(uint64_t seed);

    std::vector<std::pair<std::string, TensorT<T>*>> named_params();
    std::vector<std::pair<std::string, const TensorT<T>*>> named_params() const;
    std::vector<TensorT<T>*> backbone_params();
    std::vector<TensorT<T>*> fa_head_params();

    int concat_dim() const {
        int d = 0;
        for (int c : cfg.stage_channels) d += c;
        return d;
    }

    // frames/masks: (N,1,S,S) batches of clip frames. Returns per-frame
    // scores in cache.out (N,1). All intermediates are kept for backward.
    void forward(const TensorT<T>& frames, const TensorT<T>& masks,
                 FfpnCache<T>& cache) const;

    // Accumulates parameter gradients from cache.out.grad.
    void backward(FfpnCache<T>& cache);

    // Single-op surfaces used by tests and the spec contracts.
    std::array<TensorT<T>, 4> backbone_forward(const TensorT<T>& frames) const;
    TensorT<T> frequency_attention(int stage, const TensorT<T>& masks,
                                   const TensorT<T>& f_i) const;
    double regression_head(const std::array<TensorT<T>, 4>& features) const;

    ModelCheckpoint to_checkpoint() const;
    void load_params(const ModelCheckpoint& ckpt);
};

using FfpnNet = FfpnNetT<float>;

// ---- training driver ------------------------------------------------------

struct TrainItem {
    std::string video_id;
    const PlanarVideo* video = nullptr;
    double alpha = 0.0;
};

struct TrainSchedule {
    int epochs = 30;
    int batch = 16;
    uint64_t seed = 0;
    double lr_backbone = 1e-3;
    double lr_fa_head = 1e-2;
    double weight_decay = 0.01;
    int lr_patience = 5; // halve when best epoch loss stagnates this long
};

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0.0;
    double lr_backbone = 0.0;
    double lr_fa_head = 0.0;
};

// Halves learning rates when no new best epoch-mean loss has been seen
// for `patience` consecutive epochs.
struct PlateauHalver {
    double best = std::numeric_limits<double>::infinity();
    int stagnant = 0;
    int patience = 5;

    struct Decision {
        bool new_best = false;
        bool halve = false;
    };
    Decision observe(double epoch_loss) {
        if (epoch_loss < best) {
            best = epoch_loss;
            stagnant = 0;
            return {true, false};
        }
        if (++stagnant >= patience) {
            stagnant = 0;
            return {false, true};
        }
        return {false, false};
    }
};

struct TrainResult {
    ModelCheckpoint best;
    std::vector<EpochLog> log;
    double best_loss = 0.0;
    int best_epoch = -1;
};

TrainResult train_ffpn(const std::vector<TrainItem>& data, const FfpnConfig& cfg,
                       const SamplerConfig& sampler, const GaussianSpec& mask_spec,
                       const TrainSchedule& schedule);

// ---- inference -------------------------------------------------------------

// Serialized alongside the weights so predict can rebuild the pipeline.
struct CheckpointMeta {
    FfpnConfig ffpn;
    SamplerConfig sampler;
    GaussianSpec mask_spec;
    int best_epoch = -1;
    float best_loss = 0.0f;
};

void write_meta(ModelCheckpoint& ckpt, const CheckpointMeta& meta);
CheckpointMeta read_meta(const ModelCheckpoint& ckpt);

// Draws n_clips seeded clips, scores each, clamps per-clip scores to the
// strategy range and averages them.
Prediction predict_video(const PlanarVideo& video, const ModelCheckpoint& ckpt,
                         int n_clips, uint64_t seed);

// Tensor conversion: planes are scaled by 1/255 on the way in.
Tensor clips_to_tensor(const std::vector<const std::vector<Plane>*>& plane_lists);

} // namespace hfprep
