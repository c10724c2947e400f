#pragma once

#include <span>
#include <vector>

#include "rdtrack/tensor.hpp"
#include "rdtrack/types.hpp"

namespace rdtrack::nn {

double silu(double x);

struct ConvSpec {
    int in_c = 0, out_c = 0, k = 3, stride = 1, pad = 1;
};

// weights laid out [out_c][in_c][k][k], bias [out_c]
Tensor conv2d_forward(const Tensor& in, std::span<const double> w, std::span<const double> b,
                      const ConvSpec& spec);
Tensor conv2d_forward_serial(const Tensor& in, std::span<const double> w,
                             std::span<const double> b, const ConvSpec& spec);

/// Accumulates into g_w/g_b (callers zero or batch-accumulate); overwrites g_in.
void conv2d_backward(const Tensor& in, std::span<const double> w, const ConvSpec& spec,
                     const Tensor& g_out, Tensor& g_in, std::span<double> g_w,
                     std::span<double> g_b);
void conv2d_backward_serial(const Tensor& in, std::span<const double> w, const ConvSpec& spec,
                            const Tensor& g_out, Tensor& g_in, std::span<double> g_w,
                            std::span<double> g_b);

// ---- instance norm (no affine), per channel over H*W ----
struct InstNormCache {
    std::vector<double> inv_std;  // per channel
    Tensor normalized;
};
Tensor instance_norm_forward(const Tensor& in, InstNormCache& cache, double eps = 1e-5);
Tensor instance_norm_backward(const InstNormCache& cache, const Tensor& g_out);

// ---- SiLU ----
Tensor silu_forward(const Tensor& in);
Tensor silu_backward(const Tensor& in, const Tensor& g_out);

// ---- layer norm over channels at each spatial token ----
struct LayerNormCache {
    std::vector<double> inv_std;  // per token
    Tensor normalized;
};
Tensor layer_norm_forward(const Tensor& in, std::span<const double> gamma,
                          std::span<const double> beta, LayerNormCache& cache, double eps = 1e-5);
Tensor layer_norm_backward(const LayerNormCache& cache, std::span<const double> gamma,
                           const Tensor& g_out, std::span<double> g_gamma,
                           std::span<double> g_beta);

// ---- windowed multi-head self-attention ----
struct AttentionWeights {
    std::span<const double> wq, bq, wk, bk, wv, bv, wo, bo;  // w: C x C, b: C
};
struct AttentionGrads {
    std::span<double> wq, bq, wk, bk, wv, bv, wo, bo;
};
struct WmsaWindowCache {
    std::vector<double> x;       // T x C tokens
    std::vector<double> q, k, v; // T x C
    std::vector<double> attn;    // heads x T x T, post softmax
    std::vector<double> ctx;     // T x C concatenated head outputs
};
struct WmsaCache {
    int window = 0, shift = 0, heads = 0;
    std::vector<WmsaWindowCache> windows;
};

/// Attention within non-overlapping window x window tiles; `shift` applies a
/// cyclic roll by -shift before partitioning (and rolls back after).
Tensor wmsa_forward(const Tensor& in, const AttentionWeights& w, int window, int shift, int heads,
                    WmsaCache& cache);
Tensor wmsa_backward(const AttentionWeights& w, const WmsaCache& cache, const Tensor& g_out,
                     AttentionGrads& g);

// ---- token-wise MLP with SiLU hidden activation ----
struct MlpCache {
    Tensor in;
    Tensor hidden_pre;  // before SiLU
};
Tensor mlp_forward(const Tensor& in, std::span<const double> w1, std::span<const double> b1,
                   std::span<const double> w2, std::span<const double> b2, int hidden,
                   MlpCache& cache);
Tensor mlp_backward(const MlpCache& cache, std::span<const double> w1, std::span<const double> w2,
                    int hidden, const Tensor& g_out, std::span<double> g_w1,
                    std::span<double> g_b1, std::span<double> g_w2, std::span<double> g_b2);

// ---- max pool, stride 1, same padding ----
struct PoolCache {
    std::vector<std::int64_t> argmax;  // flat input index per output element
};
Tensor maxpool_forward(const Tensor& in, int k, PoolCache& cache);
Tensor maxpool_backward(const Tensor& in, const PoolCache& cache, const Tensor& g_out);

/// Cyclic roll by (dy, dx) with wraparound.
Tensor cyclic_shift(const Tensor& in, int dy, int dx);

/// DETR-style 2D sine/cosine encoding: first c/2 channels encode the row
/// index, the rest the column, sin/cos interleaved at geometric frequencies.
Tensor positional_encoding(int h, int w, int c);

}  // namespace rdtrack::nn
