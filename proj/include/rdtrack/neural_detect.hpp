#pragma once

#include <string>
#include <vector>

#include "rdtrack/nn_layers.hpp"
#include "rdtrack/tensor.hpp"
#include "rdtrack/types.hpp"

namespace rdtrack::nn {

struct ParamArray {
    std::string name;
    std::vector<int> shape;
    std::vector<double> data;
};

/// Named parameter arrays; shapes fixed by the architecture.
struct WeightSet {
    std::vector<ParamArray> arrays;

    ParamArray& at(const std::string& name);
    const ParamArray& at(const std::string& name) const;
    std::span<double> span(const std::string& name) { return at(name).data; }
    std::span<const double> span(const std::string& name) const { return at(name).data; }
};

// Architecture constants (desk scale): 3->16->32->64 strided encoder, one
// residual block, two windowed attention blocks (the second cyclically
// shifted), SPPF, 1x1 head. Output grid is input/8.
inline constexpr int kFeatureChannels = 64;
inline constexpr int kAttnHeads = 4;
inline constexpr int kAttnWindow = 4;
inline constexpr int kMlpHidden = 128;
inline constexpr int kDownsample = 8;

/// Allocate every array with its architectural shape, data zeroed.
WeightSet make_weight_set();

/// He-style seeded uniform init; norm scales 1, shifts and biases 0.
WeightSet init_weights(std::uint64_t seed);

/// Detection map: channel 0 confidence logit, 1 range offset logit,
/// 2 doppler offset logit, on the (R/8) x (D/8) grid.
using DetectionMap = Tensor;

/// Everything backward() needs; valid for the forward() call that filled it.
struct ForwardCache {
    Tensor input;
    Tensor enc_in[3];        // conv outputs (pre-IN)
    InstNormCache enc_norm[3];
    Tensor enc_act_in[3];    // IN outputs (pre-SiLU)
    Tensor enc_out[3];
    Tensor res_c1_out, res_c1_act, res_c2_out, res_sum;
    Tensor res_out;          // after final SiLU
    Tensor pos_added;
    struct Block {
        LayerNormCache ln1;
        WmsaCache attn;
        Tensor after_attn;
        LayerNormCache ln2;
        MlpCache mlp;
        Tensor after_mlp;
    } blocks[2];
    PoolCache pools[3];
    Tensor pool_in[3];
    Tensor sppf_concat;
    Tensor sppf_fused;       // pre-SiLU
    Tensor sppf_out;
    bool valid = false;
};

DetectionMap forward(const Tensor& input, const WeightSet& w, ForwardCache& cache);

/// Gradients for every parameter, same array layout as the weights.
WeightSet backward(const ForwardCache& cache, const WeightSet& w, const Tensor& g_map);

struct LossResult {
    double total = 0.0;
    double position = 0.0;    // sum of per-cell position terms (unweighted)
    double confidence = 0.0;  // sum of per-cell BCE terms (unweighted)
    Tensor grad;              // d total / d map
    int duplicate_truth_warnings = 0;
};

/// lambda1 * sum(position squared error, sigmoid-decoded offsets, positive
/// cells) + lambda2 * sum(BCE of sigmoid confidence vs occupancy, all cells).
LossResult loss(const DetectionMap& map, const GroundTruthFrame& truth, double lambda1,
                double lambda2);

/// Max relative error between analytic and central-difference gradients over a
/// random subsample of at least `per_array` parameters per array.
double grad_check(const WeightSet& w, const Tensor& input, const GroundTruthFrame& truth,
                  double lambda1, double lambda2, double eps = 1e-5, int per_array = 10,
                  std::uint64_t seed = 1);

/// Cells above the confidence threshold that are local maxima among their
/// 8-neighbors decode to (cell + sigmoid(offset)) * 8.
std::vector<Detection> decode_detections(const DetectionMap& map, double conf_threshold);

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 10;
    int batch_size = 16;
    Interval augment_noise_std{0.0, 0.05};
    int augment_off_epochs = 3;
    double lambda1 = 0.7;
    double lambda2 = 0.3;
    std::uint64_t seed = 1;

    void validate() const {
        if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
        if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
        if (lambda1 < 0 || lambda2 < 0) throw ConfigError("train: lambdas must be >= 0");
    }
};

struct TrainResult {
    WeightSet weights;
    std::vector<double> epoch_loss;  // mean per-frame loss per epoch
};

/// Adam (beta1 0.9, beta2 0.999, eps 1e-8) on the weighted loss; Gaussian
/// noise augmentation on inputs except during the final augment_off_epochs.
/// Deterministic given cfg.seed. Throws NumericError on non-finite loss.
TrainResult train(const std::vector<std::pair<Tensor, GroundTruthFrame>>& dataset,
                  const TrainConfig& cfg);

// Weight file: magic "INDTW1", u32 array count, then per array u32 name
// length, name bytes, u32 rank, u32 dims, float64 data (little-endian).
void write_weights(const WeightSet& w, const std::string& path);
WeightSet read_weights(const std::string& path);

}  // namespace rdtrack::nn
