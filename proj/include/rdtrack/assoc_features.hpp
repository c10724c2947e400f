#pragma once

#include <vector>

#include "rdtrack/tensor.hpp"
#include "rdtrack/types.hpp"

namespace rdtrack::assoc {

/// 3x3 conv (3 -> 64 channels) + SiLU + global average pool + L2 normalize.
struct EmbedWeights {
    std::vector<double> conv_w;  // [64][3][3][3]
    std::vector<double> conv_b;  // [64]

    /// Fixed seeded random projection; identical weights for a given seed.
    static EmbedWeights seeded(std::uint64_t seed = 7);
};

constexpr int kPatchSize = 16;

/// Feature of the 16x16x3 patch centered at the detection (zero-padded at the
/// grid edges). A degenerate all-zero response maps to the basis vector e1.
FeatureVec embed_patch(const Tensor& rd_tensor, const Detection& det, const EmbedWeights& w);

/// 1 - a.b on unit vectors, in [0,2].
double cosine_distance(const FeatureVec& a, const FeatureVec& b);

/// Convex blend alpha*track + (1-alpha)*det, re-normalized to the unit sphere;
/// a near-zero blend keeps the track feature.
FeatureVec ema_update(const FeatureVec& track_f, const FeatureVec& det_f, double alpha);

}  // namespace rdtrack::assoc
