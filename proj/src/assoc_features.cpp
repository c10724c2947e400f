#include "rdtrack/assoc_features.hpp"

#include <cmath>

#include "rdtrack/rng.hpp"

namespace rdtrack::assoc {

namespace {
double silu(double x) { return x / (1.0 + std::exp(-x)); }
}  // namespace

EmbedWeights EmbedWeights::seeded(std::uint64_t seed) {
    EmbedWeights w;
    w.conv_w.resize(static_cast<size_t>(kFeatureDim) * 3 * 3 * 3);
    w.conv_b.resize(kFeatureDim);
    RngStream rng(seed, 0, "embed-weights");
    const double scale = std::sqrt(2.0 / (3.0 * 3.0 * 3.0));
    for (auto& x : w.conv_w) x = scale * rng.gaussian();
    for (auto& x : w.conv_b) x = 0.0;
    return w;
}

FeatureVec embed_patch(const Tensor& rd_tensor, const Detection& det, const EmbedWeights& w) {
    const int half = kPatchSize / 2;
    const int cr = static_cast<int>(std::lround(det.range_bin));
    const int cd = static_cast<int>(std::lround(det.doppler_bin));

    // zero-padded patch, 3 x 16 x 16
    double patch[3][kPatchSize][kPatchSize] = {};
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < kPatchSize; ++y) {
            const int ry = cr - half + y;
            if (ry < 0 || ry >= rd_tensor.h) continue;
            for (int x = 0; x < kPatchSize; ++x) {
                const int dx = cd - half + x;
                if (dx < 0 || dx >= rd_tensor.w) continue;
                patch[c][y][x] = rd_tensor.at(c, ry, dx);
            }
        }
    }

    FeatureVec f{};
    for (int oc = 0; oc < kFeatureDim; ++oc) {
        double pooled = 0.0;
        for (int y = 0; y < kPatchSize; ++y) {
            for (int x = 0; x < kPatchSize; ++x) {
                double acc = w.conv_b[oc];
                for (int ic = 0; ic < 3; ++ic) {
                    for (int ky = -1; ky <= 1; ++ky) {
                        for (int kx = -1; kx <= 1; ++kx) {
                            const int yy = y + ky, xx = x + kx;
                            if (yy < 0 || yy >= kPatchSize || xx < 0 || xx >= kPatchSize)
                                continue;
                            acc += w.conv_w[((static_cast<size_t>(oc) * 3 + ic) * 3 + ky + 1) * 3 +
                                            kx + 1] *
                                   patch[ic][yy][xx];
                        }
                    }
                }
                pooled += silu(acc);
            }
        }
        f[oc] = pooled / (kPatchSize * kPatchSize);
    }

    double norm2 = 0.0;
    for (double x : f) norm2 += x * x;
    if (norm2 < 1e-24) {
        f.fill(0.0);
        f[0] = 1.0;
        return f;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : f) x *= inv;
    return f;
}

double cosine_distance(const FeatureVec& a, const FeatureVec& b) {
    double dot = 0.0;
    for (int i = 0; i < kFeatureDim; ++i) dot += a[i] * b[i];
    return 1.0 - dot;
}

FeatureVec ema_update(const FeatureVec& track_f, const FeatureVec& det_f, double alpha) {
    FeatureVec raw{};
    double norm2 = 0.0;
    for (int i = 0; i < kFeatureDim; ++i) {
        raw[i] = alpha * track_f[i] + (1.0 - alpha) * det_f[i];
        norm2 += raw[i] * raw[i];
    }
    if (norm2 < 1e-24) return track_f;
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : raw) x *= inv;
    return raw;
}

}  // namespace rdtrack::assoc
