#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rdtrack/assoc_features.hpp"
#include "rdtrack/rng.hpp"

using namespace rdtrack;

namespace {

double norm_of(const FeatureVec& f) {
    double n2 = 0.0;
    for (double x : f) n2 += x * x;
    return std::sqrt(n2);
}

FeatureVec unit(int axis) {
    FeatureVec f{};
    f[axis] = 1.0;
    return f;
}

Tensor random_tensor(int h, int w, std::uint64_t seed) {
    Tensor t(3, h, w);
    RngStream rng(seed, 0, "feat-tensor");
    for (auto& v : t.v) v = rng.uniform();
    return t;
}

}  // namespace

TEST_CASE("embed_patch produces deterministic unit features") {
    const auto w = assoc::EmbedWeights::seeded();
    const Tensor t = random_tensor(64, 64, 3);
    Detection d;
    d.range_bin = 30.0;
    d.doppler_bin = 28.0;
    const FeatureVec a = assoc::embed_patch(t, d, w);
    const FeatureVec b = assoc::embed_patch(t, d, w);
    CHECK(a == b);
    CHECK(norm_of(a) == doctest::Approx(1.0).epsilon(1e-9));

    // near-edge detections still give unit features (zero padding)
    d.range_bin = 1.0;
    d.doppler_bin = 62.0;
    CHECK(norm_of(assoc::embed_patch(t, d, w)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("all-zero patch maps to the first basis vector") {
    const auto w = assoc::EmbedWeights::seeded();
    Tensor t(3, 64, 64);  // zeros
    Detection d;
    d.range_bin = 32.0;
    d.doppler_bin = 32.0;
    CHECK(assoc::embed_patch(t, d, w) == unit(0));
}

TEST_CASE("embed_patch is translation consistent away from edges") {
    const auto w = assoc::EmbedWeights::seeded();
    Tensor t(3, 96, 96);
    RngStream rng(5, 0, "patch");
    // paint a random 16x16 block at one location, zeros elsewhere
    std::vector<double> block(3 * 16 * 16);
    for (auto& v : block) v = rng.uniform();
    auto paint = [&](Tensor& dst, int r0, int d0) {
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < 16; ++y)
                for (int x = 0; x < 16; ++x)
                    dst.at(c, r0 - 8 + y, d0 - 8 + x) = block[(c * 16 + y) * 16 + x];
    };
    Tensor t1 = t, t2 = t;
    paint(t1, 30, 30);
    paint(t2, 60, 52);
    Detection d1, d2;
    d1.range_bin = 30;
    d1.doppler_bin = 30;
    d2.range_bin = 60;
    d2.doppler_bin = 52;
    const auto f1 = assoc::embed_patch(t1, d1, w);
    const auto f2 = assoc::embed_patch(t2, d2, w);
    for (int i = 0; i < kFeatureDim; ++i) CHECK(f1[i] == doctest::Approx(f2[i]).epsilon(1e-9));
}

TEST_CASE("cosine distance endpoints") {
    const FeatureVec a = unit(0);
    FeatureVec minus_a{};
    minus_a[0] = -1.0;
    CHECK(assoc::cosine_distance(a, a) == 0.0);
    CHECK(assoc::cosine_distance(a, unit(1)) == 1.0);
    CHECK(assoc::cosine_distance(a, minus_a) == 2.0);
}

TEST_CASE("cosine distance is symmetric and zero only at equality") {
    RngStream rng(9, 0, "cos");
    for (int trial = 0; trial < 50; ++trial) {
        FeatureVec a{}, b{};
        double na = 0, nb = 0;
        for (int i = 0; i < kFeatureDim; ++i) {
            a[i] = rng.gaussian();
            b[i] = rng.gaussian();
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        for (int i = 0; i < kFeatureDim; ++i) {
            a[i] /= std::sqrt(na);
            b[i] /= std::sqrt(nb);
        }
        const double dab = assoc::cosine_distance(a, b);
        CHECK(dab == assoc::cosine_distance(b, a));
        CHECK(dab >= 0.0);
        CHECK(dab <= 2.0);
        CHECK(dab > 1e-6);  // random pairs are not equal
        CHECK(assoc::cosine_distance(a, a) < 1e-12);
    }
}

TEST_CASE("ema_update blends and renormalizes") {
    const FeatureVec t = unit(0);
    const FeatureVec d = unit(1);

    SUBCASE("identical inputs are a fixed point") {
        const auto out = assoc::ema_update(t, t, 0.7);
        for (int i = 0; i < kFeatureDim; ++i) CHECK(out[i] == doctest::Approx(t[i]).epsilon(1e-12));
    }
    SUBCASE("alpha = 1 keeps the track feature") {
        const auto out = assoc::ema_update(t, d, 1.0);
        for (int i = 0; i < kFeatureDim; ++i) CHECK(out[i] == doctest::Approx(t[i]).epsilon(1e-12));
    }
    SUBCASE("orthogonal blend at alpha 0.7 normalizes (0.7, 0.3)") {
        const auto out = assoc::ema_update(t, d, 0.7);
        CHECK(out[0] == doctest::Approx(0.9191450300180579).epsilon(1e-12));
        CHECK(out[1] == doctest::Approx(0.39391929857916763).epsilon(1e-12));
        for (int i = 2; i < kFeatureDim; ++i) CHECK(out[i] == 0.0);
        CHECK(norm_of(out) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("antipodal blend at alpha 0.5 keeps the track feature") {
        FeatureVec minus_t{};
        minus_t[0] = -1.0;
        const auto out = assoc::ema_update(t, minus_t, 0.5);
        CHECK(out == t);
    }
}

TEST_CASE("ema_update commutes with rotations") {
    // Givens rotation in the (0, 1) plane applied to both inputs
    const double ang = 0.83;
    auto rotate = [&](const FeatureVec& f) {
        FeatureVec r = f;
        r[0] = std::cos(ang) * f[0] - std::sin(ang) * f[1];
        r[1] = std::sin(ang) * f[0] + std::cos(ang) * f[1];
        return r;
    };
    RngStream rng(15, 0, "ema-rot");
    for (int trial = 0; trial < 20; ++trial) {
        FeatureVec a{}, b{};
        double na = 0, nb = 0;
        for (int i = 0; i < kFeatureDim; ++i) {
            a[i] = rng.gaussian();
            b[i] = rng.gaussian();
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        for (int i = 0; i < kFeatureDim; ++i) {
            a[i] /= std::sqrt(na);
            b[i] /= std::sqrt(nb);
        }
        const auto direct = rotate(assoc::ema_update(a, b, 0.7));
        const auto rotated = assoc::ema_update(rotate(a), rotate(b), 0.7);
        for (int i = 0; i < kFeatureDim; ++i)
            CHECK(direct[i] == doctest::Approx(rotated[i]).epsilon(1e-10));
    }
}
