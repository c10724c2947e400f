#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "rdtrack/nn_layers.hpp"
#include "rdtrack/rng.hpp"

using namespace rdtrack;
using namespace rdtrack::nn;

namespace {

Tensor random_tensor(int c, int h, int w, std::uint64_t seed) {
    Tensor t(c, h, w);
    RngStream rng(seed, 0, "layer-test");
    for (auto& v : t.v) v = rng.gaussian();
    return t;
}

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed, 1, "layer-test");
    std::vector<double> v(n);
    for (auto& x : v) x = 0.5 * rng.gaussian();
    return v;
}

// Random linear functional L = sum(r .* out) so that g_out = r. A quadratic
// loss would be degenerate for the normalization layers (their output norm is
// fixed by construction, leaving only an eps-sized true gradient).
struct LinearLoss {
    Tensor direction;
    explicit LinearLoss(const Tensor& shaped) : direction(shaped.c, shaped.h, shaped.w) {
        RngStream rng(99, 0, "loss-direction");
        for (auto& v : direction.v) v = rng.gaussian();
    }
    double operator()(const Tensor& out) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < out.v.size(); ++i) acc += direction.v[i] * out.v[i];
        return acc;
    }
};

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// central-difference check of d loss / d params[i] for a sample of indices;
// pairs below FD resolution are both zero within measurement noise
void check_param_grads(std::vector<double>& params, const std::vector<double>& analytic,
                       const std::function<double()>& eval, double tol = 1e-6) {
    const double eps = 1e-5;
    const std::size_t stride = std::max<std::size_t>(1, params.size() / 25);
    for (std::size_t i = 0; i < params.size(); i += stride) {
        const double saved = params[i];
        params[i] = saved + eps;
        const double lp = eval();
        params[i] = saved - eps;
        const double lm = eval();
        params[i] = saved;
        const double fd = (lp - lm) / (2.0 * eps);
        if (std::abs(analytic[i]) < 1e-7 && std::abs(fd) < 1e-7) continue;
        CHECK(rel_err(analytic[i], fd) < tol);
    }
}

}  // namespace

TEST_CASE("conv2d gradients match finite differences") {
    const ConvSpec spec{3, 5, 3, 2, 1};
    Tensor in = random_tensor(3, 10, 8, 1);
    auto w = random_vec(static_cast<size_t>(5) * 3 * 3 * 3, 2);
    auto b = random_vec(5, 3);

    const LinearLoss loss(conv2d_forward(in, w, b, spec));
    Tensor g_in;
    std::vector<double> g_w(w.size(), 0.0), g_b(b.size(), 0.0);
    conv2d_backward(in, w, spec, loss.direction, g_in, g_w, g_b);

    auto eval = [&] { return loss(conv2d_forward(in, w, b, spec)); };
    check_param_grads(w, g_w, eval);
    check_param_grads(b, g_b, eval);
    check_param_grads(in.v, g_in.v, eval);
}

TEST_CASE("instance norm gradients match finite differences") {
    Tensor in = random_tensor(4, 6, 6, 5);
    InstNormCache cache;
    const LinearLoss loss(instance_norm_forward(in, cache));
    const Tensor g_in = instance_norm_backward(cache, loss.direction);
    auto eval = [&] {
        InstNormCache c;
        return loss(instance_norm_forward(in, c));
    };
    check_param_grads(in.v, g_in.v, eval);
}

TEST_CASE("silu gradients match finite differences") {
    Tensor in = random_tensor(2, 5, 5, 7);
    const LinearLoss loss(silu_forward(in));
    const Tensor g_in = silu_backward(in, loss.direction);
    auto eval = [&] { return loss(silu_forward(in)); };
    check_param_grads(in.v, g_in.v, eval);

    CHECK(silu(0.0) == 0.0);
    CHECK(silu(30.0) == doctest::Approx(30.0).epsilon(1e-9));
    CHECK(silu(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
}

TEST_CASE("layer norm gradients match finite differences") {
    Tensor in = random_tensor(6, 4, 4, 9);
    auto gamma = random_vec(6, 10);
    for (auto& g : gamma) g += 1.0;
    auto beta = random_vec(6, 11);

    LayerNormCache cache;
    const LinearLoss loss(layer_norm_forward(in, gamma, beta, cache));
    std::vector<double> g_gamma(6, 0.0), g_beta(6, 0.0);
    const Tensor g_in = layer_norm_backward(cache, gamma, loss.direction, g_gamma, g_beta);

    auto eval = [&] {
        LayerNormCache c;
        return loss(layer_norm_forward(in, gamma, beta, c));
    };
    check_param_grads(in.v, g_in.v, eval);
    check_param_grads(gamma, g_gamma, eval);
    check_param_grads(beta, g_beta, eval);
}

TEST_CASE("windowed attention gradients match finite differences") {
    const int c = 8, heads = 2, window = 2;
    for (int shift : {0, 1}) {
        CAPTURE(shift);
        Tensor in = random_tensor(c, 4, 4, 20 + shift);
        std::vector<std::vector<double>> params;
        for (int i = 0; i < 4; ++i) params.push_back(random_vec(c * c, 30 + i));
        for (int i = 0; i < 4; ++i) params.push_back(random_vec(c, 40 + i));
        AttentionWeights w{params[0], params[4], params[1], params[5],
                           params[2], params[6], params[3], params[7]};

        WmsaCache cache;
        const LinearLoss loss(wmsa_forward(in, w, window, shift, heads, cache));

        // attention rows are softmax-normalized
        const int t_count = window * window;
        for (const auto& wc : cache.windows) {
            for (int h = 0; h < heads; ++h) {
                for (int i = 0; i < t_count; ++i) {
                    double row = 0.0;
                    for (int j = 0; j < t_count; ++j)
                        row += wc.attn[(static_cast<size_t>(h) * t_count + i) * t_count + j];
                    CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
                }
            }
        }

        std::vector<std::vector<double>> grads;
        for (int i = 0; i < 4; ++i) grads.emplace_back(c * c, 0.0);
        for (int i = 0; i < 4; ++i) grads.emplace_back(c, 0.0);
        AttentionGrads g{grads[0], grads[4], grads[1], grads[5],
                         grads[2], grads[6], grads[3], grads[7]};
        const Tensor g_in = wmsa_backward(w, cache, loss.direction, g);

        auto eval = [&] {
            WmsaCache scratch;
            return loss(wmsa_forward(in, w, window, shift, heads, scratch));
        };
        for (int i = 0; i < 8; ++i) check_param_grads(params[i], grads[i], eval);
        check_param_grads(in.v, g_in.v, eval);
    }
}

TEST_CASE("mlp gradients match finite differences") {
    const int c = 6, hidden = 10;
    Tensor in = random_tensor(c, 3, 3, 50);
    auto w1 = random_vec(static_cast<size_t>(hidden) * c, 51);
    auto b1 = random_vec(hidden, 52);
    auto w2 = random_vec(static_cast<size_t>(c) * hidden, 53);
    auto b2 = random_vec(c, 54);

    MlpCache cache;
    const LinearLoss loss(mlp_forward(in, w1, b1, w2, b2, hidden, cache));
    std::vector<double> g_w1(w1.size(), 0.0), g_b1(b1.size(), 0.0);
    std::vector<double> g_w2(w2.size(), 0.0), g_b2(b2.size(), 0.0);
    const Tensor g_in =
        mlp_backward(cache, w1, w2, hidden, loss.direction, g_w1, g_b1, g_w2, g_b2);

    auto eval = [&] {
        MlpCache c2;
        return loss(mlp_forward(in, w1, b1, w2, b2, hidden, c2));
    };
    check_param_grads(w1, g_w1, eval);
    check_param_grads(b1, g_b1, eval);
    check_param_grads(w2, g_w2, eval);
    check_param_grads(b2, g_b2, eval);
    check_param_grads(in.v, g_in.v, eval);
}

TEST_CASE("max pool keeps resolution and routes gradients to the argmax") {
    Tensor in = random_tensor(3, 9, 7, 60);
    PoolCache cache;
    const Tensor out = maxpool_forward(in, 5, cache);
    CHECK(out.h == in.h);
    CHECK(out.w == in.w);
    const LinearLoss loss(out);
    const Tensor g_in = maxpool_backward(in, cache, loss.direction);
    auto eval = [&] {
        PoolCache c;
        return loss(maxpool_forward(in, 5, c));
    };
    check_param_grads(in.v, g_in.v, eval, 1e-5);
}

TEST_CASE("cyclic shift rolls with wraparound and inverts") {
    Tensor in = random_tensor(2, 4, 6, 70);
    const Tensor rolled = cyclic_shift(in, -2, -2);
    CHECK(rolled.at(0, 0, 0) == in.at(0, 2, 2));
    CHECK(rolled.at(1, 3, 5) == in.at(1, (3 + 2) % 4, (5 + 2) % 6));
    const Tensor back = cyclic_shift(rolled, 2, 2);
    CHECK(back.v == in.v);
}

TEST_CASE("positional encoding endpoints and range") {
    const Tensor p = positional_encoding(6, 5, 16);
    const int half = 8;
    for (int lvl = 0; lvl < 4; ++lvl) {
        CHECK(p.at(2 * lvl, 0, 0) == 0.0);                // sin channels at (0,0)
        CHECK(p.at(2 * lvl + 1, 0, 0) == 1.0);            // cos channels at (0,0)
        CHECK(p.at(half + 2 * lvl, 0, 0) == 0.0);
        CHECK(p.at(half + 2 * lvl + 1, 0, 0) == 1.0);
    }
    for (double v : p.v) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    const Tensor q = positional_encoding(6, 5, 16);
    CHECK(p.v == q.v);  // input independent and deterministic
    CHECK_THROWS_AS(positional_encoding(4, 4, 6), ConfigError);
}
