#include "rdtrack/neural_detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <numeric>

#include "rdtrack/rng.hpp"

namespace rdtrack::nn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ArraySpec {
    std::string name;
    std::vector<int> shape;
};

std::vector<ArraySpec> architecture() {
    std::vector<ArraySpec> specs = {
        {"enc1.w", {16, 3, 3, 3}},   {"enc1.b", {16}},
        {"enc2.w", {32, 16, 3, 3}},  {"enc2.b", {32}},
        {"enc3.w", {64, 32, 3, 3}},  {"enc3.b", {64}},
        {"res.c1.w", {64, 64, 3, 3}}, {"res.c1.b", {64}},
        {"res.c2.w", {64, 64, 3, 3}}, {"res.c2.b", {64}},
    };
    for (int b = 1; b <= 2; ++b) {
        const std::string p = "blk" + std::to_string(b) + ".";
        auto add = [&](const char* n, std::vector<int> s) {
            specs.push_back({p + n, std::move(s)});
        };
        add("ln1.g", {64});
        add("ln1.b", {64});
        add("q.w", {64, 64});
        add("q.b", {64});
        add("k.w", {64, 64});
        add("k.b", {64});
        add("v.w", {64, 64});
        add("v.b", {64});
        add("o.w", {64, 64});
        add("o.b", {64});
        add("ln2.g", {64});
        add("ln2.b", {64});
        add("mlp1.w", {kMlpHidden, 64});
        add("mlp1.b", {kMlpHidden});
        add("mlp2.w", {64, kMlpHidden});
        add("mlp2.b", {64});
    }
    specs.push_back({"sppf.w", {64, 256, 1, 1}});
    specs.push_back({"sppf.b", {64}});
    specs.push_back({"head.w", {3, 64, 1, 1}});
    specs.push_back({"head.b", {3}});
    return specs;
}

std::size_t shape_size(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    return n;
}

WeightSet zero_like(const WeightSet& w) {
    WeightSet z;
    z.arrays.reserve(w.arrays.size());
    for (const auto& a : w.arrays)
        z.arrays.push_back({a.name, a.shape, std::vector<double>(a.data.size(), 0.0)});
    return z;
}

AttentionWeights attn_weights(const WeightSet& w, const std::string& p) {
    return {w.span(p + "q.w"), w.span(p + "q.b"), w.span(p + "k.w"), w.span(p + "k.b"),
            w.span(p + "v.w"), w.span(p + "v.b"), w.span(p + "o.w"), w.span(p + "o.b")};
}

AttentionGrads attn_grads(WeightSet& g, const std::string& p) {
    return {g.span(p + "q.w"), g.span(p + "q.b"), g.span(p + "k.w"), g.span(p + "k.b"),
            g.span(p + "v.w"), g.span(p + "v.b"), g.span(p + "o.w"), g.span(p + "o.b")};
}

void add_in_place(Tensor& a, const Tensor& b) {
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
}

}  // namespace

ParamArray& WeightSet::at(const std::string& name) {
    for (auto& a : arrays)
        if (a.name == name) return a;
    throw DataError("WeightSet: no array named " + name);
}

const ParamArray& WeightSet::at(const std::string& name) const {
    for (const auto& a : arrays)
        if (a.name == name) return a;
    throw DataError("WeightSet: no array named " + name);
}

WeightSet make_weight_set() {
    WeightSet w;
    for (const auto& spec : architecture())
        w.arrays.push_back(
            {spec.name, spec.shape, std::vector<double>(shape_size(spec.shape), 0.0)});
    return w;
}

WeightSet init_weights(std::uint64_t seed) {
    WeightSet w = make_weight_set();
    RngStream rng(seed, 0, "weight-init");
    for (auto& a : w.arrays) {
        const bool is_norm_gain = a.name.find("ln") != std::string::npos &&
                                  a.name.size() >= 2 && a.name.substr(a.name.size() - 2) == ".g";
        const bool is_bias_like = a.shape.size() == 1;
        if (is_norm_gain) {
            std::fill(a.data.begin(), a.data.end(), 1.0);
        } else if (is_bias_like) {
            std::fill(a.data.begin(), a.data.end(), 0.0);
        } else {
            std::size_t fan_in = 1;
            for (std::size_t i = 1; i < a.shape.size(); ++i)
                fan_in *= static_cast<size_t>(a.shape[i]);
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
            for (auto& x : a.data) x = rng.uniform(-limit, limit);
        }
    }
    return w;
}

DetectionMap forward(const Tensor& input, const WeightSet& w, ForwardCache& cache) {
    if (input.c != 3) throw DataError("forward: input must have 3 channels");
    if (input.h % (kDownsample * kAttnWindow) != 0 || input.w % (kDownsample * kAttnWindow) != 0)
        throw DataError("forward: grid must be divisible by 8*window");

    cache = ForwardCache{};
    cache.input = input;

    static const ConvSpec enc_specs[3] = {
        {3, 16, 3, 2, 1}, {16, 32, 3, 2, 1}, {32, 64, 3, 2, 1}};
    static const char* enc_names[3] = {"enc1", "enc2", "enc3"};

    const Tensor* cur = &input;
    for (int i = 0; i < 3; ++i) {
        const std::string n = enc_names[i];
        cache.enc_in[i] = conv2d_forward(*cur, w.span(n + ".w"), w.span(n + ".b"), enc_specs[i]);
        cache.enc_act_in[i] = instance_norm_forward(cache.enc_in[i], cache.enc_norm[i]);
        cache.enc_out[i] = silu_forward(cache.enc_act_in[i]);
        cur = &cache.enc_out[i];
    }

    const ConvSpec res_spec{64, 64, 3, 1, 1};
    cache.res_c1_out = conv2d_forward(*cur, w.span("res.c1.w"), w.span("res.c1.b"), res_spec);
    cache.res_c1_act = silu_forward(cache.res_c1_out);
    cache.res_c2_out =
        conv2d_forward(cache.res_c1_act, w.span("res.c2.w"), w.span("res.c2.b"), res_spec);
    cache.res_sum = *cur;
    add_in_place(cache.res_sum, cache.res_c2_out);
    cache.res_out = silu_forward(cache.res_sum);

    cache.pos_added = cache.res_out;
    const Tensor pos = positional_encoding(cache.res_out.h, cache.res_out.w, kFeatureChannels);
    add_in_place(cache.pos_added, pos);

    Tensor x = cache.pos_added;
    for (int b = 0; b < 2; ++b) {
        const std::string p = "blk" + std::to_string(b + 1) + ".";
        const int shift = b == 1 ? kAttnWindow / 2 : 0;
        auto& bc = cache.blocks[b];
        const Tensor ln1_out =
            layer_norm_forward(x, w.span(p + "ln1.g"), w.span(p + "ln1.b"), bc.ln1);
        const Tensor attn_out =
            wmsa_forward(ln1_out, attn_weights(w, p), kAttnWindow, shift, kAttnHeads, bc.attn);
        bc.after_attn = x;
        add_in_place(bc.after_attn, attn_out);
        const Tensor ln2_out = layer_norm_forward(bc.after_attn, w.span(p + "ln2.g"),
                                                  w.span(p + "ln2.b"), bc.ln2);
        const Tensor mlp_out = mlp_forward(ln2_out, w.span(p + "mlp1.w"), w.span(p + "mlp1.b"),
                                           w.span(p + "mlp2.w"), w.span(p + "mlp2.b"), kMlpHidden,
                                           bc.mlp);
        bc.after_mlp = bc.after_attn;
        add_in_place(bc.after_mlp, mlp_out);
        x = bc.after_mlp;
    }

    // SPPF: three serial 5x5 max pools, concat with input, 1x1 fuse, SiLU.
    cache.pool_in[0] = x;
    Tensor p1 = maxpool_forward(cache.pool_in[0], 5, cache.pools[0]);
    cache.pool_in[1] = p1;
    Tensor p2 = maxpool_forward(cache.pool_in[1], 5, cache.pools[1]);
    cache.pool_in[2] = p2;
    Tensor p3 = maxpool_forward(cache.pool_in[2], 5, cache.pools[2]);

    const int gh = x.h, gw = x.w;
    cache.sppf_concat = Tensor(4 * kFeatureChannels, gh, gw);
    const std::size_t plane = static_cast<size_t>(gh) * gw;
    const Tensor* parts[4] = {&x, &p1, &p2, &p3};
    for (int s = 0; s < 4; ++s)
        std::copy(parts[s]->v.begin(), parts[s]->v.end(),
                  cache.sppf_concat.v.begin() + static_cast<size_t>(s) * kFeatureChannels * plane);

    const ConvSpec fuse_spec{4 * kFeatureChannels, 64, 1, 1, 0};
    cache.sppf_fused =
        conv2d_forward(cache.sppf_concat, w.span("sppf.w"), w.span("sppf.b"), fuse_spec);
    cache.sppf_out = silu_forward(cache.sppf_fused);

    const ConvSpec head_spec{64, 3, 1, 1, 0};
    DetectionMap map = conv2d_forward(cache.sppf_out, w.span("head.w"), w.span("head.b"), head_spec);
    cache.valid = true;
    return map;
}

WeightSet backward(const ForwardCache& cache, const WeightSet& w, const Tensor& g_map) {
    if (!cache.valid) throw DataError("backward: stale or missing forward cache");
    WeightSet g = zero_like(w);

    const ConvSpec head_spec{64, 3, 1, 1, 0};
    Tensor g_sppf_out;
    conv2d_backward(cache.sppf_out, w.span("head.w"), head_spec, g_map, g_sppf_out,
                    g.span("head.w"), g.span("head.b"));

    Tensor g_fused = silu_backward(cache.sppf_fused, g_sppf_out);
    const ConvSpec fuse_spec{4 * kFeatureChannels, 64, 1, 1, 0};
    Tensor g_concat;
    conv2d_backward(cache.sppf_concat, w.span("sppf.w"), fuse_spec, g_fused, g_concat,
                    g.span("sppf.w"), g.span("sppf.b"));

    const int gh = g_concat.h, gw = g_concat.w;
    const std::size_t plane = static_cast<size_t>(gh) * gw;
    Tensor g_parts[4];
    for (int s = 0; s < 4; ++s) {
        g_parts[s] = Tensor(kFeatureChannels, gh, gw);
        std::copy(g_concat.v.begin() + static_cast<size_t>(s) * kFeatureChannels * plane,
                  g_concat.v.begin() + static_cast<size_t>(s + 1) * kFeatureChannels * plane,
                  g_parts[s].v.begin());
    }
    // p3 -> p2 -> p1 -> x through the serial pools
    Tensor g_p2 = maxpool_backward(cache.pool_in[2], cache.pools[2], g_parts[3]);
    add_in_place(g_p2, g_parts[2]);
    Tensor g_p1 = maxpool_backward(cache.pool_in[1], cache.pools[1], g_p2);
    add_in_place(g_p1, g_parts[1]);
    Tensor g_x = maxpool_backward(cache.pool_in[0], cache.pools[0], g_p1);
    add_in_place(g_x, g_parts[0]);

    for (int b = 1; b >= 0; --b) {
        const std::string p = "blk" + std::to_string(b + 1) + ".";
        const auto& bc = cache.blocks[b];
        // after_mlp = after_attn + mlp(ln2(after_attn))
        Tensor g_ln2_out =
            mlp_backward(bc.mlp, w.span(p + "mlp1.w"), w.span(p + "mlp2.w"), kMlpHidden, g_x,
                         g.span(p + "mlp1.w"), g.span(p + "mlp1.b"), g.span(p + "mlp2.w"),
                         g.span(p + "mlp2.b"));
        Tensor g_after_attn = layer_norm_backward(bc.ln2, w.span(p + "ln2.g"), g_ln2_out,
                                                  g.span(p + "ln2.g"), g.span(p + "ln2.b"));
        add_in_place(g_after_attn, g_x);
        // after_attn = x_in + wmsa(ln1(x_in))
        AttentionGrads ag = attn_grads(g, p);
        Tensor g_ln1_out = wmsa_backward(attn_weights(w, p), bc.attn, g_after_attn, ag);
        Tensor g_x_in = layer_norm_backward(bc.ln1, w.span(p + "ln1.g"), g_ln1_out,
                                            g.span(p + "ln1.g"), g.span(p + "ln1.b"));
        add_in_place(g_x_in, g_after_attn);
        g_x = std::move(g_x_in);
    }

    // positional encoding is constant
    Tensor g_res_sum = silu_backward(cache.res_sum, g_x);

    const ConvSpec res_spec{64, 64, 3, 1, 1};
    Tensor g_res_c1_act;
    conv2d_backward(cache.res_c1_act, w.span("res.c2.w"), res_spec, g_res_sum, g_res_c1_act,
                    g.span("res.c2.w"), g.span("res.c2.b"));
    Tensor g_res_c1_out = silu_backward(cache.res_c1_out, g_res_c1_act);
    Tensor g_enc3;
    conv2d_backward(cache.enc_out[2], w.span("res.c1.w"), res_spec, g_res_c1_out, g_enc3,
                    g.span("res.c1.w"), g.span("res.c1.b"));
    add_in_place(g_enc3, g_res_sum);  // skip connection

    static const ConvSpec enc_specs[3] = {
        {3, 16, 3, 2, 1}, {16, 32, 3, 2, 1}, {32, 64, 3, 2, 1}};
    static const char* enc_names[3] = {"enc1", "enc2", "enc3"};
    Tensor g_cur = std::move(g_enc3);
    for (int i = 2; i >= 0; --i) {
        const std::string n = enc_names[i];
        Tensor g_norm_out = silu_backward(cache.enc_act_in[i], g_cur);
        Tensor g_conv_out = instance_norm_backward(cache.enc_norm[i], g_norm_out);
        const Tensor& conv_in = i == 0 ? cache.input : cache.enc_out[i - 1];
        Tensor g_in;
        conv2d_backward(conv_in, w.span(n + ".w"), enc_specs[i], g_conv_out, g_in,
                        g.span(n + ".w"), g.span(n + ".b"));
        g_cur = std::move(g_in);
    }
    return g;
}

LossResult loss(const DetectionMap& map, const GroundTruthFrame& truth, double lambda1,
                double lambda2) {
    const int gh = map.h, gw = map.w;
    LossResult res;
    res.grad = Tensor(3, gh, gw);

    // positive-cell assignment: the single cell containing each truth point
    std::vector<double> off_r(static_cast<size_t>(gh) * gw, 0.0);
    std::vector<double> off_d(static_cast<size_t>(gh) * gw, 0.0);
    std::vector<char> positive(static_cast<size_t>(gh) * gw, 0);
    for (const auto& e : truth.entries) {
        if (e.range_bin < 0 || e.range_bin >= gh * kDownsample || e.doppler_bin < 0 ||
            e.doppler_bin >= gw * kDownsample)
            throw DataError("loss: truth bin outside grid");
        const int cr = static_cast<int>(e.range_bin / kDownsample);
        const int cd = static_cast<int>(e.doppler_bin / kDownsample);
        const std::size_t cell = static_cast<size_t>(cr) * gw + cd;
        if (positive[cell]) {
            ++res.duplicate_truth_warnings;
            continue;
        }
        positive[cell] = 1;
        off_r[cell] = e.range_bin / kDownsample - cr;
        off_d[cell] = e.doppler_bin / kDownsample - cd;
    }

    for (int y = 0; y < gh; ++y) {
        for (int x = 0; x < gw; ++x) {
            const std::size_t cell = static_cast<size_t>(y) * gw + x;
            const double lc = map.at(0, y, x);
            const double occ = positive[cell] ? 1.0 : 0.0;
            // numerically stable BCE-with-logits
            res.confidence +=
                std::max(lc, 0.0) - lc * occ + std::log1p(std::exp(-std::abs(lc)));
            res.grad.at(0, y, x) = lambda2 * (sigmoid(lc) - occ);
            if (positive[cell]) {
                const double lr = map.at(1, y, x);
                const double ld = map.at(2, y, x);
                const double pr = sigmoid(lr), pd = sigmoid(ld);
                const double er = pr - off_r[cell], ed = pd - off_d[cell];
                res.position += er * er + ed * ed;
                res.grad.at(1, y, x) = lambda1 * 2.0 * er * pr * (1.0 - pr);
                res.grad.at(2, y, x) = lambda1 * 2.0 * ed * pd * (1.0 - pd);
            }
        }
    }
    res.total = lambda1 * res.position + lambda2 * res.confidence;
    return res;
}

double grad_check(const WeightSet& w, const Tensor& input, const GroundTruthFrame& truth,
                  double lambda1, double lambda2, double eps, int per_array,
                  std::uint64_t seed) {
    ForwardCache cache;
    const DetectionMap map = forward(input, w, cache);
    const LossResult base = loss(map, truth, lambda1, lambda2);
    const WeightSet analytic = backward(cache, w, base.grad);

    WeightSet probe = w;
    ForwardCache scratch;
    auto eval = [&]() {
        const DetectionMap m = forward(input, probe, scratch);
        return loss(m, truth, lambda1, lambda2).total;
    };

    // Below this both sides are indistinguishable from central-difference
    // rounding noise; the K-projection bias sits here by construction (its true
    // gradient is exactly zero by softmax shift invariance).
    constexpr double kFdResolution = 1e-7;

    RngStream rng(seed, 0, "grad-check");
    double worst = 0.0;
    for (std::size_t ai = 0; ai < w.arrays.size(); ++ai) {
        const std::size_t n = w.arrays[ai].data.size();
        const int samples = std::min<std::size_t>(per_array, n);
        for (int s = 0; s < samples; ++s) {
            const std::size_t j = rng.next_u64() % n;
            const double saved = probe.arrays[ai].data[j];
            probe.arrays[ai].data[j] = saved + eps;
            const double lp = eval();
            probe.arrays[ai].data[j] = saved - eps;
            const double lm = eval();
            probe.arrays[ai].data[j] = saved;
            const double fd = (lp - lm) / (2.0 * eps);
            const double ana = analytic.arrays[ai].data[j];
            if (std::abs(ana) < kFdResolution && std::abs(fd) < kFdResolution) continue;
            const double rel =
                std::abs(ana - fd) / std::max({std::abs(ana), std::abs(fd), 1e-8});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

std::vector<Detection> decode_detections(const DetectionMap& map, double conf_threshold) {
    if (!(conf_threshold > 0.0 && conf_threshold < 1.0))
        throw ConfigError("decode: conf_threshold must be in (0,1)");
    const int gh = map.h, gw = map.w;
    std::vector<Detection> out;
    for (int y = 0; y < gh; ++y) {
        for (int x = 0; x < gw; ++x) {
            const double conf = sigmoid(map.at(0, y, x));
            if (!(conf > conf_threshold)) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1 && is_max; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    const int ny = y + dy, nx = x + dx;
                    if (ny < 0 || ny >= gh || nx < 0 || nx >= gw) continue;
                    const double nb = sigmoid(map.at(0, ny, nx));
                    if (nb > conf || (nb == conf && (ny * gw + nx) < (y * gw + x)))
                        is_max = false;
                }
            }
            if (!is_max) continue;
            Detection d;
            d.range_bin = (y + sigmoid(map.at(1, y, x))) * kDownsample;
            d.doppler_bin = (x + sigmoid(map.at(2, y, x))) * kDownsample;
            d.confidence = conf;
            d.energy = conf;
            out.push_back(d);
        }
    }
    return out;
}

namespace {

struct AdamState {
    WeightSet m, v;
    int t = 0;
};

void adam_step(WeightSet& w, const WeightSet& g, AdamState& st, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++st.t;
    const double c1 = 1.0 - std::pow(b1, st.t);
    const double c2 = 1.0 - std::pow(b2, st.t);
    for (std::size_t a = 0; a < w.arrays.size(); ++a) {
        auto& wd = w.arrays[a].data;
        const auto& gd = g.arrays[a].data;
        auto& md = st.m.arrays[a].data;
        auto& vd = st.v.arrays[a].data;
        for (std::size_t i = 0; i < wd.size(); ++i) {
            md[i] = b1 * md[i] + (1.0 - b1) * gd[i];
            vd[i] = b2 * vd[i] + (1.0 - b2) * gd[i] * gd[i];
            wd[i] -= lr * (md[i] / c1) / (std::sqrt(vd[i] / c2) + eps);
        }
    }
}

}  // namespace

TrainResult train(const std::vector<std::pair<Tensor, GroundTruthFrame>>& dataset,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) throw ConfigError("train: dataset is empty");

    TrainResult result;
    result.weights = init_weights(cfg.seed);
    AdamState adam{zero_like(result.weights), zero_like(result.weights), 0};

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    ForwardCache cache;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        RngStream shuffle_rng(cfg.seed, static_cast<std::uint64_t>(epoch), "train-shuffle");
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);
        const bool augment = epoch < cfg.epochs - cfg.augment_off_epochs;
        RngStream aug_rng(cfg.seed, static_cast<std::uint64_t>(epoch), "train-augment");

        double epoch_acc = 0.0;
        std::size_t pos = 0;
        while (pos < order.size()) {
            const std::size_t batch_end = std::min(pos + cfg.batch_size, order.size());
            const double inv_batch = 1.0 / static_cast<double>(batch_end - pos);
            WeightSet grads = zero_like(result.weights);
            for (std::size_t bi = pos; bi < batch_end; ++bi) {
                Tensor input = dataset[order[bi]].first;
                if (augment) {
                    const double std_dev =
                        aug_rng.uniform(cfg.augment_noise_std.lo, cfg.augment_noise_std.hi);
                    for (auto& x : input.v) x += std_dev * aug_rng.gaussian();
                }
                const DetectionMap map = forward(input, result.weights, cache);
                const LossResult l = loss(map, dataset[order[bi]].second, cfg.lambda1,
                                          cfg.lambda2);
                if (!std::isfinite(l.total))
                    throw NumericError("train: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", sample " +
                                       std::to_string(order[bi]));
                epoch_acc += l.total;
                const WeightSet g = backward(cache, result.weights, l.grad);
                for (std::size_t a = 0; a < grads.arrays.size(); ++a)
                    for (std::size_t i = 0; i < grads.arrays[a].data.size(); ++i)
                        grads.arrays[a].data[i] += g.arrays[a].data[i];
            }
            for (auto& a : grads.arrays)
                for (auto& x : a.data) x *= inv_batch;
            adam_step(result.weights, grads, adam, cfg.learning_rate);
            pos = batch_end;
        }
        result.epoch_loss.push_back(epoch_acc / static_cast<double>(order.size()));
    }
    return result;
}

// ---- INDTW1 weight file ----

namespace {
constexpr char kWeightMagic[6] = {'I', 'N', 'D', 'T', 'W', '1'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    std::fwrite(b, 1, 4, f);
}

bool get_u32(std::FILE* f, std::uint32_t& v) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) return false;
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}
}  // namespace

void write_weights(const WeightSet& w, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw DataError("write_weights: cannot open " + path);
    std::fwrite(kWeightMagic, 1, sizeof(kWeightMagic), f.get());
    put_u32(f.get(), static_cast<std::uint32_t>(w.arrays.size()));
    for (const auto& a : w.arrays) {
        put_u32(f.get(), static_cast<std::uint32_t>(a.name.size()));
        std::fwrite(a.name.data(), 1, a.name.size(), f.get());
        put_u32(f.get(), static_cast<std::uint32_t>(a.shape.size()));
        for (int d : a.shape) put_u32(f.get(), static_cast<std::uint32_t>(d));
        if (std::fwrite(a.data.data(), sizeof(double), a.data.size(), f.get()) != a.data.size())
            throw DataError("write_weights: short write to " + path);
    }
}

WeightSet read_weights(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw DataError("read_weights: cannot open " + path);
    char magic[6];
    if (std::fread(magic, 1, 6, f.get()) != 6 || std::memcmp(magic, kWeightMagic, 6) != 0)
        throw DataError("read_weights: bad magic in " + path);
    std::uint32_t count = 0;
    if (!get_u32(f.get(), count)) throw DataError("read_weights: truncated header in " + path);
    WeightSet w;
    for (std::uint32_t a = 0; a < count; ++a) {
        std::uint32_t name_len = 0;
        if (!get_u32(f.get(), name_len) || name_len > 4096)
            throw DataError("read_weights: truncated array header in " + path);
        std::string name(name_len, '\0');
        if (std::fread(name.data(), 1, name_len, f.get()) != name_len)
            throw DataError("read_weights: truncated array name in " + path);
        std::uint32_t rank = 0;
        if (!get_u32(f.get(), rank) || rank > 8)
            throw DataError("read_weights: bad rank in " + path);
        std::vector<int> shape(rank);
        std::uint64_t n = 1;
        for (auto& d : shape) {
            std::uint32_t dim = 0;
            if (!get_u32(f.get(), dim)) throw DataError("read_weights: truncated dims in " + path);
            d = static_cast<int>(dim);
            n *= dim;
            if (n > (1ull << 28)) throw DataError("read_weights: dimension overflow in " + path);
        }
        std::vector<double> data(n);
        if (std::fread(data.data(), sizeof(double), n, f.get()) != n)
            throw DataError("read_weights: truncated file " + path);
        w.arrays.push_back({std::move(name), std::move(shape), std::move(data)});
    }
    return w;
}

}  // namespace rdtrack::nn
