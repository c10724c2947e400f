#include "rdtrack/nn_layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace rdtrack::nn {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <bool Parallel>
Tensor conv2d_forward_impl(const Tensor& in, std::span<const double> w, std::span<const double> b,
                           const ConvSpec& spec) {
    if (in.c != spec.in_c) throw DataError("conv2d: channel mismatch");
    const int oh = (in.h + 2 * spec.pad - spec.k) / spec.stride + 1;
    const int ow = (in.w + 2 * spec.pad - spec.k) / spec.stride + 1;
    Tensor out(spec.out_c, oh, ow);

#pragma omp parallel for schedule(static) if (Parallel)
    for (int oc = 0; oc < spec.out_c; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = b[oc];
                for (int ic = 0; ic < spec.in_c; ++ic) {
                    for (int ky = 0; ky < spec.k; ++ky) {
                        const int iy = oy * spec.stride - spec.pad + ky;
                        if (iy < 0 || iy >= in.h) continue;
                        const std::size_t wbase =
                            ((static_cast<size_t>(oc) * spec.in_c + ic) * spec.k + ky) * spec.k;
                        const std::size_t ibase = (static_cast<size_t>(ic) * in.h + iy) * in.w;
                        for (int kx = 0; kx < spec.k; ++kx) {
                            const int ix = ox * spec.stride - spec.pad + kx;
                            if (ix < 0 || ix >= in.w) continue;
                            acc += w[wbase + kx] * in.v[ibase + ix];
                        }
                    }
                }
                out.at(oc, oy, ox) = acc;
            }
        }
    }
    return out;
}

template <bool Parallel>
void conv2d_backward_impl(const Tensor& in, std::span<const double> w, const ConvSpec& spec,
                          const Tensor& g_out, Tensor& g_in, std::span<double> g_w,
                          std::span<double> g_b) {
    const int oh = g_out.h, ow = g_out.w;
    g_in = Tensor(in.c, in.h, in.w);

#pragma omp parallel for schedule(static) if (Parallel)
    for (int oc = 0; oc < spec.out_c; ++oc) {
        double gb = 0.0;
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) gb += g_out.at(oc, oy, ox);
        g_b[oc] += gb;
        for (int ic = 0; ic < spec.in_c; ++ic) {
            for (int ky = 0; ky < spec.k; ++ky) {
                for (int kx = 0; kx < spec.k; ++kx) {
                    double gw = 0.0;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * spec.stride - spec.pad + ky;
                        if (iy < 0 || iy >= in.h) continue;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * spec.stride - spec.pad + kx;
                            if (ix < 0 || ix >= in.w) continue;
                            gw += g_out.at(oc, oy, ox) * in.at(ic, iy, ix);
                        }
                    }
                    g_w[((static_cast<size_t>(oc) * spec.in_c + ic) * spec.k + ky) * spec.k +
                        kx] += gw;
                }
            }
        }
    }

#pragma omp parallel for schedule(static) if (Parallel)
    for (int ic = 0; ic < spec.in_c; ++ic) {
        for (int oc = 0; oc < spec.out_c; ++oc) {
            for (int oy = 0; oy < oh; ++oy) {
                for (int ky = 0; ky < spec.k; ++ky) {
                    const int iy = oy * spec.stride - spec.pad + ky;
                    if (iy < 0 || iy >= in.h) continue;
                    const std::size_t wbase =
                        ((static_cast<size_t>(oc) * spec.in_c + ic) * spec.k + ky) * spec.k;
                    for (int ox = 0; ox < ow; ++ox) {
                        const double g = g_out.at(oc, oy, ox);
                        for (int kx = 0; kx < spec.k; ++kx) {
                            const int ix = ox * spec.stride - spec.pad + kx;
                            if (ix < 0 || ix >= in.w) continue;
                            g_in.at(ic, iy, ix) += g * w[wbase + kx];
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor conv2d_forward(const Tensor& in, std::span<const double> w, std::span<const double> b,
                      const ConvSpec& spec) {
    return conv2d_forward_impl<true>(in, w, b, spec);
}
Tensor conv2d_forward_serial(const Tensor& in, std::span<const double> w,
                             std::span<const double> b, const ConvSpec& spec) {
    return conv2d_forward_impl<false>(in, w, b, spec);
}
void conv2d_backward(const Tensor& in, std::span<const double> w, const ConvSpec& spec,
                     const Tensor& g_out, Tensor& g_in, std::span<double> g_w,
                     std::span<double> g_b) {
    conv2d_backward_impl<true>(in, w, spec, g_out, g_in, g_w, g_b);
}
void conv2d_backward_serial(const Tensor& in, std::span<const double> w, const ConvSpec& spec,
                            const Tensor& g_out, Tensor& g_in, std::span<double> g_w,
                            std::span<double> g_b) {
    conv2d_backward_impl<false>(in, w, spec, g_out, g_in, g_w, g_b);
}

Tensor instance_norm_forward(const Tensor& in, InstNormCache& cache, double eps) {
    const std::size_t plane = static_cast<size_t>(in.h) * in.w;
    cache.inv_std.assign(in.c, 0.0);
    cache.normalized = Tensor(in.c, in.h, in.w);
    Tensor out(in.c, in.h, in.w);
    for (int c = 0; c < in.c; ++c) {
        const double* x = in.v.data() + c * plane;
        double mean = 0.0;
        for (std::size_t i = 0; i < plane; ++i) mean += x[i];
        mean /= static_cast<double>(plane);
        double var = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
            const double d = x[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(plane);
        const double inv_std = 1.0 / std::sqrt(var + eps);
        cache.inv_std[c] = inv_std;
        double* nrm = cache.normalized.v.data() + c * plane;
        double* o = out.v.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            nrm[i] = (x[i] - mean) * inv_std;
            o[i] = nrm[i];
        }
    }
    return out;
}

Tensor instance_norm_backward(const InstNormCache& cache, const Tensor& g_out) {
    const Tensor& nrm = cache.normalized;
    const std::size_t plane = static_cast<size_t>(nrm.h) * nrm.w;
    Tensor g_in(nrm.c, nrm.h, nrm.w);
    for (int c = 0; c < nrm.c; ++c) {
        const double* g = g_out.v.data() + c * plane;
        const double* y = nrm.v.data() + c * plane;
        double g_mean = 0.0, gy_mean = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
            g_mean += g[i];
            gy_mean += g[i] * y[i];
        }
        g_mean /= static_cast<double>(plane);
        gy_mean /= static_cast<double>(plane);
        double* gi = g_in.v.data() + c * plane;
        const double inv_std = cache.inv_std[c];
        for (std::size_t i = 0; i < plane; ++i)
            gi[i] = inv_std * (g[i] - g_mean - y[i] * gy_mean);
    }
    return g_in;
}

Tensor silu_forward(const Tensor& in) {
    Tensor out(in.c, in.h, in.w);
    for (std::size_t i = 0; i < in.v.size(); ++i) out.v[i] = silu(in.v[i]);
    return out;
}

Tensor silu_backward(const Tensor& in, const Tensor& g_out) {
    Tensor g_in(in.c, in.h, in.w);
    for (std::size_t i = 0; i < in.v.size(); ++i) {
        const double s = sigmoid(in.v[i]);
        g_in.v[i] = g_out.v[i] * s * (1.0 + in.v[i] * (1.0 - s));
    }
    return g_in;
}

Tensor layer_norm_forward(const Tensor& in, std::span<const double> gamma,
                          std::span<const double> beta, LayerNormCache& cache, double eps) {
    const int c = in.c;
    const std::size_t tokens = static_cast<size_t>(in.h) * in.w;
    const std::size_t plane = tokens;
    cache.inv_std.assign(tokens, 0.0);
    cache.normalized = Tensor(in.c, in.h, in.w);
    Tensor out(in.c, in.h, in.w);
    for (std::size_t t = 0; t < tokens; ++t) {
        double mean = 0.0;
        for (int ci = 0; ci < c; ++ci) mean += in.v[ci * plane + t];
        mean /= c;
        double var = 0.0;
        for (int ci = 0; ci < c; ++ci) {
            const double d = in.v[ci * plane + t] - mean;
            var += d * d;
        }
        var /= c;
        const double inv_std = 1.0 / std::sqrt(var + eps);
        cache.inv_std[t] = inv_std;
        for (int ci = 0; ci < c; ++ci) {
            const double y = (in.v[ci * plane + t] - mean) * inv_std;
            cache.normalized.v[ci * plane + t] = y;
            out.v[ci * plane + t] = gamma[ci] * y + beta[ci];
        }
    }
    return out;
}

Tensor layer_norm_backward(const LayerNormCache& cache, std::span<const double> gamma,
                           const Tensor& g_out, std::span<double> g_gamma,
                           std::span<double> g_beta) {
    const Tensor& nrm = cache.normalized;
    const int c = nrm.c;
    const std::size_t plane = static_cast<size_t>(nrm.h) * nrm.w;
    Tensor g_in(nrm.c, nrm.h, nrm.w);
    for (std::size_t t = 0; t < plane; ++t) {
        double h_mean = 0.0, hy_mean = 0.0;
        for (int ci = 0; ci < c; ++ci) {
            const double g = g_out.v[ci * plane + t];
            const double y = nrm.v[ci * plane + t];
            g_gamma[ci] += g * y;
            g_beta[ci] += g;
            const double h = g * gamma[ci];
            h_mean += h;
            hy_mean += h * y;
        }
        h_mean /= c;
        hy_mean /= c;
        const double inv_std = cache.inv_std[t];
        for (int ci = 0; ci < c; ++ci) {
            const double h = g_out.v[ci * plane + t] * gamma[ci];
            g_in.v[ci * plane + t] =
                inv_std * (h - h_mean - nrm.v[ci * plane + t] * hy_mean);
        }
    }
    return g_in;
}

namespace {

// y[t*C + j] += sum_i x[t*C + i] * w[j*C + i] + b[j]   (w is out x in, row-major)
void linear_tokens(const std::vector<double>& x, std::span<const double> w,
                   std::span<const double> b, int tokens, int in_c, int out_c,
                   std::vector<double>& y) {
    y.assign(static_cast<size_t>(tokens) * out_c, 0.0);
    for (int t = 0; t < tokens; ++t) {
        const double* xt = x.data() + static_cast<size_t>(t) * in_c;
        double* yt = y.data() + static_cast<size_t>(t) * out_c;
        for (int j = 0; j < out_c; ++j) {
            double acc = b.empty() ? 0.0 : b[j];
            const double* wj = w.data() + static_cast<size_t>(j) * in_c;
            for (int i = 0; i < in_c; ++i) acc += wj[i] * xt[i];
            yt[j] = acc;
        }
    }
}

// backward of linear_tokens: accumulates g_w, g_b; overwrites g_x
void linear_tokens_backward(const std::vector<double>& x, std::span<const double> w,
                            const std::vector<double>& g_y, int tokens, int in_c, int out_c,
                            std::vector<double>& g_x, std::span<double> g_w,
                            std::span<double> g_b) {
    g_x.assign(static_cast<size_t>(tokens) * in_c, 0.0);
    for (int t = 0; t < tokens; ++t) {
        const double* xt = x.data() + static_cast<size_t>(t) * in_c;
        const double* gyt = g_y.data() + static_cast<size_t>(t) * out_c;
        double* gxt = g_x.data() + static_cast<size_t>(t) * in_c;
        for (int j = 0; j < out_c; ++j) {
            const double g = gyt[j];
            if (!g_b.empty()) g_b[j] += g;
            const double* wj = w.data() + static_cast<size_t>(j) * in_c;
            double* gwj = g_w.data() + static_cast<size_t>(j) * in_c;
            for (int i = 0; i < in_c; ++i) {
                gwj[i] += g * xt[i];
                gxt[i] += g * wj[i];
            }
        }
    }
}

}  // namespace

Tensor cyclic_shift(const Tensor& in, int dy, int dx) {
    Tensor out(in.c, in.h, in.w);
    const int h = in.h, w = in.w;
    for (int c = 0; c < in.c; ++c)
        for (int y = 0; y < h; ++y) {
            const int sy = ((y - dy) % h + h) % h;
            for (int x = 0; x < w; ++x) {
                const int sx = ((x - dx) % w + w) % w;
                out.at(c, y, x) = in.at(c, sy, sx);
            }
        }
    return out;
}

Tensor wmsa_forward(const Tensor& in, const AttentionWeights& w, int window, int shift, int heads,
                    WmsaCache& cache) {
    const int c = in.c, h = in.h, wd = in.w;
    if (h % window != 0 || wd % window != 0)
        throw DataError("wmsa: grid not divisible by window");
    if (c % heads != 0) throw DataError("wmsa: channels not divisible by heads");
    const int dh = c / heads;
    const int t_count = window * window;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    const Tensor shifted = shift ? cyclic_shift(in, -shift, -shift) : in;
    Tensor out_shifted(c, h, wd);

    cache.window = window;
    cache.shift = shift;
    cache.heads = heads;
    cache.windows.clear();
    cache.windows.resize(static_cast<size_t>(h / window) * (wd / window));

    int widx = 0;
    for (int wy = 0; wy < h; wy += window) {
        for (int wx = 0; wx < wd; wx += window, ++widx) {
            WmsaWindowCache& wc = cache.windows[widx];
            // gather tokens, row-major inside the window: x[t*C + ci]
            wc.x.resize(static_cast<size_t>(t_count) * c);
            for (int ty = 0; ty < window; ++ty)
                for (int tx = 0; tx < window; ++tx)
                    for (int ci = 0; ci < c; ++ci)
                        wc.x[(static_cast<size_t>(ty) * window + tx) * c + ci] =
                            shifted.at(ci, wy + ty, wx + tx);

            linear_tokens(wc.x, w.wq, w.bq, t_count, c, c, wc.q);
            linear_tokens(wc.x, w.wk, w.bk, t_count, c, c, wc.k);
            linear_tokens(wc.x, w.wv, w.bv, t_count, c, c, wc.v);

            wc.attn.assign(static_cast<size_t>(heads) * t_count * t_count, 0.0);
            wc.ctx.assign(static_cast<size_t>(t_count) * c, 0.0);
            for (int hd = 0; hd < heads; ++hd) {
                double* attn = wc.attn.data() + static_cast<size_t>(hd) * t_count * t_count;
                const int off = hd * dh;
                for (int i = 0; i < t_count; ++i) {
                    double* row = attn + static_cast<size_t>(i) * t_count;
                    double row_max = -std::numeric_limits<double>::infinity();
                    for (int j = 0; j < t_count; ++j) {
                        double dot = 0.0;
                        for (int d = 0; d < dh; ++d)
                            dot += wc.q[static_cast<size_t>(i) * c + off + d] *
                                   wc.k[static_cast<size_t>(j) * c + off + d];
                        row[j] = dot * scale;
                        row_max = std::max(row_max, row[j]);
                    }
                    double denom = 0.0;
                    for (int j = 0; j < t_count; ++j) {
                        row[j] = std::exp(row[j] - row_max);
                        denom += row[j];
                    }
                    const double inv = 1.0 / denom;
                    for (int j = 0; j < t_count; ++j) row[j] *= inv;
                    for (int j = 0; j < t_count; ++j) {
                        const double a = row[j];
                        for (int d = 0; d < dh; ++d)
                            wc.ctx[static_cast<size_t>(i) * c + off + d] +=
                                a * wc.v[static_cast<size_t>(j) * c + off + d];
                    }
                }
            }

            std::vector<double> y;
            linear_tokens(wc.ctx, w.wo, w.bo, t_count, c, c, y);
            for (int ty = 0; ty < window; ++ty)
                for (int tx = 0; tx < window; ++tx)
                    for (int ci = 0; ci < c; ++ci)
                        out_shifted.at(ci, wy + ty, wx + tx) =
                            y[(static_cast<size_t>(ty) * window + tx) * c + ci];
        }
    }

    return shift ? cyclic_shift(out_shifted, shift, shift) : out_shifted;
}

Tensor wmsa_backward(const AttentionWeights& w, const WmsaCache& cache, const Tensor& g_out,
                     AttentionGrads& g) {
    const int c = g_out.c, h = g_out.h, wd = g_out.w;
    const int window = cache.window, heads = cache.heads, shift = cache.shift;
    const int dh = c / heads;
    const int t_count = window * window;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    const Tensor g_shifted = shift ? cyclic_shift(g_out, -shift, -shift) : g_out;
    Tensor g_in_shifted(c, h, wd);

    int widx = 0;
    for (int wy = 0; wy < h; wy += window) {
        for (int wx = 0; wx < wd; wx += window, ++widx) {
            const WmsaWindowCache& wc = cache.windows[widx];
            std::vector<double> g_y(static_cast<size_t>(t_count) * c);
            for (int ty = 0; ty < window; ++ty)
                for (int tx = 0; tx < window; ++tx)
                    for (int ci = 0; ci < c; ++ci)
                        g_y[(static_cast<size_t>(ty) * window + tx) * c + ci] =
                            g_shifted.at(ci, wy + ty, wx + tx);

            std::vector<double> g_ctx;
            linear_tokens_backward(wc.ctx, w.wo, g_y, t_count, c, c, g_ctx, g.wo, g.bo);

            std::vector<double> g_q(static_cast<size_t>(t_count) * c, 0.0);
            std::vector<double> g_k(static_cast<size_t>(t_count) * c, 0.0);
            std::vector<double> g_v(static_cast<size_t>(t_count) * c, 0.0);
            for (int hd = 0; hd < heads; ++hd) {
                const double* attn = wc.attn.data() + static_cast<size_t>(hd) * t_count * t_count;
                const int off = hd * dh;
                for (int i = 0; i < t_count; ++i) {
                    const double* a_row = attn + static_cast<size_t>(i) * t_count;
                    // dA = g_ctx . V^T ; dV += A^T . g_ctx
                    std::vector<double> g_a(t_count, 0.0);
                    for (int j = 0; j < t_count; ++j) {
                        double acc = 0.0;
                        for (int d = 0; d < dh; ++d)
                            acc += g_ctx[static_cast<size_t>(i) * c + off + d] *
                                   wc.v[static_cast<size_t>(j) * c + off + d];
                        g_a[j] = acc;
                    }
                    for (int j = 0; j < t_count; ++j) {
                        const double a = a_row[j];
                        for (int d = 0; d < dh; ++d)
                            g_v[static_cast<size_t>(j) * c + off + d] +=
                                a * g_ctx[static_cast<size_t>(i) * c + off + d];
                    }
                    // softmax backward: dS_j = A_j * (g_a_j - sum_k g_a_k A_k)
                    double dot = 0.0;
                    for (int j = 0; j < t_count; ++j) dot += g_a[j] * a_row[j];
                    for (int j = 0; j < t_count; ++j) {
                        const double g_s = a_row[j] * (g_a[j] - dot) * scale;
                        for (int d = 0; d < dh; ++d) {
                            g_q[static_cast<size_t>(i) * c + off + d] +=
                                g_s * wc.k[static_cast<size_t>(j) * c + off + d];
                            g_k[static_cast<size_t>(j) * c + off + d] +=
                                g_s * wc.q[static_cast<size_t>(i) * c + off + d];
                        }
                    }
                }
            }

            std::vector<double> g_x(static_cast<size_t>(t_count) * c, 0.0);
            std::vector<double> g_x_part;
            linear_tokens_backward(wc.x, w.wq, g_q, t_count, c, c, g_x_part, g.wq, g.bq);
            for (std::size_t i = 0; i < g_x.size(); ++i) g_x[i] += g_x_part[i];
            linear_tokens_backward(wc.x, w.wk, g_k, t_count, c, c, g_x_part, g.wk, g.bk);
            for (std::size_t i = 0; i < g_x.size(); ++i) g_x[i] += g_x_part[i];
            linear_tokens_backward(wc.x, w.wv, g_v, t_count, c, c, g_x_part, g.wv, g.bv);
            for (std::size_t i = 0; i < g_x.size(); ++i) g_x[i] += g_x_part[i];

            for (int ty = 0; ty < window; ++ty)
                for (int tx = 0; tx < window; ++tx)
                    for (int ci = 0; ci < c; ++ci)
                        g_in_shifted.at(ci, wy + ty, wx + tx) =
                            g_x[(static_cast<size_t>(ty) * window + tx) * c + ci];
        }
    }

    return shift ? cyclic_shift(g_in_shifted, shift, shift) : g_in_shifted;
}

Tensor mlp_forward(const Tensor& in, std::span<const double> w1, std::span<const double> b1,
                   std::span<const double> w2, std::span<const double> b2, int hidden,
                   MlpCache& cache) {
    const int c = in.c;
    const std::size_t plane = static_cast<size_t>(in.h) * in.w;
    cache.in = in;
    cache.hidden_pre = Tensor(hidden, in.h, in.w);
    Tensor out(c, in.h, in.w);
    for (std::size_t t = 0; t < plane; ++t) {
        for (int j = 0; j < hidden; ++j) {
            double acc = b1[j];
            const double* wj = w1.data() + static_cast<size_t>(j) * c;
            for (int i = 0; i < c; ++i) acc += wj[i] * in.v[i * plane + t];
            cache.hidden_pre.v[static_cast<size_t>(j) * plane + t] = acc;
        }
        for (int j = 0; j < c; ++j) {
            double acc = b2[j];
            const double* wj = w2.data() + static_cast<size_t>(j) * hidden;
            for (int i = 0; i < hidden; ++i)
                acc += wj[i] * silu(cache.hidden_pre.v[static_cast<size_t>(i) * plane + t]);
            out.v[static_cast<size_t>(j) * plane + t] = acc;
        }
    }
    return out;
}

Tensor mlp_backward(const MlpCache& cache, std::span<const double> w1, std::span<const double> w2,
                    int hidden, const Tensor& g_out, std::span<double> g_w1,
                    std::span<double> g_b1, std::span<double> g_w2, std::span<double> g_b2) {
    const Tensor& in = cache.in;
    const int c = in.c;
    const std::size_t plane = static_cast<size_t>(in.h) * in.w;
    Tensor g_in(in.c, in.h, in.w);
    std::vector<double> g_hidden(hidden);
    for (std::size_t t = 0; t < plane; ++t) {
        std::fill(g_hidden.begin(), g_hidden.end(), 0.0);
        for (int j = 0; j < c; ++j) {
            const double g = g_out.v[static_cast<size_t>(j) * plane + t];
            g_b2[j] += g;
            const double* wj = w2.data() + static_cast<size_t>(j) * hidden;
            double* gwj = g_w2.data() + static_cast<size_t>(j) * hidden;
            for (int i = 0; i < hidden; ++i) {
                const double act = silu(cache.hidden_pre.v[static_cast<size_t>(i) * plane + t]);
                gwj[i] += g * act;
                g_hidden[i] += g * wj[i];
            }
        }
        for (int i = 0; i < hidden; ++i) {
            const double pre = cache.hidden_pre.v[static_cast<size_t>(i) * plane + t];
            const double s = sigmoid(pre);
            const double g = g_hidden[i] * s * (1.0 + pre * (1.0 - s));
            g_b1[i] += g;
            const double* wi = w1.data() + static_cast<size_t>(i) * c;
            double* gwi = g_w1.data() + static_cast<size_t>(i) * c;
            for (int j = 0; j < c; ++j) {
                gwi[j] += g * in.v[static_cast<size_t>(j) * plane + t];
                g_in.v[static_cast<size_t>(j) * plane + t] += g * wi[j];
            }
        }
    }
    return g_in;
}

Tensor maxpool_forward(const Tensor& in, int k, PoolCache& cache) {
    const int half = k / 2;
    Tensor out(in.c, in.h, in.w);
    cache.argmax.assign(in.v.size(), 0);
    for (int c = 0; c < in.c; ++c) {
        for (int y = 0; y < in.h; ++y) {
            for (int x = 0; x < in.w; ++x) {
                double best = -std::numeric_limits<double>::infinity();
                std::int64_t best_idx = -1;
                for (int ky = -half; ky <= half; ++ky) {
                    const int iy = y + ky;
                    if (iy < 0 || iy >= in.h) continue;
                    for (int kx = -half; kx <= half; ++kx) {
                        const int ix = x + kx;
                        if (ix < 0 || ix >= in.w) continue;
                        const double v = in.at(c, iy, ix);
                        if (v > best) {
                            best = v;
                            best_idx = static_cast<std::int64_t>(in.idx(c, iy, ix));
                        }
                    }
                }
                out.at(c, y, x) = best;
                cache.argmax[out.idx(c, y, x)] = best_idx;
            }
        }
    }
    return out;
}

Tensor maxpool_backward(const Tensor& in, const PoolCache& cache, const Tensor& g_out) {
    Tensor g_in(in.c, in.h, in.w);
    for (std::size_t i = 0; i < g_out.v.size(); ++i)
        g_in.v[cache.argmax[i]] += g_out.v[i];
    return g_in;
}

Tensor positional_encoding(int h, int w, int c) {
    if (c % 4 != 0) throw ConfigError("positional_encoding: channels must be divisible by 4");
    Tensor out(c, h, w);
    const int half = c / 2;
    const int levels = c / 4;
    for (int lvl = 0; lvl < levels; ++lvl) {
        const double freq = std::pow(10000.0, -2.0 * lvl / static_cast<double>(half));
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                out.at(2 * lvl, y, x) = std::sin(y * freq);
                out.at(2 * lvl + 1, y, x) = std::cos(y * freq);
                out.at(half + 2 * lvl, y, x) = std::sin(x * freq);
                out.at(half + 2 * lvl + 1, y, x) = std::cos(x * freq);
            }
        }
    }
    return out;
}

}  // namespace rdtrack::nn
