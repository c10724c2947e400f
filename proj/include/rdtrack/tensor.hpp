#pragma once

#include <cstddef>
#include <vector>

namespace rdtrack {

/// Dense C x H x W array of doubles, channel-major.
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, 0.0) {}

    std::size_t size() const { return v.size(); }
    std::size_t idx(int ci, int y, int x) const {
        return (static_cast<size_t>(ci) * h + y) * w + x;
    }
    double& at(int ci, int y, int x) { return v[idx(ci, y, x)]; }
    double at(int ci, int y, int x) const { return v[idx(ci, y, x)]; }

    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
};

}  // namespace rdtrack
