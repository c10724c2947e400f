#include "rdtrack/kernels.hpp"

#include <cmath>

namespace rdtrack::kernels {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void fft_radix2(std::span<cplx> a, bool inverse) {
    const std::size_t n = a.size();
    // bit reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = kTwoPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx u = a[i + j];
                cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

}  // namespace

void fft_unitary(std::span<cplx> data, bool inverse) {
    const std::size_t n = data.size();
    if (n == 0) return;
    if (is_pow2(n)) {
        fft_radix2(data, inverse);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (auto& x : data) x *= scale;
        return;
    }
    auto out = dft_unitary_serial(data, inverse);
    std::copy(out.begin(), out.end(), data.begin());
}

std::vector<cplx> dft_unitary_serial(std::span<const cplx> data, bool inverse) {
    const std::size_t n = data.size();
    std::vector<cplx> out(n);
    const double sign = inverse ? 1.0 : -1.0;
    const double scale = n ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t m = 0; m < n; ++m) {
            const double ang = sign * kTwoPi * static_cast<double>(k * m % n) / static_cast<double>(n);
            acc += data[m] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc * scale;
    }
    return out;
}

}  // namespace rdtrack::kernels
