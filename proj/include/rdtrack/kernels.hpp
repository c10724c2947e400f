#pragma once

#include <span>
#include <vector>

#include "rdtrack/types.hpp"

namespace rdtrack::kernels {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Unitary discrete Fourier transform, 1/sqrt(n) scaling both directions.
// Forward kernel exp(-j*2*pi*nk/N). Radix-2 in place for power-of-two sizes,
// naive O(n^2) otherwise.
void fft_unitary(std::span<cplx> data, bool inverse);

/// Naive O(n^2) reference transform, same convention. Kept as the test oracle.
std::vector<cplx> dft_unitary_serial(std::span<const cplx> data, bool inverse);

/// fftshift index map: bin k of an N-point spectrum -> zero-centered position.
inline int fftshift_index(int k, int n) { return (k + n / 2) % n; }

}  // namespace rdtrack::kernels
