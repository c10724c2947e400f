#include "rdtrack/rd_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <memory>

#include "rdtrack/kernels.hpp"

namespace rdtrack::rd {

namespace {

// Unit-modulus matched-filter factors: conj(H_k)/|H_k| of the reference chirp
// spectrum (1.0 at exact spectral nulls so the transform stays unitary).
std::vector<cplx> reference_filter(const RadarParams& p) {
    const int m_count = p.num_samples;
    std::vector<cplx> ref(m_count, cplx(0.0, 0.0));
    const int chirp_samples =
        std::min<int>(m_count, static_cast<int>(std::round(p.pulse_width_s * p.sample_rate_hz)));
    const double slope = p.chirp_slope();
    for (int m = 0; m < chirp_samples; ++m) {
        const double u = m / p.sample_rate_hz;
        const double phase = M_PI * slope * u * u;
        ref[m] = cplx(std::cos(phase), std::sin(phase));
    }
    kernels::fft_unitary(ref, false);
    for (auto& h : ref) {
        const double mag = std::abs(h);
        h = mag > 1e-300 ? std::conj(h) / mag : cplx(1.0, 0.0);
    }
    return ref;
}

template <bool Parallel>
RDMatrix pulse_compress_impl(const RawEchoMatrix& raw) {
    if (static_cast<size_t>(raw.num_samples) * raw.num_pulses != raw.samples.size())
        throw DataError("pulse_compress: dimension mismatch");
    const int m_count = raw.num_samples;
    const int l_count = raw.num_pulses;
    const std::vector<cplx> filt = reference_filter(raw.params);
    RDMatrix out(m_count, l_count, raw.params);

#pragma omp parallel for schedule(static) if (Parallel)
    for (int n = 0; n < l_count; ++n) {
        std::vector<cplx> col(m_count);
        for (int m = 0; m < m_count; ++m) col[m] = raw.at(m, n);
        kernels::fft_unitary(col, false);
        for (int m = 0; m < m_count; ++m) col[m] *= filt[m];
        kernels::fft_unitary(col, true);
        for (int m = 0; m < m_count; ++m) out.at(m, n) = col[m];
    }
    return out;
}

template <bool Parallel>
RDMatrix coherent_integrate_impl(const RDMatrix& compressed) {
    const int rows = compressed.rows;
    const int cols = compressed.cols;
    RDMatrix out(rows, cols, compressed.params);

#pragma omp parallel for schedule(static) if (Parallel)
    for (int r = 0; r < rows; ++r) {
        std::vector<cplx> row(cols);
        for (int d = 0; d < cols; ++d) row[d] = compressed.at(r, d);
        kernels::fft_unitary(row, false);
        for (int k = 0; k < cols; ++k) out.at(r, kernels::fftshift_index(k, cols)) = row[k];
    }
    return out;
}

void minmax_normalize(double* v, std::size_t n) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
    }
    if (!(hi > lo)) {
        std::fill(v, v + n, 0.0);
        return;
    }
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < n; ++i) v[i] = (v[i] - lo) * inv;
}

}  // namespace

RDMatrix pulse_compress(const RawEchoMatrix& raw) { return pulse_compress_impl<true>(raw); }
RDMatrix pulse_compress_serial(const RawEchoMatrix& raw) { return pulse_compress_impl<false>(raw); }

RDMatrix coherent_integrate(const RDMatrix& c) { return coherent_integrate_impl<true>(c); }
RDMatrix coherent_integrate_serial(const RDMatrix& c) { return coherent_integrate_impl<false>(c); }

RDMatrix coherent_integrate_inverse(const RDMatrix& rd) {
    const int rows = rd.rows;
    const int cols = rd.cols;
    RDMatrix out(rows, cols, rd.params);
    for (int r = 0; r < rows; ++r) {
        std::vector<cplx> row(cols);
        for (int k = 0; k < cols; ++k) row[k] = rd.at(r, kernels::fftshift_index(k, cols));
        kernels::fft_unitary(row, true);
        for (int d = 0; d < cols; ++d) out.at(r, d) = row[d];
    }
    return out;
}

RDTensor three_channel(const RDMatrix& rd) {
    const int rows = rd.rows;
    const int cols = rd.cols;
    RDTensor t(3, rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int d = 0; d < cols; ++d) {
            const cplx x = rd.at(r, d);
            t.at(0, r, d) = std::abs(x);
            t.at(1, r, d) = x.real();
            t.at(2, r, d) = x.imag();
        }
    }
    const std::size_t plane = static_cast<size_t>(rows) * cols;
    for (int c = 0; c < 3; ++c) minmax_normalize(t.v.data() + c * plane, plane);
    return t;
}

std::pair<double, double> bin_of(double range_m, double velocity_mps, const RadarParams& p) {
    const double range_bin = 2.0 * range_m * p.sample_rate_hz / kSpeedOfLight;
    const double doppler_hz = 2.0 * p.carrier_hz * velocity_mps / kSpeedOfLight;
    const double doppler_bin = p.num_pulses / 2.0 + doppler_hz * p.num_pulses * p.pulse_width_s;
    if (range_bin < 0.0 || range_bin >= p.num_samples || doppler_bin < 0.0 ||
        doppler_bin >= p.num_pulses)
        throw DataError("bin_of: position outside unambiguous extent");
    return {range_bin, doppler_bin};
}

std::pair<double, double> phys_of(double range_bin, double doppler_bin, const RadarParams& p) {
    const double range_m = range_bin * kSpeedOfLight / (2.0 * p.sample_rate_hz);
    const double doppler_hz = (doppler_bin - p.num_pulses / 2.0) / (p.num_pulses * p.pulse_width_s);
    const double velocity_mps = doppler_hz * kSpeedOfLight / (2.0 * p.carrier_hz);
    return {range_m, velocity_mps};
}

namespace {
constexpr char kRdmMagic[4] = {'R', 'D', 'M', '1'};

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

void write_rdm(const RDMatrix& rd, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw DataError("write_rdm: cannot open " + path);
    std::fwrite(kRdmMagic, 1, 4, f.get());
    put_u32(f.get(), static_cast<std::uint32_t>(rd.rows));
    put_u32(f.get(), static_cast<std::uint32_t>(rd.cols));
    static_assert(sizeof(cplx) == 16, "interleaved (re,im) float64 layout");
    const std::size_t n = rd.cells.size();
    if (std::fwrite(rd.cells.data(), sizeof(cplx), n, f.get()) != n)
        throw DataError("write_rdm: short write to " + path);
}

RDMatrix read_rdm(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw DataError("read_rdm: cannot open " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, kRdmMagic, 4) != 0)
        throw DataError("read_rdm: bad magic in " + path);
    std::uint32_t rows = 0, cols = 0;
    if (!get_u32(f.get(), rows) || !get_u32(f.get(), cols))
        throw DataError("read_rdm: truncated header in " + path);
    constexpr std::uint64_t kMaxCells = 1ull << 28;
    const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
    if (n > kMaxCells) throw DataError("read_rdm: dimension overflow in " + path);
    RDMatrix rd(static_cast<int>(rows), static_cast<int>(cols), RadarParams{});
    if (std::fread(rd.cells.data(), sizeof(cplx), n, f.get()) != n)
        throw DataError("read_rdm: truncated file " + path);
    return rd;
}

}  // namespace rdtrack::rd
