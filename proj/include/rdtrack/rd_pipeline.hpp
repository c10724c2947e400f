#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rdtrack/tensor.hpp"
#include "rdtrack/types.hpp"

namespace rdtrack::rd {

/// Complex R x D grid, row-major over range. After pulse_compress the columns
/// are still slow-time pulses; after coherent_integrate they are Doppler bins.
struct RDMatrix {
    int rows = 0;  // R range bins (= M)
    int cols = 0;  // D Doppler bins (= L)
    std::vector<cplx> cells;
    RadarParams params;

    RDMatrix() = default;
    RDMatrix(int r, int c, RadarParams p)
        : rows(r), cols(c), cells(static_cast<size_t>(r) * c), params(p) {}

    cplx& at(int r, int c) { return cells[static_cast<size_t>(r) * cols + c]; }
    const cplx& at(int r, int c) const { return cells[static_cast<size_t>(r) * cols + c]; }
    double energy_at(int r, int c) const { return std::norm(at(r, c)); }
};

/// Three normalized channels (|x|, Re, Im) over the RD grid, each min-max
/// scaled to [0,1]; a degenerate channel maps to all zeros.
using RDTensor = Tensor;

// Matched filter per pulse column against the reference chirp: frequency-domain
// multiply by the unit-modulus conjugate reference spectrum (circular). The
// per-bin factor has modulus 1, so column energy is conserved exactly.
RDMatrix pulse_compress(const RawEchoMatrix& raw);
RDMatrix pulse_compress_serial(const RawEchoMatrix& raw);

// Slow-time DFT per range bin, zero-Doppler centered. Unitary scaling.
RDMatrix coherent_integrate(const RDMatrix& compressed);
RDMatrix coherent_integrate_serial(const RDMatrix& compressed);

/// Inverse of coherent_integrate (unshift + inverse DFT); test support.
RDMatrix coherent_integrate_inverse(const RDMatrix& rd);

RDTensor three_channel(const RDMatrix& rd);

/// Physical (m, m/s) -> continuous (range_bin, doppler_bin). Throws DataError
/// outside the unambiguous extent [0,R) x [0,D).
std::pair<double, double> bin_of(double range_m, double velocity_mps, const RadarParams& p);

/// Exact inverse of bin_of.
std::pair<double, double> phys_of(double range_bin, double doppler_bin, const RadarParams& p);

// RDM file: magic "RDM1", u32 rows, u32 cols (little-endian), then rows*cols
// interleaved (re, im) float64, row-major over range. Round trip is bit-exact.
void write_rdm(const RDMatrix& rd, const std::string& path);
RDMatrix read_rdm(const std::string& path);

}  // namespace rdtrack::rd
