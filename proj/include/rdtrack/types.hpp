#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdtrack {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr int kFeatureDim = 64;

// Error categories map onto CLI exit codes (1 config, 2 data, 3 numeric).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// LFMCW waveform and frame geometry.
struct RadarParams {
    double carrier_hz = 77e9;        // f0
    double bandwidth_hz = 561.96e6;  // B
    double pulse_width_s = 0.0;      // T; chirp duration, <= receive window
    int num_pulses = 512;            // L, slow-time count per frame
    int num_samples = 512;           // M, fast-time samples per pulse window
    double sample_rate_hz = 0.0;     // fs >= B
    double frame_period_s = 0.2;     // delta_t between frames

    double chirp_slope() const { return bandwidth_hz / pulse_width_s; }  // k = B/T
    double receive_window_s() const { return num_samples / sample_rate_hz; }
    double range_bin_m() const { return kSpeedOfLight / (2.0 * sample_rate_hz); }
    double max_range_m() const { return num_samples * range_bin_m(); }
    // Doppler bin spacing is 1/(L*T) Hz across the coherent dwell.
    double doppler_bin_hz() const { return 1.0 / (num_pulses * pulse_width_s); }

    void validate() const {
        if (!(carrier_hz > 0)) throw ConfigError("radar: f0 must be > 0");
        if (!(bandwidth_hz > 0)) throw ConfigError("radar: B must be > 0");
        if (!(pulse_width_s > 0)) throw ConfigError("radar: T must be > 0");
        if (num_pulses < 1) throw ConfigError("radar: L must be >= 1");
        if (num_samples < 1) throw ConfigError("radar: M must be >= 1");
        if (!(sample_rate_hz >= bandwidth_hz)) throw ConfigError("radar: fs must be >= B");
    }
};

struct TargetState {
    double range_m = 0.0;     // R_d
    double velocity_mps = 0.0;  // v_d, radial, positive = opening
    double amplitude = 1.0;   // linear reflected amplitude

    void validate() const {
        if (!(range_m > 0)) throw ConfigError("target: range must be > 0");
        if (!(amplitude > 0)) throw ConfigError("target: amplitude must be > 0");
    }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return !(hi > lo); }
    double width() const { return hi - lo; }
};

/// Full experiment description; `seed` determines all randomness.
struct ScenarioConfig {
    RadarParams radar;
    std::vector<TargetState> targets;
    double snr_db = 0.0;
    int frames = 1;
    double clutter_rate = 0.0;  // Poisson mean per frame
    Interval clutter_range_m;
    Interval clutter_velocity_mps;
    Interval clutter_conf{0.05, 0.30};
    Interval target_conf{0.60, 0.95};
    std::uint64_t seed = 0;
    bool noiseless = false;

    void validate() const {
        radar.validate();
        for (const auto& t : targets) t.validate();
        if (frames < 1) throw ConfigError("run: frames must be >= 1");
        if (clutter_rate < 0) throw ConfigError("clutter: rate must be >= 0");
        if (clutter_rate > 0 && (clutter_range_m.empty() || clutter_velocity_mps.empty()))
            throw ConfigError("clutter: empty clutter region with rate > 0");
    }
};

/// One frame of raw echoes, M x L complex, fast-time major (row = fast-time sample).
struct RawEchoMatrix {
    int num_samples = 0;  // M rows
    int num_pulses = 0;   // L cols
    std::vector<cplx> samples;  // samples[m * L + l]
    RadarParams params;

    RawEchoMatrix() = default;
    RawEchoMatrix(int m, int l, RadarParams p)
        : num_samples(m), num_pulses(l), samples(static_cast<size_t>(m) * l), params(p) {}

    cplx& at(int m, int l) { return samples[static_cast<size_t>(m) * num_pulses + l]; }
    const cplx& at(int m, int l) const { return samples[static_cast<size_t>(m) * num_pulses + l]; }
};

using FeatureVec = std::array<double, kFeatureDim>;

/// Point detection on the RD grid. Bins are continuous (sub-cell) coordinates.
struct Detection {
    double range_bin = 0.0;
    double doppler_bin = 0.0;
    double confidence = 0.0;  // c in [0,1]
    double energy = 0.0;      // linear
    std::optional<FeatureVec> feature;  // unit norm when present
    bool noise = false;       // set by clustering for unabsorbed points
};

/// Truth positions for one frame in continuous bin coordinates.
struct GroundTruthFrame {
    struct Entry {
        double range_bin = 0.0;
        double doppler_bin = 0.0;
    };
    std::vector<Entry> entries;
};

}  // namespace rdtrack
