#pragma once

#include <vector>

#include "rdtrack/types.hpp"

namespace rdtrack::sim {

/// Noise power so that 10*log10(signal_power / P_N) == snr_db.
double noise_power_for_snr(double signal_power, double snr_db);

/// Synthesize one frame of multi-target LFMCW echoes plus complex white
/// Gaussian noise. The noise reference power is the mean per-sample power of
/// the summed target signal over chirp-occupied samples (1.0 for an empty
/// scene). Bit-deterministic given (cfg, frame).
RawEchoMatrix synth_echo(const ScenarioConfig& cfg, int frame,
                         const std::vector<TargetState>& targets);

/// Constant-velocity propagation over delta_t seconds.
std::vector<TargetState> propagate_targets(const std::vector<TargetState>& targets,
                                           double delta_t);

/// Measurement-level frame for tracker-only experiments: one Gaussian-perturbed
/// detection per target plus Poisson clutter uniform over the clutter region.
/// Target detections carry a per-target persistent feature (jittered each
/// frame); clutter features are random unit vectors.
std::vector<Detection> gen_measurement_frame(const ScenarioConfig& cfg,
                                             const std::vector<TargetState>& targets,
                                             int frame,
                                             double sigma_range_m = 0.6,
                                             double sigma_velocity_mps = 0.2);

}  // namespace rdtrack::sim
