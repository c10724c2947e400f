#include "rdtrack/signal_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdtrack/rd_pipeline.hpp"
#include "rdtrack/rng.hpp"

namespace rdtrack::sim {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

FeatureVec random_unit_feature(RngStream& rng) {
    FeatureVec f{};
    double norm2 = 0.0;
    for (auto& x : f) {
        x = rng.gaussian();
        norm2 += x * x;
    }
    if (norm2 < 1e-24) {
        f.fill(0.0);
        f[0] = 1.0;
        return f;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : f) x *= inv;
    return f;
}
}  // namespace

double noise_power_for_snr(double signal_power, double snr_db) {
    if (!std::isfinite(signal_power) || !std::isfinite(snr_db) || !(signal_power > 0))
        throw std::domain_error("noise_power_for_snr: inputs must be finite, signal_power > 0");
    return signal_power / std::pow(10.0, snr_db / 10.0);
}

RawEchoMatrix synth_echo(const ScenarioConfig& cfg, int frame,
                         const std::vector<TargetState>& targets) {
    const RadarParams& p = cfg.radar;
    p.validate();
    const int m_count = p.num_samples;
    const int l_count = p.num_pulses;
    const double window_s = p.receive_window_s();
    const double slope = p.chirp_slope();

    RawEchoMatrix out(m_count, l_count, p);
    std::vector<char> occupied(out.samples.size(), 0);

    for (const auto& tgt : targets) {
        tgt.validate();
        const double doppler_hz = 2.0 * p.carrier_hz * tgt.velocity_mps / kSpeedOfLight;
        // Constant carrier phase from the frame-start round trip.
        const double phase0 = -kTwoPi * p.carrier_hz * 2.0 * tgt.range_m / kSpeedOfLight;
        for (int n = 0; n < l_count; ++n) {
            const double tau =
                2.0 * (tgt.range_m + tgt.velocity_mps * n * p.pulse_width_s) / kSpeedOfLight;
            if (tau < 0.0 || tau + p.pulse_width_s > window_s)
                throw DataError("synth_echo: target delay beyond pulse window");
            const double slow_phase = phase0 + kTwoPi * doppler_hz * n * p.pulse_width_s;
            for (int m = 0; m < m_count; ++m) {
                const double u = m / p.sample_rate_hz - tau;
                if (u < 0.0 || u >= p.pulse_width_s) continue;
                const double phase = M_PI * slope * u * u + slow_phase;
                out.at(m, n) += tgt.amplitude * cplx(std::cos(phase), std::sin(phase));
                occupied[static_cast<size_t>(m) * l_count + n] = 1;
            }
        }
    }

    if (!cfg.noiseless) {
        double sig_power = 0.0;
        std::size_t occ = 0;
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
            if (occupied[i]) {
                sig_power += std::norm(out.samples[i]);
                ++occ;
            }
        }
        const double p_signal = occ ? sig_power / static_cast<double>(occ) : 1.0;
        const double p_noise = noise_power_for_snr(p_signal, cfg.snr_db);
        const double sigma = std::sqrt(p_noise / 2.0);
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(frame), "echo-noise");
        for (auto& s : out.samples)
            s += cplx(sigma * rng.gaussian(), sigma * rng.gaussian());
    }
    return out;
}

std::vector<TargetState> propagate_targets(const std::vector<TargetState>& targets,
                                           double delta_t) {
    std::vector<TargetState> out = targets;
    for (auto& t : out) t.range_m += t.velocity_mps * delta_t;
    return out;
}

std::vector<Detection> gen_measurement_frame(const ScenarioConfig& cfg,
                                             const std::vector<TargetState>& targets,
                                             int frame,
                                             double sigma_range_m,
                                             double sigma_velocity_mps) {
    cfg.validate();
    const RadarParams& p = cfg.radar;
    const double max_range = p.max_range_m();
    const double vel_extent = kSpeedOfLight / (4.0 * p.carrier_hz * p.pulse_width_s);

    auto clamp_phys = [&](double& r, double& v) {
        r = std::clamp(r, 1e-6, max_range * (1.0 - 1e-12));
        v = std::clamp(v, -vel_extent, vel_extent * (1.0 - 1e-12));
    };

    std::vector<Detection> dets;
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(frame), "measurements");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double r = targets[i].range_m + sigma_range_m * rng.gaussian();
        double v = targets[i].velocity_mps + sigma_velocity_mps * rng.gaussian();
        clamp_phys(r, v);
        auto [rb, db] = rd::bin_of(r, v, p);
        Detection d;
        d.range_bin = rb;
        d.doppler_bin = db;
        d.confidence = rng.uniform(cfg.target_conf.lo, cfg.target_conf.hi);
        d.energy = targets[i].amplitude * targets[i].amplitude;
        // Persistent per-target appearance, jittered per frame.
        RngStream feat_rng(cfg.seed, static_cast<std::uint64_t>(i), "target-feature");
        FeatureVec f = random_unit_feature(feat_rng);
        double norm2 = 0.0;
        for (auto& x : f) {
            x += 0.05 * rng.gaussian();
            norm2 += x * x;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& x : f) x *= inv;
        d.feature = f;
        dets.push_back(d);
    }

    if (cfg.clutter_rate > 0) {
        if (cfg.clutter_range_m.empty() || cfg.clutter_velocity_mps.empty())
            throw ConfigError("gen_measurement_frame: empty clutter region");
        const int n_clutter = rng.poisson(cfg.clutter_rate);
        for (int i = 0; i < n_clutter; ++i) {
            double r = rng.uniform(cfg.clutter_range_m.lo, cfg.clutter_range_m.hi);
            double v = rng.uniform(cfg.clutter_velocity_mps.lo, cfg.clutter_velocity_mps.hi);
            clamp_phys(r, v);
            auto [rb, db] = rd::bin_of(r, v, p);
            Detection d;
            d.range_bin = rb;
            d.doppler_bin = db;
            d.confidence = rng.uniform(cfg.clutter_conf.lo, cfg.clutter_conf.hi);
            d.energy = d.confidence;
            d.feature = random_unit_feature(rng);
            dets.push_back(d);
        }
    }
    return dets;
}

}  // namespace rdtrack::sim
