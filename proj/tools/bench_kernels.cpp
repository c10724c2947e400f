// Timing comparison of the OpenMP kernels against their serial references.

#include <cstdio>
#include <vector>

#include <omp.h>

#include "rdtrack/classic_detect.hpp"
#include "rdtrack/nn_layers.hpp"
#include "rdtrack/rd_pipeline.hpp"
#include "rdtrack/rng.hpp"
#include "rdtrack/signal_sim.hpp"

using namespace rdtrack;

namespace {

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const double t0 = omp_get_wtime();
        fn();
        best = std::min(best, omp_get_wtime() - t0);
    }
    return best;
}

void report(const char* name, double serial_s, double parallel_s) {
    std::printf("%-24s serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n", name,
                serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());

    ScenarioConfig cfg;
    cfg.radar.sample_rate_hz = cfg.radar.bandwidth_hz;
    cfg.radar.pulse_width_s = 0.5 * cfg.radar.num_samples / cfg.radar.sample_rate_hz;
    cfg.snr_db = -10.0;
    cfg.targets = {{40.0, 8.0, 1.0}, {55.0, -4.0, 0.7}};
    cfg.seed = 3;

    const RawEchoMatrix raw = sim::synth_echo(cfg, 0, cfg.targets);
    report("pulse_compress",
           time_best_of(3, [&] { rd::pulse_compress_serial(raw); }),
           time_best_of(3, [&] { rd::pulse_compress(raw); }));

    const rd::RDMatrix compressed = rd::pulse_compress(raw);
    report("coherent_integrate",
           time_best_of(3, [&] { rd::coherent_integrate_serial(compressed); }),
           time_best_of(3, [&] { rd::coherent_integrate(compressed); }));

    const rd::RDMatrix rdm = rd::coherent_integrate(compressed);
    detect::CfarConfig cfar;
    report("ca_cfar",
           time_best_of(3, [&] { detect::ca_cfar_serial(rdm, cfar); }),
           time_best_of(3, [&] { detect::ca_cfar(rdm, cfar); }));

    // conv kernel at encoder scale
    RngStream rng(1, 0, "bench");
    Tensor in(16, 128, 128);
    for (auto& v : in.v) v = rng.gaussian();
    const nn::ConvSpec spec{16, 32, 3, 2, 1};
    std::vector<double> w(static_cast<size_t>(32) * 16 * 3 * 3), b(32);
    for (auto& v : w) v = rng.gaussian();
    report("conv2d_forward",
           time_best_of(3, [&] { nn::conv2d_forward_serial(in, w, b, spec); }),
           time_best_of(3, [&] { nn::conv2d_forward(in, w, b, spec); }));

    const Tensor out = nn::conv2d_forward(in, w, b, spec);
    Tensor g_in;
    std::vector<double> g_w(w.size()), g_b(b.size());
    report("conv2d_backward",
           time_best_of(3, [&] { nn::conv2d_backward_serial(in, w, spec, out, g_in, g_w, g_b); }),
           time_best_of(3, [&] { nn::conv2d_backward(in, w, spec, out, g_in, g_w, g_b); }));

    return 0;
}
