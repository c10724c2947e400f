#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rdtrack/classic_detect.hpp"
#include "rdtrack/kernels.hpp"
#include "rdtrack/nn_layers.hpp"
#include "rdtrack/rd_pipeline.hpp"
#include "rdtrack/rng.hpp"
#include "rdtrack/signal_sim.hpp"

using namespace rdtrack;

namespace {
std::vector<cplx> random_signal(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed, 0, "test-signal");
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(rng.gaussian(), rng.gaussian());
    return v;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}
}  // namespace

TEST_CASE("fft matches the naive reference transform") {
    for (std::size_t n : {1u, 2u, 8u, 64u, 256u}) {
        auto sig = random_signal(n, n);
        const auto expect = kernels::dft_unitary_serial(sig, false);
        auto got = sig;
        kernels::fft_unitary(got, false);
        CHECK(max_abs_diff(got, expect) < 1e-9);
    }
}

TEST_CASE("fft handles non-power-of-two sizes through the reference path") {
    auto sig = random_signal(12, 5);
    const auto expect = kernels::dft_unitary_serial(sig, false);
    auto got = sig;
    kernels::fft_unitary(got, false);
    CHECK(max_abs_diff(got, expect) < 1e-9);
}

TEST_CASE("unitary fft round trip and energy preservation") {
    auto sig = random_signal(128, 9);
    double e_in = 0.0;
    for (auto& x : sig) e_in += std::norm(x);
    auto spec = sig;
    kernels::fft_unitary(spec, false);
    double e_spec = 0.0;
    for (auto& x : spec) e_spec += std::norm(x);
    CHECK(e_spec == doctest::Approx(e_in).epsilon(1e-12));
    kernels::fft_unitary(spec, true);
    CHECK(max_abs_diff(spec, sig) < 1e-10);
}

TEST_CASE("parallel pipeline kernels match their serial twins") {
    ScenarioConfig cfg;
    cfg.radar.num_samples = 128;
    cfg.radar.num_pulses = 64;
    cfg.radar.sample_rate_hz = cfg.radar.bandwidth_hz;
    cfg.radar.pulse_width_s = 64.0 / cfg.radar.sample_rate_hz;
    cfg.snr_db = -5.0;
    cfg.targets = {{10.0, 5.0, 1.0}};
    cfg.seed = 11;
    const RawEchoMatrix raw = sim::synth_echo(cfg, 0, cfg.targets);

    const auto pc_par = rd::pulse_compress(raw);
    const auto pc_ser = rd::pulse_compress_serial(raw);
    CHECK(pc_par.cells == pc_ser.cells);

    const auto ci_par = rd::coherent_integrate(pc_par);
    const auto ci_ser = rd::coherent_integrate_serial(pc_ser);
    CHECK(ci_par.cells == ci_ser.cells);

    detect::CfarConfig ccfg;
    ccfg.train_cells = 4;
    ccfg.guard_cells = 1;
    const auto det_par = detect::ca_cfar(ci_par, ccfg);
    const auto det_ser = detect::ca_cfar_serial(ci_par, ccfg);
    REQUIRE(det_par.size() == det_ser.size());
    for (std::size_t i = 0; i < det_par.size(); ++i) {
        CHECK(det_par[i].range_bin == det_ser[i].range_bin);
        CHECK(det_par[i].doppler_bin == det_ser[i].doppler_bin);
        CHECK(det_par[i].confidence == det_ser[i].confidence);
    }
}

TEST_CASE("parallel conv kernels match their serial twins") {
    RngStream rng(2, 0, "conv-test");
    Tensor in(8, 32, 32);
    for (auto& v : in.v) v = rng.gaussian();
    const nn::ConvSpec spec{8, 16, 3, 2, 1};
    std::vector<double> w(static_cast<size_t>(16) * 8 * 3 * 3), b(16);
    for (auto& v : w) v = rng.gaussian();
    for (auto& v : b) v = rng.gaussian();

    const Tensor out_p = nn::conv2d_forward(in, w, b, spec);
    const Tensor out_s = nn::conv2d_forward_serial(in, w, b, spec);
    CHECK(out_p.v == out_s.v);

    Tensor gi_p, gi_s;
    std::vector<double> gw_p(w.size(), 0.0), gb_p(b.size(), 0.0);
    std::vector<double> gw_s(w.size(), 0.0), gb_s(b.size(), 0.0);
    nn::conv2d_backward(in, w, spec, out_p, gi_p, gw_p, gb_p);
    nn::conv2d_backward_serial(in, w, spec, out_s, gi_s, gw_s, gb_s);
    CHECK(gi_p.v == gi_s.v);
    CHECK(gw_p == gw_s);
    CHECK(gb_p == gb_s);
}
