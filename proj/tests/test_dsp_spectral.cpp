#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <cmath>

#include "diamag/config.hpp"
#include "diamag/dsp_spectral.hpp"
#include "diamag/errors.hpp"
#include "diamag/random.hpp"
#include "diamag/trace_synth.hpp"
#include "oracles.hpp"

using namespace diamag;

namespace {

TimeTrace white_trace(std::size_t n, double fs, std::uint64_t seed, double sigma = 1.0) {
    TimeTrace trace;
    trace.fs_hz = fs;
    trace.samples.resize(n);
    Rng rng(seed);
    for (auto& v : trace.samples) v = sigma * rng.gaussian();
    return trace;
}

TimeTrace tone_trace(std::size_t n, double fs, double f0, double amplitude,
                     double offset = 0.0) {
    TimeTrace trace;
    trace.fs_hz = fs;
    for (std::size_t i = 0; i < n; ++i)
        trace.samples.push_back(
            offset + amplitude * std::sin(2.0 * M_PI * f0 * static_cast<double>(i) / fs));
    return trace;
}

} // namespace

TEST_CASE("white noise has a flat density of sqrt(2/Fs)") {
    const TimeTrace trace = white_trace(2000 * 64, 400.0, 21);
    const auto spectrum = asd(trace, 2000, 64);
    const double expected = std::sqrt(2.0 / 400.0);
    CHECK(band_average(spectrum, 5.0, 195.0) == approx(expected).epsilon(0.05));
}

TEST_CASE("bin-centered sinusoid concentrates its power in one bin") {
    const double fs = 400.0, amplitude = 2.5;
    const std::size_t len = 2000;
    const double f0 = 40.0;  // exactly bin 200 at rbw 0.2 Hz
    const TimeTrace trace = tone_trace(len, fs, f0, amplitude);
    const auto spectrum = asd(trace, len, 1);

    const auto bin = static_cast<std::size_t>(f0 / spectrum.resolution_bw_hz);
    const double bin_power =
        spectrum.density[bin] * spectrum.density[bin] * spectrum.resolution_bw_hz;
    CHECK(bin_power == approx(amplitude * amplitude / 2.0).epsilon(1e-9));
    for (std::size_t k = 0; k < spectrum.density.size(); ++k) {
        if (k == bin) continue;
        CHECK(spectrum.density[k] < 1e-9 * spectrum.density[bin]);
    }
}

TEST_CASE("Parseval holds to 1e-6 for a single rectangular segment") {
    const TimeTrace trace = white_trace(2000, 400.0, 3);
    const auto spectrum = asd(trace, 2000, 1);
    double integral = 0.0;
    for (double d : spectrum.density) integral += d * d * spectrum.resolution_bw_hz;

    const double mean = trace_mean(trace);
    double pop_var = 0.0;
    for (double v : trace.samples) pop_var += (v - mean) * (v - mean);
    pop_var /= static_cast<double>(trace.samples.size());

    CHECK(integral == approx(pop_var).epsilon(1e-6));
}

TEST_CASE("asd scales linearly with the trace amplitude") {
    const TimeTrace trace = white_trace(4096, 400.0, 8);
    TimeTrace scaled = trace;
    const double gain = 7.5;
    for (auto& v : scaled.samples) v /= gain;
    const auto base = asd(trace, 1024, 4);
    const auto small = asd(scaled, 1024, 4);
    for (std::size_t k = 1; k < base.density.size(); ++k)
        CHECK(small.density[k] == approx(base.density[k] / gain).epsilon(1e-10));
}

TEST_CASE("asd argument checks") {
    const TimeTrace trace = white_trace(1000, 400.0, 5);
    CHECK_THROWS_AS(asd(trace, 2000, 1), std::invalid_argument);
    CHECK_THROWS_AS(asd(trace, 600, 2), std::invalid_argument);
    CHECK_THROWS_AS(asd(trace, 500, 0), std::invalid_argument);
}

TEST_CASE("50 Hz tone is rejected by the 50 Hz notch") {
    FilterChain chain;
    chain.notches.push_back({50.0, 30.0});
    const TimeTrace tone = tone_trace(8000, 400.0, 50.0, 1.0);
    const TimeTrace out = apply_filter_chain(tone, chain);
    std::vector<double> tail(out.samples.begin() + 4000, out.samples.end());
    CHECK(oracles::tone_amplitude(tail, 400.0, 50.0) < 0.01);
}

TEST_CASE("40 Hz tone survives the full standard chain") {
    const FilterChain chain = standard_filter_chain(400.0);
    REQUIRE(chain.notches.size() == 3);  // 50, 100, 150 Hz
    CHECK(chain.notches[2].center_hz == approx(150.0));
    const TimeTrace tone = tone_trace(8000, 400.0, 40.0, 1.0);
    const TimeTrace out = apply_filter_chain(tone, chain);
    std::vector<double> tail(out.samples.begin() + 4000, out.samples.end());
    CHECK(oracles::tone_amplitude(tail, 400.0, 40.0) == approx(1.0).epsilon(0.05));
}

TEST_CASE("dc offset is suppressed at least 40 dB by the band-pass") {
    const FilterChain chain = standard_filter_chain(400.0);
    TimeTrace dc;
    dc.fs_hz = 400.0;
    dc.samples.assign(8000, 1.0);
    const TimeTrace out = apply_filter_chain(dc, chain);
    // steady-state tail after the high-pass transient decays
    double tail_max = 0.0;
    for (std::size_t i = 6000; i < out.samples.size(); ++i)
        tail_max = std::max(tail_max, std::abs(out.samples[i]));
    CHECK(tail_max < 1e-2);  // -40 dB
}

TEST_CASE("zero-phase filtering preserves signal timing") {
    FilterChain chain = standard_filter_chain(400.0);
    chain.zero_phase = true;
    const TimeTrace tone = tone_trace(4000, 400.0, 20.0, 1.0);
    const TimeTrace out = apply_filter_chain(tone, chain);

    // cross-correlation between input and output peaks at lag zero
    double best = -1e300;
    int best_lag = -99;
    for (int lag = -8; lag <= 8; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 200; i + 200 < tone.samples.size(); ++i)
            acc += tone.samples[i] * out.samples[i + static_cast<std::size_t>(lag + 8) - 8];
        if (acc > best) {
            best = acc;
            best_lag = lag;
        }
    }
    CHECK(best_lag == 0);
}

TEST_CASE("filter chain is linear") {
    const FilterChain chain = standard_filter_chain(400.0);
    const TimeTrace x = white_trace(3000, 400.0, 31);
    const TimeTrace y = white_trace(3000, 400.0, 32);
    TimeTrace combo = x;
    for (std::size_t i = 0; i < combo.samples.size(); ++i)
        combo.samples[i] = 1.5 * x.samples[i] + 0.25 * y.samples[i];
    const TimeTrace fx = apply_filter_chain(x, chain);
    const TimeTrace fy = apply_filter_chain(y, chain);
    const TimeTrace fc = apply_filter_chain(combo, chain);
    for (std::size_t i = 0; i < fc.samples.size(); ++i)
        CHECK(std::abs(fc.samples[i] - (1.5 * fx.samples[i] + 0.25 * fy.samples[i])) <=
              1e-11);  // inputs are order-one
}

TEST_CASE("filter chain argument checks") {
    const TimeTrace trace = white_trace(1000, 400.0, 2);
    FilterChain chain;
    chain.notches.push_back({200.0, 30.0});  // at Nyquist
    CHECK_THROWS_AS(apply_filter_chain(trace, chain), std::invalid_argument);
    chain.notches.clear();
    chain.bandpass = BandpassSpec{100.0, 5.0, 2};  // inverted band
    CHECK_THROWS_AS(apply_filter_chain(trace, chain), std::invalid_argument);
}

TEST_CASE("NEP of the identity filter is Fs/2") {
    const auto nep = nep_bandwidth(IdentityFilter{}, 400.0, 1 << 15, 12);
    CHECK(nep.f_nep_hz == approx(200.0).epsilon(0.01));
}

TEST_CASE("NEP of a brick-wall band equals its width") {
    const auto nep = nep_bandwidth(BrickwallBand{5.0, 100.0}, 400.0, 1 << 16, 12);
    CHECK(nep.f_nep_hz == approx(95.0).epsilon(0.01));
    CHECK(nep.std_error_hz < 0.01 * nep.f_nep_hz);
}

TEST_CASE("NEP of a single analog-style pole is (pi/2) f3db") {
    const auto nep = nep_bandwidth(LockinLpfSpec{100.0, 1}, 4000.0, 1 << 16, 16);
    CHECK(nep.f_nep_hz == approx(0.5 * M_PI * 100.0).epsilon(0.02));
}

TEST_CASE("NEP of the standard chain matches the instrument calibration") {
    const auto nep = nep_bandwidth(standard_filter_chain(400.0), 400.0, 1 << 16, 16);
    CHECK(nep.f_nep_hz == approx(91.9).epsilon(0.05));
}

TEST_CASE("degenerate filter reports zero bandwidth with a warning") {
    const auto nep = nep_bandwidth(BrickwallBand{300.0, 399.0}, 400.0, 1 << 14, 4);
    CHECK(nep.degenerate);
    CHECK(nep.f_nep_hz == 0.0);
}

TEST_CASE("band average basics") {
    AmplitudeSpectrum flat;
    for (int k = 0; k <= 100; ++k) {
        flat.frequencies_hz.push_back(k * 2.0);
        flat.density.push_back(3.3e-12);
    }
    flat.resolution_bw_hz = 2.0;
    CHECK(band_average(flat, 10.0, 150.0) == approx(3.3e-12).epsilon(1e-12));

    AmplitudeSpectrum spike = flat;
    spike.density[25] = 3.3e-11;
    double median = 3.3e-12;  // all but one bin share this value
    CHECK(band_average(spike, 0.0, 200.0) > median);

    CHECK_THROWS_AS(band_average(flat, 300.0, 400.0), std::invalid_argument);
    CHECK_THROWS_AS(band_average(flat, 100.0, 50.0), std::invalid_argument);
}

TEST_CASE("far-detuned synthetic trace band average matches the noise model") {
    SynthSpec spec = default_config().synth;
    spec.env_noise_floor_t_sqrthz = 0.0;
    spec.line_harmonics.clear();
    spec.injected_signals.clear();
    spec.drift.reset();
    spec.duration_s = 60.0;
    spec.seed = 7;
    const TimeTrace trace = synthesize(spec);
    const auto spectrum = asd(trace, 2000, 12);
    const double floor = band_average(spectrum, 5.0, 50.0);
    const double predicted =
        field_noise_floor(noise_model_eval(6.4e-3, spec.budget), 332e-12, 2.80e10);
    CHECK(floor == approx(predicted).epsilon(0.05));
}

TEST_CASE("reference trace floor sits near 9 pT/rtHz away from the disturbances") {
    SynthSpec spec = default_config().synth;
    spec.duration_s = 60.0;
    const TimeTrace trace = synthesize(spec);
    const auto spectrum = asd(trace, 2000, 12);
    CHECK(band_average(spectrum, 35.0, 45.0) == approx(9e-12).epsilon(0.17));
    CHECK(band_average(spectrum, 70.0, 90.0) == approx(9e-12).epsilon(0.17));
}
