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

SynthSpec white_only_spec(double duration_s, std::uint64_t seed,
                          bool lockin = false) {
    SynthSpec spec = default_config().synth;
    spec.env_noise_floor_t_sqrthz = 0.0;
    spec.line_harmonics.clear();
    spec.injected_signals.clear();
    spec.drift.reset();
    spec.servo.reset();
    spec.apply_lockin_filter = lockin;
    spec.duration_s = duration_s;
    spec.seed = seed;
    return spec;
}

} // namespace

TEST_CASE("noiseless synthesis with one injected tone is a pure attenuated sinusoid") {
    SynthSpec spec = white_only_spec(5.0, 1, true);
    spec.budget = NoiseBudget{};  // noise fully off
    spec.injected_signals = {{40.0, 100e-12, 0.0}};
    const TimeTrace trace = synthesize(spec);
    REQUIRE(trace.samples.size() == 2000);

    const double amp = oracles::tone_amplitude(trace.samples, trace.fs_hz, 40.0);

    // consistency oracle: run the same tone through apply_lockin_lpf at the
    // synthesis rate and decimate identically
    const double fi = 400.0 * 8;
    TimeTrace tone;
    tone.fs_hz = fi;
    for (std::size_t i = 0; i < 16000; ++i)
        tone.samples.push_back(100e-12 *
                               std::sin(2.0 * M_PI * 40.0 * static_cast<double>(i) / fi));
    const TimeTrace filtered =
        apply_lockin_lpf(tone, spec.sensor.lockin_f3db_hz,
                         calibrate_order(spec.sensor.lockin_f3db_hz,
                                         spec.sensor.lockin_nep_bw_hz));
    std::vector<double> decimated;
    for (std::size_t j = 0; j < 2000; ++j) {
        double acc = 0.0;
        for (int k = 0; k < 8; ++k) acc += filtered.samples[j * 8 + k];
        decimated.push_back(acc / 8.0);
    }
    const double expected = oracles::tone_amplitude(decimated, 400.0, 40.0);

    CHECK(amp == approx(expected).epsilon(1e-9));
    CHECK(amp < 100e-12);           // lock-in low-pass attenuates
    CHECK(amp > 0.9 * 100e-12);     // but only mildly at 40 Hz
}

TEST_CASE("reference operating point yields the observed filtered trace spread") {
    const RunConfig config = default_config();
    const TimeTrace trace = synthesize(config.synth);
    const TimeTrace filtered = apply_filter_chain(trace, config.filters);
    CHECK(trace_std(filtered) == approx(128e-12).epsilon(0.10));
}

TEST_CASE("white-only spectrum floor matches the budget prediction") {
    SynthSpec spec = white_only_spec(60.0, 9, true);
    const TimeTrace trace = synthesize(spec);
    const auto spectrum = asd(trace, 2000, 12);
    const double floor = band_average(spectrum, 5.0, 50.0);
    const double predicted = field_noise_floor(
        noise_model_eval(spec.sensor.fl_photocurrent_a, spec.budget),
        spec.sensor.zero_crossing_slope_a_per_hz,
        spec.sensor.gyromagnetic_ratio_hz_per_t);
    CHECK(floor == approx(predicted).epsilon(0.05));
}

TEST_CASE("synthesis is deterministic in the seed") {
    const SynthSpec spec = default_config().synth;
    const TimeTrace a = synthesize(spec);
    const TimeTrace b = synthesize(spec);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        CHECK(a.samples[i] == b.samples[i]);

    SynthSpec other = spec;
    other.seed += 1;
    const TimeTrace c = synthesize(other);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        if (a.samples[i] != c.samples[i]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("white-noise power calibration across 100 seeds") {
    // with the lock-in filter off the sample variance times 2/Fs must
    // reproduce the configured one-sided PSD
    SynthSpec spec = white_only_spec(5.0, 0, false);
    const double n_current = noise_model_eval(spec.sensor.fl_photocurrent_a, spec.budget);
    const double response = field_response(spec.sensor.zero_crossing_slope_a_per_hz,
                                           spec.sensor.gyromagnetic_ratio_hz_per_t);
    const double psd = std::pow(n_current / response, 2);

    const int n_seeds = 100;
    double mean_psd = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
        spec.seed = 1000 + static_cast<std::uint64_t>(s);
        const TimeTrace trace = synthesize(spec);
        const double sd = trace_std(trace);
        mean_psd += sd * sd * 2.0 / trace.fs_hz;
    }
    mean_psd /= n_seeds;
    // variance of a sample variance over N iid gaussians is 2 sigma^4 / (N-1)
    const double n_samples = 2000.0;
    const double se = psd * std::sqrt(2.0 / ((n_samples - 1.0) * n_seeds));
    CHECK(std::abs(mean_psd - psd) <= 3.0 * se);
}

TEST_CASE("zero slope with nonzero current noise is singular") {
    SynthSpec spec = white_only_spec(1.0, 1, false);
    spec.sensor.zero_crossing_slope_a_per_hz = 0.0;
    CHECK_THROWS_AS(synthesize(spec), singular_parameter_error);
}

TEST_CASE("synthesis validation") {
    SynthSpec spec = white_only_spec(0.0, 1);
    CHECK_THROWS_AS(synthesize(spec), std::invalid_argument);
    spec = white_only_spec(1.0, 1);
    spec.env_noise_floor_t_sqrthz = -1.0;
    CHECK_THROWS_AS(synthesize(spec), std::invalid_argument);
    spec = white_only_spec(1.0, 1);
    spec.servo = ServoSpec{10.0, 20.0};  // loop bandwidth above lpf cutoff
    CHECK_THROWS_AS(synthesize(spec), std::invalid_argument);
}

TEST_CASE("lock-in low-pass leaves dc unchanged") {
    TimeTrace trace;
    trace.fs_hz = 3200.0;
    trace.samples.assign(4000, 3.7e-12);
    const TimeTrace out = apply_lockin_lpf(trace, 149.4, 4);
    for (double v : out.samples) CHECK(v == approx(3.7e-12).epsilon(1e-12));
}

TEST_CASE("lock-in low-pass is 3 dB down at the cascade cutoff") {
    for (int order : {1, 2, 4}) {
        TimeTrace tone;
        tone.fs_hz = 3200.0;
        const double f = 149.4;
        for (std::size_t i = 0; i < 64000; ++i)
            tone.samples.push_back(
                std::sin(2.0 * M_PI * f * static_cast<double>(i) / tone.fs_hz));
        const TimeTrace out = apply_lockin_lpf(tone, f, order);
        // measure on the tail, past the filter transient
        std::vector<double> tail(out.samples.begin() + 16000, out.samples.end());
        const double amp = oracles::tone_amplitude(tail, tone.fs_hz, f);
        CHECK(amp == approx(1.0 / std::sqrt(2.0)).epsilon(0.01));
    }
}

TEST_CASE("lock-in cascade NEP over f3db reproduces the instrument ratio") {
    const int order = calibrate_order(149.4, 168.8);
    const auto nep = nep_bandwidth(LockinLpfSpec{149.4, order}, 3200.0, 1 << 16, 16);
    CHECK(nep.f_nep_hz / 149.4 == approx(168.8 / 149.4).epsilon(0.018));
}

TEST_CASE("lock-in low-pass is linear") {
    Rng rng(5);
    TimeTrace x, y;
    x.fs_hz = y.fs_hz = 1000.0;
    for (int i = 0; i < 3000; ++i) {
        x.samples.push_back(rng.gaussian());
        y.samples.push_back(rng.gaussian());
    }
    TimeTrace combo = x;
    for (std::size_t i = 0; i < combo.samples.size(); ++i)
        combo.samples[i] = 2.0 * x.samples[i] - 0.5 * y.samples[i];

    const TimeTrace fx = apply_lockin_lpf(x, 100.0, 3);
    const TimeTrace fy = apply_lockin_lpf(y, 100.0, 3);
    const TimeTrace fc = apply_lockin_lpf(combo, 100.0, 3);
    for (std::size_t i = 0; i < fc.samples.size(); ++i)
        CHECK(std::abs(fc.samples[i] - (2.0 * fx.samples[i] - 0.5 * fy.samples[i])) <=
              1e-12);  // inputs are order-one
}

TEST_CASE("lock-in low-pass argument checks") {
    TimeTrace trace;
    trace.fs_hz = 400.0;
    trace.samples.assign(100, 0.0);
    CHECK_THROWS_AS(apply_lockin_lpf(trace, 200.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(apply_lockin_lpf(trace, 50.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(apply_lockin_lpf(trace, -1.0, 1), std::invalid_argument);
}

TEST_CASE("cascade order calibration") {
    CHECK(calibrate_order(100.0, 157.0) == 1);   // single pole: pi/2
    CHECK(calibrate_order(100.0, 122.0) == 2);   // double pole cascade
    const int order = calibrate_order(149.4, 168.8);
    CHECK(lpf_cascade_nep_ratio(order) == approx(168.8 / 149.4).epsilon(0.02));
    CHECK(order == 4);

    // analytic single- and double-pole ratios
    CHECK(lpf_cascade_nep_ratio(1) == approx(M_PI / 2.0).epsilon(1e-12));
    CHECK(lpf_cascade_nep_ratio(2) ==
          approx(0.25 * M_PI / std::sqrt(std::sqrt(2.0) - 1.0)).epsilon(1e-12));

    CHECK_THROWS_AS(calibrate_order(100.0, 99.0), std::invalid_argument);
    CHECK_THROWS_AS(calibrate_order(100.0, 160.0), no_solution_error);  // above pi/2
    CHECK_THROWS_AS(calibrate_order(100.0, 104.0), no_solution_error);  // below cascades
}

TEST_CASE("double-pole cascade ratio cross-checked by Monte-Carlo NEP") {
    const auto nep = nep_bandwidth(LockinLpfSpec{50.0, 2}, 4000.0, 1 << 16, 16);
    CHECK(nep.f_nep_hz / 50.0 == approx(lpf_cascade_nep_ratio(2)).epsilon(0.02));
}

TEST_CASE("servo drives a constant offset to zero") {
    TimeTrace trace;
    trace.fs_hz = 400.0;
    trace.samples.assign(8000, 5e-11);
    const TimeTrace out = servo_lock(trace, 10.0, 2.0);
    CHECK(std::abs(out.samples.back()) < 1e-3 * 5e-11);
}

TEST_CASE("servo suppresses slow components and passes fast ones") {
    auto make_tone = [](double f, double fs, double seconds) {
        TimeTrace tone;
        tone.fs_hz = fs;
        const auto n = static_cast<std::size_t>(seconds * fs);
        for (std::size_t i = 0; i < n; ++i)
            tone.samples.push_back(
                1e-10 * std::sin(2.0 * M_PI * f * static_cast<double>(i) / fs));
        return tone;
    };

    // |H(f)| = f / sqrt(f^2 + f_bw^2) for the integral loop
    {
        const TimeTrace out = servo_lock(make_tone(0.2, 400.0, 40.0), 10.0, 2.0);
        std::vector<double> tail(out.samples.begin() + 8000, out.samples.end());
        const double amp = oracles::tone_amplitude(tail, 400.0, 0.2);
        const double expected = 1e-10 * 0.2 / std::sqrt(0.2 * 0.2 + 2.0 * 2.0);
        CHECK(amp == approx(expected).epsilon(0.05));
        CHECK(amp <= 1e-10 / 10.0);
    }
    {
        const TimeTrace out = servo_lock(make_tone(40.0, 400.0, 10.0), 10.0, 2.0);
        std::vector<double> tail(out.samples.begin() + 2000, out.samples.end());
        const double amp = oracles::tone_amplitude(tail, 400.0, 40.0);
        CHECK(amp == approx(1e-10).epsilon(0.05));
    }
}

TEST_CASE("servo output stays bounded on a ramp") {
    TimeTrace ramp;
    ramp.fs_hz = 400.0;
    const double rate = 1e-12;  // tesla per second
    for (int i = 0; i < 40000; ++i)
        ramp.samples.push_back(rate * static_cast<double>(i) / 400.0);
    const TimeTrace out = servo_lock(ramp, 10.0, 2.0);
    const double bound = 2.0 * rate / (2.0 * M_PI * 2.0);  // steady-state lag error
    for (double v : out.samples) CHECK(std::abs(v) <= bound);
}

TEST_CASE("servo argument checks") {
    TimeTrace trace;
    trace.fs_hz = 400.0;
    trace.samples.assign(100, 0.0);
    CHECK_THROWS_AS(servo_lock(trace, 10.0, 15.0), std::invalid_argument);
    CHECK_THROWS_AS(servo_lock(trace, 300.0, 2.0), std::invalid_argument);
}

TEST_CASE("servo inside synthesis suppresses the drift component") {
    SynthSpec spec = white_only_spec(120.0, 3, false);
    spec.budget = NoiseBudget{};
    spec.drift = DriftComponent{30.0, 1e-10};

    const TimeTrace open_loop = synthesize(spec);
    spec.servo = ServoSpec{10.0, 2.0};
    const TimeTrace closed_loop = synthesize(spec);

    const double open_amp = oracles::tone_amplitude(open_loop.samples, 400.0, 1.0 / 30.0);
    const double closed_amp =
        oracles::tone_amplitude(closed_loop.samples, 400.0, 1.0 / 30.0);
    CHECK(closed_amp < 0.05 * open_amp);
}
