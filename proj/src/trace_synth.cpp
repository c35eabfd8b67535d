#include "diamag/trace_synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "diamag/errors.hpp"
#include "diamag/random.hpp"

namespace diamag {

namespace {

// One-pole low-pass y[n] = (1-p) x[n] + p y[n-1], dc gain 1. The zero-free
// form keeps the full noise power of the analog section (the out-of-band
// tail folds back on sampling), so the cascade's noise-equivalent
// bandwidth matches the analog filter it stands in for.
struct OnePole {
    double g = 0.0;  // 1 - p
    double p = 0.0;
    double y_prev = 0.0;

    void prime(double x0) { y_prev = x0; }  // dc steady state
    double step(double x) {
        const double y = g * x + p * y_prev;
        y_prev = y;
        return y;
    }
};

double one_pole_power_gain(double pole, double theta) {
    const double g = 1.0 - pole;
    const double den = 1.0 - 2.0 * pole * std::cos(theta) + pole * pole;
    return g * g / den;
}

// Pole placement such that a cascade of `order` identical sections is
// exactly 3 dB down at f3db: each section must satisfy
// |H1(theta3)|^2 = 2^(-1/order). The power gain is monotone in the pole,
// so bisection suffices.
double solve_section_pole(double f3db_hz, double fs_hz, int order) {
    const double theta = 2.0 * M_PI * f3db_hz / fs_hz;
    const double target = std::pow(2.0, -1.0 / static_cast<double>(order));
    double lo = -1.0 + 1e-12, hi = 1.0 - 1e-12;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (one_pole_power_gain(mid, theta) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct LpfCascade {
    std::vector<OnePole> sections;

    static LpfCascade design(double f3db_hz, double fs_hz, int order) {
        const double pole = solve_section_pole(f3db_hz, fs_hz, order);
        const double gain = 1.0 - pole;
        LpfCascade c;
        c.sections.assign(static_cast<std::size_t>(order), OnePole{gain, pole, 0.0});
        return c;
    }
    void prime(double x0) {
        for (auto& s : sections) s.prime(x0);
    }
    double step(double x) {
        for (auto& s : sections) x = s.step(x);
        return x;
    }
};

} // namespace

void validate(const SynthSpec& spec) {
    validate(spec.sensor);
    validate(spec.budget);
    if (!(spec.duration_s > 0.0))
        throw std::invalid_argument("SynthSpec: duration must be > 0");
    if (spec.oversample < 1)
        throw std::invalid_argument("SynthSpec: oversample must be >= 1");
    if (spec.env_noise_floor_t_sqrthz < 0.0)
        throw std::invalid_argument("SynthSpec: environmental floor must be >= 0");
    for (const auto& line : spec.line_harmonics)
        if (line.amplitude_t < 0.0 || !(line.freq_hz > 0.0))
            throw std::invalid_argument("SynthSpec: bad line harmonic");
    for (const auto& tone : spec.injected_signals)
        if (tone.amplitude_t < 0.0 || !(tone.freq_hz > 0.0))
            throw std::invalid_argument("SynthSpec: bad injected signal");
    if (spec.drift && (spec.drift->amplitude_t < 0.0 || !(spec.drift->period_s > 0.0)))
        throw std::invalid_argument("SynthSpec: bad drift component");
    if (spec.servo) {
        const double fs = spec.sensor.sampling_frequency_hz;
        if (!(spec.servo->loop_bandwidth_hz < spec.servo->lpf_cutoff_hz &&
              spec.servo->lpf_cutoff_hz < 0.5 * fs))
            throw std::invalid_argument(
                "SynthSpec: require loop_bandwidth < lpf_cutoff < Fs/2");
    }
}

TimeTrace synthesize(const SynthSpec& spec) {
    validate(spec);
    const double fs = spec.sensor.sampling_frequency_hz;
    if (!(fs > 0.0)) throw std::invalid_argument("synthesize: sampling frequency must be > 0");

    const double n_current = noise_model_eval(spec.sensor.fl_photocurrent_a, spec.budget);
    const double response = field_response(spec.sensor.zero_crossing_slope_a_per_hz,
                                           spec.sensor.gyromagnetic_ratio_hz_per_t);
    if (n_current > 0.0 && response == 0.0)
        throw singular_parameter_error(
            "synthesize: zero slope cannot convert current noise to field");

    const bool use_lpf = spec.apply_lockin_filter && spec.sensor.lockin_f3db_hz > 0.0;
    const int osf = use_lpf ? spec.oversample : 1;
    const double fi = fs * static_cast<double>(osf);
    const std::size_t n_out =
        static_cast<std::size_t>(std::llround(spec.duration_s * fs));
    if (n_out == 0) throw std::invalid_argument("synthesize: duration too short");
    const std::size_t n_int = n_out * static_cast<std::size_t>(osf);

    LpfCascade lpf;
    if (use_lpf) {
        int order = spec.lockin_order;
        if (order <= 0)
            order = calibrate_order(spec.sensor.lockin_f3db_hz, spec.sensor.lockin_nep_bw_hz);
        if (!(spec.sensor.lockin_f3db_hz < 0.5 * fi))
            throw std::invalid_argument("synthesize: lock-in cutoff above internal Nyquist");
        lpf = LpfCascade::design(spec.sensor.lockin_f3db_hz, fi, order);
        lpf.prime(0.0);
    }

    OnePole servo_lpf;
    double servo_gain = 0.0, correction = 0.0;
    if (spec.servo) {
        const double pole = solve_section_pole(spec.servo->lpf_cutoff_hz, fi, 1);
        servo_lpf = OnePole{1.0 - pole, pole, 0.0};
        servo_gain = 2.0 * M_PI * spec.servo->loop_bandwidth_hz / fi;
    }

    const double sigma_current_field =
        (n_current > 0.0 ? n_current * std::sqrt(0.5 * fi) / std::abs(response) : 0.0);
    const double sigma_env = spec.env_noise_floor_t_sqrthz * std::sqrt(0.5 * fi);

    Rng rng(spec.seed);
    TimeTrace trace;
    trace.fs_hz = fs;
    trace.units = TraceUnits::tesla;
    trace.samples.assign(n_out, 0.0);

    double accum = 0.0;
    std::size_t block = 0, out_index = 0;
    for (std::size_t i = 0; i < n_int; ++i) {
        const double t = static_cast<double>(i) / fi;
        double v = 0.0;
        if (sigma_current_field > 0.0) v += sigma_current_field * rng.gaussian();
        if (sigma_env > 0.0) v += sigma_env * rng.gaussian();
        for (const auto& line : spec.line_harmonics)
            v += line.amplitude_t * std::sin(2.0 * M_PI * line.freq_hz * t);
        if (spec.drift)
            v += spec.drift->amplitude_t * std::sin(2.0 * M_PI * t / spec.drift->period_s);
        for (const auto& tone : spec.injected_signals)
            v += tone.amplitude_t * std::sin(2.0 * M_PI * tone.freq_hz * t + tone.phase_rad);

        double y = v - correction;
        if (use_lpf) y = lpf.step(y);
        if (spec.servo) correction += servo_gain * servo_lpf.step(y);

        accum += y;
        if (++block == static_cast<std::size_t>(osf)) {
            trace.samples[out_index++] = accum / static_cast<double>(osf);
            accum = 0.0;
            block = 0;
        }
    }
    return trace;
}

TimeTrace apply_lockin_lpf(const TimeTrace& trace, double f3db_hz, int order) {
    validate_trace(trace);
    if (order < 1) throw std::invalid_argument("apply_lockin_lpf: order must be >= 1");
    if (!(f3db_hz > 0.0 && f3db_hz < 0.5 * trace.fs_hz))
        throw std::invalid_argument("apply_lockin_lpf: need 0 < f3db < Fs/2");

    LpfCascade lpf = LpfCascade::design(f3db_hz, trace.fs_hz, order);
    lpf.prime(trace.samples.front());
    TimeTrace out = trace;
    for (auto& v : out.samples) v = lpf.step(v);
    return out;
}

double lpf_cascade_nep_ratio(int order) {
    if (order < 1) throw std::invalid_argument("lpf_cascade_nep_ratio: order must be >= 1");
    // Section cutoff relative to the cascade 3-dB point: 1/sqrt(2^(1/k)-1).
    // ENBW of (1+x^2)^-k is (pi/2) * (2k-3)!!/(2k-2)!! times the section
    // cutoff (Wallis integral).
    double wallis = 1.0;
    for (int k = 2; k <= order; ++k)
        wallis *= static_cast<double>(2 * k - 3) / static_cast<double>(2 * k - 2);
    const double stretch = 1.0 / std::sqrt(std::pow(2.0, 1.0 / order) - 1.0);
    return stretch * 0.5 * M_PI * wallis;
}

int calibrate_order(double f3db_hz, double target_nep_hz) {
    if (!(f3db_hz > 0.0))
        throw std::invalid_argument("calibrate_order: f3db must be > 0");
    if (!(target_nep_hz >= f3db_hz))
        throw std::invalid_argument("calibrate_order: target NEP below f3db is unreachable");

    constexpr int kMaxOrder = 16;
    const double target_ratio = target_nep_hz / f3db_hz;
    const double ratio_hi = lpf_cascade_nep_ratio(1);
    const double ratio_lo = lpf_cascade_nep_ratio(kMaxOrder);
    if (target_ratio > ratio_hi || target_ratio < ratio_lo)
        throw no_solution_error(
            "calibrate_order: NEP/f3db ratio " + std::to_string(target_ratio) +
            " unreachable; identical one-pole cascades cover [" + std::to_string(ratio_lo) +
            ", " + std::to_string(ratio_hi) + "]");

    int best = 1;
    double best_err = std::abs(lpf_cascade_nep_ratio(1) - target_ratio);
    for (int k = 2; k <= kMaxOrder; ++k) {
        const double err = std::abs(lpf_cascade_nep_ratio(k) - target_ratio);
        if (err < best_err) {
            best_err = err;
            best = k;
        }
    }
    return best;
}

TimeTrace servo_lock(const TimeTrace& trace, double lpf_cutoff_hz,
                     double loop_bandwidth_hz) {
    validate_trace(trace);
    if (!(loop_bandwidth_hz < lpf_cutoff_hz && lpf_cutoff_hz < 0.5 * trace.fs_hz))
        throw std::invalid_argument("servo_lock: require loop_bandwidth < lpf_cutoff < Fs/2");
    if (!(loop_bandwidth_hz > 0.0))
        throw std::invalid_argument("servo_lock: loop bandwidth must be > 0");

    const double pole = solve_section_pole(lpf_cutoff_hz, trace.fs_hz, 1);
    OnePole lpf{1.0 - pole, pole, 0.0};
    const double gain = 2.0 * M_PI * loop_bandwidth_hz / trace.fs_hz;

    TimeTrace out = trace;
    double correction = 0.0;
    for (auto& v : out.samples) {
        const double e = v - correction;
        correction += gain * lpf.step(e);
        v = e;
    }
    return out;
}

} // namespace diamag
