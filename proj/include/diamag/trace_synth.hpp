#ifndef DIAMAG_TRACE_SYNTH_HPP
#define DIAMAG_TRACE_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "diamag/noise_budget.hpp"
#include "diamag/odmr_model.hpp"
#include "diamag/trace.hpp"

namespace diamag {

struct LineHarmonic {
    double freq_hz = 0.0;
    double amplitude_t = 0.0;
};

struct DriftComponent {
    double period_s = 40.0;
    double amplitude_t = 0.0;
};

struct InjectedTone {
    double freq_hz = 0.0;
    double amplitude_t = 0.0;
    double phase_rad = 0.0;
};

struct ServoSpec {
    double lpf_cutoff_hz = 10.0;
    double loop_bandwidth_hz = 2.0;
};

// Digital twin of the demodulated detection chain, at baseband. The
// current-domain noise follows the three-term budget; everything else is
// an equivalent magnetic-field component. When the lock-in low-pass is
// enabled, synthesis runs at an oversampled internal rate and decimates
// by block averaging so the analog filter is rendered accurately.
struct SynthSpec {
    SensorConfig sensor;
    NoiseBudget budget;
    std::vector<LineHarmonic> line_harmonics;
    std::optional<DriftComponent> drift;
    std::vector<InjectedTone> injected_signals;
    std::optional<ServoSpec> servo;
    // Phenomenological environmental field-noise floor (T/sqrt(Hz)),
    // white in band; models residual shield leakage and sensor-head
    // pickup seen only in the on-resonance measurement.
    double env_noise_floor_t_sqrthz = 0.0;
    bool apply_lockin_filter = true;
    int lockin_order = 0;  // 0 = calibrate from sensor NEP/f3db ratio
    int oversample = 8;
    double duration_s = 5.0;
    std::uint64_t seed = 1;
};

void validate(const SynthSpec& spec);

// Generate a demodulated trace in tesla. Identical specs (including the
// seed) produce bit-identical traces.
TimeTrace synthesize(const SynthSpec& spec);

// Cascade of `order` identical one-pole low-pass sections, each solved so
// the cascade's 3-dB point lands exactly on f3db. Output has the same
// length; the filter state starts at dc steady state for the first sample.
TimeTrace apply_lockin_lpf(const TimeTrace& trace, double f3db_hz, int order);

// Smallest-error cascade order whose noise-equivalent-power bandwidth over
// the 3-dB frequency matches target_nep/f3db. Uses the closed-form ENBW of
// an identical-one-pole cascade.
int calibrate_order(double f3db_hz, double target_nep_hz);

// Continuous-time NEP/f3db ratio of an identical-one-pole cascade.
double lpf_cascade_nep_ratio(int order);

// Integral MW-frequency feedback: the input is low-pass filtered at
// lpf_cutoff and integrated onto a correction that is subtracted from the
// input, giving a closed-loop high-pass response
// |H(f)| ~ f / sqrt(f^2 + f_bw^2).
TimeTrace servo_lock(const TimeTrace& trace, double lpf_cutoff_hz,
                     double loop_bandwidth_hz);

} // namespace diamag

#endif
