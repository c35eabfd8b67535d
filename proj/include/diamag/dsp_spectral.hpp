#ifndef DIAMAG_DSP_SPECTRAL_HPP
#define DIAMAG_DSP_SPECTRAL_HPP

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "diamag/trace.hpp"

namespace diamag {

enum class SpectrumUnits { a_per_sqrthz, t_per_sqrthz };

// Single-sided amplitude spectral density on a uniform frequency grid.
struct AmplitudeSpectrum {
    std::vector<double> frequencies_hz;
    std::vector<double> density;  // units/sqrt(Hz)
    int n_averages = 1;
    double resolution_bw_hz = 0.0;
    SpectrumUnits units = SpectrumUnits::t_per_sqrthz;
};

struct NotchSpec {
    double center_hz = 0.0;
    double quality = 30.0;
};

struct BandpassSpec {
    double f_lo_hz = 5.0;
    double f_hi_hz = 100.0;
    int order = 2;  // Butterworth poles per band edge
};

// Harmonic notches plus an optional band-pass. zero_phase selects
// forward-backward application (squared magnitude, no group delay);
// the default is a single causal pass, which is what the bandwidth
// calibration of the analysis chain assumes.
struct FilterChain {
    std::vector<NotchSpec> notches;
    std::optional<BandpassSpec> bandpass;
    bool zero_phase = false;
};

// Notches at every multiple of base_hz below fs/2 plus the 5-100 Hz
// band-pass used by the standard analysis chain.
FilterChain standard_filter_chain(double fs_hz, double base_hz = 50.0,
                                  double quality = 30.0);

// Averaged one-sided amplitude spectral density over n_segments
// non-overlapping rectangular-window segments. Per segment the mean is
// removed, so density^2 integrated over (0, Fs/2] equals the segment's
// population variance (Parseval).
AmplitudeSpectrum asd(const TimeTrace& trace, std::size_t segment_length,
                      int n_segments);

TimeTrace apply_filter_chain(const TimeTrace& trace, const FilterChain& chain);

// Ideal FFT-domain mask keeping [f_lo, f_hi] only.
struct BrickwallBand {
    double f_lo_hz = 0.0;
    double f_hi_hz = 0.0;
};

// Identical-one-pole lock-in low-pass, see apply_lockin_lpf.
struct LockinLpfSpec {
    double f3db_hz = 0.0;
    int order = 1;
};

struct IdentityFilter {};

using FilterSpec = std::variant<FilterChain, BrickwallBand, LockinLpfSpec, IdentityFilter>;

TimeTrace apply_filter(const TimeTrace& trace, const FilterSpec& spec);

struct NepEstimate {
    double f_nep_hz = 0.0;
    double std_error_hz = 0.0;
    bool degenerate = false;  // all-zero response, estimate forced to 0
};

// Monte-Carlo noise-equivalent-power bandwidth: white noise of known
// standard deviation is filtered and f_NEP = (sigma'/sigma)^2 * Fs/2 is
// averaged over independent trials.
NepEstimate nep_bandwidth(const FilterSpec& filter, double fs_hz,
                          std::size_t n_samples = 1 << 16, int trials = 24,
                          std::uint64_t seed = 0x5eedULL);

// Root-mean-square density over bins inside [f_lo, f_hi].
double band_average(const AmplitudeSpectrum& spectrum, double f_lo_hz,
                    double f_hi_hz);

} // namespace diamag

#endif
