#ifndef DIAMAG_STABILITY_HPP
#define DIAMAG_STABILITY_HPP

#include <vector>

#include "diamag/trace.hpp"

namespace diamag {

struct AdevPoint {
    double tau_s = 0.0;
    double adev_t = 0.0;
    double std_error_t = 0.0;
    long n_pairs = 0;  // non-overlapped pair count, used as effective dof
};

struct AdevResult {
    std::vector<AdevPoint> points;
    std::vector<double> skipped_taus_s;  // requested taus too long for the trace
};

struct SensitivityReport {
    double eta_t_sqrthz = 0.0;
    double trace_std_t = 0.0;
    double f_nep_hz = 0.0;
    double band_lo_hz = 0.0;
    double band_hi_hz = 0.0;
};

// eta = deltaB / sqrt(2 f_NEP) with deltaB the sample standard deviation
// of the (already filtered) field trace.
SensitivityReport sensitivity(const TimeTrace& trace, double f_nep_hz,
                              double band_lo_hz = 0.0, double band_hi_hz = 0.0);

// Minimum detectable field after averaging time T: eta / sqrt(T).
double min_detectable_field(double eta_t_sqrthz, double averaging_time_s);

// Overlapping Allan deviation of the field series at the requested
// averaging times (each tau is rounded to a multiple of 1/Fs). Taus that
// do not satisfy 2m <= N are reported in skipped_taus_s.
AdevResult overlapping_adev(const TimeTrace& trace, const std::vector<double>& taus_s);

// Default log-spaced tau grid, about 10 points per decade from 1/Fs to
// N/(2 Fs).
std::vector<double> default_tau_grid(const TimeTrace& trace, int points_per_decade = 10);

} // namespace diamag

#endif
