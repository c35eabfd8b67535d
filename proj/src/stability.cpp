#include "diamag/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diamag {

SensitivityReport sensitivity(const TimeTrace& trace, double f_nep_hz,
                              double band_lo_hz, double band_hi_hz) {
    validate_trace(trace);
    if (!(f_nep_hz > 0.0))
        throw std::invalid_argument("sensitivity: f_NEP must be > 0");
    SensitivityReport report;
    report.trace_std_t = trace_std(trace);
    report.f_nep_hz = f_nep_hz;
    report.eta_t_sqrthz = report.trace_std_t / std::sqrt(2.0 * f_nep_hz);
    report.band_lo_hz = band_lo_hz;
    report.band_hi_hz = band_hi_hz;
    return report;
}

double min_detectable_field(double eta_t_sqrthz, double averaging_time_s) {
    if (!(averaging_time_s > 0.0))
        throw std::invalid_argument("min_detectable_field: averaging time must be > 0");
    return eta_t_sqrthz / std::sqrt(averaging_time_s);
}

AdevResult overlapping_adev(const TimeTrace& trace, const std::vector<double>& taus_s) {
    validate_trace(trace);
    const std::size_t n = trace.samples.size();
    const double fs = trace.fs_hz;

    // prefix sums make each block mean an O(1) lookup
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + trace.samples[i];

    AdevResult result;
    for (double tau : taus_s) {
        const auto m = static_cast<std::size_t>(std::llround(tau * fs));
        if (m < 1 || 2 * m > n) {
            result.skipped_taus_s.push_back(tau);
            continue;
        }
        const std::size_t n_terms = n - 2 * m + 1;
        double sum = 0.0;
        const double inv_m = 1.0 / static_cast<double>(m);
        for (std::size_t k = 0; k < n_terms; ++k) {
            const double mean_a = (prefix[k + m] - prefix[k]) * inv_m;
            const double mean_b = (prefix[k + 2 * m] - prefix[k + m]) * inv_m;
            const double d = mean_b - mean_a;
            sum += d * d;
        }
        AdevPoint point;
        point.tau_s = static_cast<double>(m) / fs;
        point.adev_t = std::sqrt(sum / (2.0 * static_cast<double>(n_terms)));
        point.n_pairs = static_cast<long>(n / (2 * m));
        point.std_error_t =
            point.n_pairs > 0 ? point.adev_t / std::sqrt(static_cast<double>(point.n_pairs))
                              : 0.0;
        result.points.push_back(point);
    }
    return result;
}

std::vector<double> default_tau_grid(const TimeTrace& trace, int points_per_decade) {
    validate_trace(trace);
    if (points_per_decade < 1)
        throw std::invalid_argument("default_tau_grid: points_per_decade must be >= 1");
    const double fs = trace.fs_hz;
    const double tau_min = 1.0 / fs;
    const double tau_max = static_cast<double>(trace.samples.size()) / (2.0 * fs);

    std::vector<double> taus;
    long last_m = 0;
    const double step = std::pow(10.0, 1.0 / points_per_decade);
    for (double tau = tau_min; tau <= tau_max * (1.0 + 1e-12); tau *= step) {
        const long m = std::llround(tau * fs);
        if (m <= last_m) continue;
        last_m = m;
        taus.push_back(static_cast<double>(m) / fs);
    }
    return taus;
}

} // namespace diamag
