#ifndef DIAMAG_TRACE_HPP
#define DIAMAG_TRACE_HPP

#include <cstddef>
#include <vector>

namespace diamag {

enum class TraceUnits { ampere, tesla };

// Uniformly sampled time series of the demodulated photocurrent (ampere)
// or of the equivalent magnetic field (tesla).
struct TimeTrace {
    std::vector<double> samples;
    double fs_hz = 0.0;
    TraceUnits units = TraceUnits::tesla;
    double start_time_s = 0.0;

    std::size_t size() const { return samples.size(); }
    double duration_s() const {
        return fs_hz > 0.0 ? static_cast<double>(samples.size()) / fs_hz : 0.0;
    }
};

double trace_mean(const TimeTrace& trace);

// Sample standard deviation (mean removed, denominator N-1).
double trace_std(const TimeTrace& trace);

void validate_trace(const TimeTrace& trace);

} // namespace diamag

#endif
