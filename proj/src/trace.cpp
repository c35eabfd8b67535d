#include "diamag/trace.hpp"

#include <cmath>
#include <stdexcept>

namespace diamag {

double trace_mean(const TimeTrace& trace) {
    if (trace.samples.empty()) throw std::invalid_argument("trace_mean: empty trace");
    double sum = 0.0;
    for (double v : trace.samples) sum += v;
    return sum / static_cast<double>(trace.samples.size());
}

double trace_std(const TimeTrace& trace) {
    const std::size_t n = trace.samples.size();
    if (n < 2) throw std::invalid_argument("trace_std: need at least 2 samples");
    const double mean = trace_mean(trace);
    double ss = 0.0;
    for (double v : trace.samples) {
        const double d = v - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

void validate_trace(const TimeTrace& trace) {
    if (!(trace.fs_hz > 0.0))
        throw std::invalid_argument("TimeTrace: sampling frequency must be > 0");
    if (trace.samples.empty()) throw std::invalid_argument("TimeTrace: empty");
    for (double v : trace.samples)
        if (!std::isfinite(v)) throw std::invalid_argument("TimeTrace: non-finite sample");
}

} // namespace diamag
