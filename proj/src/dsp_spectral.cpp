#include "diamag/dsp_spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <stdexcept>

#include "diamag/errors.hpp"
#include "diamag/random.hpp"
#include "diamag/trace_synth.hpp"

namespace diamag {

namespace {

struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;  // denominator, a0 normalized to 1
};

// Direct form II transposed, one pass over x.
void run_biquads(std::vector<double>& x, const std::vector<Biquad>& sections) {
    for (const auto& s : sections) {
        double s1 = 0.0, s2 = 0.0;
        for (double& v : x) {
            const double y = s.b0 * v + s1;
            s1 = s.b1 * v - s.a1 * y + s2;
            s2 = s.b2 * v - s.a2 * y;
            v = y;
        }
    }
}

Biquad design_notch(double center_hz, double quality, double fs_hz) {
    const double w0 = 2.0 * M_PI * center_hz / fs_hz;
    const double alpha = std::sin(w0) / (2.0 * quality);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = 1.0 / a0;
    s.b1 = -2.0 * c / a0;
    s.b2 = 1.0 / a0;
    s.a1 = -2.0 * c / a0;
    s.a2 = (1.0 - alpha) / a0;
    return s;
}

// Bilinear-transform Butterworth sections of given order, low- or
// high-pass. Conjugate analog pole pairs map to one biquad each; odd
// orders add a first-order section (b2 = a2 = 0). Each section is
// normalized to unit gain at its reference point (dc for low-pass,
// Nyquist for high-pass).
std::vector<Biquad> design_butterworth(double cutoff_hz, double fs_hz, int order,
                                       bool highpass) {
    const double warp = std::tan(M_PI * cutoff_hz / fs_hz);
    std::vector<Biquad> sections;
    const std::complex<double> one(1.0, 0.0);

    auto bilinear = [&](std::complex<double> s_pole) {
        return (one + s_pole) / (one - s_pole);
    };

    for (int k = 1; 2 * k <= order + 1; ++k) {
        const double psi = M_PI * (2.0 * k - 1.0) / (2.0 * order);
        std::complex<double> proto(-std::sin(psi), std::cos(psi));
        const bool first_order = (order % 2 == 1) && (2 * k == order + 1);
        if (first_order) proto = std::complex<double>(-1.0, 0.0);

        const std::complex<double> s_pole =
            highpass ? warp / proto : warp * proto;
        const std::complex<double> zp = bilinear(s_pole);

        Biquad s;
        const double zero = highpass ? 1.0 : -1.0;
        if (first_order) {
            s.b0 = 1.0;
            s.b1 = -zero;
            s.a1 = -zp.real();
            s.b2 = s.a2 = 0.0;
        } else {
            s.b0 = 1.0;
            s.b1 = -2.0 * zero;
            s.b2 = 1.0;
            s.a1 = -2.0 * zp.real();
            s.a2 = std::norm(zp);
        }
        // unit gain at the reference point z0
        const double z0 = highpass ? -1.0 : 1.0;
        const double num = s.b0 + s.b1 / z0 + s.b2 / (z0 * z0);
        const double den = 1.0 + s.a1 / z0 + s.a2 / (z0 * z0);
        const double g = den / num;
        s.b0 *= g;
        s.b1 *= g;
        s.b2 *= g;
        sections.push_back(s);
    }
    return sections;
}

std::vector<Biquad> build_chain_sections(const FilterChain& chain, double fs_hz) {
    std::vector<Biquad> sections;
    for (const auto& notch : chain.notches) {
        if (!(notch.center_hz > 0.0 && notch.center_hz < 0.5 * fs_hz))
            throw std::invalid_argument("FilterChain: notch center must lie in (0, Fs/2)");
        if (!(notch.quality > 0.0))
            throw std::invalid_argument("FilterChain: notch quality must be > 0");
        sections.push_back(design_notch(notch.center_hz, notch.quality, fs_hz));
    }
    if (chain.bandpass) {
        const auto& bp = *chain.bandpass;
        if (!(bp.f_lo_hz >= 0.0 && bp.f_lo_hz < bp.f_hi_hz && bp.f_hi_hz < 0.5 * fs_hz))
            throw std::invalid_argument("FilterChain: need 0 <= f_lo < f_hi < Fs/2");
        if (bp.order < 1) throw std::invalid_argument("FilterChain: band-pass order >= 1");
        if (bp.f_lo_hz > 0.0) {
            auto hp = design_butterworth(bp.f_lo_hz, fs_hz, bp.order, true);
            sections.insert(sections.end(), hp.begin(), hp.end());
        }
        auto lp = design_butterworth(bp.f_hi_hz, fs_hz, bp.order, false);
        sections.insert(sections.end(), lp.begin(), lp.end());
    }
    return sections;
}

// Odd reflection about the end samples, as commonly used to suppress
// filter start-up transients.
std::vector<double> reflect_pad(const std::vector<double>& x, std::size_t pad) {
    const std::size_t n = x.size();
    std::vector<double> out;
    out.reserve(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) out.push_back(2.0 * x[0] - x[pad - i]);
    out.insert(out.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < pad; ++i)
        out.push_back(2.0 * x[n - 1] - x[n - 2 - i]);
    return out;
}

std::size_t chain_pad_length(const FilterChain& chain, double fs_hz, std::size_t n) {
    double f_char = 0.25 * fs_hz;
    if (chain.bandpass && chain.bandpass->f_lo_hz > 0.0)
        f_char = std::min(f_char, chain.bandpass->f_lo_hz);
    for (const auto& notch : chain.notches)
        f_char = std::min(f_char, notch.center_hz / notch.quality);
    const auto pad = static_cast<std::size_t>(std::ceil(3.0 * fs_hz / f_char));
    return std::min(pad, n - 1);
}

void fft_forward(const std::vector<double>& x, std::vector<std::complex<double>>& spec) {
    const std::size_t n = x.size();
    spec.assign(n / 2 + 1, {0.0, 0.0});
    std::vector<double> buf(x);
    fftw_plan plan = fftw_plan_dft_r2c_1d(
        static_cast<int>(n), buf.data(), reinterpret_cast<fftw_complex*>(spec.data()),
        FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

void fft_inverse(std::vector<std::complex<double>>& spec, std::vector<double>& x,
                 std::size_t n) {
    x.assign(n, 0.0);
    fftw_plan plan = fftw_plan_dft_c2r_1d(
        static_cast<int>(n), reinterpret_cast<fftw_complex*>(spec.data()), x.data(),
        FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    const double scale = 1.0 / static_cast<double>(n);
    for (double& v : x) v *= scale;
}

TimeTrace apply_brickwall(const TimeTrace& trace, const BrickwallBand& band) {
    validate_trace(trace);
    if (!(band.f_lo_hz <= band.f_hi_hz))
        throw std::invalid_argument("BrickwallBand: f_lo must be <= f_hi");
    const std::size_t n = trace.samples.size();
    std::vector<std::complex<double>> spec;
    fft_forward(trace.samples, spec);
    const double df = trace.fs_hz / static_cast<double>(n);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double f = df * static_cast<double>(k);
        if (f < band.f_lo_hz || f > band.f_hi_hz) spec[k] = {0.0, 0.0};
    }
    TimeTrace out = trace;
    fft_inverse(spec, out.samples, n);
    return out;
}

} // namespace

FilterChain standard_filter_chain(double fs_hz, double base_hz, double quality) {
    FilterChain chain;
    for (double f = base_hz; f < 0.5 * fs_hz; f += base_hz)
        chain.notches.push_back({f, quality});
    chain.bandpass = BandpassSpec{5.0, 100.0, 2};
    chain.zero_phase = false;
    return chain;
}

AmplitudeSpectrum asd(const TimeTrace& trace, std::size_t segment_length,
                      int n_segments) {
    validate_trace(trace);
    if (segment_length < 2 || segment_length > trace.samples.size())
        throw std::invalid_argument("asd: segment longer than trace");
    if (n_segments < 1 ||
        static_cast<std::size_t>(n_segments) * segment_length > trace.samples.size())
        throw std::invalid_argument("asd: too many segments for trace length");

    const std::size_t len = segment_length;
    const std::size_t n_bins = len / 2 + 1;
    std::vector<double> power(n_bins, 0.0);
    std::vector<std::complex<double>> spec;
    std::vector<double> seg(len);

    for (int s = 0; s < n_segments; ++s) {
        const double* src = trace.samples.data() + static_cast<std::size_t>(s) * len;
        double mean = 0.0;
        for (std::size_t i = 0; i < len; ++i) mean += src[i];
        mean /= static_cast<double>(len);
        for (std::size_t i = 0; i < len; ++i) seg[i] = src[i] - mean;

        fft_forward(seg, spec);
        for (std::size_t k = 0; k < n_bins; ++k) {
            const bool interior = (k != 0) && !(len % 2 == 0 && k == len / 2);
            const double factor = interior ? 2.0 : 1.0;
            power[k] += factor * std::norm(spec[k]) /
                        (trace.fs_hz * static_cast<double>(len));
        }
    }

    AmplitudeSpectrum out;
    out.n_averages = n_segments;
    out.resolution_bw_hz = trace.fs_hz / static_cast<double>(len);
    out.units = trace.units == TraceUnits::tesla ? SpectrumUnits::t_per_sqrthz
                                                 : SpectrumUnits::a_per_sqrthz;
    out.frequencies_hz.resize(n_bins);
    out.density.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        out.frequencies_hz[k] = out.resolution_bw_hz * static_cast<double>(k);
        out.density[k] = std::sqrt(power[k] / static_cast<double>(n_segments));
    }
    return out;
}

TimeTrace apply_filter_chain(const TimeTrace& trace, const FilterChain& chain) {
    validate_trace(trace);
    const auto sections = build_chain_sections(chain, trace.fs_hz);
    if (sections.empty()) return trace;

    const std::size_t n = trace.samples.size();
    const std::size_t pad = chain_pad_length(chain, trace.fs_hz, n);
    std::vector<double> work = reflect_pad(trace.samples, pad);

    run_biquads(work, sections);
    if (chain.zero_phase) {
        std::reverse(work.begin(), work.end());
        run_biquads(work, sections);
        std::reverse(work.begin(), work.end());
    }

    TimeTrace out = trace;
    std::copy(work.begin() + static_cast<std::ptrdiff_t>(pad),
              work.begin() + static_cast<std::ptrdiff_t>(pad + n), out.samples.begin());
    return out;
}

TimeTrace apply_filter(const TimeTrace& trace, const FilterSpec& spec) {
    return std::visit(
        [&](const auto& f) -> TimeTrace {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, FilterChain>)
                return apply_filter_chain(trace, f);
            else if constexpr (std::is_same_v<T, BrickwallBand>)
                return apply_brickwall(trace, f);
            else if constexpr (std::is_same_v<T, LockinLpfSpec>)
                return apply_lockin_lpf(trace, f.f3db_hz, f.order);
            else
                return trace;
        },
        spec);
}

NepEstimate nep_bandwidth(const FilterSpec& filter, double fs_hz,
                          std::size_t n_samples, int trials, std::uint64_t seed) {
    if (!(fs_hz > 0.0)) throw std::invalid_argument("nep_bandwidth: Fs must be > 0");
    if (n_samples < 1024)
        throw std::invalid_argument("nep_bandwidth: n_samples too small (>= 1024)");
    if (trials < 2) throw std::invalid_argument("nep_bandwidth: trials must be >= 2");

    std::vector<double> estimates;
    estimates.reserve(static_cast<std::size_t>(trials));
    const std::size_t skip = n_samples / 16;  // discard filter settling

    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        TimeTrace noise;
        noise.fs_hz = fs_hz;
        noise.samples.resize(n_samples);
        for (auto& v : noise.samples) v = rng.gaussian();

        const TimeTrace filtered = apply_filter(noise, filter);
        double sum = 0.0, sum2 = 0.0;
        const std::size_t lo = skip, hi = n_samples - skip;
        const auto count = static_cast<double>(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) {
            sum += filtered.samples[i];
            sum2 += filtered.samples[i] * filtered.samples[i];
        }
        const double var = sum2 / count - (sum / count) * (sum / count);
        estimates.push_back(var * 0.5 * fs_hz);  // input variance is exactly 1
    }

    NepEstimate out;
    double mean = 0.0;
    for (double e : estimates) mean += e;
    mean /= static_cast<double>(trials);
    double ss = 0.0;
    for (double e : estimates) ss += (e - mean) * (e - mean);
    out.f_nep_hz = mean;
    out.std_error_hz = std::sqrt(ss / (static_cast<double>(trials) - 1.0) /
                                 static_cast<double>(trials));
    if (mean < 1e-9 * fs_hz) {
        out.degenerate = true;
        out.f_nep_hz = 0.0;
    }
    return out;
}

double band_average(const AmplitudeSpectrum& spectrum, double f_lo_hz,
                    double f_hi_hz) {
    if (!(f_lo_hz <= f_hi_hz))
        throw std::invalid_argument("band_average: f_lo must be <= f_hi");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < spectrum.frequencies_hz.size(); ++k) {
        const double f = spectrum.frequencies_hz[k];
        if (f < f_lo_hz || f > f_hi_hz) continue;
        sum += spectrum.density[k] * spectrum.density[k];
        ++count;
    }
    if (count == 0)
        throw std::invalid_argument("band_average: band does not intersect spectrum");
    return std::sqrt(sum / static_cast<double>(count));
}

} // namespace diamag
