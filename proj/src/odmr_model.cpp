#include "diamag/odmr_model.hpp"

#include <cmath>
#include <stdexcept>

#include "diamag/errors.hpp"

namespace diamag {

void validate(const SensorConfig& config) {
    auto nonneg = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument(std::string("SensorConfig: ") + name +
                                        " must be finite and nonnegative");
    };
    nonneg(config.fl_photocurrent_a, "fl_photocurrent_a");
    nonneg(config.hyperfine_splitting_hz, "hyperfine_splitting_hz");
    nonneg(config.mod_frequency_hz, "mod_frequency_hz");
    nonneg(config.mod_depth_hz, "mod_depth_hz");
    nonneg(config.lockin_f3db_hz, "lockin_f3db_hz");
    nonneg(config.lockin_nep_bw_hz, "lockin_nep_bw_hz");
    nonneg(config.sampling_frequency_hz, "sampling_frequency_hz");
    if (!std::isfinite(config.zero_crossing_slope_a_per_hz))
        throw std::invalid_argument("SensorConfig: slope must be finite");
    if (!(config.gyromagnetic_ratio_hz_per_t > 0.0))
        throw std::invalid_argument("SensorConfig: gyromagnetic ratio must be > 0");
    if (!(config.contrast > 0.0 && config.contrast < 1.0))
        throw std::invalid_argument("SensorConfig: contrast must be in (0, 1)");
}

void validate(const OdmrSpectrum& spectrum) {
    if (spectrum.detunings_hz.size() != spectrum.demod_current_a.size())
        throw std::invalid_argument("OdmrSpectrum: detuning/current length mismatch");
    if (spectrum.detunings_hz.empty())
        throw std::invalid_argument("OdmrSpectrum: empty");
    for (std::size_t i = 1; i < spectrum.detunings_hz.size(); ++i)
        if (!(spectrum.detunings_hz[i] > spectrum.detunings_hz[i - 1]))
            throw std::invalid_argument("OdmrSpectrum: detunings must be strictly increasing");
}

double deriv_lorentzian(double detuning_hz, const DerivLorentzianPeak& peak) {
    if (!std::isfinite(detuning_hz) || !std::isfinite(peak.amplitude_a) ||
        !std::isfinite(peak.fwhm_hz) || !std::isfinite(peak.center_hz))
        throw std::invalid_argument("deriv_lorentzian: non-finite input");
    if (!(peak.fwhm_hz > 0.0))
        throw std::invalid_argument("deriv_lorentzian: fwhm must be > 0");
    const double half = 0.5 * peak.fwhm_hz;
    const double t = detuning_hz - peak.center_hz;
    const double denom = t * t + half * half;
    return -2.0 * peak.amplitude_a * half * half * t / (denom * denom);
}

double spectrum_model(double detuning_hz,
                      const std::vector<DerivLorentzianPeak>& peaks) {
    if (peaks.size() != 5)
        throw std::invalid_argument("spectrum_model: expected exactly 5 peaks, got " +
                                    std::to_string(peaks.size()));
    double sum = 0.0;
    for (const auto& peak : peaks) sum += deriv_lorentzian(detuning_hz, peak);
    return sum;
}

double analytic_center_slope(const DerivLorentzianPeak& peak) {
    if (!std::isfinite(peak.amplitude_a) || !std::isfinite(peak.fwhm_hz))
        throw std::invalid_argument("analytic_center_slope: non-finite input");
    if (peak.fwhm_hz == 0.0)
        throw singular_parameter_error("analytic_center_slope: fwhm is zero");
    if (peak.fwhm_hz < 0.0)
        throw std::invalid_argument("analytic_center_slope: fwhm must be > 0");
    return -8.0 * peak.amplitude_a / (peak.fwhm_hz * peak.fwhm_hz);
}

void deriv_lorentzian_gradient(double detuning_hz, const DerivLorentzianPeak& peak,
                               double& d_amplitude, double& d_fwhm, double& d_center) {
    if (!(peak.fwhm_hz > 0.0))
        throw std::invalid_argument("deriv_lorentzian_gradient: fwhm must be > 0");
    const double half = 0.5 * peak.fwhm_hz;
    const double v = half * half;
    const double t = detuning_hz - peak.center_hz;
    const double denom = t * t + v;
    const double denom2 = denom * denom;
    const double denom3 = denom2 * denom;
    d_amplitude = -2.0 * v * t / denom2;
    // dD/dv = -2 A t (t^2 - v) / denom^3 and dv/dG = G/2
    d_fwhm = -2.0 * peak.amplitude_a * t * (t * t - v) / denom3 * half;
    d_center = 2.0 * peak.amplitude_a * v * (v - 3.0 * t * t) / denom3;
}

double field_response(double slope_a_per_hz, double gyromagnetic_ratio_hz_per_t) {
    if (!std::isfinite(slope_a_per_hz) || !std::isfinite(gyromagnetic_ratio_hz_per_t))
        throw std::invalid_argument("field_response: non-finite input");
    return gyromagnetic_ratio_hz_per_t * slope_a_per_hz;
}

std::array<double, 5> hyperfine_centers(double hyperfine_splitting_hz) {
    if (!(hyperfine_splitting_hz > 0.0))
        throw std::invalid_argument("hyperfine_centers: splitting must be > 0");
    const double a = hyperfine_splitting_hz;
    return {-2.0 * a, -a, 0.0, a, 2.0 * a};
}

} // namespace diamag
