#ifndef DIAMAG_ODMR_MODEL_HPP
#define DIAMAG_ODMR_MODEL_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace diamag {

// One resonance line of the lock-in CW-ODMR spectrum. The demodulated
// signal of a frequency-modulated Lorentzian L(d) = A (G/2)^2 / ((d-c)^2 +
// (G/2)^2) is proportional to its derivative, so each peak is modeled as
//
//   D(d) = -2 A (G/2)^2 (d - c) / ((d - c)^2 + (G/2)^2)^2
//
// with A the amplitude of the underlying Lorentzian (demodulated-current
// units), G its full width at half maximum and c the center detuning.
// D vanishes at d = c and has extrema at d = c +- G / (2 sqrt(3)).
struct DerivLorentzianPeak {
    double amplitude_a = 0.0;  // may be negative (lock-in phase)
    double fwhm_hz = 0.0;      // > 0
    double center_hz = 0.0;
};

// Measured or synthesized lock-in CW-ODMR spectrum: demodulated
// photocurrent versus microwave detuning from the central resonance.
// After a successful five-peak fit, `peaks` holds exactly five entries
// with centers in ascending order.
struct OdmrSpectrum {
    std::vector<double> detunings_hz;     // strictly increasing
    std::vector<double> demod_current_a;  // same length
    std::vector<DerivLorentzianPeak> peaks;  // empty until fitted
};

// Physical operating point of the magnetometer. Defaults are the
// operating parameters of the reference instrument.
struct SensorConfig {
    double fl_photocurrent_a = 6.4e-3;
    double zero_crossing_slope_a_per_hz = 332e-12;
    double gyromagnetic_ratio_hz_per_t = 2.80e10;
    double hyperfine_splitting_hz = 2.16e6;
    double mod_frequency_hz = 6.2e3;
    double mod_depth_hz = 1.6e5;
    double contrast = 0.03;
    double three_tone_gain = 2.5;
    double bias_field_t = 0.9e-3;
    double lockin_f3db_hz = 149.4;
    double lockin_nep_bw_hz = 168.8;
    double sampling_frequency_hz = 400.0;
};

void validate(const SensorConfig& config);
void validate(const OdmrSpectrum& spectrum);

// Value of one derivative-Lorentzian peak at detuning d.
double deriv_lorentzian(double detuning_hz, const DerivLorentzianPeak& peak);

// Sum of exactly five derivative-Lorentzian peaks.
double spectrum_model(double detuning_hz,
                      const std::vector<DerivLorentzianPeak>& peaks);

// Closed-form slope dD/dd of a peak at its own center: -8 A / G^2.
double analytic_center_slope(const DerivLorentzianPeak& peak);

// Partial derivatives of deriv_lorentzian with respect to (A, G, c),
// used as the analytic Jacobian of the spectrum fits.
void deriv_lorentzian_gradient(double detuning_hz, const DerivLorentzianPeak& peak,
                               double& d_amplitude, double& d_fwhm, double& d_center);

// Photocurrent response to magnetic field, gamma_e * (dI/dd)  [A/T].
double field_response(double slope_a_per_hz, double gyromagnetic_ratio_hz_per_t);

// Centers of the five beat peaks produced by three-tone driving with tone
// spacing A_hf: {-2, -1, 0, +1, +2} * A_hf.
std::array<double, 5> hyperfine_centers(double hyperfine_splitting_hz);

} // namespace diamag

#endif
