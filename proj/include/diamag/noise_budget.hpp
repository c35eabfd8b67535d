#ifndef DIAMAG_NOISE_BUDGET_HPP
#define DIAMAG_NOISE_BUDGET_HPP

#include <vector>

#include "diamag/fitting.hpp"

namespace diamag {

inline constexpr double kElementaryChargeC = 1.6e-19;

// 2x2 symmetric covariance of the (p1, p2) noise coefficients.
struct Cov2 {
    double p1p1 = 0.0;
    double p1p2 = 0.0;
    double p2p2 = 0.0;
};

// Three-term decomposition of the far-detuned demodulated-current noise:
//
//   n_far(I) = sqrt(n_elec^2 + p1 * I + p2 * I^2)
//
// with an electrical floor, a shot-noise coefficient p1 (A/Hz) and an
// intensity-noise coefficient p2 (1/Hz).
struct NoiseBudget {
    double n_elec_a_sqrthz = 0.0;
    double p1_a_per_hz = 0.0;
    double p2_per_hz = 0.0;
    Cov2 covariance;
};

// One measured point of the noise-versus-photocurrent curve.
struct NoiseDatum {
    double i_fl_a = 0.0;
    double n_far_a_sqrthz = 0.0;
    double rel_uncertainty = 0.05;
};

struct NoiseModelFit {
    NoiseBudget budget;
    FitResult fit;
};

struct ValueWithError {
    double value = 0.0;
    double std_error = 0.0;
};

void validate(const NoiseBudget& budget);

// Single-sided photon shot-noise amplitude density, A/sqrt(Hz).
// balanced = true doubles the shot power for the two-photodiode difference.
double shot_noise_density(double i_fl_a, bool balanced);

// The three-term model evaluated at a photocurrent.
double noise_model_eval(double i_fl_a, const NoiseBudget& budget);

struct NoiseFitOptions {
    bool fit_n_elec = false;  // default: hold the measured floor fixed
    NllsOptions nlls;
};

// Weighted least-squares fit of (p1, p2) to measured noise floors. Each
// residual is weighted by 1 / (rel_uncertainty * n_far). The data weights
// are treated as exact, so the covariance is the unscaled inverse normal
// matrix.
NoiseModelFit fit_noise_model(const std::vector<NoiseDatum>& data,
                              double n_elec_a_sqrthz,
                              const NoiseFitOptions& options = {});

// Photocurrent at which intensity noise equals shot noise: p1 / p2, with
// first-order uncertainty propagation from the budget covariance.
ValueWithError equivalent_photocurrent(const NoiseBudget& budget);

// Intensity-noise reduction of balanced detection,
// sqrt((sigma_on^2 - psn_on^2) / (sigma_off^2 - psn_off^2)).
double reduction_rate(double sigma_on_a, double psn_on_a, double sigma_off_a,
                      double psn_off_a);

// Relative intensity noise, 10 log10(sigma^2 / (bw * I^2))  [dBc/Hz].
double relative_intensity_noise(double sigma_a, double i_a, double bw_hz);

// Magnetic-field noise floor n_I / (gamma_e * dI/dd)  [T/sqrt(Hz)].
double field_noise_floor(double n_i_a_sqrthz, double slope_a_per_hz,
                         double gyromagnetic_ratio_hz_per_t);

} // namespace diamag

#endif
