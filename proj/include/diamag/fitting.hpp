#ifndef DIAMAG_FITTING_HPP
#define DIAMAG_FITTING_HPP

#include <functional>
#include <utility>
#include <vector>

#include "diamag/odmr_model.hpp"

namespace diamag {

struct FitDataPoint {
    double x = 0.0;
    double y = 0.0;
    double weight = 1.0;  // residual multiplier, typically 1/sigma
};

struct FitResult {
    std::vector<double> params;
    std::vector<double> covariance;  // row-major n_params x n_params
    double residual_norm = 0.0;      // sqrt(sum of squared weighted residuals)
    int n_iterations = 0;
    bool converged = false;
    int n_dof = 0;                   // data points minus parameters
    bool covariance_scaled = true;   // false when dof = 0 or known-sigma mode

    double cov(std::size_t i, std::size_t j) const {
        return covariance[i * params.size() + j];
    }
};

struct NllsOptions {
    int max_iterations = 200;
    double lambda_init = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 0.1;
    double lambda_max = 1e12;
    double rel_residual_tol = 1e-10;
    double grad_tol = 1e-12;  // scale-free: cosine of residual vs Jacobian columns
    // When true, covariance is the residual-variance-scaled inverse of the
    // Gauss-Newton normal matrix. Set false when the data weights are exact
    // 1/sigma so that (J^T J)^-1 is used directly.
    bool scale_covariance = true;
};

// Model value y = f(x; p) and optional analytic gradient df/dp.
using ModelFunc = std::function<double(double x, const std::vector<double>& p)>;
using ModelJacobian =
    std::function<void(double x, const std::vector<double>& p, std::vector<double>& grad)>;

// Damped Gauss-Newton (Levenberg-Marquardt) weighted least squares.
// Throws fit_failure_error when the normal equations cannot be solved even
// under maximum damping. When the iteration cap is hit, returns the best
// point found with converged = false.
FitResult nlls_fit(const ModelFunc& model, const ModelJacobian& jacobian,
                   const std::vector<FitDataPoint>& data,
                   std::vector<double> init, const NllsOptions& options = {});

// Numeric-Jacobian convenience overload (central differences).
FitResult nlls_fit(const ModelFunc& model, const std::vector<FitDataPoint>& data,
                   std::vector<double> init, const NllsOptions& options = {});

struct OdmrFitOptions {
    bool constrain_centers = true;  // fix centers to the hyperfine grid
    bool shared_fwhm = true;        // one width for all five peaks
    NllsOptions nlls;
};

// Five-peak fit of a lock-in CW-ODMR spectrum. Returns the spectrum with
// `peaks` filled (centers ascending) together with the fit diagnostics.
std::pair<OdmrSpectrum, FitResult> fit_odmr_spectrum(const OdmrSpectrum& spectrum,
                                                     double hyperfine_splitting_hz,
                                                     const OdmrFitOptions& options = {});

struct LinearFit {
    double slope = 0.0;
    double slope_std_error = 0.0;
    double intercept = 0.0;
    int n_points = 0;
};

// Weighted linear fit to the near-resonant points |detuning| <= window.
LinearFit fit_zero_crossing(const OdmrSpectrum& spectrum, double window_hz);

} // namespace diamag

#endif
