#include "diamag/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "diamag/errors.hpp"

namespace diamag {

namespace {

double chi2(const ModelFunc& model, const std::vector<FitDataPoint>& data,
            const std::vector<double>& p) {
    double sum = 0.0;
    for (const auto& d : data) {
        const double r = d.weight * (d.y - model(d.x, p));
        sum += r * r;
    }
    return sum;
}

ModelJacobian numeric_jacobian(const ModelFunc& model) {
    return [model](double x, const std::vector<double>& p, std::vector<double>& grad) {
        std::vector<double> q = p;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double h = 1e-6 * std::max(std::abs(p[j]), 1.0);
            q[j] = p[j] + h;
            const double up = model(x, q);
            q[j] = p[j] - h;
            const double down = model(x, q);
            q[j] = p[j];
            grad[j] = (up - down) / (2.0 * h);
        }
    };
}

} // namespace

FitResult nlls_fit(const ModelFunc& model, const ModelJacobian& jacobian,
                   const std::vector<FitDataPoint>& data,
                   std::vector<double> init, const NllsOptions& options) {
    const std::size_t n_params = init.size();
    const std::size_t n_data = data.size();
    if (n_params == 0) throw std::invalid_argument("nlls_fit: no parameters");
    if (n_data < n_params)
        throw std::invalid_argument("nlls_fit: fewer data points than parameters");
    for (double v : init)
        if (!std::isfinite(v)) throw std::invalid_argument("nlls_fit: non-finite init");

    std::vector<double> p = std::move(init);
    double cost = chi2(model, data, p);
    if (!std::isfinite(cost)) throw fit_failure_error("nlls_fit: non-finite initial residual");

    // Below this the residual is indistinguishable from rounding of the
    // data itself; zero-residual problems stop here instead of chasing
    // denormals.
    double data_scale = 0.0;
    for (const auto& d : data) data_scale += d.weight * d.y * d.weight * d.y;
    const double cost_floor = 1e-30 * data_scale;

    Eigen::MatrixXd jtj(n_params, n_params);
    Eigen::VectorXd jtr(n_params);
    std::vector<double> grad(n_params);

    double lambda = options.lambda_init;
    bool converged = false;
    int iter = 0;

    for (; iter < options.max_iterations; ++iter) {
        if (cost <= cost_floor) {
            converged = true;
            break;
        }
        // Build the weighted normal equations at the current point.
        jtj.setZero();
        jtr.setZero();
        for (const auto& d : data) {
            jacobian(d.x, p, grad);
            const double r = d.weight * (d.y - model(d.x, p));
            for (std::size_t a = 0; a < n_params; ++a) {
                const double ja = d.weight * grad[a];
                jtr(a) += ja * r;
                for (std::size_t b = 0; b <= a; ++b)
                    jtj(a, b) += ja * d.weight * grad[b];
            }
        }
        for (std::size_t a = 0; a < n_params; ++a)
            for (std::size_t b = a + 1; b < n_params; ++b) jtj(a, b) = jtj(b, a);

        // Scale-free gradient test: the largest cosine between the residual
        // vector and any Jacobian column. Zero residual is a solved problem.
        auto gradient_cosine = [&]() {
            if (cost <= 0.0) return 0.0;
            double worst = 0.0;
            for (std::size_t a = 0; a < n_params; ++a) {
                if (jtj(a, a) <= 0.0) continue;
                worst = std::max(worst, std::abs(jtr(a)) /
                                            (std::sqrt(jtj(a, a)) * std::sqrt(cost)));
            }
            return worst;
        };
        if (gradient_cosine() <= options.grad_tol) {
            converged = true;
            break;
        }

        if (iter == 0) {
            // unidentifiable parameters are a contract violation, not
            // something damping should paper over
            Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
            if (!lu.isInvertible())
                throw fit_failure_error(
                    "nlls_fit: singular normal matrix at the initial point "
                    "(rank " +
                    std::to_string(lu.rank()) + " of " + std::to_string(n_params) + ")");
        }

        // Try the pure Gauss-Newton step first; damp only when it fails.
        // Quadratic objectives then converge in a single step.
        bool accepted = false;
        bool first_trial = true;
        while (lambda <= options.lambda_max) {
            const double lambda_try = first_trial ? 0.0 : lambda;
            Eigen::MatrixXd damped = jtj;
            for (std::size_t a = 0; a < n_params; ++a) {
                const double dd = jtj(a, a);
                damped(a, a) = dd + lambda_try * (dd > 0.0 ? dd : 1.0);
            }
            Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
            Eigen::VectorXd step;
            bool solved = ldlt.info() == Eigen::Success;
            if (solved) {
                step = ldlt.solve(jtr);
                solved = step.allFinite();
            }
            if (solved) {
                std::vector<double> trial(p);
                for (std::size_t a = 0; a < n_params; ++a) trial[a] += step(a);
                const double trial_cost = chi2(model, data, trial);
                if (std::isfinite(trial_cost) && trial_cost <= cost) {
                    const double drop = cost - trial_cost;
                    p = std::move(trial);
                    const double prev = cost;
                    cost = trial_cost;
                    lambda = std::max(lambda * options.lambda_down, 1e-16);
                    accepted = true;
                    if (drop <= options.rel_residual_tol * std::max(prev, 1e-300))
                        converged = true;
                    break;
                }
            }
            if (!first_trial) lambda *= options.lambda_up;
            first_trial = false;
        }
        if (!accepted) {
            // No downhill step exists even under maximum damping: either we
            // are at a (possibly degenerate) minimum or the problem is
            // singular. A zero gradient was already handled above.
            if (gradient_cosine() < 1e-6) {
                converged = true;
                break;
            }
            throw fit_failure_error(
                "nlls_fit: no acceptable step under maximum damping (lambda cap reached)");
        }
        if (converged) {
            ++iter;
            break;
        }
    }

    // Covariance from the undamped normal matrix at the solution.
    jtj.setZero();
    for (const auto& d : data) {
        jacobian(d.x, p, grad);
        for (std::size_t a = 0; a < n_params; ++a) {
            const double ja = d.weight * grad[a];
            for (std::size_t b = 0; b <= a; ++b) jtj(a, b) += ja * d.weight * grad[b];
        }
    }
    for (std::size_t a = 0; a < n_params; ++a)
        for (std::size_t b = a + 1; b < n_params; ++b) jtj(a, b) = jtj(b, a);

    FitResult result;
    result.params = p;
    result.residual_norm = std::sqrt(cost);
    result.n_iterations = iter;
    result.converged = converged;
    result.n_dof = static_cast<int>(n_data) - static_cast<int>(n_params);
    result.covariance.assign(n_params * n_params,
                             std::numeric_limits<double>::quiet_NaN());

    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
        Eigen::MatrixXd cov = lu.inverse();
        double scale = 1.0;
        result.covariance_scaled = options.scale_covariance && result.n_dof > 0;
        if (result.covariance_scaled) scale = cost / result.n_dof;
        for (std::size_t a = 0; a < n_params; ++a)
            for (std::size_t b = 0; b < n_params; ++b)
                result.covariance[a * n_params + b] = scale * cov(a, b);
    } else {
        result.covariance_scaled = false;
    }
    return result;
}

FitResult nlls_fit(const ModelFunc& model, const std::vector<FitDataPoint>& data,
                   std::vector<double> init, const NllsOptions& options) {
    return nlls_fit(model, numeric_jacobian(model), data, std::move(init), options);
}

namespace {

// Parameter layouts for the five-peak fit:
//   shared width, fixed centers:   [A0..A4, G]
//   shared width, free centers:    [A0..A4, G, c0..c4]
//   per-peak width, fixed centers: [A0, G0, .., A4, G4]
//   per-peak width, free centers:  [A0, G0, c0, .., A4, G4, c4]
struct OdmrModelSpec {
    bool shared_fwhm;
    bool fixed_centers;
    std::array<double, 5> grid;

    DerivLorentzianPeak peak(const std::vector<double>& p, int i) const {
        DerivLorentzianPeak out;
        if (shared_fwhm) {
            out.amplitude_a = p[i];
            out.fwhm_hz = std::abs(p[5]);
            out.center_hz = fixed_centers ? grid[i] : p[6 + i];
        } else {
            const int stride = fixed_centers ? 2 : 3;
            out.amplitude_a = p[i * stride];
            out.fwhm_hz = std::abs(p[i * stride + 1]);
            out.center_hz = fixed_centers ? grid[i] : p[i * stride + 2];
        }
        return out;
    }

    std::size_t n_params() const {
        if (shared_fwhm) return fixed_centers ? 6 : 11;
        return fixed_centers ? 10 : 15;
    }
};

} // namespace

std::pair<OdmrSpectrum, FitResult> fit_odmr_spectrum(const OdmrSpectrum& spectrum,
                                                     double hyperfine_splitting_hz,
                                                     const OdmrFitOptions& options) {
    validate(spectrum);
    const auto grid = hyperfine_centers(hyperfine_splitting_hz);
    const double span_lo = spectrum.detunings_hz.front();
    const double span_hi = spectrum.detunings_hz.back();
    if (span_lo > -2.0 * hyperfine_splitting_hz || span_hi < 2.0 * hyperfine_splitting_hz)
        throw std::invalid_argument(
            "fit_odmr_spectrum: spectrum must span at least +-2 hyperfine splittings");

    const std::size_t n = spectrum.detunings_hz.size();

    // Initial width from the peak-to-trough spacing of the central lobe:
    // extrema of one derivative Lorentzian sit at c +- G/(2 sqrt(3)).
    std::size_t imax = 0, imin = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(spectrum.detunings_hz[i]) > 0.75 * hyperfine_splitting_hz) continue;
        if (spectrum.demod_current_a[i] > spectrum.demod_current_a[imax]) imax = i;
        if (spectrum.demod_current_a[i] < spectrum.demod_current_a[imin]) imin = i;
    }
    double spacing = std::abs(spectrum.detunings_hz[imax] - spectrum.detunings_hz[imin]);
    if (spacing <= 0.0) spacing = 0.2 * hyperfine_splitting_hz;
    const double fwhm_init = spacing * std::sqrt(3.0);

    // Amplitude inits from the extremal value near each grid center:
    // |D|_max = (3 sqrt(3) / 4) |A| / G, positive A gives a positive lobe
    // on the low-detuning side.
    std::array<double, 5> amp_init{};
    for (int k = 0; k < 5; ++k) {
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dd = spectrum.detunings_hz[i] - grid[k];
            if (std::abs(dd) > 0.5 * hyperfine_splitting_hz) continue;
            const double val = spectrum.demod_current_a[i];
            if (std::abs(val) > std::abs(best) && dd < 0.0) best = val;
        }
        amp_init[k] = best * fwhm_init * 4.0 / (3.0 * std::sqrt(3.0));
    }

    OdmrModelSpec layout{options.shared_fwhm, options.constrain_centers, grid};
    std::vector<double> init;
    if (options.shared_fwhm) {
        init.assign(amp_init.begin(), amp_init.end());
        init.push_back(fwhm_init);
        if (!options.constrain_centers)
            init.insert(init.end(), grid.begin(), grid.end());
    } else {
        for (int k = 0; k < 5; ++k) {
            init.push_back(amp_init[k]);
            init.push_back(fwhm_init);
            if (!options.constrain_centers) init.push_back(grid[k]);
        }
    }

    auto model = [layout](double x, const std::vector<double>& p) {
        double sum = 0.0;
        for (int k = 0; k < 5; ++k) sum += deriv_lorentzian(x, layout.peak(p, k));
        return sum;
    };
    auto jac = [layout](double x, const std::vector<double>& p, std::vector<double>& g) {
        std::fill(g.begin(), g.end(), 0.0);
        for (int k = 0; k < 5; ++k) {
            const auto pk = layout.peak(p, k);
            double dA, dG, dc;
            deriv_lorentzian_gradient(x, pk, dA, dG, dc);
            if (layout.shared_fwhm) {
                g[k] += dA;
                g[5] += dG;
                if (!layout.fixed_centers) g[6 + k] += dc;
            } else {
                const int stride = layout.fixed_centers ? 2 : 3;
                g[k * stride] += dA;
                g[k * stride + 1] += dG;
                if (!layout.fixed_centers) g[k * stride + 2] += dc;
            }
        }
    };

    std::vector<FitDataPoint> data(n);
    for (std::size_t i = 0; i < n; ++i)
        data[i] = {spectrum.detunings_hz[i], spectrum.demod_current_a[i], 1.0};

    FitResult fit = nlls_fit(model, jac, data, init, options.nlls);

    OdmrSpectrum out = spectrum;
    out.peaks.clear();
    for (int k = 0; k < 5; ++k) out.peaks.push_back(layout.peak(fit.params, k));
    std::sort(out.peaks.begin(), out.peaks.end(),
              [](const auto& a, const auto& b) { return a.center_hz < b.center_hz; });
    return {std::move(out), std::move(fit)};
}

LinearFit fit_zero_crossing(const OdmrSpectrum& spectrum, double window_hz) {
    validate(spectrum);
    if (!(window_hz > 0.0))
        throw std::invalid_argument("fit_zero_crossing: window must be > 0");

    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < spectrum.detunings_hz.size(); ++i) {
        const double x = spectrum.detunings_hz[i];
        if (std::abs(x) > window_hz) continue;
        const double y = spectrum.demod_current_a[i];
        sw += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 3)
        throw std::invalid_argument("fit_zero_crossing: need at least 3 points in window");

    const double det = sw * sxx - sx * sx;
    if (det <= 0.0)
        throw fit_failure_error("fit_zero_crossing: degenerate detuning values");

    LinearFit fit;
    fit.n_points = count;
    fit.slope = (sw * sxy - sx * sy) / det;
    fit.intercept = (sxx * sy - sx * sxy) / det;

    double ss_res = 0.0;
    for (std::size_t i = 0; i < spectrum.detunings_hz.size(); ++i) {
        const double x = spectrum.detunings_hz[i];
        if (std::abs(x) > window_hz) continue;
        const double r = spectrum.demod_current_a[i] - (fit.intercept + fit.slope * x);
        ss_res += r * r;
    }
    const double variance = count > 2 ? ss_res / (count - 2) : 0.0;
    fit.slope_std_error = std::sqrt(variance * sw / det);
    return fit;
}

} // namespace diamag
