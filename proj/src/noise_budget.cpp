#include "diamag/noise_budget.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "diamag/errors.hpp"

namespace diamag {

void validate(const NoiseBudget& budget) {
    if (!(budget.n_elec_a_sqrthz >= 0.0) || !(budget.p1_a_per_hz >= 0.0) ||
        !(budget.p2_per_hz >= 0.0))
        throw std::invalid_argument("NoiseBudget: coefficients must be nonnegative");
    const auto& c = budget.covariance;
    if (c.p1p1 < 0.0 || c.p2p2 < 0.0 || c.p1p2 * c.p1p2 > c.p1p1 * c.p2p2 * (1.0 + 1e-12))
        throw std::invalid_argument("NoiseBudget: covariance not positive semidefinite");
}

double shot_noise_density(double i_fl_a, bool balanced) {
    if (!std::isfinite(i_fl_a) || i_fl_a < 0.0)
        throw std::invalid_argument("shot_noise_density: current must be >= 0");
    const double factor = balanced ? 2.0 : 1.0;
    return std::sqrt(factor * 2.0 * kElementaryChargeC * i_fl_a);
}

double noise_model_eval(double i_fl_a, const NoiseBudget& budget) {
    if (!std::isfinite(i_fl_a))
        throw std::invalid_argument("noise_model_eval: non-finite current");
    validate(budget);
    return std::sqrt(budget.n_elec_a_sqrthz * budget.n_elec_a_sqrthz +
                     budget.p1_a_per_hz * i_fl_a + budget.p2_per_hz * i_fl_a * i_fl_a);
}

NoiseModelFit fit_noise_model(const std::vector<NoiseDatum>& data,
                              double n_elec_a_sqrthz, const NoiseFitOptions& options) {
    if (!(n_elec_a_sqrthz >= 0.0))
        throw std::invalid_argument("fit_noise_model: electrical floor must be >= 0");
    const std::size_t n_params = options.fit_n_elec ? 3 : 2;
    if (data.size() < n_params)
        throw fit_failure_error("fit_noise_model: not enough data points");
    std::set<double> currents;
    for (const auto& d : data) {
        if (!(d.i_fl_a >= 0.0) || !(d.n_far_a_sqrthz > 0.0))
            throw std::invalid_argument("fit_noise_model: invalid datum");
        currents.insert(d.i_fl_a);
    }
    if (currents.size() < 2)
        throw fit_failure_error("fit_noise_model: degenerate design, all photocurrents equal");

    // Parameters are log-free scaled copies: p = [p1, p2(, n_elec)]. The
    // model is nearly linear in (p1, p2) after squaring, so the damped
    // Gauss-Newton engine converges in a few steps from a linearized seed.
    const double n0 = n_elec_a_sqrthz;
    auto model = [n0, &options](double i, const std::vector<double>& p) {
        const double floor = options.fit_n_elec ? p[2] : n0;
        const double s = floor * floor + p[0] * i + p[1] * i * i;
        return std::sqrt(std::max(s, 0.0));
    };
    auto jac = [n0, &options](double i, const std::vector<double>& p,
                              std::vector<double>& g) {
        const double floor = options.fit_n_elec ? p[2] : n0;
        const double y = std::sqrt(std::max(floor * floor + p[0] * i + p[1] * i * i, 1e-300));
        g[0] = 0.5 * i / y;
        g[1] = 0.5 * i * i / y;
        if (options.fit_n_elec) g[2] = floor / y;
    };

    // Linearized seed: least squares of n_far^2 - n_elec^2 against [I, I^2].
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (const auto& d : data) {
        const double z = d.n_far_a_sqrthz * d.n_far_a_sqrthz - n0 * n0;
        const double i1 = d.i_fl_a, i2 = d.i_fl_a * d.i_fl_a;
        a11 += i1 * i1;
        a12 += i1 * i2;
        a22 += i2 * i2;
        b1 += i1 * z;
        b2 += i2 * z;
    }
    const double det = a11 * a22 - a12 * a12;
    std::vector<double> init;
    if (std::abs(det) > 1e-300 * std::max(a11 * a22, 1.0)) {
        init = {(b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det};
    } else {
        init = {a11 > 0.0 ? b1 / a11 : 0.0, 0.0};
    }
    if (options.fit_n_elec) init.push_back(n0);

    std::vector<FitDataPoint> points;
    points.reserve(data.size());
    for (const auto& d : data) {
        const double sigma = d.rel_uncertainty > 0.0
                                 ? d.rel_uncertainty * d.n_far_a_sqrthz
                                 : d.n_far_a_sqrthz;
        points.push_back({d.i_fl_a, d.n_far_a_sqrthz, 1.0 / sigma});
    }

    NllsOptions nlls = options.nlls;
    nlls.scale_covariance = false;  // weights are the stated measurement sigmas
    FitResult fit = nlls_fit(model, jac, points, std::move(init), nlls);

    NoiseModelFit out;
    out.budget.n_elec_a_sqrthz = options.fit_n_elec ? std::abs(fit.params[2]) : n0;
    out.budget.p1_a_per_hz = std::max(fit.params[0], 0.0);
    out.budget.p2_per_hz = std::max(fit.params[1], 0.0);
    out.budget.covariance = {fit.cov(0, 0), fit.cov(0, 1), fit.cov(1, 1)};
    out.fit = std::move(fit);
    return out;
}

ValueWithError equivalent_photocurrent(const NoiseBudget& budget) {
    validate(budget);
    if (budget.p2_per_hz == 0.0)
        throw singular_parameter_error("equivalent_photocurrent: p2 is zero");
    const double p1 = budget.p1_a_per_hz;
    const double p2 = budget.p2_per_hz;
    ValueWithError out;
    out.value = p1 / p2;
    // First-order propagation of f = p1/p2.
    const double d1 = 1.0 / p2;
    const double d2 = -p1 / (p2 * p2);
    const auto& c = budget.covariance;
    const double var = d1 * d1 * c.p1p1 + 2.0 * d1 * d2 * c.p1p2 + d2 * d2 * c.p2p2;
    out.std_error = std::sqrt(std::max(var, 0.0));
    return out;
}

double reduction_rate(double sigma_on_a, double psn_on_a, double sigma_off_a,
                      double psn_off_a) {
    if (!(psn_on_a >= 0.0) || !(psn_off_a >= 0.0))
        throw std::invalid_argument("reduction_rate: shot noise must be >= 0");
    if (!(sigma_on_a > psn_on_a) || !(sigma_off_a > psn_off_a))
        throw std::invalid_argument(
            "reduction_rate: total noise must exceed shot noise (inconsistent inputs)");
    const double num = sigma_on_a * sigma_on_a - psn_on_a * psn_on_a;
    const double den = sigma_off_a * sigma_off_a - psn_off_a * psn_off_a;
    return std::sqrt(num / den);
}

double relative_intensity_noise(double sigma_a, double i_a, double bw_hz) {
    if (!(sigma_a > 0.0) || !(i_a > 0.0) || !(bw_hz > 0.0))
        throw std::invalid_argument("relative_intensity_noise: inputs must be > 0");
    return 10.0 * std::log10(sigma_a * sigma_a / (bw_hz * i_a * i_a));
}

double field_noise_floor(double n_i_a_sqrthz, double slope_a_per_hz,
                         double gyromagnetic_ratio_hz_per_t) {
    if (!std::isfinite(n_i_a_sqrthz) || n_i_a_sqrthz < 0.0)
        throw std::invalid_argument("field_noise_floor: noise density must be >= 0");
    if (slope_a_per_hz == 0.0)
        throw singular_parameter_error("field_noise_floor: zero slope");
    if (!(gyromagnetic_ratio_hz_per_t > 0.0))
        throw std::invalid_argument("field_noise_floor: gyromagnetic ratio must be > 0");
    return n_i_a_sqrthz / std::abs(gyromagnetic_ratio_hz_per_t * slope_a_per_hz);
}

} // namespace diamag
