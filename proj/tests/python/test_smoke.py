"""Smoke tests for the python bindings: every major operation is callable
and returns numbers consistent with the C++ suites."""

import math

import pytest

import diamag


def test_hyperfine_centers():
    centers = diamag.hyperfine_centers(2.16e6)
    assert centers == pytest.approx([-4.32e6, -2.16e6, 0.0, 2.16e6, 4.32e6])


def test_deriv_lorentzian_shape():
    peak = diamag.DerivLorentzianPeak(amplitude_a=1.0, fwhm_hz=1.0, center_hz=0.0)
    assert diamag.deriv_lorentzian(0.0, peak) == 0.0
    extremum = diamag.deriv_lorentzian(1.0 / (2.0 * math.sqrt(3.0)), peak)
    assert abs(extremum) == pytest.approx(3.0 * math.sqrt(3.0) / 4.0, rel=1e-12)
    assert diamag.analytic_center_slope(peak) == pytest.approx(-8.0)


def test_spectrum_model_superposition():
    peaks = [
        diamag.DerivLorentzianPeak(amplitude_a=0.0, fwhm_hz=1.0, center_hz=c)
        for c in (-2.0, -1.0, 0.0, 1.0, 2.0)
    ]
    assert diamag.spectrum_model(0.3, peaks) == 0.0
    with pytest.raises(ValueError):
        diamag.spectrum_model(0.0, peaks[:4])


def test_shot_noise_and_field_floor():
    balanced = diamag.shot_noise_density(6.4e-3, True)
    unbalanced = diamag.shot_noise_density(6.4e-3, False)
    assert balanced == pytest.approx(math.sqrt(2.0) * unbalanced, rel=1e-12)
    floor = diamag.field_noise_floor(balanced, 332e-12, 2.80e10)
    assert floor == pytest.approx(6.885e-12, rel=1e-3)


def test_noise_model_and_budget_fit():
    budget = diamag.default_config().budget
    assert diamag.noise_model_eval(0.0, budget) == pytest.approx(20e-12)
    assert diamag.noise_model_eval(6.4e-3, budget) == pytest.approx(7.515e-11, rel=1e-3)

    data = [
        diamag.NoiseDatum(i, diamag.noise_model_eval(i, budget), 0.05)
        for i in (1e-3, 2e-3, 5e-3, 10e-3, 20e-3, 30e-3)
    ]
    fit = diamag.fit_noise_model(data, budget.n_elec_a_sqrthz)
    assert fit.budget.p1_a_per_hz == pytest.approx(budget.p1_a_per_hz, rel=1e-6)
    assert fit.budget.p2_per_hz == pytest.approx(budget.p2_per_hz, rel=1e-6)

    eqv = diamag.equivalent_photocurrent(budget)
    assert eqv.value == pytest.approx(10e-3, rel=1e-9)
    assert 1.2e-3 <= eqv.std_error <= 2.0e-3


def test_reduction_rate_and_rin():
    rate = diamag.reduction_rate(3.0e-9, 1.6e-9, 130e-9, 1.2e-9)
    assert rate == pytest.approx(1.952e-2, rel=1e-3)
    rin = diamag.relative_intensity_noise(130e-9, 25e-3, 168.8)
    assert rin == pytest.approx(-127.95, rel=1e-3)


def test_synthesis_pipeline_end_to_end():
    config = diamag.default_config()
    trace = diamag.synthesize(config.synth)
    assert len(trace) == 2000
    assert trace.fs_hz == 400.0

    again = diamag.synthesize(config.synth)
    assert trace.samples == again.samples  # seed-deterministic

    filtered = diamag.apply_filter_chain(trace, config.filters)
    nep = diamag.nep_bandwidth(config.filters, 400.0, n_samples=1 << 14, trials=8)
    report = diamag.sensitivity(filtered, nep.f_nep_hz)
    assert 8e-12 < report.eta_t_sqrthz < 11e-12
    assert report.eta_t_sqrthz == pytest.approx(
        report.trace_std_t / math.sqrt(2.0 * nep.f_nep_hz), rel=1e-12
    )


def test_lockin_calibration():
    assert diamag.calibrate_order(149.4, 168.8) == 4
    assert diamag.lpf_cascade_nep_ratio(1) == pytest.approx(math.pi / 2.0)


def test_adev_basics():
    trace = diamag.TimeTrace()
    trace.fs_hz = 400.0
    trace.samples = [4.2e-12] * 2000
    result = diamag.overlapping_adev(trace, [0.01, 0.1])
    assert [p.adev_t for p in result.points] == pytest.approx([0.0, 0.0])

    assert diamag.min_detectable_field(9.4e-12, 1000.0) == pytest.approx(
        0.297e-12, rel=1e-2
    )


def test_odmr_fit_roundtrip():
    fwhm = 0.48e6
    central = -324e-12 * fwhm * fwhm / 8.0
    peaks = [
        diamag.DerivLorentzianPeak(
            amplitude_a=central if c == 0.0 else central / 2.5,
            fwhm_hz=fwhm,
            center_hz=c,
        )
        for c in diamag.hyperfine_centers(2.16e6)
    ]
    detunings = [-5.4e6 + 2e4 * k for k in range(541)]
    spectrum = diamag.OdmrSpectrum()
    spectrum.detunings_hz = detunings
    spectrum.demod_current_a = [diamag.spectrum_model(d, peaks) for d in detunings]
    fitted, fit = diamag.fit_odmr_spectrum(spectrum, 2.16e6)
    assert fit.converged
    assert fitted.peaks[2].fwhm_hz == pytest.approx(fwhm, rel=1e-6)

    line = diamag.fit_zero_crossing(spectrum, 3e4)
    assert line.slope == pytest.approx(324e-12, rel=2e-2)
