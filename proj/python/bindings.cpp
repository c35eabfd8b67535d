// Python bindings for the core operations: line-shape models, noise
// budget, trace synthesis, spectral tools, stability metrics and the two
// reference fits.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "diamag/config.hpp"
#include "diamag/dsp_spectral.hpp"
#include "diamag/fitting.hpp"
#include "diamag/io.hpp"
#include "diamag/noise_budget.hpp"
#include "diamag/odmr_model.hpp"
#include "diamag/pipeline.hpp"
#include "diamag/stability.hpp"
#include "diamag/trace_synth.hpp"

namespace py = pybind11;
using namespace diamag;

PYBIND11_MODULE(_diamag, m) {
    m.doc() = "simulator and analysis toolkit for lock-in CW-ODMR diamond magnetometry";

    // ---- line-shape models ----
    py::class_<DerivLorentzianPeak>(m, "DerivLorentzianPeak")
        .def(py::init<>())
        .def(py::init([](double amplitude, double fwhm, double center) {
                 return DerivLorentzianPeak{amplitude, fwhm, center};
             }),
             py::arg("amplitude_a"), py::arg("fwhm_hz"), py::arg("center_hz"))
        .def_readwrite("amplitude_a", &DerivLorentzianPeak::amplitude_a)
        .def_readwrite("fwhm_hz", &DerivLorentzianPeak::fwhm_hz)
        .def_readwrite("center_hz", &DerivLorentzianPeak::center_hz);

    py::class_<OdmrSpectrum>(m, "OdmrSpectrum")
        .def(py::init<>())
        .def_readwrite("detunings_hz", &OdmrSpectrum::detunings_hz)
        .def_readwrite("demod_current_a", &OdmrSpectrum::demod_current_a)
        .def_readwrite("peaks", &OdmrSpectrum::peaks);

    py::class_<SensorConfig>(m, "SensorConfig")
        .def(py::init<>())
        .def_readwrite("fl_photocurrent_a", &SensorConfig::fl_photocurrent_a)
        .def_readwrite("zero_crossing_slope_a_per_hz",
                       &SensorConfig::zero_crossing_slope_a_per_hz)
        .def_readwrite("gyromagnetic_ratio_hz_per_t",
                       &SensorConfig::gyromagnetic_ratio_hz_per_t)
        .def_readwrite("hyperfine_splitting_hz", &SensorConfig::hyperfine_splitting_hz)
        .def_readwrite("mod_frequency_hz", &SensorConfig::mod_frequency_hz)
        .def_readwrite("mod_depth_hz", &SensorConfig::mod_depth_hz)
        .def_readwrite("contrast", &SensorConfig::contrast)
        .def_readwrite("three_tone_gain", &SensorConfig::three_tone_gain)
        .def_readwrite("bias_field_t", &SensorConfig::bias_field_t)
        .def_readwrite("lockin_f3db_hz", &SensorConfig::lockin_f3db_hz)
        .def_readwrite("lockin_nep_bw_hz", &SensorConfig::lockin_nep_bw_hz)
        .def_readwrite("sampling_frequency_hz", &SensorConfig::sampling_frequency_hz);

    m.def("deriv_lorentzian", &deriv_lorentzian, py::arg("detuning_hz"), py::arg("peak"));
    m.def("spectrum_model", &spectrum_model, py::arg("detuning_hz"), py::arg("peaks"));
    m.def("analytic_center_slope", &analytic_center_slope, py::arg("peak"));
    m.def("field_response", &field_response, py::arg("slope_a_per_hz"),
          py::arg("gyromagnetic_ratio_hz_per_t"));
    m.def("hyperfine_centers", &hyperfine_centers, py::arg("hyperfine_splitting_hz"));

    // ---- noise budget ----
    py::class_<Cov2>(m, "Cov2")
        .def(py::init<>())
        .def_readwrite("p1p1", &Cov2::p1p1)
        .def_readwrite("p1p2", &Cov2::p1p2)
        .def_readwrite("p2p2", &Cov2::p2p2);

    py::class_<NoiseBudget>(m, "NoiseBudget")
        .def(py::init<>())
        .def_readwrite("n_elec_a_sqrthz", &NoiseBudget::n_elec_a_sqrthz)
        .def_readwrite("p1_a_per_hz", &NoiseBudget::p1_a_per_hz)
        .def_readwrite("p2_per_hz", &NoiseBudget::p2_per_hz)
        .def_readwrite("covariance", &NoiseBudget::covariance);

    py::class_<NoiseDatum>(m, "NoiseDatum")
        .def(py::init<>())
        .def(py::init([](double i, double n, double rel) {
                 return NoiseDatum{i, n, rel};
             }),
             py::arg("i_fl_a"), py::arg("n_far_a_sqrthz"), py::arg("rel_uncertainty") = 0.05)
        .def_readwrite("i_fl_a", &NoiseDatum::i_fl_a)
        .def_readwrite("n_far_a_sqrthz", &NoiseDatum::n_far_a_sqrthz)
        .def_readwrite("rel_uncertainty", &NoiseDatum::rel_uncertainty);

    py::class_<ValueWithError>(m, "ValueWithError")
        .def_readonly("value", &ValueWithError::value)
        .def_readonly("std_error", &ValueWithError::std_error);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("params", &FitResult::params)
        .def_readonly("covariance", &FitResult::covariance)
        .def_readonly("residual_norm", &FitResult::residual_norm)
        .def_readonly("n_iterations", &FitResult::n_iterations)
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("n_dof", &FitResult::n_dof);

    py::class_<NoiseModelFit>(m, "NoiseModelFit")
        .def_readonly("budget", &NoiseModelFit::budget)
        .def_readonly("fit", &NoiseModelFit::fit);

    m.def("shot_noise_density", &shot_noise_density, py::arg("i_fl_a"),
          py::arg("balanced"));
    m.def("noise_model_eval", &noise_model_eval, py::arg("i_fl_a"), py::arg("budget"));
    m.def(
        "fit_noise_model",
        [](const std::vector<NoiseDatum>& data, double n_elec) {
            return fit_noise_model(data, n_elec);
        },
        py::arg("data"), py::arg("n_elec_a_sqrthz"));
    m.def("equivalent_photocurrent", &equivalent_photocurrent, py::arg("budget"));
    m.def("reduction_rate", &reduction_rate, py::arg("sigma_on_a"), py::arg("psn_on_a"),
          py::arg("sigma_off_a"), py::arg("psn_off_a"));
    m.def("relative_intensity_noise", &relative_intensity_noise, py::arg("sigma_a"),
          py::arg("i_a"), py::arg("bw_hz"));
    m.def("field_noise_floor", &field_noise_floor, py::arg("n_i_a_sqrthz"),
          py::arg("slope_a_per_hz"), py::arg("gyromagnetic_ratio_hz_per_t"));

    // ---- traces and synthesis ----
    py::enum_<TraceUnits>(m, "TraceUnits")
        .value("ampere", TraceUnits::ampere)
        .value("tesla", TraceUnits::tesla);

    py::class_<TimeTrace>(m, "TimeTrace")
        .def(py::init<>())
        .def_readwrite("samples", &TimeTrace::samples)
        .def_readwrite("fs_hz", &TimeTrace::fs_hz)
        .def_readwrite("units", &TimeTrace::units)
        .def_readwrite("start_time_s", &TimeTrace::start_time_s)
        .def("__len__", [](const TimeTrace& t) { return t.samples.size(); })
        .def("duration_s", &TimeTrace::duration_s);

    m.def("trace_mean", &trace_mean);
    m.def("trace_std", &trace_std);

    py::class_<LineHarmonic>(m, "LineHarmonic")
        .def(py::init([](double f, double a) {
                 return LineHarmonic{f, a};
             }),
             py::arg("freq_hz"), py::arg("amplitude_t"))
        .def_readwrite("freq_hz", &LineHarmonic::freq_hz)
        .def_readwrite("amplitude_t", &LineHarmonic::amplitude_t);

    py::class_<DriftComponent>(m, "DriftComponent")
        .def(py::init([](double period, double amplitude) {
                 return DriftComponent{period, amplitude};
             }),
             py::arg("period_s"), py::arg("amplitude_t"))
        .def_readwrite("period_s", &DriftComponent::period_s)
        .def_readwrite("amplitude_t", &DriftComponent::amplitude_t);

    py::class_<InjectedTone>(m, "InjectedTone")
        .def(py::init([](double f, double a, double phase) {
                 return InjectedTone{f, a, phase};
             }),
             py::arg("freq_hz"), py::arg("amplitude_t"), py::arg("phase_rad") = 0.0)
        .def_readwrite("freq_hz", &InjectedTone::freq_hz)
        .def_readwrite("amplitude_t", &InjectedTone::amplitude_t)
        .def_readwrite("phase_rad", &InjectedTone::phase_rad);

    py::class_<ServoSpec>(m, "ServoSpec")
        .def(py::init<>())
        .def_readwrite("lpf_cutoff_hz", &ServoSpec::lpf_cutoff_hz)
        .def_readwrite("loop_bandwidth_hz", &ServoSpec::loop_bandwidth_hz);

    py::class_<SynthSpec>(m, "SynthSpec")
        .def(py::init<>())
        .def_readwrite("sensor", &SynthSpec::sensor)
        .def_readwrite("budget", &SynthSpec::budget)
        .def_readwrite("line_harmonics", &SynthSpec::line_harmonics)
        .def_readwrite("drift", &SynthSpec::drift)
        .def_readwrite("injected_signals", &SynthSpec::injected_signals)
        .def_readwrite("servo", &SynthSpec::servo)
        .def_readwrite("env_noise_floor_t_sqrthz", &SynthSpec::env_noise_floor_t_sqrthz)
        .def_readwrite("apply_lockin_filter", &SynthSpec::apply_lockin_filter)
        .def_readwrite("lockin_order", &SynthSpec::lockin_order)
        .def_readwrite("oversample", &SynthSpec::oversample)
        .def_readwrite("duration_s", &SynthSpec::duration_s)
        .def_readwrite("seed", &SynthSpec::seed);

    m.def("synthesize", &synthesize, py::arg("spec"));
    m.def("apply_lockin_lpf", &apply_lockin_lpf, py::arg("trace"), py::arg("f3db_hz"),
          py::arg("order"));
    m.def("calibrate_order", &calibrate_order, py::arg("f3db_hz"),
          py::arg("target_nep_hz"));
    m.def("lpf_cascade_nep_ratio", &lpf_cascade_nep_ratio, py::arg("order"));
    m.def("servo_lock", &servo_lock, py::arg("trace"), py::arg("lpf_cutoff_hz"),
          py::arg("loop_bandwidth_hz"));

    // ---- spectral tools ----
    py::enum_<SpectrumUnits>(m, "SpectrumUnits")
        .value("a_per_sqrthz", SpectrumUnits::a_per_sqrthz)
        .value("t_per_sqrthz", SpectrumUnits::t_per_sqrthz);

    py::class_<AmplitudeSpectrum>(m, "AmplitudeSpectrum")
        .def(py::init<>())
        .def_readwrite("frequencies_hz", &AmplitudeSpectrum::frequencies_hz)
        .def_readwrite("density", &AmplitudeSpectrum::density)
        .def_readwrite("n_averages", &AmplitudeSpectrum::n_averages)
        .def_readwrite("resolution_bw_hz", &AmplitudeSpectrum::resolution_bw_hz)
        .def_readwrite("units", &AmplitudeSpectrum::units);

    py::class_<NotchSpec>(m, "NotchSpec")
        .def(py::init([](double center, double quality) {
                 return NotchSpec{center, quality};
             }),
             py::arg("center_hz"), py::arg("quality") = 30.0)
        .def_readwrite("center_hz", &NotchSpec::center_hz)
        .def_readwrite("quality", &NotchSpec::quality);

    py::class_<BandpassSpec>(m, "BandpassSpec")
        .def(py::init<>())
        .def_readwrite("f_lo_hz", &BandpassSpec::f_lo_hz)
        .def_readwrite("f_hi_hz", &BandpassSpec::f_hi_hz)
        .def_readwrite("order", &BandpassSpec::order);

    py::class_<FilterChain>(m, "FilterChain")
        .def(py::init<>())
        .def_readwrite("notches", &FilterChain::notches)
        .def_readwrite("bandpass", &FilterChain::bandpass)
        .def_readwrite("zero_phase", &FilterChain::zero_phase);

    py::class_<NepEstimate>(m, "NepEstimate")
        .def_readonly("f_nep_hz", &NepEstimate::f_nep_hz)
        .def_readonly("std_error_hz", &NepEstimate::std_error_hz)
        .def_readonly("degenerate", &NepEstimate::degenerate);

    m.def("standard_filter_chain", &standard_filter_chain, py::arg("fs_hz"),
          py::arg("base_hz") = 50.0, py::arg("quality") = 30.0);
    m.def("asd", &asd, py::arg("trace"), py::arg("segment_length"), py::arg("n_segments"));
    m.def("apply_filter_chain", &apply_filter_chain, py::arg("trace"), py::arg("chain"));
    m.def(
        "nep_bandwidth",
        [](const FilterChain& chain, double fs, std::size_t n, int trials,
           std::uint64_t seed) { return nep_bandwidth(chain, fs, n, trials, seed); },
        py::arg("chain"), py::arg("fs_hz"), py::arg("n_samples") = 1 << 16,
        py::arg("trials") = 24, py::arg("seed") = 0x5eedULL);
    m.def(
        "nep_bandwidth_lpf",
        [](double f3db, int order, double fs, std::size_t n, int trials,
           std::uint64_t seed) {
            return nep_bandwidth(LockinLpfSpec{f3db, order}, fs, n, trials, seed);
        },
        py::arg("f3db_hz"), py::arg("order"), py::arg("fs_hz"),
        py::arg("n_samples") = 1 << 16, py::arg("trials") = 24,
        py::arg("seed") = 0x5eedULL);
    m.def(
        "nep_bandwidth_brickwall",
        [](double lo, double hi, double fs, std::size_t n, int trials,
           std::uint64_t seed) {
            return nep_bandwidth(BrickwallBand{lo, hi}, fs, n, trials, seed);
        },
        py::arg("f_lo_hz"), py::arg("f_hi_hz"), py::arg("fs_hz"),
        py::arg("n_samples") = 1 << 16, py::arg("trials") = 24,
        py::arg("seed") = 0x5eedULL);
    m.def("band_average", &band_average, py::arg("spectrum"), py::arg("f_lo_hz"),
          py::arg("f_hi_hz"));

    // ---- stability ----
    py::class_<AdevPoint>(m, "AdevPoint")
        .def_readonly("tau_s", &AdevPoint::tau_s)
        .def_readonly("adev_t", &AdevPoint::adev_t)
        .def_readonly("std_error_t", &AdevPoint::std_error_t)
        .def_readonly("n_pairs", &AdevPoint::n_pairs);

    py::class_<AdevResult>(m, "AdevResult")
        .def_readonly("points", &AdevResult::points)
        .def_readonly("skipped_taus_s", &AdevResult::skipped_taus_s);

    py::class_<SensitivityReport>(m, "SensitivityReport")
        .def_readonly("eta_t_sqrthz", &SensitivityReport::eta_t_sqrthz)
        .def_readonly("trace_std_t", &SensitivityReport::trace_std_t)
        .def_readonly("f_nep_hz", &SensitivityReport::f_nep_hz)
        .def_readonly("band_lo_hz", &SensitivityReport::band_lo_hz)
        .def_readonly("band_hi_hz", &SensitivityReport::band_hi_hz);

    m.def("sensitivity", &sensitivity, py::arg("trace"), py::arg("f_nep_hz"),
          py::arg("band_lo_hz") = 0.0, py::arg("band_hi_hz") = 0.0);
    m.def("min_detectable_field", &min_detectable_field, py::arg("eta_t_sqrthz"),
          py::arg("averaging_time_s"));
    m.def("overlapping_adev", &overlapping_adev, py::arg("trace"), py::arg("taus_s"));
    m.def("default_tau_grid", &default_tau_grid, py::arg("trace"),
          py::arg("points_per_decade") = 10);

    // ---- fits ----
    py::class_<OdmrFitOptions>(m, "OdmrFitOptions")
        .def(py::init<>())
        .def_readwrite("constrain_centers", &OdmrFitOptions::constrain_centers)
        .def_readwrite("shared_fwhm", &OdmrFitOptions::shared_fwhm);

    py::class_<LinearFit>(m, "LinearFit")
        .def_readonly("slope", &LinearFit::slope)
        .def_readonly("slope_std_error", &LinearFit::slope_std_error)
        .def_readonly("intercept", &LinearFit::intercept)
        .def_readonly("n_points", &LinearFit::n_points);

    m.def(
        "fit_odmr_spectrum",
        [](const OdmrSpectrum& spectrum, double a_hf, const OdmrFitOptions& options) {
            return fit_odmr_spectrum(spectrum, a_hf, options);
        },
        py::arg("spectrum"), py::arg("hyperfine_splitting_hz"),
        py::arg("options") = OdmrFitOptions{});
    m.def("fit_zero_crossing", &fit_zero_crossing, py::arg("spectrum"),
          py::arg("window_hz"));

    // ---- files and pipeline ----
    m.def("read_trace_csv", &read_trace_csv, py::arg("path"));
    m.def("write_trace_csv", &write_trace_csv, py::arg("path"), py::arg("trace"));
    m.def("read_odmr_csv", &read_odmr_csv, py::arg("path"));
    m.def("write_odmr_csv", &write_odmr_csv, py::arg("path"), py::arg("spectrum"));

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("sensor", &RunConfig::sensor)
        .def_readwrite("budget", &RunConfig::budget)
        .def_readwrite("synth", &RunConfig::synth)
        .def_readwrite("filters", &RunConfig::filters)
        .def_readwrite("output_dir", &RunConfig::output_dir);

    m.def("default_config", &default_config);
    m.def("load_config", &load_config, py::arg("path"));
}
