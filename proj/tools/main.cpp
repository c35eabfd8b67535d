// diamag: synthesis and analysis front end for lock-in CW-ODMR
// magnetometer traces. Subcommands: synth, analyze, fit-odmr,
// noise-budget, nep, adev, reproduce.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diamag/config.hpp"
#include "diamag/errors.hpp"
#include "diamag/io.hpp"
#include "diamag/pipeline.hpp"
#include "diamag/svg.hpp"

namespace {

int log_level() {
    const char* env = std::getenv("DIAMAG_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "warn" || v == "error") return 0;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[diamag] " << msg << "\n";
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";
    std::vector<std::string> overrides;
    long long seed = -1;
    bool plot = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file (defaults built in)");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--format", opts.format, "report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", opts.seed, "override the synthesis seed");
    cmd->add_option("--set", opts.overrides, "config override, section.key=value");
    cmd->add_flag("--plot", opts.plot, "emit SVG line charts");
}

diamag::RunConfig make_config(const CommonOpts& opts) {
    diamag::RunConfig config =
        opts.config_path.empty() ? diamag::default_config()
                                 : diamag::load_config(opts.config_path);
    for (const auto& assignment : opts.overrides)
        diamag::apply_override(config, assignment);
    if (opts.seed >= 0) config.synth.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.out_dir != ".") config.output_dir = opts.out_dir;
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulator and analysis toolkit for lock-in CW-ODMR diamond magnetometry"};
    app.require_subcommand(1);

    CommonOpts synth_opts, analyze_opts, fit_opts, budget_opts, nep_opts, adev_opts,
        repro_opts;

    auto* synth = app.add_subcommand("synth", "synthesize a demodulated trace");
    add_common(synth, synth_opts);
    double synth_duration = -1.0;
    synth->add_option("--duration", synth_duration, "trace duration in seconds");

    auto* analyze = app.add_subcommand("analyze", "ASD, sensitivity and ADEV of a trace");
    add_common(analyze, analyze_opts);
    std::string analyze_trace_path;
    analyze->add_option("trace", analyze_trace_path, "input trace CSV")->required();

    auto* fit = app.add_subcommand("fit-odmr", "five-peak fit of an ODMR spectrum");
    add_common(fit, fit_opts);
    std::string fit_spectrum_path;
    bool fit_free_centers = false;
    double fit_window = 0.0;
    fit->add_option("spectrum", fit_spectrum_path, "input spectrum CSV")->required();
    fit->add_flag("--free-centers", fit_free_centers, "let peak centers float");
    fit->add_option("--window", fit_window,
                    "zero-crossing linear-fit window in Hz (default fwhm/5)");

    auto* budget = app.add_subcommand("noise-budget", "fit the three-term noise model");
    add_common(budget, budget_opts);
    std::string budget_data_path;
    double budget_n_elec = -1.0;
    budget->add_option("data", budget_data_path, "noise-vs-photocurrent CSV")->required();
    budget->add_option("--n-elec", budget_n_elec,
                       "electrical floor in A/sqrt(Hz) (default from config)");

    auto* nep = app.add_subcommand("nep", "measure the analysis-chain NEP bandwidth");
    add_common(nep, nep_opts);
    int nep_trials = 24;
    nep->add_option("--trials", nep_trials, "Monte-Carlo trials");

    auto* adev = app.add_subcommand("adev", "overlapping Allan deviation of a trace");
    add_common(adev, adev_opts);
    std::string adev_trace_path;
    adev->add_option("trace", adev_trace_path, "input trace CSV")->required();

    auto* repro = app.add_subcommand("reproduce", "run the reference-value suite");
    add_common(repro, repro_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            auto config = make_config(synth_opts);
            if (synth_duration >= 0.0) config.synth.duration_s = synth_duration;
            if (!(config.synth.duration_s > 0.0)) {
                std::cerr << "synth: duration must be > 0\n";
                return 2;
            }
            const auto out = diamag::run_synth(config, config.output_dir, synth_opts.plot);
            std::printf("wrote %s\n", out.trace_path.c_str());
            std::printf("sigma = %.6g T, duration = %.6g s, Fs = %.6g Hz, n = %zu\n",
                        out.sigma_t, out.duration_s, out.fs_hz, out.n_samples);
        } else if (*analyze) {
            const auto config = make_config(analyze_opts);
            const auto trace = diamag::read_trace_csv(analyze_trace_path);
            const auto out = diamag::run_analyze(trace, config, config.output_dir,
                                                 analyze_opts.format, analyze_opts.plot);
            std::printf("eta = %.6g T/sqrt(Hz), sigma = %.6g T, f_NEP = %.6g Hz\n",
                        out.sensitivity.eta_t_sqrthz, out.sensitivity.trace_std_t,
                        out.sensitivity.f_nep_hz);
            std::printf("wrote %s, %s, %s\n", out.asd_path.c_str(),
                        out.sensitivity_path.c_str(), out.adev_path.c_str());
        } else if (*fit) {
            const auto config = make_config(fit_opts);
            const auto spectrum = diamag::read_odmr_csv(fit_spectrum_path);
            diamag::OdmrFitOptions options;
            options.constrain_centers = !fit_free_centers;
            const auto [fitted, result] = diamag::fit_odmr_spectrum(
                spectrum, config.sensor.hyperfine_splitting_hz, options);

            const double fwhm = fitted.peaks[2].fwhm_hz;
            // default window fwhm/20: the zero-crossing response is linear
            // to about 1% there, so the fitted slope is unbiased
            const double window = fit_window > 0.0 ? fit_window : fwhm / 20.0;
            const auto line = diamag::fit_zero_crossing(spectrum, window);

            std::filesystem::create_directories(config.output_dir);
            const auto peaks_path =
                (std::filesystem::path(config.output_dir) / "peaks.csv").string();
            std::ofstream peaks(peaks_path);
            peaks << "amplitude_a,fwhm_hz,center_hz\n";
            for (const auto& p : fitted.peaks)
                peaks << diamag::format_double(p.amplitude_a) << ','
                      << diamag::format_double(p.fwhm_hz) << ','
                      << diamag::format_double(p.center_hz) << "\n";

            std::printf("fwhm = %.6g Hz, converged = %s, iterations = %d\n", fwhm,
                        result.converged ? "yes" : "no", result.n_iterations);
            std::printf("zero-crossing slope = %.6g +- %.2g A/Hz (window %.4g Hz)\n",
                        line.slope, line.slope_std_error, window);
            std::printf("wrote %s\n", peaks_path.c_str());
        } else if (*budget) {
            const auto config = make_config(budget_opts);
            const auto data = diamag::read_noise_data_csv(budget_data_path);
            const double n_elec =
                budget_n_elec >= 0.0 ? budget_n_elec : config.budget.n_elec_a_sqrthz;
            const auto fit = diamag::fit_noise_model(data, n_elec);
            const auto eqv = diamag::equivalent_photocurrent(fit.budget);

            std::printf("p1 = %.6g +- %.2g A/Hz\n", fit.budget.p1_a_per_hz,
                        std::sqrt(fit.budget.covariance.p1p1));
            std::printf("p2 = %.6g +- %.2g /Hz\n", fit.budget.p2_per_hz,
                        std::sqrt(fit.budget.covariance.p2p2));
            std::printf("equivalent photocurrent = %.6g +- %.2g A\n", eqv.value,
                        eqv.std_error);
            if (fit.fit.n_dof == 0)
                info("exactly determined fit: covariance could not be residual-scaled");

            std::filesystem::create_directories(config.output_dir);
            const auto path = (std::filesystem::path(config.output_dir) /
                               (budget_opts.format == "json" ? "budget.json" : "budget.csv"))
                                  .string();
            if (budget_opts.format == "json") {
                nlohmann::json j{{"n_elec_a_sqrthz", fit.budget.n_elec_a_sqrthz},
                                 {"p1_a_per_hz", fit.budget.p1_a_per_hz},
                                 {"p2_per_hz", fit.budget.p2_per_hz},
                                 {"cov_p1p1", fit.budget.covariance.p1p1},
                                 {"cov_p1p2", fit.budget.covariance.p1p2},
                                 {"cov_p2p2", fit.budget.covariance.p2p2},
                                 {"i_eqv_a", eqv.value},
                                 {"i_eqv_sigma_a", eqv.std_error}};
                std::ofstream out(path);
                out << j.dump(2) << "\n";
            } else {
                std::ofstream out(path);
                out << "n_elec_a_sqrthz,p1_a_per_hz,p2_per_hz,cov_p1p1,cov_p1p2,cov_p2p2,"
                       "i_eqv_a,i_eqv_sigma_a\n";
                out << diamag::format_double(fit.budget.n_elec_a_sqrthz) << ','
                    << diamag::format_double(fit.budget.p1_a_per_hz) << ','
                    << diamag::format_double(fit.budget.p2_per_hz) << ','
                    << diamag::format_double(fit.budget.covariance.p1p1) << ','
                    << diamag::format_double(fit.budget.covariance.p1p2) << ','
                    << diamag::format_double(fit.budget.covariance.p2p2) << ','
                    << diamag::format_double(eqv.value) << ','
                    << diamag::format_double(eqv.std_error) << "\n";
            }
            std::printf("wrote %s\n", path.c_str());
        } else if (*nep) {
            const auto config = make_config(nep_opts);
            const auto estimate = diamag::nep_bandwidth(
                config.filters, config.sensor.sampling_frequency_hz, 1 << 16, nep_trials);
            std::printf("f_NEP = %.6g +- %.2g Hz%s\n", estimate.f_nep_hz,
                        estimate.std_error_hz,
                        estimate.degenerate ? " (degenerate filter)" : "");
        } else if (*adev) {
            const auto config = make_config(adev_opts);
            const auto trace = diamag::read_trace_csv(adev_trace_path);
            diamag::TimeTrace field = trace;
            if (trace.units == diamag::TraceUnits::ampere) {
                const double response =
                    diamag::field_response(config.sensor.zero_crossing_slope_a_per_hz,
                                           config.sensor.gyromagnetic_ratio_hz_per_t);
                if (response == 0.0)
                    throw diamag::config_error("adev: ampere trace but slope is 0");
                for (auto& v : field.samples) v /= response;
                field.units = diamag::TraceUnits::tesla;
            }
            if (config.analysis.prenotch_hz > 0.0) {
                diamag::FilterChain pre;
                pre.notches.push_back(
                    {config.analysis.prenotch_hz, config.analysis.prenotch_q});
                pre.zero_phase = true;
                field = diamag::apply_filter_chain(field, pre);
            }
            const auto taus =
                diamag::default_tau_grid(field, config.analysis.adev_points_per_decade);
            const auto result = diamag::overlapping_adev(field, taus);
            for (double skipped : result.skipped_taus_s)
                info("skipped tau " + std::to_string(skipped) + " s (trace too short)");
            std::filesystem::create_directories(config.output_dir);
            const auto path =
                (std::filesystem::path(config.output_dir) / "adev.csv").string();
            diamag::write_adev_csv(path, result.points);
            std::printf("wrote %s (%zu points)\n", path.c_str(), result.points.size());
        } else if (*repro) {
            const auto config = make_config(repro_opts);
            const auto report = diamag::run_reproduction(config);
            std::fputs(diamag::format_repro_table(report).c_str(), stdout);
            std::filesystem::create_directories(config.output_dir);
            const auto path = (std::filesystem::path(config.output_dir) /
                               (repro_opts.format == "json" ? "repro_report.json"
                                                            : "repro_report.csv"))
                                  .string();
            if (repro_opts.format == "json")
                diamag::write_repro_json(path, report);
            else
                diamag::write_repro_csv(path, report);
            std::printf("wrote %s\n", path.c_str());
            return report.all_pass ? 0 : 1;
        }
    } catch (const diamag::config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
