#ifndef DIAMAG_PIPELINE_HPP
#define DIAMAG_PIPELINE_HPP

#include <string>
#include <vector>

#include "diamag/config.hpp"
#include "diamag/stability.hpp"
#include "diamag/trace.hpp"

namespace diamag {

struct SynthOutput {
    std::string trace_path;
    double sigma_t = 0.0;
    double duration_s = 0.0;
    double fs_hz = 0.0;
    std::size_t n_samples = 0;
};

// Synthesize the configured trace and write it under out_dir.
SynthOutput run_synth(const RunConfig& config, const std::string& out_dir,
                      bool plot = false);

struct AnalyzeOutput {
    SensitivityReport sensitivity;
    std::vector<AdevPoint> adev;
    std::string asd_path;
    std::string sensitivity_path;
    std::string adev_path;
};

// Full analysis of a recorded or synthesized trace: unit conversion,
// filter chain, spectral density, sensitivity, Allan deviation. The ASD
// and sensitivity act on the filtered trace; the Allan deviation acts on
// the unfiltered series (plus the optional slow-fluctuation pre-notch),
// matching how long-term stability is normally evaluated.
AnalyzeOutput run_analyze(const TimeTrace& trace, const RunConfig& config,
                          const std::string& out_dir, const std::string& format = "csv",
                          bool plot = false);

enum class Tolerance { relative, absolute, range, upper_bound };

struct ReproRow {
    std::string name;
    double expected = 0.0;
    double computed = 0.0;
    Tolerance kind = Tolerance::relative;
    double tol_lo = 0.0;  // range: lower bound; otherwise the tolerance value
    double tol_hi = 0.0;  // range: upper bound
    bool pass = false;
    std::string note;
};

struct ReproReport {
    std::vector<ReproRow> rows;
    bool all_pass = false;
};

// Run the full reference-value reproduction suite against a configuration
// (normally default_config()). Each row is checked at its pinned
// tolerance; execution continues past failures.
ReproReport run_reproduction(const RunConfig& config);

std::string format_repro_table(const ReproReport& report);
void write_repro_csv(const std::string& path, const ReproReport& report);
void write_repro_json(const std::string& path, const ReproReport& report);

} // namespace diamag

#endif
