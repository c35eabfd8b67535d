#ifndef DIAMAG_CONFIG_HPP
#define DIAMAG_CONFIG_HPP

#include <string>

#include "diamag/dsp_spectral.hpp"
#include "diamag/trace_synth.hpp"

namespace diamag {

struct AnalysisConfig {
    std::size_t asd_segment_length = 0;  // 0: trace length / asd_segments
    int asd_segments = 1;
    int adev_points_per_decade = 10;
    double prenotch_hz = 0.0;  // slow-fluctuation notch before ADEV, 0 = off
    double prenotch_q = 1.0;
};

// Everything a pipeline run needs. Loading a file starts from the built-in
// defaults and overrides only the keys present, so configs stay small and
// diffable.
struct RunConfig {
    SensorConfig sensor;
    NoiseBudget budget;
    SynthSpec synth;  // synth.sensor / synth.budget mirror the two above
    FilterChain filters;
    AnalysisConfig analysis;
    std::string output_dir = ".";
};

// Operating point of the reference instrument: sensor parameters, fitted
// noise budget with its uncertainties, the measured-trace emulation
// components, and the standard analysis chain.
RunConfig default_config();

// Flat sectioned key=value file; see the config reference in the README.
RunConfig load_config(const std::string& path);

// Apply a single "section.key=value" override.
void apply_override(RunConfig& config, const std::string& assignment);

std::string dump_config(const RunConfig& config);

} // namespace diamag

#endif
