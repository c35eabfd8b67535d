#ifndef DIAMAG_IO_HPP
#define DIAMAG_IO_HPP

#include <string>
#include <vector>

#include "diamag/dsp_spectral.hpp"
#include "diamag/noise_budget.hpp"
#include "diamag/odmr_model.hpp"
#include "diamag/stability.hpp"
#include "diamag/trace.hpp"

namespace diamag {

// Traces: comment header "# fs_hz=<v> units=<ampere|tesla>", columns
// time_s,value. Floats are written with 17 significant digits so files
// round-trip losslessly.
void write_trace_csv(const std::string& path, const TimeTrace& trace);
TimeTrace read_trace_csv(const std::string& path);

// Spectra: "# units=<t_per_sqrthz|a_per_sqrthz> rbw_hz=<v> n_avg=<v>",
// columns freq_hz,density.
void write_spectrum_csv(const std::string& path, const AmplitudeSpectrum& spectrum);
AmplitudeSpectrum read_spectrum_csv(const std::string& path);

// Noise-versus-photocurrent tables: header i_fl_a,n_far_a_sqrthz,rel_unc.
void write_noise_data_csv(const std::string& path, const std::vector<NoiseDatum>& data);
std::vector<NoiseDatum> read_noise_data_csv(const std::string& path);

// Allan deviation tables: header tau_s,adev_t,stderr_t,n_pairs.
void write_adev_csv(const std::string& path, const std::vector<AdevPoint>& points);
std::vector<AdevPoint> read_adev_csv(const std::string& path);

// ODMR spectra: header detuning_hz,demod_current_a.
void write_odmr_csv(const std::string& path, const OdmrSpectrum& spectrum);
OdmrSpectrum read_odmr_csv(const std::string& path);

std::string format_double(double value);  // 17 significant digits

} // namespace diamag

#endif
