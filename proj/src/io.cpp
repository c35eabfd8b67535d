#include "diamag/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace diamag {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) fields.push_back(item);
    return fields;
}

double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("bad number '" + s + "' in " + context);
    }
}

// key=value pairs on a "# ..." comment line
double comment_value(const std::string& line, const std::string& key,
                     const std::string& path) {
    const auto pos = line.find(key + "=");
    if (pos == std::string::npos)
        throw std::runtime_error("missing " + key + " in header of " + path);
    const auto start = pos + key.size() + 1;
    auto end = line.find(' ', start);
    if (end == std::string::npos) end = line.size();
    return parse_double(line.substr(start, end - start), path);
}

std::string comment_string(const std::string& line, const std::string& key,
                           const std::string& path) {
    const auto pos = line.find(key + "=");
    if (pos == std::string::npos)
        throw std::runtime_error("missing " + key + " in header of " + path);
    const auto start = pos + key.size() + 1;
    auto end = line.find(' ', start);
    if (end == std::string::npos) end = line.size();
    return line.substr(start, end - start);
}

} // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_trace_csv(const std::string& path, const TimeTrace& trace) {
    auto out = open_out(path);
    out << "# fs_hz=" << format_double(trace.fs_hz) << " units="
        << (trace.units == TraceUnits::tesla ? "tesla" : "ampere") << "\n";
    out << "time_s,value\n";
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const double t = trace.start_time_s + static_cast<double>(i) / trace.fs_hz;
        out << format_double(t) << ',' << format_double(trace.samples[i]) << "\n";
    }
}

TimeTrace read_trace_csv(const std::string& path) {
    auto in = open_in(path);
    TimeTrace trace;
    std::string line;
    bool have_header = false, have_columns = false, first_row = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            trace.fs_hz = comment_value(line, "fs_hz", path);
            const std::string units = comment_string(line, "units", path);
            if (units == "tesla")
                trace.units = TraceUnits::tesla;
            else if (units == "ampere")
                trace.units = TraceUnits::ampere;
            else
                throw std::runtime_error("unknown units '" + units + "' in " + path);
            have_header = true;
            continue;
        }
        if (!have_columns) {
            have_columns = true;  // column header row
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 2) throw std::runtime_error("bad trace row in " + path);
        if (first_row) {
            trace.start_time_s = parse_double(fields[0], path);
            first_row = false;
        }
        trace.samples.push_back(parse_double(fields[1], path));
    }
    if (!have_header) throw std::runtime_error("missing '# fs_hz=... units=...' header in " + path);
    validate_trace(trace);
    return trace;
}

void write_spectrum_csv(const std::string& path, const AmplitudeSpectrum& spectrum) {
    auto out = open_out(path);
    out << "# units="
        << (spectrum.units == SpectrumUnits::t_per_sqrthz ? "t_per_sqrthz"
                                                          : "a_per_sqrthz")
        << " rbw_hz=" << format_double(spectrum.resolution_bw_hz)
        << " n_avg=" << spectrum.n_averages << "\n";
    out << "freq_hz,density\n";
    for (std::size_t i = 0; i < spectrum.frequencies_hz.size(); ++i)
        out << format_double(spectrum.frequencies_hz[i]) << ','
            << format_double(spectrum.density[i]) << "\n";
}

AmplitudeSpectrum read_spectrum_csv(const std::string& path) {
    auto in = open_in(path);
    AmplitudeSpectrum spectrum;
    std::string line;
    bool have_header = false, have_columns = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string units = comment_string(line, "units", path);
            spectrum.units = units == "t_per_sqrthz" ? SpectrumUnits::t_per_sqrthz
                                                     : SpectrumUnits::a_per_sqrthz;
            spectrum.resolution_bw_hz = comment_value(line, "rbw_hz", path);
            spectrum.n_averages = static_cast<int>(comment_value(line, "n_avg", path));
            have_header = true;
            continue;
        }
        if (!have_columns) {
            have_columns = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 2) throw std::runtime_error("bad spectrum row in " + path);
        spectrum.frequencies_hz.push_back(parse_double(fields[0], path));
        spectrum.density.push_back(parse_double(fields[1], path));
    }
    if (!have_header) throw std::runtime_error("missing spectrum header in " + path);
    return spectrum;
}

void write_noise_data_csv(const std::string& path, const std::vector<NoiseDatum>& data) {
    auto out = open_out(path);
    out << "i_fl_a,n_far_a_sqrthz,rel_unc\n";
    for (const auto& d : data)
        out << format_double(d.i_fl_a) << ',' << format_double(d.n_far_a_sqrthz) << ','
            << format_double(d.rel_uncertainty) << "\n";
}

std::vector<NoiseDatum> read_noise_data_csv(const std::string& path) {
    auto in = open_in(path);
    std::vector<NoiseDatum> data;
    std::string line;
    bool have_columns = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!have_columns) {
            have_columns = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 3) throw std::runtime_error("bad noise-data row in " + path);
        data.push_back({parse_double(fields[0], path), parse_double(fields[1], path),
                        parse_double(fields[2], path)});
    }
    return data;
}

void write_adev_csv(const std::string& path, const std::vector<AdevPoint>& points) {
    auto out = open_out(path);
    out << "tau_s,adev_t,stderr_t,n_pairs\n";
    for (const auto& p : points)
        out << format_double(p.tau_s) << ',' << format_double(p.adev_t) << ','
            << format_double(p.std_error_t) << ',' << p.n_pairs << "\n";
}

std::vector<AdevPoint> read_adev_csv(const std::string& path) {
    auto in = open_in(path);
    std::vector<AdevPoint> points;
    std::string line;
    bool have_columns = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!have_columns) {
            have_columns = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 4) throw std::runtime_error("bad adev row in " + path);
        AdevPoint p;
        p.tau_s = parse_double(fields[0], path);
        p.adev_t = parse_double(fields[1], path);
        p.std_error_t = parse_double(fields[2], path);
        p.n_pairs = static_cast<long>(parse_double(fields[3], path));
        points.push_back(p);
    }
    return points;
}

void write_odmr_csv(const std::string& path, const OdmrSpectrum& spectrum) {
    auto out = open_out(path);
    out << "detuning_hz,demod_current_a\n";
    for (std::size_t i = 0; i < spectrum.detunings_hz.size(); ++i)
        out << format_double(spectrum.detunings_hz[i]) << ','
            << format_double(spectrum.demod_current_a[i]) << "\n";
}

OdmrSpectrum read_odmr_csv(const std::string& path) {
    auto in = open_in(path);
    OdmrSpectrum spectrum;
    std::string line;
    bool have_columns = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!have_columns) {
            have_columns = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 2) throw std::runtime_error("bad odmr row in " + path);
        spectrum.detunings_hz.push_back(parse_double(fields[0], path));
        spectrum.demod_current_a.push_back(parse_double(fields[1], path));
    }
    validate(spectrum);
    return spectrum;
}

} // namespace diamag
