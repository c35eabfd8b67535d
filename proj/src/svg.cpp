#include "diamag/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace diamag {

namespace {

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double map(double v, double pix_lo, double pix_hi) const {
        double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
        t = std::clamp(t, 0.0, 1.0);
        return pix_lo + t * (pix_hi - pix_lo);
    }
};

Axis make_axis(const std::vector<double>& values, bool log) {
    Axis axis;
    axis.log = log;
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        if (log && v <= 0.0) continue;
        const double u = log ? std::log10(v) : v;
        if (first) {
            lo = hi = u;
            first = false;
        } else {
            lo = std::min(lo, u);
            hi = std::max(hi, u);
        }
    }
    if (first) throw std::runtime_error("no plottable points");
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double margin = 0.05 * (hi - lo);
    axis.lo = lo - margin;
    axis.hi = hi + margin;
    return axis;
}

} // namespace

bool write_line_chart(const std::string& path, const std::vector<double>& x,
                      const std::vector<double>& y, const ChartOptions& options) {
    try {
        if (x.size() != y.size() || x.size() < 2) return false;
        const Axis ax = make_axis(x, options.log_x);
        const Axis ay = make_axis(y, options.log_y);
        const double left = 60, right = options.width - 15;
        const double top = 30, bottom = options.height - 45;

        std::ostringstream svg;
        svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << options.width
            << "' height='" << options.height << "'>\n"
            << "<rect width='100%' height='100%' fill='white'/>\n"
            << "<text x='" << (options.width / 2) << "' y='18' text-anchor='middle' "
            << "font-family='sans-serif' font-size='14'>" << options.title << "</text>\n"
            << "<text x='" << (options.width / 2) << "' y='" << (options.height - 10)
            << "' text-anchor='middle' font-family='sans-serif' font-size='12'>"
            << options.x_label << "</text>\n"
            << "<text x='14' y='" << (options.height / 2)
            << "' text-anchor='middle' font-family='sans-serif' font-size='12' "
            << "transform='rotate(-90 14 " << (options.height / 2) << ")'>"
            << options.y_label << "</text>\n"
            << "<rect x='" << left << "' y='" << top << "' width='" << (right - left)
            << "' height='" << (bottom - top) << "' fill='none' stroke='#888'/>\n";

        svg << "<polyline fill='none' stroke='#1f77b4' stroke-width='1.2' points='";
        bool any = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
            if (options.log_x && x[i] <= 0.0) continue;
            if (options.log_y && y[i] <= 0.0) continue;
            svg << ax.map(x[i], left, right) << ',' << ay.map(y[i], bottom, top) << ' ';
            any = true;
        }
        svg << "'/>\n</svg>\n";
        if (!any) return false;

        std::ofstream out(path);
        if (!out) return false;
        out << svg.str();
        return out.good();
    } catch (...) {
        return false;
    }
}

} // namespace diamag
