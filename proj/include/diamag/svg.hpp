#ifndef DIAMAG_SVG_HPP
#define DIAMAG_SVG_HPP

#include <string>
#include <vector>

namespace diamag {

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    int width = 720;
    int height = 480;
};

// Minimal standalone SVG line chart. Returns false (never throws) when the
// data cannot be plotted or the file cannot be written; plotting is never
// allowed to fail an analysis run.
bool write_line_chart(const std::string& path, const std::vector<double>& x,
                      const std::vector<double>& y, const ChartOptions& options);

} // namespace diamag

#endif
