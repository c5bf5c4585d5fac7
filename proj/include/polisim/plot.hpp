#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace polisim {

struct PlotSeries {
    std::string label;
    std::string color;  // CSS color
    std::vector<double> values;  // x is the index (day or week)
};

struct PlotPanel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

struct BarDatum {
    std::string label;
    std::string color;
    double value = 0.0;
    double lo = 0.0;  // range whisker
    double hi = 0.0;
};

// Stacked line-chart panels sharing one canvas; deterministic output bytes.
void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::vector<PlotPanel>& panels);

void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                         const std::string& y_label, const std::vector<BarDatum>& bars);

}  // namespace polisim
