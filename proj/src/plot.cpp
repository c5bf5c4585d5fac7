#include "polisim/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace polisim {

namespace {

constexpr double kWidth = 900.0;
constexpr double kPanelHeight = 300.0;
constexpr double kMarginLeft = 80.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 46.0;
constexpr double kMarginBottom = 48.0;

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

// Rounded tick step from the 1-2-5 ladder.
double nice_step(double range, int target_ticks) {
    if (range <= 0) return 1.0;
    const double raw = range / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

struct Scale {
    double lo, hi, px0, px1;
    double operator()(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

void draw_axes(std::ostringstream& svg, const Scale& x, const Scale& y,
               const std::string& x_label, const std::string& y_label, double panel_top) {
    svg << "<line x1='" << num(x.px0) << "' y1='" << num(y.px0) << "' x2='" << num(x.px1)
        << "' y2='" << num(y.px0) << "' stroke='#333'/>\n";
    svg << "<line x1='" << num(x.px0) << "' y1='" << num(y.px0) << "' x2='" << num(x.px0)
        << "' y2='" << num(y.px1) << "' stroke='#333'/>\n";

    const double xstep = nice_step(x.hi - x.lo, 8);
    for (double v = std::ceil(x.lo / xstep) * xstep; v <= x.hi + 1e-9; v += xstep) {
        const double px = x(v);
        svg << "<line x1='" << num(px) << "' y1='" << num(y.px0) << "' x2='" << num(px)
            << "' y2='" << num(y.px0 + 4) << "' stroke='#333'/>\n";
        svg << "<text x='" << num(px) << "' y='" << num(y.px0 + 18)
            << "' font-size='11' text-anchor='middle' fill='#333'>" << num(v) << "</text>\n";
    }
    const double ystep = nice_step(y.hi - y.lo, 5);
    for (double v = std::ceil(y.lo / ystep) * ystep; v <= y.hi + 1e-9; v += ystep) {
        const double py = y(v);
        svg << "<line x1='" << num(x.px0 - 4) << "' y1='" << num(py) << "' x2='" << num(x.px1)
            << "' y2='" << num(py) << "' stroke='#ddd'/>\n";
        svg << "<text x='" << num(x.px0 - 8) << "' y='" << num(py + 4)
            << "' font-size='11' text-anchor='end' fill='#333'>" << num(v) << "</text>\n";
    }
    svg << "<text x='" << num((x.px0 + x.px1) / 2) << "' y='" << num(y.px0 + 36)
        << "' font-size='12' text-anchor='middle' fill='#333'>" << escape(x_label)
        << "</text>\n";
    svg << "<text x='" << num(x.px0 - 58) << "' y='" << num((y.px0 + y.px1) / 2)
        << "' font-size='12' text-anchor='middle' fill='#333' transform='rotate(-90 "
        << num(x.px0 - 58) << " " << num((y.px0 + y.px1) / 2) << ")'>" << escape(y_label)
        << "</text>\n";
    (void)panel_top;
}

}  // namespace

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::vector<PlotPanel>& panels) {
    if (panels.empty()) throw std::invalid_argument("line chart needs at least one panel");
    const double height = kMarginTop + kPanelHeight * panels.size();

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(kWidth) << "' height='"
        << num(height) << "' viewBox='0 0 " << num(kWidth) << " " << num(height) << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << num(kWidth / 2)
        << "' y='24' font-size='16' text-anchor='middle' fill='#111'>" << escape(title)
        << "</text>\n";

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const PlotPanel& panel = panels[p];
        const double top = kMarginTop + kPanelHeight * p;

        std::size_t max_len = 1;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const PlotSeries& s : panel.series) {
            max_len = std::max(max_len, s.values.size());
            for (double v : s.values) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (!std::isfinite(lo)) { lo = 0.0; hi = 1.0; }
        if (hi - lo < 1e-12) { hi += 1.0; lo -= lo > 0.5 ? 0.5 : 0.0; }
        const double pad = (hi - lo) * 0.05;
        const bool nonnegative = lo >= 0.0;
        lo -= pad;
        hi += pad;
        if (nonnegative && lo < 0.0) lo = 0.0;

        const Scale x{1.0, static_cast<double>(max_len), kMarginLeft, kWidth - kMarginRight};
        const Scale y{lo, hi, top + kPanelHeight - kMarginBottom, top + 14.0};

        svg << "<text x='" << num(kMarginLeft) << "' y='" << num(top + 6)
            << "' font-size='13' fill='#111'>" << escape(panel.title) << "</text>\n";
        draw_axes(svg, x, y, panel.x_label, panel.y_label, top);

        for (const PlotSeries& s : panel.series) {
            svg << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
            for (std::size_t i = 0; i < s.values.size(); ++i) {
                if (i) svg << ' ';
                svg << num(x(static_cast<double>(i + 1))) << ',' << num(y(s.values[i]));
            }
            svg << "'/>\n";
        }
        // legend
        double lx = kMarginLeft + 8;
        const double ly = top + 16;
        for (const PlotSeries& s : panel.series) {
            svg << "<rect x='" << num(lx) << "' y='" << num(ly) << "' width='14' height='4' fill='"
                << s.color << "'/>\n";
            svg << "<text x='" << num(lx + 18) << "' y='" << num(ly + 6)
                << "' font-size='11' fill='#333'>" << escape(s.label) << "</text>\n";
            lx += 20 + 7.0 * s.label.size() + 16;
        }
    }
    svg << "</svg>\n";

    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << svg.str();
}

void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                         const std::string& y_label, const std::vector<BarDatum>& bars) {
    if (bars.empty()) throw std::invalid_argument("bar chart needs at least one bar");
    const double height = kMarginTop + kPanelHeight;

    double lo = 0.0, hi = 0.0;
    for (const BarDatum& b : bars) {
        lo = std::min({lo, b.value, b.lo});
        hi = std::max({hi, b.value, b.hi});
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    hi += (hi - lo) * 0.08;

    const Scale y{lo, hi, kMarginTop + kPanelHeight - kMarginBottom, kMarginTop + 14.0};
    const Scale x{0.0, static_cast<double>(bars.size()), kMarginLeft, kWidth - kMarginRight};

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(kWidth) << "' height='"
        << num(height) << "' viewBox='0 0 " << num(kWidth) << " " << num(height) << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << num(kWidth / 2)
        << "' y='24' font-size='16' text-anchor='middle' fill='#111'>" << escape(title)
        << "</text>\n";
    draw_axes(svg, x, y, "", y_label, kMarginTop);

    const double slot = (x.px1 - x.px0) / bars.size();
    const double bar_w = slot * 0.55;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const BarDatum& b = bars[i];
        const double cx = x.px0 + slot * (i + 0.5);
        const double y0 = y(std::max(0.0, lo));
        const double yv = y(b.value);
        svg << "<rect x='" << num(cx - bar_w / 2) << "' y='" << num(std::min(yv, y0))
            << "' width='" << num(bar_w) << "' height='" << num(std::abs(y0 - yv)) << "' fill='"
            << b.color << "'/>\n";
        // min-max whisker
        svg << "<line x1='" << num(cx) << "' y1='" << num(y(b.lo)) << "' x2='" << num(cx)
            << "' y2='" << num(y(b.hi)) << "' stroke='#111' stroke-width='1.5'/>\n";
        svg << "<line x1='" << num(cx - 5) << "' y1='" << num(y(b.lo)) << "' x2='" << num(cx + 5)
            << "' y2='" << num(y(b.lo)) << "' stroke='#111' stroke-width='1.5'/>\n";
        svg << "<line x1='" << num(cx - 5) << "' y1='" << num(y(b.hi)) << "' x2='" << num(cx + 5)
            << "' y2='" << num(y(b.hi)) << "' stroke='#111' stroke-width='1.5'/>\n";
        svg << "<text x='" << num(cx) << "' y='" << num(y.px0 + 18)
            << "' font-size='11' text-anchor='middle' fill='#333'>" << escape(b.label)
            << "</text>\n";
        svg << "<text x='" << num(cx) << "' y='" << num(std::min(yv, y0) - 4)
            << "' font-size='10' text-anchor='middle' fill='#333'>" << num(b.value)
            << "</text>\n";
    }
    svg << "</svg>\n";

    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << svg.str();
}

}  // namespace polisim
