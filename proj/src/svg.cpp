#include "gfcsim/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

namespace gfcsim {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 46.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

/// Fixed-precision coordinate text keeps the output byte-stable.
std::string coord(double v) {
    char buf[32];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string tick_label(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[32];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo{0.0}, hi{1.0};
};

Range data_range(const std::vector<SvgSeries>& series, bool use_x) {
    bool any = false;
    Range r{0.0, 0.0};
    for (const auto& s : series)
        for (double v : (use_x ? s.x : s.y)) {
            if (!std::isfinite(v)) continue;
            if (!any) {
                r.lo = r.hi = v;
                any = true;
            } else {
                r.lo = std::min(r.lo, v);
                r.hi = std::max(r.hi, v);
            }
        }
    if (!any) return {0.0, 1.0};
    if (r.hi == r.lo) {
        const double pad = std::max(1.0, std::abs(r.lo)) * 0.5;
        r.lo -= pad;
        r.hi += pad;
    }
    return r;
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<SvgSeries>& series) {
    const Range rx = data_range(series, true);
    const Range ry = data_range(series, false);
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * plot_w; };
    auto py = [&](double v) {
        return kTop + plot_h - (v - ry.lo) / (ry.hi - ry.lo) * plot_h;
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"420\" "
           "viewBox=\"0 0 900 420\" font-family=\"monospace\" font-size=\"12\">\n";
    out += "<rect width=\"900\" height=\"420\" fill=\"white\"/>\n";
    out += "<text x=\"450\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
           xml_escape(title) + "</text>\n";

    // Frame and ticks (5 per axis).
    out += "<rect x=\"" + coord(kLeft) + "\" y=\"" + coord(kTop) + "\" width=\"" +
           coord(plot_w) + "\" height=\"" + coord(plot_h) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = rx.lo + (rx.hi - rx.lo) * k / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * k / 4.0;
        out += "<line x1=\"" + coord(px(fx)) + "\" y1=\"" + coord(kTop + plot_h) +
               "\" x2=\"" + coord(px(fx)) + "\" y2=\"" + coord(kTop + plot_h + 5) +
               "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + coord(px(fx)) + "\" y=\"" + coord(kTop + plot_h + 18) +
               "\" text-anchor=\"middle\">" + tick_label(fx) + "</text>\n";
        out += "<line x1=\"" + coord(kLeft - 5) + "\" y1=\"" + coord(py(fy)) +
               "\" x2=\"" + coord(kLeft) + "\" y2=\"" + coord(py(fy)) +
               "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + coord(kLeft - 8) + "\" y=\"" + coord(py(fy) + 4) +
               "\" text-anchor=\"end\">" + tick_label(fy) + "</text>\n";
    }
    out += "<text x=\"" + coord(kLeft + plot_w / 2) + "\" y=\"" +
           coord(kHeight - 8) + "\" text-anchor=\"middle\">" + xml_escape(x_label) +
           "</text>\n";
    out += "<text x=\"16\" y=\"" + coord(kTop + plot_h / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           coord(kTop + plot_h / 2) + ")\">" + xml_escape(y_label) + "</text>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        const auto& sr = series[s];
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(*kPalette))];
        std::string pts;
        const size_t n = std::min(sr.x.size(), sr.y.size());
        for (size_t i = 0; i < n; ++i) {
            if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) continue;
            if (!pts.empty()) pts += ' ';
            pts += coord(px(sr.x[i])) + "," + coord(py(sr.y[i]));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = kTop + 14.0 + 16.0 * static_cast<double>(s);
        out += "<line x1=\"" + coord(kLeft + plot_w - 120) + "\" y1=\"" + coord(ly) +
               "\" x2=\"" + coord(kLeft + plot_w - 100) + "\" y2=\"" + coord(ly) +
               "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        out += "<text x=\"" + coord(kLeft + plot_w - 94) + "\" y=\"" +
               coord(ly + 4) + "\">" + xml_escape(sr.label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

void write_svg(const std::string& path, const std::string& title,
               const std::string& x_label, const std::string& y_label,
               const std::vector<SvgSeries>& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << render_svg(title, x_label, y_label, series);
}

std::vector<std::string> write_log_panels(const WaveformLog& log,
                                          const std::string& dir,
                                          const std::vector<std::string>& wanted) {
    auto suffix = [](const std::string& name) {
        const auto p = name.rfind('.');
        return p == std::string::npos ? name : name.substr(p + 1);
    };
    auto selected = [&](const std::string& name) {
        if (wanted.empty()) return true;
        for (const auto& w : wanted)
            if (w == name || w == suffix(name)) return true;
        return false;
    };
    std::map<std::string, std::vector<std::string>> panels;  // ordered, stable
    for (const auto& ch : log.channels)
        if (selected(ch)) panels[suffix(ch)].push_back(ch);
    if (panels.empty() && !wanted.empty()) {
        std::string avail;
        for (const auto& ch : log.channels)
            avail += (avail.empty() ? "" : ", ") + ch;
        throw ConfigError("no channel matches the requested names (available: " +
                          avail + ")");
    }

    std::vector<std::string> written;
    for (const auto& [panel, names] : panels) {
        std::vector<SvgSeries> series;
        for (const auto& name : names)
            series.push_back(SvgSeries{name, log.time, log.series(name)});
        const std::string file = panel + ".svg";
        write_svg(dir + "/" + file, panel, "t [s]", panel + " [p.u.]", series);
        written.push_back(file);
    }
    return written;
}

}  // namespace gfcsim
