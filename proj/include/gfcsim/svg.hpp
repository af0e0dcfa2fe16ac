#pragma once

#include <string>
#include <vector>

#include "gfcsim/logging.hpp"

namespace gfcsim {

/// One curve of a plot panel.
struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Renders a fixed-canvas line plot: axes, tick labels, legend. Purely
/// deterministic; identical input yields byte-identical output.
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<SvgSeries>& series);

void write_svg(const std::string& path, const std::string& title,
               const std::string& x_label, const std::string& y_label,
               const std::vector<SvgSeries>& series);

/// Groups log channels by the suffix after the last '.', one panel per group
/// (e.g. gfc1.v_dc and gfc2.v_dc share the "v_dc" panel). `wanted` entries
/// match either a full channel name or a suffix; empty selects everything.
/// Returns the panel file names written into `dir`.
std::vector<std::string> write_log_panels(const WaveformLog& log,
                                          const std::string& dir,
                                          const std::vector<std::string>& wanted);

}  // namespace gfcsim
