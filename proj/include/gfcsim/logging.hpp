#pragma once

#include <string>
#include <vector>

#include "gfcsim/common.hpp"

namespace gfcsim {

/// Time-indexed record of logged channels. All channels share the time base.
struct WaveformLog {
    std::vector<std::string> channels;
    std::vector<double> time;
    /// Row-major samples: data[i*channels.size() + c] is channel c at time[i].
    std::vector<double> data;

    size_t samples() const { return time.size(); }
    int channel_index(const std::string& name) const;
    double at(size_t sample, size_t channel) const {
        return data[sample * channels.size() + channel];
    }
    /// Copy of one channel's samples; throws ConfigError on unknown name.
    std::vector<double> series(const std::string& name) const;
};

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double v);

/// CSV with header "t_s,<channel>..."; values in shortest round-trip form.
void write_csv(const WaveformLog& log, const std::string& path);
std::string to_csv(const WaveformLog& log);

WaveformLog read_csv(const std::string& path);
WaveformLog parse_csv(const std::string& text);

}  // namespace gfcsim
