#include "gfcsim/logging.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace gfcsim {

int WaveformLog::channel_index(const std::string& name) const {
    for (size_t i = 0; i < channels.size(); ++i)
        if (channels[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> WaveformLog::series(const std::string& name) const {
    const int c = channel_index(name);
    if (c < 0) {
        std::string avail;
        for (const auto& ch : channels) avail += (avail.empty() ? "" : ", ") + ch;
        throw ConfigError("unknown channel '" + name + "' (available: " + avail + ")");
    }
    std::vector<double> out(samples());
    for (size_t i = 0; i < samples(); ++i) out[i] = at(i, static_cast<size_t>(c));
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string to_csv(const WaveformLog& log) {
    std::string out = "t_s";
    for (const auto& c : log.channels) {
        out += ',';
        out += c;
    }
    out += '\n';
    for (size_t i = 0; i < log.samples(); ++i) {
        out += format_double(log.time[i]);
        for (size_t c = 0; c < log.channels.size(); ++c) {
            out += ',';
            out += format_double(log.at(i, c));
        }
        out += '\n';
    }
    return out;
}

void write_csv(const WaveformLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << to_csv(log);
}

namespace {

double parse_field(const std::string& s, size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("csv: bad numeric field '" + s + "' on line " +
                          std::to_string(line));
    return v;
}

}  // namespace

WaveformLog parse_csv(const std::string& text) {
    WaveformLog log;
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) throw ConfigError("csv: empty input");
    {
        std::stringstream hs(line);
        std::string col;
        bool first = true;
        while (std::getline(hs, col, ',')) {
            if (first) {
                if (col != "t_s") throw ConfigError("csv: first column must be t_s");
                first = false;
            } else {
                log.channels.push_back(col);
            }
        }
        if (first) throw ConfigError("csv: missing header");
    }
    size_t lineno = 1;
    while (std::getline(ss, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string field;
        size_t col = 0;
        while (std::getline(ls, field, ',')) {
            const double v = parse_field(field, lineno);
            if (col == 0)
                log.time.push_back(v);
            else
                log.data.push_back(v);
            ++col;
        }
        if (col != log.channels.size() + 1)
            throw ConfigError("csv: wrong field count on line " +
                              std::to_string(lineno));
    }
    return log;
}

WaveformLog read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

}  // namespace gfcsim
