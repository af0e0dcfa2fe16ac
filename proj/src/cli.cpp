#include "gfcsim/cli.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "gfcsim/svg.hpp"

namespace gfcsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json settling_json(const SettlingMetrics& m) {
    return {{"settled", m.settled},
            {"settling_time_s", m.settling_time},
            {"overshoot", m.overshoot},
            {"final_value", m.final_value}};
}

double last_event_time(const Scenario& s) {
    return s.events.empty() ? 0.0 : s.events.back().t_event;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

struct RunOutcome {
    int exit_code{kExitClean};
    bool collapsed{false};
    bool settled{false};
    double settling_time{0.0};
    double freq_nadir{1.0};   ///< min omega / omega_ref over GFCs [p.u.]
    double min_vdc{1.0};      ///< min v_dc / v_dc_ref over GFCs
};

/// Simulates a resolved scenario and writes all run artifacts.
RunOutcome execute_run(const Scenario& s, const ProvenanceMap& prov,
                       const std::string& out_dir,
                       const std::vector<std::string>& channels) {
    fs::create_directories(out_dir);
    write_text(out_dir + "/resolved.json", resolved_record(s, prov).dump(2) + "\n");

    const RunResult res = run(s);
    write_csv(res.log, out_dir + "/waveforms.csv");
    write_text(out_dir + "/metrics.json", metrics_json(s, res).dump(2) + "\n");
    if (res.log.samples() >= 2) write_log_panels(res.log, out_dir, channels);

    RunOutcome o;
    o.collapsed = res.collapsed_any() || res.fault;
    o.exit_code = o.collapsed ? kExitCollapse : kExitClean;
    o.settled = true;
    const double t_from = last_event_time(s);
    for (size_t g = 0; g < s.gfcs.size(); ++g) {
        const auto& cfg = s.gfcs[g];
        o.min_vdc = std::min(o.min_vdc, res.collapse[g].second.min_vdc);
        if (res.log.samples() == 0) continue;
        const auto m = settling_metrics(res.log.time,
                                        res.log.series(cfg.name + ".v_dc"),
                                        cfg.conv.v_dc_ref, 0.05, t_from);
        o.settled = o.settled && m.settled;
        o.settling_time = std::max(o.settling_time, m.settling_time);
        const auto omega = res.log.series(cfg.name + ".omega");
        for (double w : omega)
            o.freq_nadir =
                std::min(o.freq_nadir, w / cfg.outer.setpoints.omega_ref);
    }
    return o;
}

double parse_finite(const std::string& text, const std::string& what) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() ||
        !std::isfinite(v))
        throw ConfigError(what + ": '" + text + "' is not a finite number");
    return v;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
                c == '-' || c == '_')
                   ? c
                   : '_';
    return out;
}

size_t sweep_threads(size_t jobs) {
    size_t cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GFCSIM_THREADS")) {
        size_t v = 0;
        const auto res = std::from_chars(env, env + std::strlen(env), v);
        if (res.ec == std::errc{} && v >= 1) cap = v;
    }
    return std::min(cap, jobs);
}

}  // namespace

json metrics_json(const Scenario& s, const RunResult& res) {
    json out;
    out["fault"] = res.fault;
    out["fault_reason"] = res.fault_reason;
    out["collapsed"] = res.collapsed_any() || res.fault;
    const double t_from = last_event_time(s);
    json devices = json::object();
    for (size_t g = 0; g < s.gfcs.size(); ++g) {
        const auto& cfg = s.gfcs[g];
        const auto& rep = res.collapse[g].second;
        json d;
        d["collapsed"] = rep.collapsed;
        if (rep.t_collapse) d["t_collapse_s"] = *rep.t_collapse;
        d["min_vdc_ratio"] = rep.min_vdc;
        d["i_dc_saturation_s"] = rep.saturation_duration;
        if (res.log.samples() > 0) {
            d["v_dc"] = settling_json(
                settling_metrics(res.log.time, res.log.series(cfg.name + ".v_dc"),
                                 cfg.conv.v_dc_ref, 0.05, t_from));
            d["omega"] = settling_json(settling_metrics(
                res.log.time, res.log.series(cfg.name + ".omega"),
                cfg.outer.setpoints.omega_ref, 0.005, t_from));
        }
        devices[cfg.name] = d;
    }
    for (const auto& m : s.sms) {
        if (res.log.samples() == 0) break;
        devices[m.name] = {
            {"omega", settling_json(settling_metrics(
                          res.log.time, res.log.series(m.name + ".omega"),
                          s.bases.omega, 0.005, t_from))}};
    }
    out["devices"] = devices;
    return out;
}

int run_cmd(const RunRequest& req) {
    try {
        ProvenanceMap prov;
        const Scenario s = parse_scenario_file(req.scenario_path, req.overrides, prov);
        return execute_run(s, prov, req.output_dir, req.channels).exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int sweep_cmd(const RunRequest& req) {
    try {
        if (!req.sweep || req.sweep->second.empty())
            throw ConfigError("sweep: at least one value is required");
        const auto& [key, values] = *req.sweep;
        for (const auto& v : values) parse_finite(v, "sweep value");

        // Resolve every point up front; a configuration error in any point
        // aborts the sweep before the first simulation starts.
        struct Point {
            std::string value;
            Scenario scenario;
            ProvenanceMap prov;
            std::string dir;
            RunOutcome outcome;
        };
        std::vector<Point> points;
        for (const auto& v : values) {
            OverrideList ov = req.overrides;
            ov.emplace_back(key, v);
            Point p;
            p.value = v;
            p.scenario = parse_scenario_file(req.scenario_path, ov, p.prov);
            p.dir = req.output_dir + "/" + sanitize(key) + "_" + sanitize(v);
            points.push_back(std::move(p));
        }

        fs::create_directories(req.output_dir);
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t i = next.fetch_add(1); i < points.size();
                 i = next.fetch_add(1)) {
                auto& p = points[i];
                p.outcome = execute_run(p.scenario, p.prov, p.dir, req.channels);
            }
        };
        std::vector<std::thread> pool;
        for (size_t t = 0; t < sweep_threads(points.size()); ++t)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        std::string csv =
            key + ",collapsed,settled,settling_time_s,freq_nadir_pu,min_vdc_ratio\n";
        for (const auto& p : points) {
            const auto& o = p.outcome;
            csv += p.value;
            csv += o.collapsed ? ",1" : ",0";
            csv += o.settled ? ",1" : ",0";
            csv += "," + format_double(o.settling_time);
            csv += "," + format_double(o.freq_nadir);
            csv += "," + format_double(o.min_vdc) + "\n";
        }
        write_text(req.output_dir + "/sweep_summary.csv", csv);
        std::cout << csv;
        return kExitClean;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int plot_cmd(const std::string& csv_path, const std::string& output_dir,
             const std::vector<std::string>& channels) {
    try {
        const WaveformLog log = read_csv(csv_path);
        fs::create_directories(output_dir);
        for (const auto& f : write_log_panels(log, output_dir, channels))
            std::cout << output_dir << "/" << f << "\n";
        return kExitClean;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int validate_cmd(const RunRequest& req) {
    try {
        ProvenanceMap prov;
        const Scenario s = parse_scenario_file(req.scenario_path, req.overrides, prov);
        std::cout << resolved_record(s, prov).dump(2) << "\n";
        return kExitClean;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace gfcsim
