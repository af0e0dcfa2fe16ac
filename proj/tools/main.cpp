#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gfcsim/cli.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

gfcsim::OverrideList to_overrides(const std::vector<std::string>& sets) {
    gfcsim::OverrideList out;
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw gfcsim::ConfigError("--set expects key=value, got '" + kv + "'");
        out.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gfcsim: EMT simulation of grid-forming converters with "
                 "DC-side limits on the IEEE 9-bus system"};
    app.require_subcommand(1);

    std::string scenario, out_dir = "out", sweep_spec, csv_path, channels_spec;
    std::vector<std::string> sets;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario)
            cmd->add_option("--scenario", scenario, "Scenario file (plain or resolved)")
                ->required();
        cmd->add_option("--set", sets, "Parameter override key=value (repeatable)");
    };

    auto* run = app.add_subcommand("run", "Simulate one scenario");
    add_common(run, true);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--channels", channels_spec, "Comma-separated panel channels");

    auto* sweep = app.add_subcommand("sweep", "Run one scenario across a parameter sweep");
    add_common(sweep, true);
    sweep->add_option("--out", out_dir, "Output directory");
    sweep->add_option("--sweep", sweep_spec, "key=v1,v2,... sweep specification")
        ->required();
    sweep->add_option("--channels", channels_spec, "Comma-separated panel channels");

    auto* plot = app.add_subcommand("plot", "Render SVG panels from a waveforms CSV");
    plot->add_option("--csv", csv_path, "waveforms.csv path")->required();
    plot->add_option("--out", out_dir, "Output directory");
    plot->add_option("--channels", channels_spec, "Comma-separated channels (empty = all)");

    auto* validate = app.add_subcommand("validate", "Parse and resolve a scenario only");
    add_common(validate, true);

    CLI11_PARSE(app, argc, argv);

    try {
        gfcsim::RunRequest req;
        req.scenario_path = scenario;
        req.output_dir = out_dir;
        req.overrides = to_overrides(sets);
        req.channels = split_csv(channels_spec);

        if (run->parsed()) return gfcsim::run_cmd(req);
        if (sweep->parsed()) {
            const auto eq = sweep_spec.find('=');
            if (eq == std::string::npos || eq == 0)
                throw gfcsim::ConfigError("--sweep expects key=v1,v2,...");
            req.sweep = {sweep_spec.substr(0, eq),
                         split_csv(sweep_spec.substr(eq + 1))};
            return gfcsim::sweep_cmd(req);
        }
        if (plot->parsed())
            return gfcsim::plot_cmd(csv_path, out_dir, req.channels);
        return gfcsim::validate_cmd(req);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gfcsim::kExitConfig;
    }
}
