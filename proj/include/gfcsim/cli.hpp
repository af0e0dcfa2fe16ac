#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfcsim/engine.hpp"
#include "gfcsim/scenario.hpp"

namespace gfcsim {

/// One CLI invocation: scenario, output directory, parameter overrides and an
/// optional one-parameter sweep.
struct RunRequest {
    std::string scenario_path;
    std::string output_dir{"out"};
    OverrideList overrides;
    std::optional<std::pair<std::string, std::vector<std::string>>> sweep;
    std::vector<std::string> channels;  ///< panel selection; empty = all
};

/// Exit codes shared by all verbs: 0 clean, 1 configuration error,
/// 2 collapse-terminated run.
constexpr int kExitClean = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCollapse = 2;

/// metrics.json payload for a finished run.
nlohmann::json metrics_json(const Scenario& s, const RunResult& res);

/// Simulates one scenario and writes waveforms.csv, metrics.json,
/// resolved.json and one SVG per channel panel into the output directory.
int run_cmd(const RunRequest& req);

/// One run per sweep value, concurrently (GFCSIM_THREADS caps the fan-out);
/// writes per-value run directories plus sweep_summary.csv.
int sweep_cmd(const RunRequest& req);

/// Re-plots channels from an existing waveforms CSV.
int plot_cmd(const std::string& csv_path, const std::string& output_dir,
             const std::vector<std::string>& channels);

/// Parse-only: resolves the scenario and prints the provenance record.
int validate_cmd(const RunRequest& req);

}  // namespace gfcsim
