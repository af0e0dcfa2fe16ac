#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfcsim/controllers.hpp"
#include "gfcsim/converter.hpp"
#include "gfcsim/network.hpp"

namespace gfcsim {

struct Bases {
    double s_mva{100.0};
    double v_kv{230.0};
    double omega{2.0 * M_PI * 50.0};
};

struct SimSettings {
    double dt{2e-5};
    double t_end{10.0};
    double t_preroll{0.5};
    int log_decimation{50};
    double collapse_threshold{0.7};  ///< fraction of v_dc_ref
    double power_filter_omega{2.0 * M_PI * 10.0};
};

struct GfcConfig {
    std::string name;
    std::string bus;
    // Filter values are stored as entered (reactance/susceptance in p.u.) so
    // that emitting and re-parsing a resolved scenario is bit-exact; the
    // p.u.-second inductance/capacitance are derived at assembly.
    double x_f{0.15};
    double b_f{0.05};
    ConverterParams conv;
    OuterControllerConfig outer;
    InnerLoopConfig inner;
};

struct SmConfig {
    std::string name;
    std::string bus;
    SyncMachine sm;
};

struct Scenario {
    std::string name;
    Bases bases;
    SimSettings sim;
    NetworkGraph network;
    std::vector<GfcConfig> gfcs;
    std::vector<SmConfig> sms;
    std::vector<LoadStepEvent> events;

    void validate() const;
};

/// Where each resolved parameter came from: "override", "file", "paper"
/// (paper-sourced default) or "default".
using ProvenanceMap = std::map<std::string, std::string>;

/// key=value pairs from the CLI; values are parsed as JSON literals.
using OverrideList = std::vector<std::pair<std::string, std::string>>;

Scenario parse_scenario(const nlohmann::json& j, const std::string& base_dir,
                        const OverrideList& overrides, ProvenanceMap& prov);

/// Loads and fully resolves a scenario file (plain or resolved form).
Scenario parse_scenario_file(const std::string& path,
                             const OverrideList& overrides,
                             ProvenanceMap& prov);

/// Fully-expanded scenario tree; parse_scenario(emit(s)) reproduces s exactly.
nlohmann::json scenario_to_json(const Scenario& s);

/// The resolved.json record: expanded scenario plus per-parameter provenance.
nlohmann::json resolved_record(const Scenario& s, const ProvenanceMap& prov);

}  // namespace gfcsim
