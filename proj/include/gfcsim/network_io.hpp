#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "gfcsim/network.hpp"

namespace gfcsim {

/// Parses a network description tree (buses / lines / transformers / loads /
/// attachments). omega_b comes from the scenario bases.
NetworkGraph parse_network(const nlohmann::json& j, double omega_b);

/// Serializes a graph back to the description format (round-trips through
/// parse_network).
nlohmann::json network_to_json(const NetworkGraph& graph);

/// Applies one dotted-path override ("section.element.field") to a network
/// description tree. Unknown section/element/field throws ConfigError.
void apply_network_override(nlohmann::json& data, const std::string& key,
                            double value);

/// Builds the shipped IEEE-9 topology. Override keys are dotted paths into
/// the dataset: "lines.bus4-bus5.x", "transformers.bus1-bus4.ratio",
/// "loads.bus5.p", "buses.bus1.shunt_b". Unknown keys throw ConfigError.
NetworkGraph build_ieee9(const std::map<std::string, double>& overrides,
                         double omega_b);

}  // namespace gfcsim
