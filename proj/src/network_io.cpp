#include "gfcsim/network_io.hpp"

#include <sstream>
#include <vector>

#include "ieee9_data.hpp"

namespace gfcsim {

using nlohmann::json;

NetworkGraph parse_network(const json& j, double omega_b) {
    NetworkGraph g;
    g.omega_b = omega_b;
    if (!j.contains("buses"))
        throw ConfigError("network: missing required field 'buses'");
    for (const auto& b : j.at("buses")) {
        Bus bus;
        bus.id = b.at("id").get<std::string>();
        bus.shunt_b = b.value("shunt_b", 0.0);
        g.buses.push_back(bus);
    }
    auto read_branch = [](const json& e, bool xfmr) {
        Branch br;
        br.from = e.at("from").get<std::string>();
        br.to = e.at("to").get<std::string>();
        br.r = e.value("r", 0.0);
        br.x = e.at("x").get<double>();
        br.b_shunt = e.value("b", 0.0);
        br.ratio = e.value("ratio", 1.0);
        br.is_transformer = xfmr;
        return br;
    };
    for (const auto& e : j.value("lines", json::array()))
        g.branches.push_back(read_branch(e, false));
    for (const auto& e : j.value("transformers", json::array()))
        g.branches.push_back(read_branch(e, true));
    for (const auto& e : j.value("loads", json::array()))
        g.loads.push_back(Load{e.at("bus").get<std::string>(),
                               e.value("p", 0.0), e.value("q", 0.0)});
    const json attach = j.value("attachments", json::object());
    for (const auto& [dev, bus] : attach.items())
        g.attachments[dev] = bus.get<std::string>();
    g.validate();
    return g;
}

json network_to_json(const NetworkGraph& graph) {
    json j;
    j["buses"] = json::array();
    for (const auto& b : graph.buses)
        j["buses"].push_back({{"id", b.id}, {"shunt_b", b.shunt_b}});
    j["lines"] = json::array();
    j["transformers"] = json::array();
    for (const auto& br : graph.branches) {
        json e{{"from", br.from}, {"to", br.to}, {"r", br.r},
               {"x", br.x},       {"b", br.b_shunt}, {"ratio", br.ratio}};
        j[br.is_transformer ? "transformers" : "lines"].push_back(e);
    }
    j["loads"] = json::array();
    for (const auto& ld : graph.loads)
        j["loads"].push_back({{"bus", ld.bus}, {"p", ld.p}, {"q", ld.q}});
    j["attachments"] = json::object();
    for (const auto& [dev, bus] : graph.attachments) j["attachments"][dev] = bus;
    return j;
}

namespace {

std::vector<std::string> split_path(const std::string& key) {
    std::vector<std::string> parts;
    std::stringstream ss(key);
    std::string p;
    while (std::getline(ss, p, '.')) parts.push_back(p);
    return parts;
}

}  // namespace

void apply_network_override(json& data, const std::string& key, double value) {
    const auto parts = split_path(key);
    if (parts.size() != 3)
        throw ConfigError("network override '" + key +
                          "': expected section.element.field");
    const auto& [section, element, field] = std::tie(parts[0], parts[1], parts[2]);
    if (!data.contains(section))
        throw ConfigError("network override '" + key + "': unknown section");
    for (auto& e : data.at(section)) {
        std::string id;
        if (e.contains("id"))
            id = e.at("id").get<std::string>();
        else if (e.contains("from"))
            id = e.at("from").get<std::string>() + "-" + e.at("to").get<std::string>();
        else
            id = e.at("bus").get<std::string>();
        if (id != element) continue;
        if (!e.contains(field))
            throw ConfigError("network override '" + key + "': unknown field");
        e[field] = value;
        return;
    }
    throw ConfigError("network override '" + key + "': unknown element");
}

NetworkGraph build_ieee9(const std::map<std::string, double>& overrides,
                         double omega_b) {
    json data = json::parse(detail::kIeee9Json);
    for (const auto& [key, value] : overrides) apply_network_override(data, key, value);
    return parse_network(data, omega_b);
}

}  // namespace gfcsim
