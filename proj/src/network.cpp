#include "gfcsim/network.hpp"

#include <cmath>
#include <set>

namespace gfcsim {

void SyncMachine::validate() const {
    if (!(inertia_h > 0)) throw ConfigError("sm: inertia_h must be > 0");
    if (!(x_t > 0)) throw ConfigError("sm: x_t must be > 0");
    if (!(r_s >= 0)) throw ConfigError("sm: r_s must be >= 0");
    if (!(d_damp >= 0)) throw ConfigError("sm: d_damp must be >= 0");
    if (!(governor_droop >= 0)) throw ConfigError("sm: governor_droop must be >= 0");
}

SmDerivs sm_derivatives(const SyncMachine& sm, const SmState& state,
                        Vec2 terminal_v, double omega_ref, double omega_b) {
    SmDerivs d;
    const Vec2 e{sm.e_mag * std::cos(state.theta),
                 sm.e_mag * std::sin(state.theta)};
    const double l = sm.x_t / omega_b;
    d.i_dot = (e - terminal_v - sm.r_s * state.i) / l;
    d.p_elec = dot(e, state.i);
    const double p_mech = sm.p_set + sm.governor_droop * (omega_ref - state.omega_m);
    d.theta_dot = state.omega_m;
    d.omega_dot = (omega_ref / (2.0 * sm.inertia_h)) *
                  (p_mech - d.p_elec - sm.d_damp * (state.omega_m - omega_ref));
    return d;
}

int NetworkGraph::bus_index(const std::string& id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

std::vector<double> NetworkGraph::bus_capacitance() const {
    std::vector<double> c(buses.size(), 0.0);
    for (size_t i = 0; i < buses.size(); ++i) c[i] = buses[i].shunt_b / omega_b;
    for (const auto& br : branches) {
        const double half = 0.5 * br.b_shunt / omega_b;
        c[static_cast<size_t>(bus_index(br.from))] += half;
        c[static_cast<size_t>(bus_index(br.to))] += half;
    }
    return c;
}

std::vector<Vec2> NetworkGraph::load_admittance() const {
    std::vector<Vec2> y(buses.size(), Vec2{});
    for (const auto& ld : loads) {
        const int i = bus_index(ld.bus);
        y[static_cast<size_t>(i)] += Vec2{ld.p, ld.q};
    }
    return y;
}

void NetworkGraph::validate() const {
    std::set<std::string> ids;
    for (const auto& b : buses) {
        if (!ids.insert(b.id).second)
            throw ConfigError("network: duplicate bus id '" + b.id + "'");
        if (!(b.shunt_b >= 0))
            throw ConfigError("network: shunt_b must be >= 0 at '" + b.id + "'");
    }
    for (const auto& br : branches) {
        if (bus_index(br.from) < 0 || bus_index(br.to) < 0)
            throw ConfigError("network: branch " + br.from + "-" + br.to +
                              " references an unknown bus");
        if (!(br.x > 0))
            throw ConfigError("network: branch " + br.from + "-" + br.to +
                              " must have x > 0");
        if (!(br.r >= 0) || !(br.b_shunt >= 0))
            throw ConfigError("network: branch " + br.from + "-" + br.to +
                              " has negative r or b_shunt");
        if (!(br.ratio > 0))
            throw ConfigError("network: transformer " + br.from + "-" + br.to +
                              " must have ratio > 0");
    }
    for (const auto& ld : loads)
        if (bus_index(ld.bus) < 0)
            throw ConfigError("network: load references unknown bus '" + ld.bus + "'");
    for (const auto& [dev, bus] : attachments)
        if (bus_index(bus) < 0)
            throw ConfigError("network: attachment '" + dev +
                              "' references unknown bus '" + bus + "'");
    if (!(omega_b > 0)) throw ConfigError("network: omega_b must be > 0");
}

NetworkDerivs network_derivatives(const NetworkGraph& graph,
                                  const NetworkState& state,
                                  const std::vector<Vec2>& injections) {
    const size_t nb = graph.buses.size();
    NetworkDerivs d;
    d.bus_v_dot.assign(nb, Vec2{});
    d.branch_i_dot.resize(graph.branches.size());
    d.bus_residual.assign(nb, Vec2{});

    for (size_t i = 0; i < nb; ++i) d.bus_residual[i] = injections[i];

    for (size_t k = 0; k < graph.branches.size(); ++k) {
        const auto& br = graph.branches[k];
        const auto f = static_cast<size_t>(graph.bus_index(br.from));
        const auto t = static_cast<size_t>(graph.bus_index(br.to));
        const Vec2 i = state.branch_i[k];
        const double l = br.x / graph.omega_b;
        d.branch_i_dot[k] =
            (state.bus_v[f] / br.ratio - state.bus_v[t] - br.r * i) / l;
        d.bus_residual[f] -= i / br.ratio;
        d.bus_residual[t] += i;
    }

    const auto y = graph.load_admittance();
    for (size_t i = 0; i < nb; ++i) {
        const Vec2 v = state.bus_v[i];
        // i_load = g v - b * rot90(v): Y = g - jb with q > 0 inductive.
        d.bus_residual[i] -= y[i].a * v - y[i].b * rot90(v);
    }

    const auto c = graph.bus_capacitance();
    for (size_t i = 0; i < nb; ++i)
        if (c[i] > 0.0) d.bus_v_dot[i] = d.bus_residual[i] / c[i];
    return d;
}

void apply_event(NetworkGraph& graph, const LoadStepEvent& event) {
    if (graph.bus_index(event.bus) < 0)
        throw ConfigError("event references unknown bus '" + event.bus + "'");
    for (auto& ld : graph.loads) {
        if (ld.bus == event.bus) {
            ld.p = event.p_after;
            ld.q = event.q_after;
            return;
        }
    }
    graph.loads.push_back(Load{event.bus, event.p_after, event.q_after});
}

double stored_energy(const NetworkGraph& graph, const NetworkState& state) {
    double e = 0.0;
    for (size_t k = 0; k < graph.branches.size(); ++k) {
        const double l = graph.branches[k].x / graph.omega_b;
        e += 0.5 * l * state.branch_i[k].norm2();
    }
    const auto c = graph.bus_capacitance();
    for (size_t i = 0; i < graph.buses.size(); ++i)
        e += 0.5 * c[i] * state.bus_v[i].norm2();
    return e;
}

}  // namespace gfcsim
