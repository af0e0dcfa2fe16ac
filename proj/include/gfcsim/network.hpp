#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gfcsim/common.hpp"

namespace gfcsim {

struct Bus {
    std::string id;
    double shunt_b{0.0};  ///< extra shunt susceptance at the bus [p.u.]
};

/// Series RL branch with total line-charging susceptance split between its
/// ends. Transformers are branches with ratio != 1 allowed and is_transformer
/// set; current state is defined on the `to` side, positive from -> to.
struct Branch {
    std::string from;
    std::string to;
    double r{0.0};
    double x{0.1};        ///< series reactance [p.u.]
    double b_shunt{0.0};  ///< total charging susceptance [p.u.]
    double ratio{1.0};
    bool is_transformer{false};
};

/// Constant-impedance load; admittance fixed from (p, q) at nominal voltage.
struct Load {
    std::string bus;
    double p{0.0};
    double q{0.0};
};

struct LoadStepEvent {
    double t_event{0.0};
    std::string bus;
    double p_before{0.0};
    double p_after{0.0};
    double q_after{0.0};
};

/// Classical synchronous machine: swing equation, EMF behind a dynamic RL
/// stator branch (transient reactance), proportional governor. No AVR. The
/// stator current is a state: an algebraic (quasi-static) stator coupled to
/// the dynamic network is not passive and destabilizes the swing mode.
struct SyncMachine {
    double inertia_h{3.0};          ///< inertia constant [s]
    double d_damp{0.05};            ///< damping [p.u. power per rad/s]
    double x_t{0.1};                ///< transient reactance [p.u.]
    double r_s{0.005};              ///< stator resistance [p.u.]
    double e_mag{1.0};              ///< internal EMF magnitude [p.u.]
    double governor_droop{0.0637};  ///< [p.u. power per rad/s]
    double p_set{0.0};              ///< governor power setpoint [p.u.]

    void validate() const;
};

struct SmState {
    double theta{0.0};    ///< absolute rotor electrical angle [rad]
    double omega_m{0.0};  ///< rotor speed [rad/s]
    Vec2 i;               ///< stator current into the terminal bus
};

struct SmDerivs {
    double theta_dot{0.0};
    double omega_dot{0.0};
    Vec2 i_dot;           ///< stator branch l di/dt = e - v - r i
    double p_elec{0.0};   ///< air-gap power e . i
};

SmDerivs sm_derivatives(const SyncMachine& sm, const SmState& state,
                        Vec2 terminal_v, double omega_ref, double omega_b);

struct NetworkGraph {
    double omega_b{2.0 * M_PI * 50.0};
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Load> loads;
    /// Device attachment points: device name -> bus id.
    std::unordered_map<std::string, std::string> attachments;

    int bus_index(const std::string& id) const;
    /// Bus capacitance from line charging plus explicit shunts [p.u.-seconds].
    std::vector<double> bus_capacitance() const;
    /// Load admittance per bus at nominal voltage: (g, b) pairs.
    std::vector<Vec2> load_admittance() const;
    void validate() const;
};

struct NetworkState {
    std::vector<Vec2> bus_v;
    std::vector<Vec2> branch_i;
};

struct NetworkDerivs {
    std::vector<Vec2> bus_v_dot;    ///< valid only where bus capacitance > 0
    std::vector<Vec2> branch_i_dot;
    std::vector<Vec2> bus_residual; ///< KCL residual = bus capacitor charging current
};

/// Dynamic network equations: l di/dt = v_from/n - v_to - r i per branch,
/// c dv/dt = (injections + branch flows - load current) per bus.
NetworkDerivs network_derivatives(const NetworkGraph& graph,
                                  const NetworkState& state,
                                  const std::vector<Vec2>& injections);

/// Replaces the load at the event's bus with (p_after, q_after).
void apply_event(NetworkGraph& graph, const LoadStepEvent& event);

/// Total stored energy in branch inductances and bus capacitances.
double stored_energy(const NetworkGraph& graph, const NetworkState& state);

}  // namespace gfcsim
