#pragma once

#include "gfcsim/common.hpp"

namespace gfcsim {

/// Average-value grid-forming converter: DC link, current-limited DC source,
/// switching stage and output RLC filter. All values per-unit on one common
/// system base; inductances/capacitances are in p.u.-seconds (x/omega_b).
struct ConverterParams {
    double c_dc{0.1};       ///< DC-link capacitance
    double g_dc{0.0};       ///< DC-side conductance
    double l_f{4.77e-4};    ///< filter inductance
    double c_f{1.6e-4};     ///< filter capacitance
    double r_f{0.005};      ///< filter resistance
    double i_dc_max{1.2};   ///< DC source current limit
    double v_dc_ref{1.0};   ///< DC voltage setpoint
    double k_dc{100.0};     ///< DC source governor gain
    double tau_dc{0.05};    ///< DC source response time constant [s]

    void validate() const;
};

struct ConverterState {
    double v_dc{1.0};       ///< DC-link voltage
    Vec2 i_s;               ///< switch-side filter current
    Vec2 v;                 ///< filter-capacitor / output voltage
    double i_tau_lag{0.0};  ///< lagged DC-source demand
};

struct ConverterDerivs {
    double v_dc_dot{0.0};
    Vec2 i_s_dot;
    Vec2 v_dot;
};

/// DC current delivered to the switching stage: (1/2) m . i_s.
inline double switch_current(Vec2 m, Vec2 i_s) { return 0.5 * dot(m, i_s); }

/// Average switch-side voltage: (1/2) v_dc m. Chosen so that
/// v_dc * switch_current == switch_voltage . i_s identically.
inline Vec2 switch_voltage(Vec2 m, double v_dc) { return 0.5 * v_dc * m; }

/// Unsaturated DC source demand: governor + AC power feedforward + loss
/// feedforward.
inline double raw_dc_demand(double v_dc, double p_ac_filtered,
                            const ConverterParams& p) {
    return p.k_dc * (p.v_dc_ref - v_dc) + p_ac_filtered / p.v_dc_ref +
           p.g_dc * p.v_dc_ref;
}

/// First-order-lagged DC source demand. Advances state.i_tau_lag by one exact
/// exponential step of length dt and returns the new lag value. tau_dc == 0
/// degenerates to the raw demand.
double dc_source_demand(ConverterState& state, double p_ac_filtered,
                        const ConverterParams& params, double dt);

/// Hard symmetric clamp of the DC source current.
inline double saturate_dc_current(double i_tau, double i_dc_max) {
    if (std::abs(i_tau) < i_dc_max) return i_tau;
    return std::copysign(i_dc_max, i_tau);
}

/// Right-hand side of the converter state equations for a given modulation
/// signal, grid-side current draw and (already saturated) DC source current.
ConverterDerivs converter_derivatives(const ConverterState& state, Vec2 m,
                                      Vec2 i_grid, double i_dc,
                                      const ConverterParams& params);

}  // namespace gfcsim
