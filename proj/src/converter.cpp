#include "gfcsim/converter.hpp"

namespace gfcsim {

void ConverterParams::validate() const {
    if (!(c_dc > 0)) throw ConfigError("converter: c_dc must be > 0");
    if (!(l_f > 0)) throw ConfigError("converter: l_f must be > 0");
    if (!(c_f > 0)) throw ConfigError("converter: c_f must be > 0");
    if (!(r_f >= 0)) throw ConfigError("converter: r_f must be >= 0");
    if (!(g_dc >= 0)) throw ConfigError("converter: g_dc must be >= 0");
    if (!(i_dc_max > 0)) throw ConfigError("converter: i_dc_max must be > 0");
    if (!(v_dc_ref > 0)) throw ConfigError("converter: v_dc_ref must be > 0");
    if (!(tau_dc >= 0)) throw ConfigError("converter: tau_dc must be >= 0");
}

double dc_source_demand(ConverterState& state, double p_ac_filtered,
                        const ConverterParams& params, double dt) {
    const double raw = raw_dc_demand(state.v_dc, p_ac_filtered, params);
    if (params.tau_dc <= 0.0) {
        state.i_tau_lag = raw;
    } else {
        const double a = 1.0 - std::exp(-dt / params.tau_dc);
        state.i_tau_lag += a * (raw - state.i_tau_lag);
    }
    return state.i_tau_lag;
}

ConverterDerivs converter_derivatives(const ConverterState& state, Vec2 m,
                                      Vec2 i_grid, double i_dc,
                                      const ConverterParams& params) {
    const double i_x = switch_current(m, state.i_s);
    const Vec2 v_s = switch_voltage(m, state.v_dc);
    ConverterDerivs d;
    d.v_dc_dot = (i_dc - params.g_dc * state.v_dc - i_x) / params.c_dc;
    d.i_s_dot = (v_s - params.r_f * state.i_s - state.v) / params.l_f;
    d.v_dot = (state.i_s - i_grid) / params.c_f;
    return d;
}

}  // namespace gfcsim
