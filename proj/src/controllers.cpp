#include "gfcsim/controllers.hpp"

#include <cmath>

#include "gfcsim/transforms.hpp"

namespace gfcsim {

void Setpoints::validate() const {
    if (!(omega_ref > 0)) throw ConfigError("setpoints: omega_ref must be > 0");
    if (!(v_ref > 0)) throw ConfigError("setpoints: v_ref must be > 0");
    if (!(v_dc_ref > 0)) throw ConfigError("setpoints: v_dc_ref must be > 0");
}

void OuterControllerConfig::validate() const {
    setpoints.validate();
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ConfigError("controller: alpha must be in [0,1]");
    if (const auto* d = std::get_if<DroopParams>(&kind)) {
        if (!(d->d_omega > 0)) throw ConfigError("droop: d_omega must be > 0");
    } else if (const auto* v = std::get_if<VsgParams>(&kind)) {
        if (!(v->j > 0)) throw ConfigError("vsg: j must be > 0");
        if (!(v->d_p > 0)) throw ConfigError("vsg: d_p must be > 0");
    } else if (const auto* o = std::get_if<DvocParams>(&kind)) {
        if (!(o->eta > 0)) throw ConfigError("dvoc: eta must be > 0");
        if (!(o->mu > 0)) throw ConfigError("dvoc: mu must be > 0");
    }
}

void InnerLoopConfig::validate() const {
    if (!(kp_v >= 0 && ki_v >= 0 && kp_i >= 0 && ki_i >= 0))
        throw ConfigError("inner loops: gains must be >= 0");
    if (!(i_ac_max > 0)) throw ConfigError("inner loops: i_ac_max must be > 0");
}

DroopOutput droop_update(const OuterControllerState&, double p, double v_dc,
                         const OuterControllerConfig& cfg) {
    const auto& d = std::get<DroopParams>(cfg.kind);
    const auto& sp = cfg.setpoints;
    const double conventional = sp.omega_ref + d.d_omega * (sp.p_ref - p);
    const double feedback = (v_dc / sp.v_dc_ref) * sp.omega_ref;
    const double omega = cfg.alpha * conventional + (1.0 - cfg.alpha) * feedback;
    return {omega, omega};
}

VsgOutput vsg_update(const OuterControllerState& state, double p, double v_dc,
                     double v_dc_dot, const OuterControllerConfig& cfg) {
    (void)v_dc;
    const auto& g = std::get<VsgParams>(cfg.kind);
    const auto& sp = cfg.setpoints;
    const double conventional = (sp.p_ref - p) / (g.j * sp.omega_ref) +
                                (g.d_p / g.j) * (sp.omega_ref - state.omega);
    const double feedback = (sp.omega_ref / sp.v_dc_ref) * v_dc_dot;
    const double omega_dot =
        cfg.alpha * conventional + (1.0 - cfg.alpha) * feedback;
    return {state.omega, omega_dot};
}

DvocOutput dvoc_update(const OuterControllerState& state, double p, double q,
                       double v_dc, const OuterControllerConfig& cfg) {
    const auto& o = std::get<DvocParams>(cfg.kind);
    const auto& sp = cfg.setpoints;
    const double vm = state.v_mag;
    if (!(vm > 1e-9))
        throw ModelError("dvoc: voltage magnitude state degenerated to zero");

    const double v_ref2 = sp.v_ref * sp.v_ref;
    const double vm2 = vm * vm;
    const double p_term = o.eta * (sp.p_ref / v_ref2 - p / vm2);
    const double feedback = (v_dc / sp.v_dc_ref) * sp.omega_ref;

    double theta_dot;
    if (o.phase_law == DvocPhaseLaw::consistent) {
        theta_dot = cfg.alpha * (sp.omega_ref + p_term) +
                    (1.0 - cfg.alpha) * feedback;
    } else {
        theta_dot = sp.omega_ref + cfg.alpha * p_term +
                    (1.0 - cfg.alpha) * feedback;
    }

    // The magnitude dynamics carry no DC feedback in either form.
    const double v_mag_dot = o.eta * (sp.q_ref / v_ref2 - q / vm2) * vm +
                             (o.eta * o.mu / v_ref2) * (v_ref2 - vm2) * vm;
    return {theta_dot, v_mag_dot};
}

Vec2 reference_voltage(const OuterControllerState& state,
                       const OuterControllerConfig& cfg) {
    const double mag = cfg.is_dvoc() ? state.v_mag : cfg.setpoints.v_ref;
    return {mag * std::cos(state.theta), mag * std::sin(state.theta)};
}

Vec2 ac_current_limit(Vec2 i_ref_dq, Vec2 i_meas_dq, double i_ac_max) {
    if (i_meas_dq.norm() <= i_ac_max) return i_ref_dq;
    const double ref_norm = i_ref_dq.norm();
    if (ref_norm == 0.0) return {0.0, 0.0};
    return (i_ac_max / ref_norm) * i_ref_dq;
}

InnerLoopResult inner_loop_eval(Vec2 v_ref_ab, const InnerLoopMeasurements& meas,
                                const InnerLoopState& state,
                                const InnerLoopConfig& cfg, double omega) {
    InnerLoopResult out;

    const Vec2 v_dq = park(meas.v_ab, meas.theta);
    const Vec2 i_s_dq = park(meas.i_s_ab, meas.theta);
    const Vec2 i_g_dq = park(meas.i_grid_ab, meas.theta);
    const Vec2 v_ref_dq = park(v_ref_ab, meas.theta);

    // Voltage loop: PI on the dq voltage error, grid current feedforward,
    // optional capacitor decoupling.
    const Vec2 v_err = v_ref_dq - v_dq;
    Vec2 i_ref = Vec2{cfg.kp_v * v_err.a, cfg.kp_v * v_err.b} + state.integ_v +
                 i_g_dq;
    // Capacitor current cross term I_c = j omega C V.
    if (cfg.decoupling) i_ref += omega * cfg.c_decouple * rot90(v_dq);

    const Vec2 i_ref_lim = ac_current_limit(i_ref, i_s_dq, cfg.i_ac_max);
    out.v_loop_limited = (i_ref_lim.a != i_ref.a) || (i_ref_lim.b != i_ref.b);
    out.i_ref_limited = i_ref_lim;

    // Current loop: PI plus voltage feedforward and inductor decoupling.
    const Vec2 i_err = i_ref_lim - i_s_dq;
    Vec2 v_cmd = Vec2{cfg.kp_i * i_err.a, cfg.kp_i * i_err.b} + state.integ_i +
                 v_dq;
    if (cfg.decoupling) v_cmd += omega * cfg.l_decouple * rot90(i_s_dq);

    // Modulation: m = 2 v_cmd / v_dc, norm clamped to 1.
    const double v_dc = std::max(meas.v_dc, 1e-9);
    Vec2 m_dq = (2.0 / v_dc) * v_cmd;
    const double m_norm = m_dq.norm();
    if (m_norm > 1.0) {
        m_dq = m_dq / m_norm;
        out.m_clamped = true;
    }
    out.m_ab = inverse_park(m_dq, meas.theta);

    // Conditional integration: freeze an integrator while its loop output is
    // saturated and the error would drive it further into saturation.
    const bool freeze_v = out.v_loop_limited && dot(v_err, i_ref) > 0.0;
    const bool freeze_i = out.m_clamped && dot(i_err, v_cmd) > 0.0;
    out.integ_v_dot = freeze_v ? Vec2{} : Vec2{cfg.ki_v * v_err.a, cfg.ki_v * v_err.b};
    out.integ_i_dot = freeze_i ? Vec2{} : Vec2{cfg.ki_i * i_err.a, cfg.ki_i * i_err.b};
    return out;
}

Vec2 inner_loops_step(Vec2 v_ref_ab, const InnerLoopMeasurements& meas,
                      InnerLoopState& state, const InnerLoopConfig& cfg,
                      double omega, double dt) {
    const InnerLoopResult r = inner_loop_eval(v_ref_ab, meas, state, cfg, omega);
    state.integ_v += dt * r.integ_v_dot;
    state.integ_i += dt * r.integ_i_dot;
    return r.m_ab;
}

void PowerFilter::step(Vec2 v_ab, Vec2 i_ab, double omega_f, double dt) {
    const double pi_inst = instantaneous_p(v_ab, i_ab);
    const double qi_inst = instantaneous_q(v_ab, i_ab);
    if (!std::isfinite(omega_f) || omega_f * dt > 700.0) {
        p = pi_inst;
        q = qi_inst;
        return;
    }
    const double a = 1.0 - std::exp(-omega_f * dt);
    p += a * (pi_inst - p);
    q += a * (qi_inst - q);
}

}  // namespace gfcsim
