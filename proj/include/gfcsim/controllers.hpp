#pragma once

#include <string>
#include <variant>

#include "gfcsim/common.hpp"

namespace gfcsim {

struct Setpoints {
    double p_ref{0.0};
    double q_ref{0.0};
    double v_ref{1.0};
    double omega_ref{2.0 * M_PI * 50.0};
    double v_dc_ref{1.0};

    void validate() const;
};

struct DroopParams {
    double d_omega{2.0 * M_PI * 0.05};  ///< droop gain [rad/s per p.u.]
};

struct VsgParams {
    double j{2e3};    ///< virtual inertia
    double d_p{1e5};  ///< damping coefficient
};

/// Which phase law the dVOC-with-feedback controller uses. The literal form
/// keeps the printed equation (rated term outside the blend); the consistent
/// form blends the full conventional output against the DC-voltage term, the
/// same shape as the droop and VSG feedback laws.
enum class DvocPhaseLaw { consistent, paper_literal };

struct DvocParams {
    double eta{0.021};
    double mu{6.66e4};
    double kappa{M_PI / 2.0};  ///< power-frame rotation angle; unused by the
                               ///< polar-form dynamics, kept for provenance
    DvocPhaseLaw phase_law{DvocPhaseLaw::consistent};
};

struct OuterControllerConfig {
    std::variant<DroopParams, VsgParams, DvocParams> kind{DroopParams{}};
    double alpha{0.5};  ///< feedback blend weight, 1 = conventional control
    Setpoints setpoints;

    void validate() const;
    bool is_droop() const { return std::holds_alternative<DroopParams>(kind); }
    bool is_vsg() const { return std::holds_alternative<VsgParams>(kind); }
    bool is_dvoc() const { return std::holds_alternative<DvocParams>(kind); }
};

struct OuterControllerState {
    double theta{0.0};  ///< phase angle [rad]
    double omega{0.0};  ///< frequency state [rad/s], VSG only
    double v_mag{1.0};  ///< voltage magnitude state [p.u.], dVOC only
};

struct DroopOutput {
    double theta_dot;
    double omega_out;
};

struct VsgOutput {
    double theta_dot;
    double omega_dot;
};

struct DvocOutput {
    double theta_dot;
    double v_mag_dot;
};

DroopOutput droop_update(const OuterControllerState& state, double p,
                         double v_dc, const OuterControllerConfig& cfg);

VsgOutput vsg_update(const OuterControllerState& state, double p, double v_dc,
                     double v_dc_dot, const OuterControllerConfig& cfg);

/// Throws ModelError if state.v_mag has degenerated to ~0.
DvocOutput dvoc_update(const OuterControllerState& state, double p, double q,
                       double v_dc, const OuterControllerConfig& cfg);

/// Maps the outer controller state to the alpha-beta voltage reference of the
/// inner loops: magnitude v* (droop/VSG) or the dVOC magnitude state.
Vec2 reference_voltage(const OuterControllerState& state,
                       const OuterControllerConfig& cfg);

/// AC current limiter: passes the reference through while the measured
/// current magnitude is within the limit, otherwise rescales the reference to
/// magnitude i_ac_max (zero vector if the reference itself is zero).
Vec2 ac_current_limit(Vec2 i_ref_dq, Vec2 i_meas_dq, double i_ac_max);

struct InnerLoopConfig {
    double kp_v{0.001};
    double ki_v{0.5};
    double kp_i{1.0};
    double ki_i{10.0};
    double i_ac_max{1.2};
    bool decoupling{true};
    double l_decouple{4.77e-4};  ///< filter inductance for the omega-L cross term
    double c_decouple{1.6e-4};   ///< filter capacitance for the omega-C cross term

    void validate() const;
};

/// PI integrator states of the cascaded loops, in the dq frame.
struct InnerLoopState {
    Vec2 integ_v;  ///< voltage-loop integrator
    Vec2 integ_i;  ///< current-loop integrator
};

struct InnerLoopMeasurements {
    Vec2 v_ab;       ///< filter-capacitor voltage
    Vec2 i_s_ab;     ///< switch-side current
    Vec2 i_grid_ab;  ///< grid-side output current (feedforward)
    double v_dc{1.0};
    double theta{0.0};  ///< dq frame angle
};

struct InnerLoopResult {
    Vec2 m_ab;          ///< modulation command, norm clamped to 1
    Vec2 integ_v_dot;   ///< voltage-loop integrator derivative (anti-windup applied)
    Vec2 integ_i_dot;   ///< current-loop integrator derivative
    Vec2 i_ref_limited; ///< current reference after the AC limiter, dq
    bool v_loop_limited{false};
    bool m_clamped{false};
};

/// Pure evaluation of the cascaded voltage/current loops. Integrator
/// derivatives come back with conditional-integration anti-windup applied;
/// the caller integrates them (the engine folds them into the global ODE).
InnerLoopResult inner_loop_eval(Vec2 v_ref_ab, const InnerLoopMeasurements& meas,
                                const InnerLoopState& state,
                                const InnerLoopConfig& cfg, double omega);

/// Convenience discrete step: evaluates the loops and advances the integrator
/// states by forward Euler over dt. Returns the modulation command.
Vec2 inner_loops_step(Vec2 v_ref_ab, const InnerLoopMeasurements& meas,
                      InnerLoopState& state, const InnerLoopConfig& cfg,
                      double omega, double dt);

/// Instantaneous power under amplitude-invariant scaling: p = v.i,
/// q = v_b*i_a - v_a*i_b (positive q = inductive load absorbed).
inline double instantaneous_p(Vec2 v, Vec2 i) { return dot(v, i); }
inline double instantaneous_q(Vec2 v, Vec2 i) { return v.b * i.a - v.a * i.b; }

/// First-order low-pass power measurement.
struct PowerFilter {
    double p{0.0};
    double q{0.0};

    /// Advance by one exact exponential step; omega_f = infinity (or <= 0 dt
    /// product overflow) returns the instantaneous values.
    void step(Vec2 v_ab, Vec2 i_ab, double omega_f, double dt);
};

}  // namespace gfcsim
