#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gfcsim/logging.hpp"
#include "gfcsim/scenario.hpp"

namespace gfcsim {

/// Non-finite value produced during integration.
class IntegrationFault : public std::runtime_error {
public:
    IntegrationFault(const std::string& msg, size_t index)
        : std::runtime_error(msg), state_index(index) {}
    size_t state_index;
};

using DerivFn = std::function<void(double t, const double* x, double* dx)>;

/// One classical fourth-order Runge-Kutta step. Throws IntegrationFault with
/// the offending state index if a stage derivative is non-finite.
std::vector<double> rk4_step(const DerivFn& f, const std::vector<double>& x,
                             double t, double dt);

/// Converter + controller + network states flattened into one ODE system
/// with a deterministic layout:
///   per GFC (scenario order): v_dc, i_s(2), v(2), i_tau_lag, p_f, q_f,
///     theta [, omega (VSG) | v_mag (dVOC)], integ_v(2), integ_i(2)
///   per SM: theta, omega_m, i(2)
///   per non-GFC bus (network order): v(2)
///   per branch (network order): i(2)
class FlatSystem {
public:
    explicit FlatSystem(const Scenario& s);

    size_t dim() const { return dim_; }
    std::vector<double> initial_state() const;

    /// Right-hand side; optionally fills the logging channel row.
    void deriv(double t, const double* x, double* dx,
               double* channel_row = nullptr) const;

    void apply(const LoadStepEvent& event);

    const std::vector<std::string>& channels() const { return channels_; }
    const Scenario& scenario() const { return scenario_; }

    struct GfcLayout {
        size_t base;
        int ctrl_states;  ///< 1 droop, 2 VSG/dVOC
        size_t size;      ///< 12 + ctrl_states
        size_t bus;       ///< network bus index of the terminal
    };
    const std::vector<GfcLayout>& gfc_layout() const { return gfc_layout_; }
    size_t sm_base(size_t i) const { return sm_base_ + 4 * i; }
    size_t bus_offset(size_t bus_index) const { return bus_off_[bus_index]; }

private:
    Scenario scenario_;
    size_t dim_{0};
    std::vector<GfcLayout> gfc_layout_;
    size_t sm_base_{0};
    size_t net_bus_base_{0};
    size_t branch_base_{0};
    std::vector<size_t> bus_off_;      ///< offset of each bus voltage in x
    std::vector<bool> bus_owned_;      ///< true if a GFC owns the bus state
    std::vector<double> c_net_;        ///< network-side bus capacitance
    std::vector<Vec2> y_load_;         ///< runtime load admittance per bus
    std::vector<int> branch_from_, branch_to_;
    std::vector<double> branch_l_;
    std::vector<std::string> channels_;
    mutable std::vector<Vec2> inj_;    ///< scratch: per-bus current injections
};

struct CollapseReport {
    bool collapsed{false};
    std::optional<double> t_collapse;
    double min_vdc{0.0};              ///< minimum v_dc / v_dc_ref over the run
    double saturation_duration{0.0};  ///< total time with |i_dc| at the limit [s]
};

/// Threshold semantics: collapsed when v_dc/v_dc_ref crosses below
/// v_threshold and does not recover above it by the end of the record.
CollapseReport detect_collapse(const std::vector<double>& time,
                               const std::vector<double>& v_dc_ratio,
                               double v_threshold,
                               const std::vector<double>& i_dc,
                               double i_dc_max);

struct SettlingMetrics {
    bool settled{false};
    double settling_time{0.0};  ///< from t_from to the last band exit
    double overshoot{0.0};      ///< max |x - target| for t >= t_from
    double final_value{0.0};
};

SettlingMetrics settling_metrics(const std::vector<double>& time,
                                 const std::vector<double>& series,
                                 double target, double band_pct, double t_from);

struct RunResult {
    WaveformLog log;
    std::vector<double> final_state;
    bool fault{false};
    std::string fault_reason;
    /// Per-GFC collapse reports, scenario device order.
    std::vector<std::pair<std::string, CollapseReport>> collapse;

    bool collapsed_any() const {
        for (const auto& [_, r] : collapse)
            if (r.collapsed) return true;
        return false;
    }
};

/// Integrates the scenario from flat start through the pre-roll and the
/// logged horizon, applying events at step boundaries. A non-finite state or
/// a non-positive DC-link voltage terminates the run early with the partial
/// log and fault status.
RunResult run(const Scenario& scenario);

}  // namespace gfcsim
