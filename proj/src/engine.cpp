#include "gfcsim/engine.hpp"

#include <cmath>
#include <complex>

#include "gfcsim/transforms.hpp"

namespace gfcsim {

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
    for (size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw IntegrationFault(std::string(what) + " non-finite at state index " +
                                       std::to_string(i),
                                   i);
}

/// Core RK4 update into `out`; k1..k4 and xt are caller-provided scratch.
template <typename F>
void rk4_core(const F& f, const std::vector<double>& x, double t, double dt,
              std::vector<double>& out, std::vector<double>& k1,
              std::vector<double>& k2, std::vector<double>& k3,
              std::vector<double>& k4, std::vector<double>& xt) {
    const size_t n = x.size();
    f(t, x.data(), k1.data());
    for (size_t i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * dt * k1[i];
    f(t + 0.5 * dt, xt.data(), k2.data());
    for (size_t i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * dt * k2[i];
    f(t + 0.5 * dt, xt.data(), k3.data());
    for (size_t i = 0; i < n; ++i) xt[i] = x[i] + dt * k3[i];
    f(t + dt, xt.data(), k4.data());
    for (size_t i = 0; i < n; ++i)
        out[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

std::vector<double> rk4_step(const DerivFn& f, const std::vector<double>& x,
                             double t, double dt) {
    const size_t n = x.size();
    std::vector<double> out(n), k1(n), k2(n), k3(n), k4(n), xt(n);
    rk4_core(f, x, t, dt, out, k1, k2, k3, k4, xt);
    check_finite(out, "rk4 step");
    return out;
}

FlatSystem::FlatSystem(const Scenario& s) : scenario_(s) {
    scenario_.validate();
    const auto& net = scenario_.network;
    const size_t nb = net.buses.size();

    bus_owned_.assign(nb, false);
    size_t off = 0;
    for (const auto& g : scenario_.gfcs) {
        GfcLayout lay;
        lay.base = off;
        lay.ctrl_states = g.outer.is_droop() ? 1 : 2;
        lay.size = 12 + static_cast<size_t>(lay.ctrl_states);
        lay.bus = static_cast<size_t>(net.bus_index(g.bus));
        if (bus_owned_[lay.bus])
            throw ConfigError("bus '" + g.bus + "' hosts more than one GFC");
        bus_owned_[lay.bus] = true;
        gfc_layout_.push_back(lay);
        off += lay.size;
    }
    sm_base_ = off;
    off += 4 * scenario_.sms.size();
    net_bus_base_ = off;

    bus_off_.assign(nb, 0);
    for (size_t g = 0; g < gfc_layout_.size(); ++g)
        bus_off_[gfc_layout_[g].bus] = gfc_layout_[g].base + 3;
    for (size_t b = 0; b < nb; ++b) {
        if (bus_owned_[b]) continue;
        bus_off_[b] = off;
        off += 2;
    }
    branch_base_ = off;
    for (const auto& br : net.branches) {
        branch_from_.push_back(net.bus_index(br.from));
        branch_to_.push_back(net.bus_index(br.to));
        branch_l_.push_back(br.x / net.omega_b);
        off += 2;
    }
    dim_ = off;

    c_net_ = net.bus_capacitance();
    for (size_t b = 0; b < nb; ++b)
        if (!bus_owned_[b] && !(c_net_[b] > 0.0))
            throw ConfigError("bus '" + net.buses[b].id +
                              "' has no capacitance (add shunt_b or line charging)");
    y_load_ = net.load_admittance();
    inj_.assign(nb, Vec2{});

    for (const auto& g : scenario_.gfcs)
        for (const char* c : {"v_dc", "i_dc", "i_demand", "omega", "p", "q",
                              "v_mag", "m_mag", "pbal_err"})
            channels_.push_back(g.name + "." + c);
    for (const auto& m : scenario_.sms)
        for (const char* c : {"omega", "p", "delta"})
            channels_.push_back(m.name + "." + c);
    for (const auto& b : net.buses) channels_.push_back(b.id + ".v_mag");
    channels_.push_back("sys.p_load");
    channels_.push_back("sys.p_loss");
}

std::vector<double> FlatSystem::initial_state() const {
    using cx = std::complex<double>;
    const auto& net = scenario_.network;
    const double w = scenario_.bases.omega;
    const size_t nb = net.buses.size();
    const cx jw(0.0, w);

    // Sinusoidal steady-state phasor solve at t = 0: GFC terminals are fixed
    // voltage sources at v_ref∠0, each SM a Norton source behind j x_t, loads
    // and bus capacitances admittances. This starts the integration on (or
    // very near) the rotating steady state; the pre-roll absorbs the residual
    // (SM rotor angle, PI integrator offsets, DC source operating point).
    std::vector<cx> v_fix(nb);
    std::vector<bool> fixed(nb, false);
    for (size_t g = 0; g < gfc_layout_.size(); ++g) {
        fixed[gfc_layout_[g].bus] = true;
        v_fix[gfc_layout_[g].bus] = cx(scenario_.gfcs[g].outer.setpoints.v_ref, 0.0);
    }

    std::vector<cx> y_sh(nb);   // shunt admittance: load + network capacitance
    std::vector<cx> i_src(nb);  // fixed current injections (SM Norton sources)
    for (size_t b = 0; b < nb; ++b)
        y_sh[b] = cx(y_load_[b].a, -y_load_[b].b) + jw * c_net_[b];
    for (const auto& mc : scenario_.sms) {
        const size_t b = static_cast<size_t>(net.bus_index(mc.bus));
        const cx y = 1.0 / cx(mc.sm.r_s, mc.sm.x_t);
        y_sh[b] += y;
        i_src[b] += y * cx(mc.sm.e_mag, 0.0);
    }

    // Nodal equations over the unfixed buses: y_sh V - branch injections = i_src.
    std::vector<int> idx(nb, -1);
    size_t nu = 0;
    for (size_t b = 0; b < nb; ++b)
        if (!fixed[b]) idx[b] = static_cast<int>(nu++);
    std::vector<cx> A(nu * nu), rhs(nu);
    auto add = [&](size_t row_bus, size_t col_bus, cx y) {
        if (fixed[row_bus]) return;
        const size_t r = static_cast<size_t>(idx[row_bus]);
        if (fixed[col_bus])
            rhs[r] -= y * v_fix[col_bus];
        else
            A[r * nu + static_cast<size_t>(idx[col_bus])] += y;
    };
    for (size_t b = 0; b < nb; ++b) {
        add(b, b, y_sh[b]);
        if (!fixed[b]) rhs[static_cast<size_t>(idx[b])] += i_src[b];
    }
    std::vector<cx> y_br(net.branches.size());
    for (size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        const size_t f = static_cast<size_t>(branch_from_[k]);
        const size_t t = static_cast<size_t>(branch_to_[k]);
        const cx y = 1.0 / cx(br.r, br.x);
        y_br[k] = y;
        const double n = br.ratio;
        add(t, t, y);
        add(t, f, -y / n);
        add(f, f, y / (n * n));
        add(f, t, -y / n);
    }

    // Gaussian elimination with partial pivoting (<= a few dozen buses).
    std::vector<cx> sol(nu);
    {
        std::vector<cx> M = A, b = rhs;
        for (size_t c = 0; c < nu; ++c) {
            size_t piv = c;
            for (size_t r = c + 1; r < nu; ++r)
                if (std::abs(M[r * nu + c]) > std::abs(M[piv * nu + c])) piv = r;
            if (std::abs(M[piv * nu + c]) < 1e-14)
                throw ModelError("singular network in steady-state initialization");
            if (piv != c) {
                for (size_t j = c; j < nu; ++j)
                    std::swap(M[c * nu + j], M[piv * nu + j]);
                std::swap(b[c], b[piv]);
            }
            for (size_t r = c + 1; r < nu; ++r) {
                const cx f = M[r * nu + c] / M[c * nu + c];
                if (f == cx(0.0, 0.0)) continue;
                for (size_t j = c; j < nu; ++j) M[r * nu + j] -= f * M[c * nu + j];
                b[r] -= f * b[c];
            }
        }
        for (size_t c = nu; c-- > 0;) {
            cx acc = b[c];
            for (size_t j = c + 1; j < nu; ++j) acc -= M[c * nu + j] * sol[j];
            sol[c] = acc / M[c * nu + c];
        }
    }
    std::vector<cx> v_bus(nb);
    for (size_t b = 0; b < nb; ++b)
        v_bus[b] = fixed[b] ? v_fix[b] : sol[static_cast<size_t>(idx[b])];

    std::vector<double> x(dim_, 0.0);
    std::vector<cx> i_br(net.branches.size());
    std::vector<cx> inj(nb);
    for (size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        const size_t f = static_cast<size_t>(branch_from_[k]);
        const size_t t = static_cast<size_t>(branch_to_[k]);
        i_br[k] = (v_bus[f] / br.ratio - v_bus[t]) * y_br[k];
        x[branch_base_ + 2 * k] = i_br[k].real();
        x[branch_base_ + 2 * k + 1] = i_br[k].imag();
        inj[t] += i_br[k];
        inj[f] -= i_br[k] / br.ratio;
    }
    for (size_t b = 0; b < nb; ++b) {
        inj[b] -= cx(y_load_[b].a, -y_load_[b].b) * v_bus[b];
        if (!bus_owned_[b]) {
            x[bus_off_[b] + 0] = v_bus[b].real();
            x[bus_off_[b] + 1] = v_bus[b].imag();
        }
    }

    for (size_t g = 0; g < gfc_layout_.size(); ++g) {
        const auto& lay = gfc_layout_[g];
        const auto& cfg = scenario_.gfcs[g];
        const size_t o = lay.base;
        const cx v = v_bus[lay.bus];
        const cx i_grid = -inj[lay.bus];
        const double c_tot = cfg.conv.c_f + c_net_[lay.bus];
        const cx i_s = jw * c_tot * v - inj[lay.bus];
        const cx v_s = v + cx(cfg.conv.r_f, w * cfg.conv.l_f) * i_s;
        const double p0 = (v * std::conj(i_grid)).real();
        const double q0 = (v * std::conj(i_grid)).imag();
        const double i_x = (v_s * std::conj(i_s)).real() / cfg.conv.v_dc_ref;

        x[o + 0] = cfg.conv.v_dc_ref;
        x[o + 1] = i_s.real();
        x[o + 2] = i_s.imag();
        x[o + 3] = v.real();
        x[o + 4] = v.imag();
        x[o + 5] = i_x;  // lag state at its equilibrium draw
        x[o + 6] = p0;
        x[o + 7] = q0;
        x[o + 8] = 0.0;  // theta; v_ref phasor fixed at angle 0
        if (cfg.outer.is_vsg()) x[o + 9] = cfg.outer.setpoints.omega_ref;
        if (cfg.outer.is_dvoc()) x[o + 9] = cfg.outer.setpoints.v_ref;

        // PI integrators at their steady outputs (theta = 0 makes dq = ab).
        const Vec2 v_ab{v.real(), v.imag()};
        const Vec2 is_ab{i_s.real(), i_s.imag()};
        const Vec2 ig_ab{i_grid.real(), i_grid.imag()};
        Vec2 integ_v = is_ab - ig_ab;
        Vec2 integ_i = Vec2{v_s.real(), v_s.imag()} - v_ab;
        if (cfg.inner.decoupling) {
            integ_v -= w * cfg.inner.c_decouple * rot90(v_ab);
            integ_i -= w * cfg.inner.l_decouple * rot90(is_ab);
        }
        x[o + lay.size - 4] = integ_v.a;
        x[o + lay.size - 3] = integ_v.b;
        x[o + lay.size - 2] = integ_i.a;
        x[o + lay.size - 1] = integ_i.b;
    }
    for (size_t m = 0; m < scenario_.sms.size(); ++m) {
        const auto& mc = scenario_.sms[m];
        const size_t b = static_cast<size_t>(net.bus_index(mc.bus));
        const cx i_sm = (cx(mc.sm.e_mag, 0.0) - v_bus[b]) / cx(mc.sm.r_s, mc.sm.x_t);
        x[sm_base_ + 4 * m + 0] = 0.0;  // Norton source angle used in the solve
        x[sm_base_ + 4 * m + 1] = scenario_.bases.omega;
        x[sm_base_ + 4 * m + 2] = i_sm.real();
        x[sm_base_ + 4 * m + 3] = i_sm.imag();
    }
    return x;
}

void FlatSystem::apply(const LoadStepEvent& event) {
    apply_event(scenario_.network, event);
    y_load_ = scenario_.network.load_admittance();
}

void FlatSystem::deriv(double t, const double* x, double* dx,
                       double* row) const {
    const auto& net = scenario_.network;
    const size_t nb = net.buses.size();
    auto bus_v = [&](size_t b) { return Vec2{x[bus_off_[b]], x[bus_off_[b] + 1]}; };

    for (size_t b = 0; b < nb; ++b) inj_[b] = Vec2{};

    // Branch dynamics and current flows.
    double p_loss = 0.0;
    for (size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        const size_t f = static_cast<size_t>(branch_from_[k]);
        const size_t to = static_cast<size_t>(branch_to_[k]);
        const Vec2 i{x[branch_base_ + 2 * k], x[branch_base_ + 2 * k + 1]};
        const Vec2 di = (bus_v(f) / br.ratio - bus_v(to) - br.r * i) / branch_l_[k];
        dx[branch_base_ + 2 * k] = di.a;
        dx[branch_base_ + 2 * k + 1] = di.b;
        inj_[f] -= i / br.ratio;
        inj_[to] += i;
        if (row) p_loss += br.r * i.norm2();
    }

    // Synchronous machines.
    for (size_t m = 0; m < scenario_.sms.size(); ++m) {
        const auto& cfg = scenario_.sms[m];
        const size_t b = static_cast<size_t>(net.bus_index(cfg.bus));
        const size_t o = sm_base_ + 4 * m;
        SmState st{x[o], x[o + 1], {x[o + 2], x[o + 3]}};
        const SmDerivs d = sm_derivatives(cfg.sm, st, bus_v(b),
                                          scenario_.bases.omega, net.omega_b);
        dx[o + 0] = d.theta_dot;
        dx[o + 1] = d.omega_dot;
        dx[o + 2] = d.i_dot.a;
        dx[o + 3] = d.i_dot.b;
        inj_[b] += st.i;
        if (row) {
            const size_t base = gfc_layout_.size() * 9 + 3 * m;
            row[base + 0] = st.omega_m;
            row[base + 1] = dot(bus_v(b), st.i);  // terminal active power
            row[base + 2] = std::remainder(st.theta - scenario_.bases.omega * t,
                                           2.0 * M_PI);
        }
    }

    // Bus residuals: injections minus constant-impedance load current.
    double p_load = 0.0;
    for (size_t b = 0; b < nb; ++b) {
        const Vec2 v = bus_v(b);
        inj_[b] -= y_load_[b].a * v - y_load_[b].b * rot90(v);
        if (row) p_load += y_load_[b].a * v.norm2();
    }

    // Grid-forming converters.
    for (size_t g = 0; g < gfc_layout_.size(); ++g) {
        const auto& lay = gfc_layout_[g];
        const auto& cfg = scenario_.gfcs[g];
        const size_t o = lay.base;
        const double v_dc = x[o + 0];
        const Vec2 i_s{x[o + 1], x[o + 2]};
        const Vec2 v{x[o + 3], x[o + 4]};
        const double lag = x[o + 5];
        const double p_f = x[o + 6];
        const double q_f = x[o + 7];
        OuterControllerState ctrl;
        ctrl.theta = x[o + 8];
        if (cfg.outer.is_vsg()) ctrl.omega = x[o + 9];
        if (cfg.outer.is_dvoc()) ctrl.v_mag = x[o + 9];
        InnerLoopState il{{x[o + lay.size - 4], x[o + lay.size - 3]},
                          {x[o + lay.size - 2], x[o + lay.size - 1]}};

        // Outer synchronization controller (VSG omega_dot comes later; it
        // needs the analytic DC-voltage derivative).
        double theta_dot = 0.0, omega = 0.0, v_mag_dot = 0.0;
        if (cfg.outer.is_droop()) {
            const DroopOutput out = droop_update(ctrl, p_f, v_dc, cfg.outer);
            theta_dot = out.theta_dot;
            omega = out.omega_out;
        } else if (cfg.outer.is_vsg()) {
            theta_dot = ctrl.omega;
            omega = ctrl.omega;
        } else {
            const DvocOutput out = dvoc_update(ctrl, p_f, q_f, v_dc, cfg.outer);
            theta_dot = out.theta_dot;
            v_mag_dot = out.v_mag_dot;
            omega = out.theta_dot;
        }

        const Vec2 i_grid = Vec2{} - inj_[lay.bus];  // current drawn by the network
        InnerLoopMeasurements meas{v, i_s, i_grid, v_dc, ctrl.theta};
        const Vec2 v_ref = reference_voltage(ctrl, cfg.outer);
        const InnerLoopResult ilr =
            inner_loop_eval(v_ref, meas, il, cfg.inner, omega);

        const double i_x = switch_current(ilr.m_ab, i_s);
        const Vec2 v_s = switch_voltage(ilr.m_ab, v_dc);
        const double raw = raw_dc_demand(v_dc, p_f, cfg.conv);
        double i_tau, lag_dot;
        if (cfg.conv.tau_dc > 0.0) {
            i_tau = lag;
            lag_dot = (raw - lag) / cfg.conv.tau_dc;
        } else {
            i_tau = raw;
            lag_dot = 0.0;
        }
        const double i_dc = saturate_dc_current(i_tau, cfg.conv.i_dc_max);
        const double v_dc_dot = (i_dc - cfg.conv.g_dc * v_dc - i_x) / cfg.conv.c_dc;
        const Vec2 i_s_dot = (v_s - cfg.conv.r_f * i_s - v) / cfg.conv.l_f;
        const Vec2 v_dot = (i_s + inj_[lay.bus]) / (cfg.conv.c_f + c_net_[lay.bus]);

        const double p_inst = instantaneous_p(v, i_grid);
        const double q_inst = instantaneous_q(v, i_grid);
        const double wf = scenario_.sim.power_filter_omega;

        dx[o + 0] = v_dc_dot;
        dx[o + 1] = i_s_dot.a;
        dx[o + 2] = i_s_dot.b;
        dx[o + 3] = v_dot.a;
        dx[o + 4] = v_dot.b;
        dx[o + 5] = lag_dot;
        dx[o + 6] = wf * (p_inst - p_f);
        dx[o + 7] = wf * (q_inst - q_f);
        dx[o + 8] = theta_dot;
        if (cfg.outer.is_vsg()) {
            dx[o + 9] =
                vsg_update(ctrl, p_f, v_dc, v_dc_dot, cfg.outer).omega_dot;
        } else if (cfg.outer.is_dvoc()) {
            dx[o + 9] = v_mag_dot;
        }
        dx[o + lay.size - 4] = ilr.integ_v_dot.a;
        dx[o + lay.size - 3] = ilr.integ_v_dot.b;
        dx[o + lay.size - 2] = ilr.integ_i_dot.a;
        dx[o + lay.size - 1] = ilr.integ_i_dot.b;

        if (row) {
            const size_t base = 9 * g;
            row[base + 0] = v_dc;
            row[base + 1] = i_dc;
            row[base + 2] = i_tau;
            row[base + 3] = omega;
            row[base + 4] = p_f;
            row[base + 5] = q_f;
            row[base + 6] = v.norm();
            row[base + 7] = ilr.m_ab.norm();
            row[base + 8] = v_dc * i_x - dot(v_s, i_s);
        }
    }

    // Remaining (pure network) bus voltages.
    for (size_t b = 0; b < nb; ++b) {
        if (bus_owned_[b]) continue;
        dx[bus_off_[b] + 0] = inj_[b].a / c_net_[b];
        dx[bus_off_[b] + 1] = inj_[b].b / c_net_[b];
    }

    if (row) {
        const size_t base = 9 * gfc_layout_.size() + 3 * scenario_.sms.size();
        for (size_t b = 0; b < nb; ++b) row[base + b] = bus_v(b).norm();
        row[base + nb + 0] = p_load;
        row[base + nb + 1] = p_loss;
    }
}

CollapseReport detect_collapse(const std::vector<double>& time,
                               const std::vector<double>& v_dc_ratio,
                               double v_threshold,
                               const std::vector<double>& i_dc,
                               double i_dc_max) {
    CollapseReport rep;
    if (time.empty()) return rep;
    rep.min_vdc = v_dc_ratio[0];
    for (double v : v_dc_ratio) rep.min_vdc = std::min(rep.min_vdc, v);

    // First below-threshold sample after which the ratio never recovers.
    if (v_dc_ratio.back() < v_threshold) {
        size_t first = v_dc_ratio.size() - 1;
        while (first > 0 && v_dc_ratio[first - 1] < v_threshold) --first;
        rep.collapsed = true;
        rep.t_collapse = time[first];
    }

    const double eps = 1e-9 * std::max(1.0, i_dc_max);
    for (size_t k = 0; k + 1 < time.size(); ++k)
        if (std::abs(i_dc[k]) >= i_dc_max - eps)
            rep.saturation_duration += time[k + 1] - time[k];
    return rep;
}

SettlingMetrics settling_metrics(const std::vector<double>& time,
                                 const std::vector<double>& series,
                                 double target, double band_pct, double t_from) {
    SettlingMetrics m;
    const double band = band_pct * std::abs(target);
    bool any = false;
    double last_violation = t_from;
    bool last_sample_out = false;
    for (size_t k = 0; k < time.size(); ++k) {
        if (time[k] < t_from) continue;
        any = true;
        const double dev = std::abs(series[k] - target);
        m.overshoot = std::max(m.overshoot, dev);
        last_sample_out = dev > band;
        if (last_sample_out) last_violation = time[k];
    }
    if (!any) return m;
    m.final_value = series.back();
    m.settled = !last_sample_out;
    m.settling_time = m.settled ? std::max(0.0, last_violation - t_from) : 0.0;
    return m;
}

RunResult run(const Scenario& scenario) {
    FlatSystem sys(scenario);
    const double dt = scenario.sim.dt;
    const long n_pre = std::lround(scenario.sim.t_preroll / dt);
    const long n_steps = std::lround(scenario.sim.t_end / dt);
    const long decim = scenario.sim.log_decimation;

    RunResult res;
    res.log.channels = sys.channels();
    const size_t nch = res.log.channels.size();

    std::vector<double> x = sys.initial_state();
    const size_t n = x.size();
    std::vector<double> out(n), k1(n), k2(n), k3(n), k4(n), xt(n), row(nch);
    auto f = [&sys](double t, const double* xs, double* dxs) {
        sys.deriv(t, xs, dxs);
    };

    auto healthy = [&](const std::vector<double>& state, std::string& why) {
        for (size_t i = 0; i < n; ++i)
            if (!std::isfinite(state[i])) {
                why = "non-finite value at state index " + std::to_string(i);
                return false;
            }
        for (const auto& lay : sys.gfc_layout())
            if (state[lay.base] <= 0.0) {
                why = "DC-link voltage reached zero";
                return false;
            }
        return true;
    };

    auto log_sample = [&](double t, const std::vector<double>& state) {
        sys.deriv(t, state.data(), k1.data(), row.data());
        res.log.time.push_back(t);
        res.log.data.insert(res.log.data.end(), row.begin(), row.end());
    };

    // Pre-roll from flat start to a numerical steady state; not logged.
    for (long k = 0; k < n_pre; ++k) {
        const double t = (k - n_pre) * dt;
        rk4_core(f, x, t, dt, out, k1, k2, k3, k4, xt);
        x.swap(out);
        std::string why;
        if (!healthy(x, why)) {
            res.fault = true;
            res.fault_reason = "pre-roll: " + why;
            res.final_state = x;
            return res;
        }
    }

    // Events snap to the nearest step boundary.
    std::vector<std::pair<long, const LoadStepEvent*>> events;
    for (const auto& e : scenario.events) {
        long ke = std::lround(e.t_event / dt);
        if (ke <= n_steps) events.emplace_back(ke, &e);
    }
    size_t next_event = 0;

    while (next_event < events.size() && events[next_event].first == 0)
        sys.apply(*events[next_event++].second);
    log_sample(0.0, x);

    for (long k = 0; k < n_steps; ++k) {
        while (next_event < events.size() && events[next_event].first == k)
            sys.apply(*events[next_event++].second);
        const double t = k * dt;
        rk4_core(f, x, t, dt, out, k1, k2, k3, k4, xt);
        x.swap(out);
        std::string why;
        if (!healthy(x, why)) {
            res.fault = true;
            res.fault_reason = why;
            break;
        }
        if ((k + 1) % decim == 0) log_sample((k + 1) * dt, x);
    }
    res.final_state = x;

    for (size_t g = 0; g < scenario.gfcs.size(); ++g) {
        const auto& cfg = scenario.gfcs[g];
        auto v_dc = res.log.series(cfg.name + ".v_dc");
        for (auto& v : v_dc) v /= cfg.conv.v_dc_ref;
        const auto i_dc = res.log.series(cfg.name + ".i_dc");
        res.collapse.emplace_back(
            cfg.name, detect_collapse(res.log.time, v_dc,
                                      scenario.sim.collapse_threshold, i_dc,
                                      cfg.conv.i_dc_max));
    }
    return res;
}

}  // namespace gfcsim
