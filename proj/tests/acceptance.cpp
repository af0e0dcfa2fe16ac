// Acceptance suite: simulates the bundled nine-bus scenarios and checks the
// headline behaviors (ride-through, DC-link collapse, the DC-feedback fix,
// synchronization) plus numerical-method and limiter oracles. Prints one
// PASS/FAIL line per criterion; exit status 0 only if all ten pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "gfcsim/controllers.hpp"
#include "gfcsim/converter.hpp"
#include "gfcsim/engine.hpp"

using namespace gfcsim;

namespace {

struct CachedRun {
    Scenario scenario;
    RunResult result;
    double wall_seconds{0.0};
};

CachedRun simulate(const char* file, const OverrideList& overrides = {}) {
    CachedRun c;
    ProvenanceMap prov;
    c.scenario = parse_scenario_file(std::string(GFCSIM_SCENARIO_DIR "/") + file,
                                     overrides, prov);
    const auto t0 = std::chrono::steady_clock::now();
    c.result = run(c.scenario);
    c.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return c;
}

int g_failures = 0;

void report(int n, bool pass, const std::string& what) {
    std::printf("%s  criterion %2d: %s\n", pass ? "PASS" : "FAIL", n,
                what.c_str());
    if (!pass) ++g_failures;
}

double series_max(const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end());
}

/// Longest continuous interval with |i_dc| at the limit, starting at or after
/// t_from. Returns {duration, end_time_of_longest_run}.
std::pair<double, double> longest_saturation(const std::vector<double>& t,
                                             const std::vector<double>& i_dc,
                                             double limit, double t_from) {
    double best = 0.0, best_end = t_from, start = -1.0;
    const double eps = 1e-9;
    for (size_t k = 0; k < t.size(); ++k) {
        const bool sat = t[k] >= t_from && std::abs(i_dc[k]) >= limit - eps;
        if (sat && start < 0.0) start = t[k];
        if ((!sat || k + 1 == t.size()) && start >= 0.0) {
            const double end = sat ? t[k] : t[k - 1];
            if (end - start > best) {
                best = end - start;
                best_end = end;
            }
            start = -1.0;
        }
    }
    return {best, best_end};
}

}  // namespace

int main() {
    // One simulation per bundled scenario, shared across criteria.
    const CachedRun small = simulate("ieee9_vsg_small.json");
    const CachedRun collapse = simulate("ieee9_vsg_collapse.json");
    const CachedRun aclimit = simulate("ieee9_vsg_collapse_aclimit.json");
    const CachedRun fb_droop = simulate("ieee9_droop_feedback.json");
    const CachedRun fb_vsg = simulate("ieee9_vsg_feedback.json");
    const CachedRun fb_dvoc = simulate("ieee9_dvoc_feedback.json");
    const std::vector<const CachedRun*> all = {&small,    &collapse, &aclimit,
                                               &fb_droop, &fb_vsg,   &fb_dvoc};

    // ---- 1: small load step rides through ---------------------------------
    {
        const auto& s = small.scenario;
        const auto& r = small.result;
        bool pass = !r.fault && !r.collapsed_any();
        const double t_step = s.events.at(0).t_event;
        for (const auto& g : s.gfcs) {
            const auto t = r.log.time;
            const auto i_dc = r.log.series(g.name + ".i_dc");
            const auto v_dc = r.log.series(g.name + ".v_dc");
            // Last saturated sample after the step bounds the recovery time.
            double t_sat_exit = t_step;
            for (size_t k = 0; k < t.size(); ++k)
                if (t[k] >= t_step &&
                    std::abs(i_dc[k]) >= g.conv.i_dc_max - 1e-9)
                    t_sat_exit = t[k];
            pass = pass && (t_sat_exit - t_step <= 1.0);
            for (size_t k = 0; k < t.size(); ++k)
                if (t[k] >= 4.0)
                    pass = pass && std::abs(v_dc[k] - g.conv.v_dc_ref) <=
                                       0.02 * g.conv.v_dc_ref;
        }
        pass = pass && small.wall_seconds <= 60.0;
        report(1, pass,
               "0.78 p.u. load step: DC source desaturates within 1 s, v_dc "
               "within 2% by t=4 s, no collapse, run under the time budget");
    }

    // ---- 2: large load step collapses the DC link -------------------------
    {
        const auto& s = collapse.scenario;
        const auto& r = collapse.result;
        // Graceful termination: the runaway ends in the engine's early-stop
        // path (v_dc at zero) with an intact partial log, not an exception.
        bool pass = r.collapsed_any() && r.log.samples() > 100 &&
                    r.log.time.back() <= s.sim.t_end;
        const double t_step = s.events.at(0).t_event;
        for (const auto& g : s.gfcs) {
            const auto t = r.log.time;
            const auto i_dc = r.log.series(g.name + ".i_dc");
            const auto v_dc = r.log.series(g.name + ".v_dc");
            const auto [sat, sat_end] =
                longest_saturation(t, i_dc, g.conv.i_dc_max, t_step);
            pass = pass && sat >= 2.0;
            // While saturated, v_dc must fall monotonically (0.5% slack).
            bool crossed = false;
            for (size_t k = 1; k < t.size(); ++k) {
                const bool both_sat =
                    std::abs(i_dc[k - 1]) >= g.conv.i_dc_max - 1e-9 &&
                    std::abs(i_dc[k]) >= g.conv.i_dc_max - 1e-9;
                if (both_sat && t[k - 1] >= t_step && t[k] <= sat_end)
                    pass = pass && v_dc[k] <= v_dc[k - 1] * 1.005;
                if (v_dc[k] < s.sim.collapse_threshold * g.conv.v_dc_ref)
                    crossed = true;
            }
            pass = pass && crossed;
        }
        report(2, pass,
               "0.9 p.u. load step: DC source saturates for over 2 s, v_dc "
               "falls monotonically through the 0.7 threshold, collapse "
               "flagged, graceful termination");
    }

    // ---- 3: AC current limiting does not prevent the collapse -------------
    {
        const auto& r = aclimit.result;
        bool tight_ac = true;
        for (const auto& g : aclimit.scenario.gfcs)
            tight_ac = tight_ac && g.inner.i_ac_max == 1.2;
        report(3, tight_ac && r.collapsed_any(),
               "same step with a 1.2 p.u. AC current limit still collapses "
               "the DC link");
    }

    // ---- 4: DC-voltage feedback (alpha=0.5) rides through on all three ----
    {
        bool pass = true;
        for (const CachedRun* c : {&fb_droop, &fb_vsg, &fb_dvoc}) {
            const auto& s = c->scenario;
            const auto& r = c->result;
            pass = pass && !r.fault && !r.collapsed_any();
            const double t_step = s.events.at(0).t_event;
            std::vector<double> omega_final;
            for (const auto& g : s.gfcs) {
                const auto m =
                    settling_metrics(r.log.time, r.log.series(g.name + ".v_dc"),
                                     g.conv.v_dc_ref, 0.05, t_step);
                pass = pass && m.settled && m.settling_time <= 2.5;
                omega_final.push_back(
                    settling_metrics(r.log.time,
                                     r.log.series(g.name + ".omega"),
                                     g.outer.setpoints.omega_ref, 1.0, t_step)
                        .final_value);
            }
            // All GFC frequencies settle to within 0.5% of a common value.
            const double common =
                (omega_final[0] + omega_final[1]) / omega_final.size() * 1.0;
            for (const auto& g : s.gfcs) {
                const auto m = settling_metrics(r.log.time,
                                                r.log.series(g.name + ".omega"),
                                                common, 0.005, t_step);
                pass = pass && m.settled;
            }
        }
        report(4, pass,
               "droop, VSG and dVOC with half-weight DC feedback ride through "
               "the 0.9 p.u. step: v_dc settles in a 5% band within 2.5 s and "
               "the GFC frequencies agree to 0.5%");
    }

    // ---- 5: machine and converters synchronize; power balances ------------
    {
        const auto& s = fb_vsg.scenario;
        const auto& r = fb_vsg.result;
        const auto t = r.log.time;
        const std::vector<std::vector<double>> omegas = {
            r.log.series("gfc1.omega"), r.log.series("gfc2.omega"),
            r.log.series("sm1.omega")};
        const double w_ref = s.gfcs[0].outer.setpoints.omega_ref;
        double max_diff = 0.0;
        const double t_settle = t.back() - 2.0;
        for (size_t k = 0; k < t.size(); ++k) {
            if (t[k] < t_settle) continue;
            for (size_t a = 0; a < omegas.size(); ++a)
                for (size_t b = a + 1; b < omegas.size(); ++b)
                    max_diff = std::max(
                        max_diff, std::abs(omegas[a][k] - omegas[b][k]) / w_ref);
        }
        const auto p1 = r.log.series("gfc1.p");
        const auto p2 = r.log.series("gfc2.p");
        const auto pm = r.log.series("sm1.p");
        const auto pl = r.log.series("sys.p_load");
        const auto px = r.log.series("sys.p_loss");
        double max_residual = 0.0;
        for (size_t k = 0; k < t.size(); ++k) {
            if (t[k] < t_settle) continue;
            max_residual = std::max(
                max_residual, std::abs(p1[k] + p2[k] + pm[k] - pl[k] - px[k]));
        }
        report(5, max_diff < 1e-3 && max_residual < 1e-3,
               "after settling, pairwise frequency spread across SM and GFCs "
               "is below 1e-3 p.u. and generated power matches load plus "
               "losses to 1e-3 p.u.");
    }

    // ---- 6: alpha=1 reduces every feedback law to its conventional form ---
    {
        bool pass = true;
        std::mt19937 rng(202);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        Setpoints sp;
        sp.omega_ref = 100.0 * M_PI;
        sp.v_dc_ref = 3.4;
        for (int k = 0; k < 10000; ++k) {
            sp.p_ref = u(rng);
            sp.q_ref = u(rng);
            const double p = u(rng), q = u(rng);
            const double v_dc = 1.0 + std::abs(u(rng));
            const double v_dc_dot = u(rng);
            OuterControllerState st;
            st.omega = sp.omega_ref + u(rng);
            st.v_mag = 0.5 + std::abs(u(rng));

            OuterControllerConfig cfg;
            cfg.alpha = 1.0;
            cfg.setpoints = sp;

            const DroopParams dp{0.3};
            cfg.kind = dp;
            const double w_droop = sp.omega_ref + dp.d_omega * (sp.p_ref - p);
            pass = pass && std::abs(droop_update(st, p, v_dc, cfg).omega_out -
                                    w_droop) <= 1e-12 * std::abs(w_droop);

            const VsgParams vp{3e-5, 1e-3};
            cfg.kind = vp;
            const double a_vsg = (sp.p_ref - p) / (vp.j * sp.omega_ref) +
                                 (vp.d_p / vp.j) * (sp.omega_ref - st.omega);
            pass = pass &&
                   std::abs(vsg_update(st, p, v_dc, v_dc_dot, cfg).omega_dot -
                            a_vsg) <= 1e-12 * (std::abs(a_vsg) + 1.0);

            DvocParams op;
            op.eta = 0.5;
            op.mu = 2.0;
            op.phase_law = DvocPhaseLaw::consistent;
            cfg.kind = op;
            const double w_dvoc =
                sp.omega_ref + op.eta * (sp.p_ref / (sp.v_ref * sp.v_ref) -
                                         p / (st.v_mag * st.v_mag));
            pass = pass && std::abs(dvoc_update(st, p, q, v_dc, cfg).theta_dot -
                                    w_dvoc) <= 1e-12 * std::abs(w_dvoc);
        }
        report(6, pass,
               "with full weight on the conventional term all three feedback "
               "laws match their baseline controllers to 1e-12 over 10^4 "
               "random draws");
    }

    // ---- 7: limiters match brute-force oracles ----------------------------
    {
        bool pass = true;
        std::mt19937 rng(203);
        std::uniform_real_distribution<double> u(-4.0, 4.0);
        std::uniform_real_distribution<double> lim(0.1, 3.0);
        for (int k = 0; k < 100000; ++k) {
            double x = u(rng);
            double m = lim(rng);
            if (k % 1000 == 0) x = m;        // exercise the boundary exactly
            if (k % 1000 == 1) x = -m;
            pass = pass && saturate_dc_current(x, m) == std::clamp(x, -m, m);

            const Vec2 ref{u(rng), u(rng)};
            Vec2 meas{u(rng), u(rng)};
            const double imax = lim(rng);
            if (k % 1000 == 2 && meas.norm() > 0.0)
                meas = (imax / meas.norm()) * meas;  // boundary measurement
            const Vec2 out = ac_current_limit(ref, meas, imax);
            Vec2 want = ref;
            if (meas.norm() > imax)
                want = ref.norm() == 0.0 ? Vec2{} : (imax / ref.norm()) * ref;
            pass = pass && out.a == want.a && out.b == want.b;
        }
        report(7, pass,
               "DC clamp and AC current rescaling match independent oracles "
               "exactly over 10^5 random inputs including boundaries");
    }

    // ---- 8: switching stage power balance on every logged sample ----------
    {
        double worst = 0.0;
        for (const CachedRun* c : all)
            for (const auto& g : c->scenario.gfcs)
                worst = std::max(
                    worst, series_max(c->result.log.series(g.name + ".pbal_err")));
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2e", worst);
        report(8, worst < 1e-12,
               "per-sample switching-stage power mismatch below 1e-12 p.u. in "
               "every run (worst " + std::string(buf) + ")");
    }

    // ---- 9: integrator order and step-size robustness ----------------------
    {
        // Global convergence of the classical scheme on x' = -x over [0,1].
        // Measured in extended precision: at these step sizes the truncation
        // error (~1e-15) sits at the double round-off floor.
        auto global_error = [](long double dt) {
            long double x = 1.0L;
            const int n = static_cast<int>(std::llround(1.0L / dt));
            for (int k = 0; k < n; ++k) {
                const long double k1 = -x;
                const long double k2 = -(x + 0.5L * dt * k1);
                const long double k3 = -(x + 0.5L * dt * k2);
                const long double k4 = -(x + dt * k3);
                x += dt / 6.0L * (k1 + 2.0L * k2 + 2.0L * k3 + k4);
            }
            return std::abs(static_cast<double>(x - std::exp(-1.0L)));
        };
        const double e1 = global_error(1e-3L);
        const double e2 = global_error(5e-4L);
        const double e3 = global_error(2.5e-4L);
        bool pass = e1 / e2 > 12.8 && e1 / e2 < 19.2 && e2 / e3 > 12.8 &&
                    e2 / e3 < 19.2;

        // Halving the full-system step barely moves the trajectory away from
        // the switching instant of the load step.
        const CachedRun fine = simulate(
            "ieee9_vsg_small.json", {{"sim.dt", "1e-5"},
                                     {"sim.log_decimation", "100"}});
        const auto& a = small.result.log;
        const auto& b = fine.result.log;
        double max_diff = 0.0;
        if (a.samples() == b.samples() && a.channels == b.channels) {
            const double t_step = small.scenario.events.at(0).t_event;
            for (size_t k = 0; k < a.samples(); ++k) {
                if (std::abs(a.time[k] - t_step) < 0.02) continue;
                for (size_t c = 0; c < a.channels.size(); ++c) {
                    if (a.channels[c].rfind("sm1.delta", 0) == 0) continue;
                    const double scale =
                        a.channels[c].find("omega") != std::string::npos ||
                                a.channels[c].find("theta") != std::string::npos
                            ? 100.0 * M_PI
                            : 1.0;
                    max_diff = std::max(
                        max_diff, std::abs(a.at(k, c) - b.at(k, c)) / scale);
                }
            }
        } else {
            pass = false;
        }
        pass = pass && max_diff < 1e-4;
        report(9, pass,
               "RK4 shows fourth-order global convergence and halving the "
               "system step changes smooth-interval trajectories by less than "
               "1e-4 p.u.");
    }

    // ---- 10: a resolved record reproduces its run byte-for-byte ------------
    {
        bool pass = true;
        for (const CachedRun* c : {&small, &fb_vsg}) {
            ProvenanceMap prov;
            const nlohmann::json rec = resolved_record(c->scenario, prov);
            ProvenanceMap prov2;
            const Scenario s2 = parse_scenario(rec, ".", {}, prov2);
            const RunResult r2 = run(s2);
            pass = pass && to_csv(r2.log) == to_csv(c->result.log);
        }
        report(10, pass,
               "re-running scenarios from their resolved records reproduces "
               "the waveform CSV byte-identically");
    }

    if (g_failures == 0) {
        std::printf("all 10 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria failed\n", g_failures);
    return 1;
}
