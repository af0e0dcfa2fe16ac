#include <cmath>
#include <random>

#include <doctest.h>

#include "gfcsim/controllers.hpp"
#include "gfcsim/transforms.hpp"

using namespace gfcsim;

namespace {

OuterControllerConfig droop_cfg(double alpha) {
    OuterControllerConfig cfg;
    cfg.kind = DroopParams{2.0 * M_PI * 0.05};
    cfg.alpha = alpha;
    cfg.setpoints.omega_ref = 100.0 * M_PI;
    cfg.setpoints.v_dc_ref = 1.0;
    return cfg;
}

OuterControllerConfig vsg_cfg(double alpha) {
    OuterControllerConfig cfg;
    cfg.kind = VsgParams{3e-5, 1e-3};
    cfg.alpha = alpha;
    cfg.setpoints.omega_ref = 100.0 * M_PI;
    cfg.setpoints.v_dc_ref = 1.0;
    return cfg;
}

OuterControllerConfig dvoc_cfg(double alpha, DvocPhaseLaw law) {
    OuterControllerConfig cfg;
    DvocParams o;
    o.eta = 0.5;
    o.mu = 2.0;
    o.phase_law = law;
    cfg.kind = o;
    cfg.alpha = alpha;
    cfg.setpoints.omega_ref = 100.0 * M_PI;
    cfg.setpoints.v_dc_ref = 1.0;
    return cfg;
}

}  // namespace

TEST_CASE("droop examples") {
    OuterControllerState st;
    const double w0 = 100.0 * M_PI;

    // Conventional mode, one p.u. of power headroom lifts omega by d_omega.
    auto cfg = droop_cfg(1.0);
    cfg.setpoints.p_ref = 1.0;
    const auto out = droop_update(st, 0.0, 1.0, cfg);
    CHECK(out.omega_out == doctest::Approx(w0 + 0.1 * M_PI).epsilon(1e-14));
    CHECK(out.theta_dot == out.omega_out);

    // Half blend, 10% DC sag, power on setpoint: omega = 0.95 omega_ref.
    auto cfg2 = droop_cfg(0.5);
    const auto out2 = droop_update(st, 0.0, 0.9, cfg2);
    CHECK(out2.omega_out == doctest::Approx(0.95 * w0).epsilon(1e-14));
}

TEST_CASE("droop with alpha == 1 reduces to the conventional law") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    OuterControllerState st;
    auto cfg = droop_cfg(1.0);
    const auto& d = std::get<DroopParams>(cfg.kind);
    for (int k = 0; k < 10000; ++k) {
        const double p = u(rng);
        const double v_dc = 0.5 + std::abs(u(rng));  // must not matter
        cfg.setpoints.p_ref = u(rng);
        const double expect =
            cfg.setpoints.omega_ref + d.d_omega * (cfg.setpoints.p_ref - p);
        CHECK(std::abs(droop_update(st, p, v_dc, cfg).omega_out - expect) <= 1e-12);
    }
}

TEST_CASE("droop with a nominal DC link scales only the power gain") {
    // v_dc == v_dc_ref: omega = omega_ref + alpha d_omega (p_ref - p).
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    OuterControllerState st;
    for (int k = 0; k < 1000; ++k) {
        auto cfg = droop_cfg(u(rng));
        const auto& d = std::get<DroopParams>(cfg.kind);
        const double p = 2.0 * u(rng) - 1.0;
        const double expect =
            cfg.setpoints.omega_ref + cfg.alpha * d.d_omega * (0.0 - p);
        CHECK(droop_update(st, p, cfg.setpoints.v_dc_ref, cfg).omega_out ==
              doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("vsg examples") {
    OuterControllerState st;
    st.omega = 100.0 * M_PI;

    SUBCASE("theta integrates the internal frequency state") {
        const auto out = vsg_update(st, 0.0, 1.0, 0.0, vsg_cfg(0.7));
        CHECK(out.theta_dot == st.omega);
    }
    SUBCASE("pure feedback mode with a quiet DC link does not accelerate") {
        const auto out = vsg_update(st, 5.0, 0.4, 0.0, vsg_cfg(0.0));
        CHECK(out.omega_dot == 0.0);
    }
    SUBCASE("pure feedback mode tracks the DC-voltage slew") {
        auto cfg = vsg_cfg(0.0);
        const auto out = vsg_update(st, 5.0, 0.4, 0.1, cfg);
        CHECK(out.omega_dot ==
              doctest::Approx(cfg.setpoints.omega_ref * 0.1).epsilon(1e-13));
    }
}

TEST_CASE("vsg with alpha == 1 reduces to the swing law") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    auto cfg = vsg_cfg(1.0);
    const auto& g = std::get<VsgParams>(cfg.kind);
    const auto& sp = cfg.setpoints;
    for (int k = 0; k < 10000; ++k) {
        OuterControllerState st;
        st.omega = sp.omega_ref + u(rng);
        const double p = u(rng);
        const double expect = (sp.p_ref - p) / (g.j * sp.omega_ref) +
                              (g.d_p / g.j) * (sp.omega_ref - st.omega);
        const auto out = vsg_update(st, p, 0.5 + std::abs(u(rng)), u(rng), cfg);
        CHECK(std::abs(out.omega_dot - expect) <= 1e-9 * std::abs(expect) + 1e-9);
    }
}

TEST_CASE("dvoc at its setpoint is a rotating equilibrium") {
    OuterControllerState st;
    st.v_mag = 1.0;
    for (double alpha : {0.0, 0.3, 1.0}) {
        auto cfg = dvoc_cfg(alpha, DvocPhaseLaw::consistent);
        const auto out = dvoc_update(st, cfg.setpoints.p_ref,
                                     cfg.setpoints.q_ref,
                                     cfg.setpoints.v_dc_ref, cfg);
        CHECK(out.theta_dot == doctest::Approx(cfg.setpoints.omega_ref).epsilon(1e-14));
        CHECK(out.v_mag_dot == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("dvoc literal phase law keeps the rated term outside the blend") {
    OuterControllerState st;
    st.v_mag = 1.0;
    auto cfg = dvoc_cfg(0.25, DvocPhaseLaw::paper_literal);
    const auto out = dvoc_update(st, 0.0, 0.0, 1.0, cfg);
    // At the setpoint the power term vanishes and the feedback term is the
    // rated frequency, so the literal form gives (2 - alpha) omega_ref.
    CHECK(out.theta_dot ==
          doctest::Approx((2.0 - 0.25) * cfg.setpoints.omega_ref).epsilon(1e-13));
}

TEST_CASE("dvoc magnitude dynamics hand-evaluated example") {
    OuterControllerState st;
    st.v_mag = 1.1;
    auto cfg = dvoc_cfg(1.0, DvocPhaseLaw::consistent);
    const auto out = dvoc_update(st, 0.0, 0.1, 1.0, cfg);
    // eta (q*/v*^2 - q/vm^2) vm + (eta mu / v*^2)(v*^2 - vm^2) vm
    //   = 0.5 (0 - 0.1/1.21) 1.1 + 1.0 (1 - 1.21) 1.1 = -0.27645454...
    CHECK(out.v_mag_dot == doctest::Approx(-0.2764545454545455).epsilon(1e-12));
}

TEST_CASE("dvoc magnitude dynamics ignore alpha and the DC link") {
    OuterControllerState st;
    st.v_mag = 0.93;
    const auto ref = dvoc_update(st, 0.4, -0.2, 1.0,
                                 dvoc_cfg(1.0, DvocPhaseLaw::consistent));
    for (double alpha : {0.0, 0.5, 0.9}) {
        for (double v_dc : {0.3, 1.0, 2.5}) {
            const auto out = dvoc_update(st, 0.4, -0.2, v_dc,
                                         dvoc_cfg(alpha, DvocPhaseLaw::consistent));
            CHECK(out.v_mag_dot == ref.v_mag_dot);
        }
    }
}

TEST_CASE("dvoc alpha == 1 phase law reduction") {
    std::mt19937 rng(14);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto law : {DvocPhaseLaw::consistent, DvocPhaseLaw::paper_literal}) {
        auto cfg = dvoc_cfg(1.0, law);
        const auto& o = std::get<DvocParams>(cfg.kind);
        const auto& sp = cfg.setpoints;
        for (int k = 0; k < 10000; ++k) {
            OuterControllerState st;
            st.v_mag = 0.5 + std::abs(u(rng));
            const double p = u(rng);
            const double expect =
                sp.omega_ref + o.eta * (sp.p_ref / (sp.v_ref * sp.v_ref) -
                                        p / (st.v_mag * st.v_mag));
            const auto out = dvoc_update(st, p, u(rng), 0.5 + std::abs(u(rng)), cfg);
            CHECK(std::abs(out.theta_dot - expect) <= 1e-10);
        }
    }
}

TEST_CASE("dvoc rejects a degenerated magnitude state") {
    OuterControllerState st;
    st.v_mag = 0.0;
    CHECK_THROWS_AS(dvoc_update(st, 0.0, 0.0, 1.0,
                                dvoc_cfg(1.0, DvocPhaseLaw::consistent)),
                    ModelError);
}

TEST_CASE("reference voltage magnitude and angle") {
    OuterControllerState st;
    st.theta = M_PI / 2.0;
    st.v_mag = 0.8;
    auto dcfg = droop_cfg(1.0);
    dcfg.setpoints.v_ref = 1.02;
    const Vec2 vd = reference_voltage(st, dcfg);
    CHECK(vd.norm() == doctest::Approx(1.02).epsilon(1e-14));
    CHECK(vd.a == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(vd.b == doctest::Approx(1.02).epsilon(1e-14));
    // dVOC uses the magnitude state, not the setpoint.
    const Vec2 vo = reference_voltage(st, dvoc_cfg(0.5, DvocPhaseLaw::consistent));
    CHECK(vo.norm() == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("ac current limit examples") {
    // Within the limit the reference passes through untouched.
    const Vec2 pass = ac_current_limit({3.0, 4.0}, {0.5, 0.0}, 1.0);
    CHECK(pass.a == 3.0);
    CHECK(pass.b == 4.0);
    // Over the limit the reference is rescaled to magnitude i_ac_max.
    const Vec2 lim = ac_current_limit({3.0, 4.0}, {2.0, 0.0}, 1.0);
    CHECK(lim.a == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(lim.b == doctest::Approx(0.8).epsilon(1e-14));
    // Zero reference stays zero.
    const Vec2 z = ac_current_limit({0.0, 0.0}, {2.0, 0.0}, 1.0);
    CHECK(z.a == 0.0);
    CHECK(z.b == 0.0);
}

TEST_CASE("ac current limit properties against a brute-force oracle") {
    std::mt19937 rng(15);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    std::uniform_real_distribution<double> lim(0.1, 3.0);
    for (int k = 0; k < 100000; ++k) {
        const Vec2 ref{u(rng), u(rng)};
        const Vec2 meas{u(rng), u(rng)};
        const double imax = lim(rng);
        const Vec2 out = ac_current_limit(ref, meas, imax);
        if (meas.norm() <= imax) {
            CHECK(out.a == ref.a);
            CHECK(out.b == ref.b);
        } else {
            CHECK(out.norm() == doctest::Approx(ref.norm() == 0.0 ? 0.0 : imax)
                                    .epsilon(1e-12));
            // Direction of the reference is preserved.
            CHECK(std::abs(ref.a * out.b - ref.b * out.a) <= 1e-10);
            CHECK(dot(ref, out) >= 0.0);
            // Idempotent while the measurement stays saturated.
            const Vec2 again = ac_current_limit(out, meas, imax);
            CHECK(again.norm() == doctest::Approx(out.norm()).epsilon(1e-12));
        }
    }
}

TEST_CASE("clarke and park transform examples") {
    const Vec2 a = clarke({1.0, -0.5, -0.5});
    CHECK(a.a == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.b == doctest::Approx(0.0).epsilon(1e-14));

    // A balanced set of peak V maps to a vector of norm V (amplitude
    // invariant scaling).
    const double V = 1.7, th = 0.9;
    const Vec2 b = clarke({V * std::cos(th), V * std::cos(th - 2.0 * M_PI / 3.0),
                           V * std::cos(th + 2.0 * M_PI / 3.0)});
    CHECK(b.a == doctest::Approx(V * std::cos(th)).epsilon(1e-13));
    CHECK(b.b == doctest::Approx(V * std::sin(th)).epsilon(1e-13));

    const Vec2 p = park({0.0, 1.0}, M_PI / 2.0);
    CHECK(p.a == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.b == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("park round trip") {
    std::mt19937 rng(16);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> ang(-10.0, 10.0);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 v{u(rng), u(rng)};
        const double th = ang(rng);
        const Vec2 back = inverse_park(park(v, th), th);
        CHECK(std::abs(back.a - v.a) <= 1e-12);
        CHECK(std::abs(back.b - v.b) <= 1e-12);
    }
}

TEST_CASE("instantaneous power examples") {
    CHECK(instantaneous_p({1.0, 0.0}, {2.0, 5.0}) == 2.0);
    // Current lagging the voltage by 90 degrees is positive reactive power.
    CHECK(instantaneous_q({1.0, 0.0}, {0.0, -1.0}) == 1.0);
    CHECK(instantaneous_q({1.0, 0.0}, {3.0, 0.0}) == 0.0);
}

TEST_CASE("power filter exact exponential step and pass-through") {
    PowerFilter f;
    const Vec2 v{1.0, 0.0}, i{2.0, 0.0};
    const double wf = 100.0, dt = 1e-3;
    f.step(v, i, wf, dt);
    CHECK(f.p == doctest::Approx(2.0 * (1.0 - std::exp(-wf * dt))).epsilon(1e-13));
    for (int k = 0; k < 10000; ++k) f.step(v, i, wf, dt);
    CHECK(f.p == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.q == doctest::Approx(0.0).epsilon(1e-12));

    PowerFilter g;
    g.step(v, i, std::numeric_limits<double>::infinity(), dt);
    CHECK(g.p == 2.0);
}

namespace {

InnerLoopConfig inner_cfg() {
    InnerLoopConfig cfg;
    cfg.kp_v = 1.0;
    cfg.ki_v = 5.0;
    cfg.kp_i = 1.0;
    cfg.ki_i = 10.0;
    cfg.i_ac_max = 1.2;
    cfg.decoupling = false;
    return cfg;
}

}  // namespace

TEST_CASE("inner loops at zero error output the voltage feedforward") {
    const InnerLoopConfig cfg = inner_cfg();
    InnerLoopMeasurements meas;
    meas.v_ab = {1.0, 0.0};
    meas.i_s_ab = {0.0, 0.0};
    meas.i_grid_ab = {0.0, 0.0};
    meas.v_dc = 4.0;
    meas.theta = 0.0;
    const InnerLoopState st;
    const auto r = inner_loop_eval({1.0, 0.0}, meas, st, cfg, 100.0 * M_PI);
    CHECK(r.m_ab.a == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r.m_ab.b == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_FALSE(r.m_clamped);
    CHECK_FALSE(r.v_loop_limited);
    CHECK(r.integ_v_dot.a == 0.0);
    CHECK(r.integ_v_dot.b == 0.0);
    CHECK(r.integ_i_dot.a == 0.0);
    CHECK(r.integ_i_dot.b == 0.0);
}

TEST_CASE("inner loops clamp the modulation norm to one") {
    const InnerLoopConfig cfg = inner_cfg();
    InnerLoopMeasurements meas;
    meas.v_ab = {1.0, 0.0};
    meas.v_dc = 0.1;  // collapsed link forces the clamp
    const InnerLoopState st;
    const auto r = inner_loop_eval({1.0, 0.0}, meas, st, cfg, 100.0 * M_PI);
    CHECK(r.m_clamped);
    CHECK(r.m_ab.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inner loop current reference honors the AC limit") {
    const InnerLoopConfig cfg = inner_cfg();
    InnerLoopMeasurements meas;
    meas.v_ab = {0.2, 0.0};
    meas.i_s_ab = {5.0, 0.0};  // measured current far over the limit
    meas.v_dc = 4.0;
    const InnerLoopState st;
    const auto r = inner_loop_eval({1.0, 0.0}, meas, st, cfg, 100.0 * M_PI);
    CHECK(r.v_loop_limited);
    CHECK(r.i_ref_limited.norm() == doctest::Approx(cfg.i_ac_max).epsilon(1e-12));
}

TEST_CASE("inner loop integrators stay bounded under a saturating soak") {
    const InnerLoopConfig cfg = inner_cfg();
    InnerLoopState st;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double dt = 1e-4;
    double theta = 0.0;
    for (int k = 0; k < 1000000; ++k) {
        theta += 100.0 * M_PI * dt;
        InnerLoopMeasurements meas;
        // Persistent large error with a weak, saturated plant.
        meas.v_ab = inverse_park({0.2 + 0.05 * u(rng), 0.05 * u(rng)}, theta);
        meas.i_s_ab = inverse_park({1.3 + 0.1 * u(rng), 0.1 * u(rng)}, theta);
        meas.i_grid_ab = meas.i_s_ab;
        meas.v_dc = 0.5;
        meas.theta = theta;
        inner_loops_step(inverse_park({1.0, 0.0}, theta), meas, st, cfg,
                         100.0 * M_PI, dt);
        if (k % 1000 == 0) {
            CHECK(st.integ_v.norm() <= 100.0);
            CHECK(st.integ_i.norm() <= 100.0);
        }
    }
    CHECK(st.integ_v.norm() <= 100.0);
    CHECK(st.integ_i.norm() <= 100.0);
}

TEST_CASE("inner_loops_step advances the integrators by forward Euler") {
    const InnerLoopConfig cfg = inner_cfg();
    InnerLoopMeasurements meas;
    meas.v_ab = {0.9, 0.1};
    meas.i_s_ab = {0.2, -0.1};
    meas.i_grid_ab = {0.1, 0.0};
    meas.v_dc = 3.0;
    meas.theta = 0.3;
    InnerLoopState st;
    st.integ_v = {0.01, -0.02};
    st.integ_i = {0.05, 0.04};
    const auto r = inner_loop_eval({1.0, 0.0}, meas, st, cfg, 100.0 * M_PI);
    InnerLoopState st2 = st;
    const Vec2 m = inner_loops_step({1.0, 0.0}, meas, st2, cfg, 100.0 * M_PI, 1e-3);
    CHECK(m.a == r.m_ab.a);
    CHECK(m.b == r.m_ab.b);
    CHECK(st2.integ_v.a == doctest::Approx(st.integ_v.a + 1e-3 * r.integ_v_dot.a));
    CHECK(st2.integ_v.b == doctest::Approx(st.integ_v.b + 1e-3 * r.integ_v_dot.b));
    CHECK(st2.integ_i.a == doctest::Approx(st.integ_i.a + 1e-3 * r.integ_i_dot.a));
    CHECK(st2.integ_i.b == doctest::Approx(st.integ_i.b + 1e-3 * r.integ_i_dot.b));
}

TEST_CASE("controller config validation") {
    auto cfg = droop_cfg(0.5);
    CHECK_NOTHROW(cfg.validate());
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = vsg_cfg(0.5);
    std::get<VsgParams>(cfg.kind).j = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    InnerLoopConfig ic;
    ic.i_ac_max = 0.0;
    CHECK_THROWS_AS(ic.validate(), ConfigError);
}
