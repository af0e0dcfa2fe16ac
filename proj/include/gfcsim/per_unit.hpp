#pragma once

namespace gfcsim {

/// Conversions between SI quantities and the single system per-unit base.
/// All simulation-side values are per-unit; these helpers exist for entering
/// nameplate data and for labelling outputs.
struct PerUnitBase {
    double s_mva{100.0};
    double v_kv{230.0};

    double z_base_ohm() const { return v_kv * v_kv / s_mva; }
    double i_base_ka() const { return s_mva / v_kv; }

    double ohm_to_pu(double ohm) const { return ohm / z_base_ohm(); }
    double pu_to_ohm(double pu) const { return pu * z_base_ohm(); }
    double mw_to_pu(double mw) const { return mw / s_mva; }
    double pu_to_mw(double pu) const { return pu * s_mva; }
    double kv_to_pu(double kv) const { return kv / v_kv; }
    double pu_to_kv(double pu) const { return pu * v_kv; }
};

}  // namespace gfcsim
